// Command-line driver for the constant-scalar-curvature gluing experiments:
//   cscglue run <config.json>    one experiment
//   cscglue sweep <config.json>  expand list-valued parameters into a grid
#include "csc/runner.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Delaunay gluing numerics for constant positive scalar curvature"};
    app.require_subcommand(1);

    std::string config;
    csc::RunOptions opt;
    std::string outdir;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "JSON experiment configuration")->required();
        sub->add_option("--output-dir", outdir, "override the config's output directory");
        sub->add_option("--jobs", opt.jobs, "parallel workers for sweeps")->default_val(1);
        sub->add_flag("--verbose", opt.verbose, "progress on stderr");
    };
    CLI::App* run = app.add_subcommand("run", "execute one experiment");
    add_common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "execute a parameter sweep");
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);
    opt.output_dir = outdir;

    csc::RunStatus st;
    if (run->parsed())
        st = csc::run_experiment(config, opt);
    else
        st = csc::run_sweep(config, opt);
    return static_cast<int>(st);
}
