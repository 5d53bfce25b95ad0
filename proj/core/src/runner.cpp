#include "csc/runner.hpp"

#include "csc/contraction.hpp"
#include "csc/glue.hpp"
#include "csc/io.hpp"
#include "csc/jacobi.hpp"
#include "csc/linear_solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <future>
#include <iostream>
#include <map>
#include <set>

namespace csc {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown field '" + it.key() + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

struct Artifacts {
    std::map<std::string, std::string> files; // name -> content
    std::map<std::string, double> summary;    // flat numeric summary
};

std::vector<EndTail> parse_tails(const json& arr, const std::string& where) {
    std::vector<EndTail> tails;
    for (const auto& t : arr) {
        require_keys(t, {"k", "direction", "amplitude"}, where);
        EndTail et;
        et.k = t.at("k").get<int>();
        et.direction = get_or(t, "direction", +1);
        et.amplitude = t.at("amplitude").get<double>();
        tails.push_back(et);
    }
    return tails;
}

GlueConfig parse_glue_config(const json& p) {
    GlueConfig cfg;
    cfg.dim = Dimension(get_or(p, "n", 3));
    cfg.eps = get_or(p, "eps", 0.5);
    cfg.m = get_or(p, "m", 4);
    cfg.end1.eps = cfg.eps;
    cfg.end2.eps = cfg.eps;
    if (p.contains("tails1")) cfg.end1.tails = parse_tails(p.at("tails1"), "tails1");
    if (p.contains("tails2")) cfg.end2.tails = parse_tails(p.at("tails2"), "tails2");
    cfg.cutoff_width = get_or(p, "cutoff_width", 2.0);
    cfg.L_outer = get_or(p, "L_outer", 14.0);
    cfg.grid.nodes_per_unit = get_or(p, "nodes_per_unit", 25.0);
    cfg.grid.K = get_or(p, "K", 4);
    cfg.delta = get_or(p, "delta", 1.5);
    return cfg;
}

const std::set<std::string> glue_keys = {"n",     "eps",          "m",
                                         "tails1", "tails2",      "cutoff_width",
                                         "L_outer", "nodes_per_unit", "K",
                                         "delta"};

std::set<std::string> with_glue(std::set<std::string> extra) {
    extra.insert(glue_keys.begin(), glue_keys.end());
    return extra;
}

std::string field_csv(const CylinderField& f) {
    CsvBuilder csv({"t", "k", "coeff"});
    const ZonalGrid& g = *f.grid;
    for (int k = 0; k <= g.K; ++k)
        for (int i = 0; i < g.Nt; ++i)
            csv.row({format_full(g.tnodes[std::size_t(i)]), std::to_string(k),
                     format_full(f.coeffs(k, i))});
    return csv.str();
}

std::string field_nodal_csv(const CylinderField& f) {
    CsvBuilder csv({"t", "x", "value"});
    const ZonalGrid& g = *f.grid;
    const Eigen::MatrixXd nodal = synthesize(f);
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Ntheta; ++j)
            csv.row({format_full(g.tnodes[std::size_t(i)]),
                     format_full(g.xnodes[std::size_t(j)]), format_full(nodal(j, i))});
    return csv.str();
}

json psi_report_json(const PsiField& pf) {
    json rep;
    rep["sup_norm"] = pf.sup_norm;
    rep["weighted_norm"] = pf.weighted;
    rep["delta"] = pf.spec.delta;
    rep["support_interval"] = {pf.support_lo, pf.support_hi};
    rep["sup_splice"] = pf.sup_splice;
    return rep;
}

Artifacts run_delaunay(const json& p) {
    require_keys(p, {"n", "eps", "t_phase", "samples"}, "delaunay params");
    Dimension dim(get_or(p, "n", 3));
    const double eps = p.at("eps").get<double>();
    DelaunayParams params{dim, eps, get_or(p, "t_phase", 0.0)};
    const int samples = get_or(p, "samples", 2048);
    DelaunayOrbit orb = integrate_orbit(params, 1e-13, samples + 1);

    CsvBuilder csv({"t", "u", "up"});
    const double h = orb.period / samples;
    for (int i = 0; i <= samples; ++i) {
        const auto [u, up] = orb.eval(i * h - params.T);
        csv.row({format_full(i * h), format_full(u), format_full(up)});
    }
    Artifacts a;
    a.files["orbit.csv"] = csv.str();
    a.summary["period"] = orb.period;
    a.summary["energy"] = orb.energy;
    a.summary["u_max"] = orb.u_max;
    return a;
}

Artifacts run_indicial(const json& p) {
    require_keys(p, {"n", "eps", "k_max"}, "indicial params");
    Dimension dim(get_or(p, "n", 3));
    const double eps = p.at("eps").get<double>();
    const int k_max = get_or(p, "k_max", 3);
    auto rows = indicial_sweep(dim, {eps}, k_max);

    CsvBuilder csv({"n", "eps", "k", "lambda", "gamma", "trace", "det"});
    Artifacts a;
    for (const auto& r : rows) {
        csv.row({std::to_string(r.n), format_full(r.eps), std::to_string(r.k),
                 format_full(r.lambda), format_full(r.gamma), format_full(r.trace),
                 format_full(r.det)});
        a.summary["gamma_" + std::to_string(r.k)] = r.gamma;
    }
    a.files["indicial.csv"] = csv.str();
    return a;
}

Artifacts run_glue(const json& p) {
    require_keys(p, with_glue({}), "glue params");
    GlueConfig cfg = parse_glue_config(p);
    ApproximateSolution as = build_approximate_factor(cfg);
    PsiField pf = psi(as.bg, {cfg.delta, as.R, as.B}, 0.5 * cfg.cutoff_width + 1.0);

    Artifacts a;
    a.files["w.csv"] = field_csv(as.bg.w);
    a.files["w_nodal.csv"] = field_nodal_csv(as.bg.w);
    a.files["psi_report.json"] = psi_report_json(pf).dump(2) + "\n";
    a.summary["psi_sup"] = pf.sup_norm;
    a.summary["psi_sup_splice"] = pf.sup_splice;
    a.summary["psi_weighted"] = pf.weighted;
    a.summary["R"] = as.R;
    return a;
}

Artifacts run_psi_sweep(const json& p) {
    require_keys(p, with_glue({"m_list", "normalize"}), "psi-sweep params");
    GlueConfig cfg = parse_glue_config(p);
    if (get_or(p, "normalize", false)) {
        cfg.end1 = conformal_normalize(cfg.end1);
        cfg.end2 = conformal_normalize(cfg.end2);
    }
    std::vector<int> m_list = p.at("m_list").get<std::vector<int>>();
    PsiSweepResult sw = psi_decay_sweep(cfg, m_list);

    CsvBuilder csv({"m", "R", "psi_sup", "psi_weighted", "slope_running"});
    for (const auto& r : sw.rows)
        csv.row({std::to_string(r.m), format_full(r.R), format_full(r.psi_sup),
                 format_full(r.psi_weighted), format_full(r.slope_running)});
    json fit;
    fit["slope"] = sw.slope;
    fit["fit_residual"] = sw.fit_residual;
    fit["fit_ok"] = sw.fit_ok;
    fit["exact"] = sw.exact;

    Artifacts a;
    a.files["sweep.csv"] = csv.str();
    a.files["fit.json"] = fit.dump(2) + "\n";
    a.summary["slope"] = sw.slope;
    a.summary["fit_residual"] = sw.fit_residual;
    return a;
}

Artifacts run_solve(const json& p) {
    require_keys(p, with_glue({"tol", "max_iter"}), "solve params");
    GlueConfig cfg = parse_glue_config(p);
    const double tol = get_or(p, "tol", 1e-8);
    const int max_iter = get_or(p, "max_iter", 25);
    ApproximateSolution as = build_approximate_factor(cfg);
    SolveReport rep = picard_solve(as, cfg.delta, tol, max_iter);

    json r;
    r["converged"] = rep.converged;
    r["ball_ok"] = rep.ball_ok;
    r["iterations"] = rep.iterations;
    r["final_max_residual"] = rep.final_max_residual;
    r["iterate_norms"] = rep.iterate_norms;
    r["residual_norms"] = rep.residual_norms;
    r["residual_sups"] = rep.residual_sups;
    r["contraction_factors"] = rep.contraction_factors;
    r["deformation"] = {{"left", {{"alpha_neck", rep.final_deformation.left.alpha_neck},
                                  {"alpha_trans", rep.final_deformation.left.alpha_trans}}},
                        {"right", {{"alpha_neck", rep.final_deformation.right.alpha_neck},
                                   {"alpha_trans", rep.final_deformation.right.alpha_trans}}}};
    if (!rep.failure.empty()) r["failure"] = rep.failure;

    Artifacts a;
    a.files["report.json"] = r.dump(2) + "\n";
    a.files["final_v.csv"] = field_csv(rep.final_v);
    a.summary["converged"] = rep.converged ? 1.0 : 0.0;
    a.summary["iterations"] = rep.iterations;
    a.summary["final_max_residual"] = rep.final_max_residual;
    if (!rep.converged) throw std::runtime_error("solve: contraction did not converge");
    return a;
}

Artifacts run_uniformity(const json& p) {
    require_keys(p, with_glue({"m_list", "modes", "strip", "tol"}), "uniformity params");
    GlueConfig cfg = parse_glue_config(p);
    std::vector<int> m_list = p.at("m_list").get<std::vector<int>>();
    std::vector<int> modes = get_or(p, "modes", std::vector<int>{0, 2});
    const bool strip = get_or(p, "strip", false);
    const double tol = get_or(p, "tol", 1e-9);

    auto rows = uniformity_sweep(cfg, m_list, modes, tol, strip);
    CsvBuilder csv({"m", "R", "k", "bound_constant", "smallest_singular_value"});
    double bmin = 1e300, bmax = 0, smin = 1e300;
    for (const auto& r : rows) {
        csv.row({std::to_string(r.m), format_full(r.R), std::to_string(r.k),
                 format_full(r.bound_constant), format_full(r.smallest_singular_value)});
        bmin = std::min(bmin, r.bound_constant);
        bmax = std::max(bmax, r.bound_constant);
        smin = std::min(smin, r.smallest_singular_value);
    }
    Artifacts a;
    a.files["uniformity.csv"] = csv.str();
    a.summary["bound_ratio"] = (bmin > 0) ? bmax / bmin : 0.0;
    a.summary["min_sigma"] = smin;
    return a;
}

Artifacts run_probe(const json& p) {
    require_keys(p, with_glue({"m_list", "mismatch", "tol"}), "probe params");
    GlueConfig cfg = parse_glue_config(p);
    std::vector<int> m_list = p.at("m_list").get<std::vector<int>>();
    const double mismatch = get_or(p, "mismatch", 0.0);
    const double tol = get_or(p, "tol", 1e-8);
    auto rows = nondegeneracy_probe(cfg, m_list, cfg.delta, tol, mismatch);

    CsvBuilder csv({"m", "R", "k", "sigma_min", "converged"});
    double smin = 1e300;
    for (const auto& r : rows) {
        csv.row({std::to_string(r.m), format_full(r.R), std::to_string(r.k),
                 format_full(r.sigma_min), r.converged ? "1" : "0"});
        smin = std::min(smin, r.sigma_min);
    }
    Artifacts a;
    a.files["probe.csv"] = csv.str();
    a.summary["min_sigma"] = smin;
    return a;
}

Artifacts dispatch(const std::string& experiment, const json& params) {
    if (experiment == "delaunay") return run_delaunay(params);
    if (experiment == "indicial") return run_indicial(params);
    if (experiment == "glue") return run_glue(params);
    if (experiment == "psi-sweep") return run_psi_sweep(params);
    if (experiment == "solve") return run_solve(params);
    if (experiment == "uniformity") return run_uniformity(params);
    if (experiment == "probe") return run_probe(params);
    throw ConfigError("unknown experiment '" + experiment + "'");
}

struct ParsedConfig {
    std::string experiment;
    json params;
    std::filesystem::path output_dir;
    long seed = 0;
};

ParsedConfig parse_config(const std::filesystem::path& path) {
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    require_keys(cfg, {"schema_version", "experiment", "params", "output_dir", "seed"},
                 "config");
    if (!cfg.contains("schema_version") || cfg.at("schema_version").get<int>() != 1)
        throw ConfigError("config: schema_version must be 1");
    if (!cfg.contains("experiment")) throw ConfigError("config: missing 'experiment'");
    ParsedConfig out;
    out.experiment = cfg.at("experiment").get<std::string>();
    out.params = cfg.contains("params") ? cfg.at("params") : json::object();
    if (cfg.contains("output_dir"))
        out.output_dir = cfg.at("output_dir").get<std::string>();
    out.seed = get_or(cfg, "seed", 0L);
    return out;
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& a) {
    json manifest;
    manifest["files"] = json::object();
    for (const auto& [name, content] : a.files) {
        atomic_write(dir / name, content);
        manifest["files"][name] = content_hash(content);
    }
    json summary(a.summary);
    manifest["summary"] = summary;
    atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_failure(const std::filesystem::path& dir, const std::string& what) {
    try {
        json diag;
        diag["error"] = what;
        atomic_write(dir / "failure.json", diag.dump(2) + "\n");
    } catch (...) {
        // diagnostics are best-effort
    }
}

} // namespace

RunStatus run_experiment(const std::filesystem::path& config_path, const RunOptions& opt) {
    ParsedConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return RunStatus::invalid_config;
    }
    const std::filesystem::path dir =
        !opt.output_dir.empty() ? opt.output_dir
                                : (cfg.output_dir.empty() ? "out" : cfg.output_dir);
    try {
        if (opt.verbose) std::cerr << "running " << cfg.experiment << " -> " << dir << "\n";
        Artifacts a = dispatch(cfg.experiment, cfg.params);
        write_artifacts(dir, a);
        return RunStatus::ok;
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return RunStatus::invalid_config;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        write_failure(dir, e.what());
        return RunStatus::numerical_failure;
    }
}

RunStatus run_sweep(const std::filesystem::path& config_path, const RunOptions& opt) {
    ParsedConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return RunStatus::invalid_config;
    }
    const std::filesystem::path dir =
        !opt.output_dir.empty() ? opt.output_dir
                                : (cfg.output_dir.empty() ? "out" : cfg.output_dir);

    // expand list-valued scalar parameters (arrays of numbers) into a grid
    std::vector<std::string> keys;
    std::vector<std::vector<json>> values;
    json base = cfg.params;
    for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it) {
        if (it.value().is_array() && !it.value().empty() &&
            it.value().front().is_number() &&
            (it.key() != "m_list" && it.key() != "modes" && it.key() != "tails1" &&
             it.key() != "tails2")) {
            keys.push_back(it.key());
            std::vector<json> vals(it.value().begin(), it.value().end());
            std::sort(vals.begin(), vals.end(), [](const json& a, const json& b) {
                return a.get<double>() < b.get<double>();
            });
            values.push_back(std::move(vals));
        }
    }
    if (keys.empty()) {
        std::cerr << "invalid config: sweep requires a list-valued parameter\n";
        return RunStatus::invalid_config;
    }
    for (const auto& v : values)
        if (v.empty()) {
            std::cerr << "invalid config: empty sweep list\n";
            return RunStatus::invalid_config;
        }

    // cartesian product in sorted key order (keys come sorted from the json map)
    std::vector<json> combos{json::object()};
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::vector<json> next;
        for (const auto& c : combos)
            for (const auto& v : values[i]) {
                json cc = c;
                cc[keys[i]] = v;
                next.push_back(cc);
            }
        combos = next;
    }

    struct RunOut {
        Artifacts artifacts;
        std::string error;
        bool config_error = false;
    };
    std::vector<RunOut> outs(combos.size());

    const int jobs = std::max(1, opt.jobs);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= combos.size()) return;
            json params = base;
            for (auto it = combos[i].begin(); it != combos[i].end(); ++it)
                params[it.key()] = it.value();
            try {
                outs[i].artifacts = dispatch(cfg.experiment, params);
            } catch (const ConfigError& e) {
                outs[i].error = e.what();
                outs[i].config_error = true;
            } catch (const std::exception& e) {
                outs[i].error = e.what();
            }
        }
    };
    std::vector<std::future<void>> pool;
    for (int j = 0; j < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();

    // merged summary in sorted parameter order (combos are generated sorted)
    std::set<std::string> summary_cols;
    for (const auto& o : outs)
        for (const auto& [k, v] : o.artifacts.summary) summary_cols.insert(k);
    std::vector<std::string> header = keys;
    header.insert(header.end(), summary_cols.begin(), summary_cols.end());
    header.push_back("status");
    CsvBuilder csv(header);

    bool any_failed = false, any_config = false;
    json manifest;
    manifest["files"] = json::object();
    for (std::size_t i = 0; i < combos.size(); ++i) {
        std::vector<std::string> row;
        for (const auto& k : keys) {
            const json& v = combos[i].at(k);
            row.push_back(v.is_number_integer() ? std::to_string(v.get<long>())
                                                : format_full(v.get<double>()));
        }
        for (const auto& c : summary_cols) {
            auto it = outs[i].artifacts.summary.find(c);
            row.push_back(it == outs[i].artifacts.summary.end() ? ""
                                                                : format_full(it->second));
        }
        row.push_back(outs[i].error.empty() ? "ok" : "failed");
        csv.row(row);
        if (!outs[i].error.empty()) {
            any_failed = true;
            if (outs[i].config_error) any_config = true;
        }

        // per-run artifacts under run_<idx>/
        char sub[32];
        std::snprintf(sub, sizeof sub, "run_%03zu", i);
        for (const auto& [name, content] : outs[i].artifacts.files) {
            atomic_write(dir / sub / name, content);
            manifest["files"][std::string(sub) + "/" + name] = content_hash(content);
        }
        if (!outs[i].error.empty()) write_failure(dir / sub, outs[i].error);
    }
    atomic_write(dir / "summary.csv", csv.str());
    manifest["files"]["summary.csv"] = content_hash(csv.str());
    atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");

    if (any_config) return RunStatus::invalid_config;
    return any_failed ? RunStatus::numerical_failure : RunStatus::ok;
}

} // namespace csc
