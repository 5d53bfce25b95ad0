#include "csc/io.hpp"
#include "csc/runner.hpp"
#include "harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace csc;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    fs::path p = fs::temp_directory_path() / "cscglue_runner_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& s) { atomic_write(p, s); }

int cli(const std::string& args) {
    const std::string cmd = std::string(CSCGLUE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void test_validation() {
    harness::section("strict config validation");
    const fs::path d = workdir();
    write(d / "bad_field.json",
          R"({"schema_version":1,"experiment":"delaunay","params":{"n":3,"eps":0.5,"bogus":1}})");
    CHECK(run_experiment(d / "bad_field.json", {d / "out1", 1, false}) ==
          RunStatus::invalid_config);

    write(d / "bad_schema.json",
          R"({"schema_version":2,"experiment":"delaunay","params":{"eps":0.5}})");
    CHECK(run_experiment(d / "bad_schema.json", {d / "out2", 1, false}) ==
          RunStatus::invalid_config);

    write(d / "bad_exp.json",
          R"({"schema_version":1,"experiment":"nope","params":{}})");
    CHECK(run_experiment(d / "bad_exp.json", {d / "out3", 1, false}) ==
          RunStatus::invalid_config);

    // numerical failure: eps out of range
    write(d / "bad_eps.json",
          R"({"schema_version":1,"experiment":"delaunay","params":{"n":3,"eps":0.9}})");
    CHECK(run_experiment(d / "bad_eps.json", {d / "out4", 1, false}) ==
          RunStatus::numerical_failure);
    CHECK(fs::exists(d / "out4" / "failure.json"));
}

void test_determinism() {
    harness::section("identical config gives byte-identical artifacts");
    const fs::path d = workdir();
    write(d / "cfg.json",
          R"({"schema_version":1,"experiment":"indicial","seed":7,
              "params":{"n":3,"eps":0.5,"k_max":2}})");
    CHECK(run_experiment(d / "cfg.json", {d / "a", 1, false}) == RunStatus::ok);
    CHECK(run_experiment(d / "cfg.json", {d / "b", 1, false}) == RunStatus::ok);
    for (const char* f : {"indicial.csv", "manifest.json"}) {
        const std::string ca = read_file(d / "a" / f);
        const std::string cb = read_file(d / "b" / f);
        CHECK_MSG(content_hash(ca) == content_hash(cb), "artifact %s differs", f);
    }
}

void test_sweep() {
    harness::section("sweep: expansion, ordering, empty list");
    const fs::path d = workdir();
    write(d / "sweep.json",
          R"({"schema_version":1,"experiment":"delaunay",
              "params":{"n":3,"eps":[0.5,0.3,0.4]}})");
    CHECK(run_sweep(d / "sweep.json", {d / "s", 2, false}) == RunStatus::ok);
    const std::string csv = read_file(d / "s" / "summary.csv");
    // rows in sorted parameter order regardless of completion order
    const auto p3 = csv.find("0.2999");
    const auto p4 = csv.find("0.4000");
    const auto p5 = csv.find("0.5");
    CHECK(p3 != std::string::npos && p4 != std::string::npos && p5 != std::string::npos);
    CHECK(p3 < p4 && p4 < p5);
    CHECK(fs::exists(d / "s" / "run_000" / "orbit.csv"));
    CHECK(fs::exists(d / "s" / "manifest.json"));

    write(d / "empty.json",
          R"({"schema_version":1,"experiment":"delaunay","params":{"n":3,"eps":[]}})");
    CHECK(run_sweep(d / "empty.json", {d / "e", 1, false}) == RunStatus::invalid_config);

    write(d / "nolist.json",
          R"({"schema_version":1,"experiment":"delaunay","params":{"n":3,"eps":0.5}})");
    CHECK(run_sweep(d / "nolist.json", {d / "n", 1, false}) == RunStatus::invalid_config);
}

void test_solve_experiment() {
    harness::section("solve experiment: trivial fixed point");
    const fs::path d = workdir();
    // no tails: the approximate solution is exact and the iteration stops
    // after a single application with zero correction
    write(d / "solve.json",
          R"({"schema_version":1,"experiment":"solve",
              "params":{"n":3,"eps":0.5,"m":2,"tol":1e-8,"max_iter":5}})");
    CHECK(run_experiment(d / "solve.json", {d / "sv", 1, false}) == RunStatus::ok);
    const std::string rep = read_file(d / "sv" / "report.json");
    CHECK(rep.find("\"converged\": true") != std::string::npos);
    CHECK(rep.find("\"iterations\": 1") != std::string::npos);
    CHECK(fs::exists(d / "sv" / "final_v.csv"));
    CHECK(fs::exists(d / "sv" / "manifest.json"));
}

void test_cli() {
    harness::section("command-line driver");
    const fs::path d = workdir();
    write(d / "cfg.json",
          R"({"schema_version":1,"experiment":"delaunay",
              "params":{"n":3,"eps":0.5,"samples":128}})");
    CHECK(cli("run " + (d / "cfg.json").string() + " --output-dir " + (d / "o").string()) == 0);
    CHECK(fs::exists(d / "o" / "orbit.csv"));
    CHECK(fs::exists(d / "o" / "manifest.json"));
    // header and full-precision rows
    const std::string csv = read_file(d / "o" / "orbit.csv");
    CHECK(csv.rfind("t,u,up\n", 0) == 0);
    CHECK(csv.find("0.5") != std::string::npos);

    write(d / "bad.json", "{");
    CHECK(cli("run " + (d / "bad.json").string()) == 2);
    CHECK(cli("sweep " + (d / "cfg.json").string()) == 2); // no list parameter

    // parallel sweep output independent of scheduling
    write(d / "sw.json",
          R"({"schema_version":1,"experiment":"indicial",
              "params":{"n":3,"k_max":2,"eps":[0.3,0.4,0.5,0.6]}})");
    CHECK(cli("sweep " + (d / "sw.json").string() + " --output-dir " + (d / "s1").string() +
              " --jobs 1") == 0);
    CHECK(cli("sweep " + (d / "sw.json").string() + " --output-dir " + (d / "s2").string() +
              " --jobs 4") == 0);
    CHECK(content_hash(read_file(d / "s1" / "summary.csv")) ==
          content_hash(read_file(d / "s2" / "summary.csv")));
    CHECK(content_hash(read_file(d / "s1" / "manifest.json")) ==
          content_hash(read_file(d / "s2" / "manifest.json")));
}

} // namespace

int main() {
    test_validation();
    test_determinism();
    test_sweep();
    test_solve_experiment();
    test_cli();
    return harness::finish("cli_runner");
}
