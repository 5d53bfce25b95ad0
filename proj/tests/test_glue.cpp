#include "csc/glue.hpp"
#include "harness.hpp"

#include <cmath>

using namespace csc;

namespace {

void test_coordinate_maps() {
    harness::section("coordinate identifications");
    const double R = 12.0, T0 = 1.5, T0p = 2.25;
    CoordinateMaps cm = coordinate_maps(R, T0, T0p);
    CHECK_CLOSE(cm.t_of_t0(T0 + R), 0.0, 1e-15);
    CHECK_CLOSE(cm.t_of_tau0(T0p + R), 0.0, 1e-15);
    // the same physical point from both sides under t0 + tau0 = T0 + T0' + 2R
    const double t0 = T0 + R - 1.0;
    const double tau0 = T0 + T0p + 2 * R - t0;
    CHECK_CLOSE(cm.t_of_t0(t0), -1.0, 1e-15);
    CHECK_CLOSE(cm.t_of_tau0(tau0), -1.0, 1e-15);
    CHECK_CLOSE(cm.t0_of_t(cm.t_of_t0(7.7)), 7.7, 1e-13);
    CHECK_CLOSE(cm.tau0_of_t(cm.t_of_tau0(9.2)), 9.2, 1e-13);
}

void test_cutoff() {
    harness::section("quintic smoothstep cutoff");
    CHECK_CLOSE(cutoff(-3.0, 0.0, 2.0), 1.0, 0.0);
    CHECK_CLOSE(cutoff(-1.0, 0.0, 2.0), 1.0, 0.0);
    CHECK_CLOSE(cutoff(1.0, 0.0, 2.0), 0.0, 0.0);
    CHECK_CLOSE(cutoff(5.0, 0.0, 2.0), 0.0, 0.0);
    CHECK_CLOSE(cutoff(0.0, 0.0, 2.0), 0.5, 1e-15);
    // monotone, in [0,1], C^2 at the joins (second differences stay bounded)
    double prev = 1.1;
    for (int i = 0; i <= 100; ++i) {
        const double t = -1.2 + 2.4 * i / 100.0;
        const double c = cutoff(t, 0.0, 2.0);
        CHECK(c <= prev + 1e-15);
        CHECK(c >= 0.0 && c <= 1.0);
        prev = c;
    }
    const double h = 1e-4;
    for (double t : {-1.0, 1.0}) {
        const double d2 = (cutoff(t - h, 0, 2) - 2 * cutoff(t, 0, 2) + cutoff(t + h, 0, 2)) / (h * h);
        CHECK_MSG(std::abs(d2) <= 1e-3, "second difference %.3e at the join", d2);
    }
    CHECK_THROWS(cutoff(0.0, 0.0, -1.0));
}

void test_conformal_normalize() {
    harness::section("conformal normalization strips degree-1 tails");
    EndData e;
    e.tails = {{1, +1, 0.01}};
    CHECK(conformal_normalize(e).tails.empty());
    e.tails = {{2, +1, 0.01}};
    CHECK(conformal_normalize(e).tails.size() == 1);
    e.tails = {{1, +1, 0.3}, {2, -1, 0.2}};
    EndData out = conformal_normalize(e);
    CHECK(out.tails.size() == 1);
    CHECK(out.tails[0].k == 2 && out.tails[0].direction == -1);
    // idempotent
    EndData again = conformal_normalize(out);
    CHECK(again.tails.size() == 1);
}

GlueConfig base_config(int m, double a1 = 0.0, double a2k = 0.0) {
    GlueConfig cfg;
    cfg.dim = Dimension(3);
    cfg.eps = 0.5;
    cfg.m = m;
    if (a1 != 0.0) {
        cfg.end1.tails.push_back({1, +1, a1});
        cfg.end2.tails.push_back({1, +1, a1});
    }
    if (a2k != 0.0) {
        cfg.end1.tails.push_back({2, +1, a2k});
        cfg.end2.tails.push_back({2, +1, a2k});
    }
    return cfg;
}

void test_build_exactness() {
    harness::section("zero tails: the build is exactly Delaunay");
    GlueConfig cfg = base_config(3);
    ApproximateSolution as = build_approximate_factor(cfg);
    CHECK_CLOSE(as.R, 3 * as.orbit->period, 0.0); // R = m T exactly
    WeightedNormSpec spec{cfg.delta, as.R};
    PsiField pf = psi(as.bg, spec);
    CHECK_CLOSE(pf.sup_norm, 0.0, 1e-12);
    // direct (non-split) evaluation sits at the discretization floor of the
    // reference resolution
    GlueConfig fine = base_config(2);
    fine.grid.nodes_per_unit = 50.0;
    ApproximateSolution asf = build_approximate_factor(fine);
    ConformalBackground direct = asf.bg;
    direct.has_split = false;
    PsiField pfd = psi(direct, {fine.delta, asf.R});
    CHECK_MSG(pfd.sup_norm <= 1e-7, "direct-path floor %.3e", pfd.sup_norm);

    // the factor is the sampled orbit exactly, and its minimum is the necksize
    double minw = 1e300, dev = 0;
    for (int i = 0; i < as.grid->Nt; ++i) {
        const double t = as.grid->tnodes[std::size_t(i)];
        dev = std::max(dev, std::abs(as.bg.w.coeffs(0, i) - as.orbit->eval(t).first));
        minw = std::min(minw, as.bg.w.coeffs(0, i));
    }
    CHECK_CLOSE(dev, 0.0, 0.0);
    CHECK_CLOSE(minw, cfg.eps, 1e-6); // off-node sampling of the neck
}

void test_build_cylinder() {
    harness::section("eps = cbar: the build is the constant factor");
    GlueConfig cfg;
    cfg.dim = Dimension(3);
    cfg.eps = cylinder_value(cfg.dim);
    cfg.end1.eps = cfg.end2.eps = cfg.eps;
    cfg.m = 2;
    cfg.delta = 1.5;
    ApproximateSolution as = build_approximate_factor(cfg);
    const double cb = cylinder_value(cfg.dim);
    double worst = 0;
    for (int i = 0; i < as.grid->Nt; ++i)
        worst = std::max(worst, std::abs(as.bg.w.coeffs(0, i) - cb));
    CHECK_MSG(worst <= 1e-14, "cylinder factor dev %.3e", worst);
}

void test_tail_decay_and_seam() {
    harness::section("tails: positivity, seam continuity, cosh bound");
    GlueConfig cfg = base_config(4, 0.0, 1e-3);
    ApproximateSolution as = build_approximate_factor(cfg);
    const ZonalGrid& g = *as.grid;

    // seam continuity of the assembled factor through second differences
    const Eigen::MatrixXd w = synthesize(as.bg.w);
    for (int i = 2; i < g.Nt - 2; ++i) {
        const double d2 = (w(0, i - 1) - 2 * w(0, i) + w(0, i + 1)) / (g.h * g.h);
        CHECK_MSG(std::abs(d2) < 10.0, "factor second difference blew up at node %d", i);
        if (harness::g_failures) break;
    }

    // the tail deviation (read from the split field tau, which resolves far
    // below one ulp of the base factor) obeys the cosh-form bound with the
    // slowest tail rate on [-R, R]
    const double gamma2 = indicial_root(*as.orbit, {2});
    double worst_ratio = 0;
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        if (std::abs(t) > as.R) continue;
        const double v = as.bg.tau.coeffs(2, i);
        const double bound = std::exp(gamma2 * (log_cosh(t) - log_cosh(as.R)));
        worst_ratio = std::max(worst_ratio, std::abs(v) / bound);
    }
    // C is of order amplitude * e^{gamma2 * L_outer} from the anchor choice
    const double L_out = as.B - as.R;
    CHECK_MSG(worst_ratio <= 10.0 * 1e-3 * std::exp(gamma2 * L_out) * std::pow(2.0, gamma2),
              "cosh-form ratio %.3e", worst_ratio);
    CHECK(worst_ratio > 0);

    // positivity rejection: a large tail drives the factor negative off-pole
    GlueConfig bad = base_config(2, 0.0, 1.5);
    CHECK_THROWS(build_approximate_factor(bad));
}

void test_psi_decay_sweep() {
    harness::section("psi decay in R: slope matches the slowest tail rate");
    // degree-1 tails: slope -1 (gamma_1 = 1)
    GlueConfig cfg1 = base_config(0, 1e-3, 1e-3);
    PsiSweepResult sw1 = psi_decay_sweep(cfg1, {2, 3, 4, 5});
    CHECK(sw1.fit_ok);
    CHECK_MSG(std::abs(sw1.slope + 1.0) <= 0.1, "degree-1 slope %.4f", sw1.slope);

    // normalized ends: slope -gamma_2
    GlueConfig cfg2 = cfg1;
    cfg2.end1 = conformal_normalize(cfg2.end1);
    cfg2.end2 = conformal_normalize(cfg2.end2);
    PsiSweepResult sw2 = psi_decay_sweep(cfg2, {2, 3, 4, 5});
    ApproximateSolution probe = build_approximate_factor(base_config(2));
    const double gamma2 = indicial_root(*probe.orbit, {2});
    CHECK(sw2.fit_ok);
    CHECK_MSG(std::abs(sw2.slope + gamma2) <= 0.1 * gamma2, "normalized slope %.4f vs -%.4f",
              sw2.slope, gamma2);

    // monotone decrease of the seam sup
    for (std::size_t i = 1; i < sw2.rows.size(); ++i)
        CHECK(sw2.rows[i].psi_sup < sw2.rows[i - 1].psi_sup);

    // zero tails: the sweep reports exactness
    PsiSweepResult sw0 = psi_decay_sweep(base_config(0), {2, 3, 4, 5});
    CHECK(sw0.exact);

    CHECK_THROWS(psi_decay_sweep(cfg1, {2, 3}));
}

} // namespace

int main() {
    test_coordinate_maps();
    test_cutoff();
    test_conformal_normalize();
    test_build_exactness();
    test_build_cylinder();
    test_tail_decay_and_seam();
    test_psi_decay_sweep();
    return harness::finish("glue_builder");
}
