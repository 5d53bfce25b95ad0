#include "csc/glue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csc {

double cutoff(double t, double center, double width) {
    if (!(width > 0)) throw std::invalid_argument("cutoff: width must be positive");
    const double s = (t - (center - 0.5 * width)) / width;
    if (s <= 0) return 1.0;
    if (s >= 1) return 0.0;
    return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double cutoff_c4(double t, double center, double width) {
    if (!(width > 0)) throw std::invalid_argument("cutoff_c4: width must be positive");
    const double s = (t - (center - 0.5 * width)) / width;
    if (s <= 0) return 1.0;
    if (s >= 1) return 0.0;
    const double s5 = s * s * s * s * s;
    return 1.0 - s5 * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))));
}

EndData conformal_normalize(EndData e) {
    std::erase_if(e.tails, [](const EndTail& t) { return t.k == 1; });
    return e;
}

ApproximateSolution build_approximate_factor(const GlueConfig& cfg) {
    if (cfg.m < 1) throw std::invalid_argument("GlueConfig: m must be >= 1");
    if (std::abs(cfg.end1.eps - cfg.eps) > 1e-14 || std::abs(cfg.end2.eps - cfg.eps) > 1e-14)
        throw std::invalid_argument("GlueConfig: ends must share the common necksize");
    if (cfg.end1.T != 0.0 || cfg.end2.T != 0.0)
        throw std::invalid_argument("GlueConfig: end phases are realized through deformations; "
                                    "build requires matched phases T = 0");
    for (const auto* e : {&cfg.end1, &cfg.end2})
        for (const auto& tl : e->tails)
            if (tl.k < 1) throw std::invalid_argument("EndTail: degree must be >= 1");

    ApproximateSolution out;
    out.cfg = cfg;
    out.orbit = std::make_shared<const DelaunayOrbit>(
        integrate_orbit({cfg.dim, cfg.eps, 0.0}));
    const double T = out.orbit->period;
    out.R = cfg.m * T;
    out.outer_periods = std::max(1, int(std::lround(cfg.L_outer / T)));
    out.B = out.R + out.outer_periods * T;
    out.B_grid = out.B + T; // padding period for the one-sided closures

    const int Nt = int(std::lround(2.0 * out.B_grid * cfg.grid.nodes_per_unit)) + 1;
    if (Nt < 15) throw std::invalid_argument("GlueConfig: grid too coarse for requested m");
    out.grid = make_grid(cfg.dim, out.B_grid, Nt, cfg.grid.K, cfg.grid.Ntheta);
    const ZonalGrid& g = *out.grid;

    // delta must sit inside (1, gamma_2(eps))
    const double g2 = indicial_root(*out.orbit, ModeIndex{2});
    if (!(cfg.delta > 1.0) || !(cfg.delta < g2))
        throw std::invalid_argument("GlueConfig: delta must lie in (1, gamma_2(eps))");

    // tails: degree-k Floquet profiles anchored at the outer boundary necks
    CylinderField tau(out.grid);
    auto add_end = [&](const EndData& e, bool left) {
        for (const auto& tl : e.tails) {
            if (tl.k > g.K)
                throw std::invalid_argument("EndTail: degree exceeds the grid cutoff K");
            auto prof = std::make_shared<const FloquetProfile>(
                select_decaying_solution(*out.orbit, ModeIndex{tl.k}, +1));
            out.profiles.push_back(prof);
            for (int i = 0; i < g.Nt; ++i) {
                const double t = g.tnodes[std::size_t(i)];
                const double chi = cutoff(t, 0.0, cfg.cutoff_width);
                const double side = left ? chi : (1.0 - chi);
                if (side == 0.0) continue;
                // seam-decaying tail in the factor: a * u(t) * s(t -+ B)/eps,
                // anchored at the outermost physical neck; direction -1
                // anchors the outward-decaying branch instead. In the padding
                // period the tail grows outward, so it is tapered off beyond
                // the reach of the physical nodes' stencils.
                double arg = left ? (t + out.B) : (out.B - t);
                if (tl.direction < 0) arg = -arg;
                const double taper = cutoff_c4(std::abs(t), out.B + 1.2, 1.0);
                if (taper == 0.0) continue;
                const double s = prof->eval(arg)[0];
                const double u = out.orbit->eval(t).first;
                tau.coeffs(tl.k, i) += taper * side * tl.amplitude * u * s / cfg.eps;
            }
        }
    };
    add_end(cfg.end1, true);
    add_end(cfg.end2, false);

    out.bg.grid = out.grid;
    out.bg.has_split = true;
    auto orb = out.orbit;
    out.bg.base_u = [orb](double t) { return orb->eval(t).first; };
    out.bg.base_upp = [orb](double t) { return orb->upp(t); };
    out.bg.tau = tau;
    out.bg.w = tau;
    for (int i = 0; i < g.Nt; ++i)
        out.bg.w.coeffs(0, i) += out.orbit->eval(g.tnodes[std::size_t(i)]).first;

    if (!(synthesize(out.bg.w).minCoeff() > 0))
        throw std::domain_error("build_approximate_factor: tail amplitudes violate positivity");
    return out;
}

PsiSweepResult psi_decay_sweep(const GlueConfig& cfg_template, const std::vector<int>& m_list) {
    if (m_list.size() < 4)
        throw std::invalid_argument("psi_decay_sweep: need at least 4 values of m");
    PsiSweepResult out;

    std::vector<double> logs, Rs;
    for (int m : m_list) {
        GlueConfig cfg = cfg_template;
        cfg.m = m;
        ApproximateSolution as = build_approximate_factor(cfg);
        WeightedNormSpec spec{cfg.delta, as.R, as.B};
        PsiField pf = psi(as.bg, spec, 0.5 * cfg.cutoff_width + 1.0);

        PsiSweepRow row;
        row.m = m;
        row.R = as.R;
        row.psi_sup = pf.sup_splice;
        row.psi_weighted = pf.weighted;
        Rs.push_back(as.R);
        logs.push_back(pf.sup_splice > 0 ? std::log(pf.sup_splice) : -760.0);

        // running fit over the rows so far
        const std::size_t n = Rs.size();
        if (n >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                sx += Rs[i];
                sy += logs[i];
                sxx += Rs[i] * Rs[i];
                sxy += Rs[i] * logs[i];
            }
            row.slope_running = (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
        } else {
            row.slope_running = 0.0;
        }
        out.rows.push_back(row);
    }

    // exactness: everything at (or below) the floor
    double maxsup = 0;
    for (const auto& r : out.rows) maxsup = std::max(maxsup, r.psi_sup);
    if (maxsup < 1e-300) {
        out.exact = true;
        out.slope = 0.0;
        out.fit_ok = false;
        return out;
    }

    const std::size_t n = Rs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += Rs[i];
        sy += logs[i];
        sxx += Rs[i] * Rs[i];
        sxy += Rs[i] * logs[i];
    }
    out.slope = (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
    const double icpt = (sy - out.slope * sx) / double(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = logs[i] - (icpt + out.slope * Rs[i]);
        ss += r * r;
    }
    out.fit_residual = std::sqrt(ss / double(n));
    out.fit_ok = out.fit_residual < 0.25;
    return out;
}

} // namespace csc
