#include "csc/contraction.hpp"

#include <cmath>
#include <stdexcept>

namespace csc {

namespace {

struct SpliceLayout {
    double center_left, center_right, width;
};

SpliceLayout splice_layout(const ApproximateSolution& as) {
    const double L_out = as.B - as.R; // physical outer length (pad excluded)
    return {-(as.R + 0.5 * L_out), as.R + 0.5 * L_out, 2.0};
}

} // namespace

double DeformationParams::norm() const {
    double s = left.alpha_neck * left.alpha_neck + left.alpha_trans * left.alpha_trans +
               right.alpha_neck * right.alpha_neck + right.alpha_trans * right.alpha_trans;
    for (const auto* e : {&left, &right})
        for (const auto& t : e->tail_edits) s += t.amplitude * t.amplitude;
    return std::sqrt(s);
}

ApproximateSolution deform_background(const ApproximateSolution& as,
                                      const DeformationParams& d) {
    const Dimension dim = as.cfg.dim;
    const double cb = cylinder_value(dim);
    for (const auto* e : {&d.left, &d.right}) {
        const double eps_new = as.cfg.eps + e->alpha_neck;
        if (!(eps_new > 0.0) || !(eps_new < cb))
            throw std::domain_error("deform_background: necksize out of range");
    }

    ApproximateSolution out = as;

    // apply recorded degree-1 (and other) tail edits first
    auto apply_edits = [](EndData e, const std::vector<EndTail>& edits) {
        for (const auto& ed : edits) {
            bool merged = false;
            for (auto& t : e.tails)
                if (t.k == ed.k && t.direction == ed.direction) {
                    t.amplitude += ed.amplitude;
                    merged = true;
                    break;
                }
            if (!merged && ed.amplitude != 0.0) e.tails.push_back(ed);
        }
        return e;
    };
    GlueConfig cfg = as.cfg;
    cfg.end1 = apply_edits(cfg.end1, d.left.tail_edits);
    cfg.end2 = apply_edits(cfg.end2, d.right.tail_edits);
    if (!d.left.tail_edits.empty() || !d.right.tail_edits.empty()) {
        out = build_approximate_factor(cfg);
    }

    const ZonalGrid& g = *out.grid;
    const SpliceLayout lay = splice_layout(out);

    // deformed Delaunay data per end, spliced into the degree-0 profile
    auto add_swap = [&](const DeformationEnd& e, bool leftside) {
        if (e.alpha_neck == 0.0 && e.alpha_trans == 0.0) return;
        DelaunayOrbit def = integrate_orbit({dim, as.cfg.eps + e.alpha_neck, 0.0});
        for (int i = 0; i < g.Nt; ++i) {
            const double t = g.tnodes[std::size_t(i)];
            const double chi_hat = leftside
                                       ? cutoff_c4(t, lay.center_left, lay.width)
                                       : 1.0 - cutoff_c4(t, lay.center_right, lay.width);
            if (chi_hat == 0.0) continue;
            const double du = def.eval(t + e.alpha_trans).first -
                              out.orbit->eval(t).first;
            out.bg.tau.coeffs(0, i) += chi_hat * du;
            out.bg.w.coeffs(0, i) += chi_hat * du;
        }
    };
    add_swap(d.left, true);
    add_swap(d.right, false);

    if (!(synthesize(out.bg.w).minCoeff() > 0))
        throw std::domain_error("deform_background: positivity violated");
    return out;
}

DeformationError deformation_error(const ApproximateSolution& as,
                                   const DeformationParams& d) {
    const ZonalGrid& g = *as.grid;
    WeightedNormSpec spec{as.cfg.delta, as.R, as.B};
    const ApproximateSolution def = deform_background(as, d);
    const Eigen::MatrixXd p1 = synthesize(psi(def.bg, spec).psi);
    const Eigen::MatrixXd p0 = synthesize(psi(as.bg, spec).psi);
    const Eigen::MatrixXd dh = p1 - p0;

    const SpliceLayout lay = splice_layout(as);
    const double slack = 0.75;
    double total = 0.0, outside = 0.0;
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        double w;
        {
            const double at = std::abs(t);
            w = (at <= spec.R) ? std::exp(spec.delta * (log_cosh(spec.R) - log_cosh(t)))
                               : std::exp(-spec.delta * (at - spec.R));
        }
        const double v = w * dh.col(i).cwiseAbs().maxCoeff();
        total = std::max(total, v);
        const bool in_left = std::abs(t - lay.center_left) <= 0.5 * lay.width + slack;
        const bool in_right = std::abs(t - lay.center_right) <= 0.5 * lay.width + slack;
        if (!in_left && !in_right) outside = std::max(outside, v);
    }
    DeformationError out;
    out.weighted_norm = total;
    out.outside_fraction = (total > 0) ? outside / total : 0.0;
    return out;
}

namespace {

// dictionary between degree-0 deficiency coefficients and the geometric
// deformation: c+ rides v+ = eps d_eps u / u, c- rides v- = eps u'/(u''(0) u).
DeformationParams deficiency_to_deformation(const ApproximateSolution& as,
                                            const std::array<double, 4>& c0,
                                            const std::map<int, std::array<double, 4>>& all) {
    const double eps = as.cfg.eps;
    const Dimension dim = as.cfg.dim;
    const double upp0 = dim.a2() * eps - dim.b() * std::pow(eps, dim.p());
    DeformationParams d;
    d.left.alpha_neck = eps * c0[0];
    d.left.alpha_trans = eps * c0[1] / upp0;
    d.right.alpha_neck = eps * c0[2];
    d.right.alpha_trans = eps * c0[3] / upp0;
    // degree-1 coefficients recorded as tail edits only when meaningfully
    // nonzero; grown-direction data is flagged by the caller.
    auto it = all.find(1);
    if (it != all.end()) {
        const auto& c1 = it->second;
        if (std::abs(c1[0]) > 1e-12) d.left.tail_edits.push_back({1, +1, c1[0]});
        if (std::abs(c1[1]) > 1e-12) d.left.tail_edits.push_back({1, -1, c1[1]});
        if (std::abs(c1[2]) > 1e-12) d.right.tail_edits.push_back({1, +1, c1[2]});
        if (std::abs(c1[3]) > 1e-12) d.right.tail_edits.push_back({1, -1, c1[3]});
    }
    return d;
}

double iterate_norm(const SolverContext& ctx, const DeformationParams& d,
                    const CylinderField& v) {
    WeightedNormSpec spec{ctx.delta(), ctx.R()};
    return d.norm() + weighted_norm(v, spec);
}

} // namespace

SolveReport picard_solve(const ApproximateSolution& as, double delta, double tol,
                         int max_iter,
                         const std::optional<std::pair<DeformationParams, CylinderField>>& start) {
    const ZonalGrid& g = *as.grid;
    const Dimension dim = as.cfg.dim;
    SolveReport rep;
    rep.final_v = CylinderField(as.grid);

    WeightedNormSpec spec{delta, as.R, as.B};
    const PsiField psi0_field = psi(as.bg, spec);

    // radial degree-0 background data for the fixed solution operator
    Eigen::VectorXd w0(g.Nt), psi0(g.Nt);
    for (int i = 0; i < g.Nt; ++i) w0(i) = as.orbit->eval(g.tnodes[std::size_t(i)]).first;
    psi0 = psi0_field.psi.coeffs.row(0).transpose();
    SolverContext ctx(as.grid, as.orbit, as.R, w0, psi0, delta, as.B - as.R);

    DeformationParams d;
    CylinderField v(as.grid);
    if (start) {
        d = start->first;
        v = start->second;
    }

    const double cn = dim.cn();
    double prev_step = 0.0;
    double first_step = 0.0;

    for (int it = 0; it < max_iter; ++it) {
        // end-to-end residual N(u) = c_n (n(n-1) - S) (1+v)^p on the deformed,
        // conformally corrected background
        ApproximateSolution bg_def = deform_background(as, d);
        const ConformalBackground bg_full = deform_by_factor(bg_def.bg, v);
        const PsiField psik = psi(bg_full, spec);
        CylinderField N(as.grid);
        {
            const Eigen::MatrixXd psin = synthesize(psik.psi);
            const Eigen::MatrixXd vn = synthesize(v);
            Eigen::MatrixXd out(g.Ntheta, g.Nt);
            for (int j = 0; j < g.Ntheta; ++j)
                for (int i = 0; i < g.Nt; ++i)
                    out(j, i) = cn * psin(j, i) * std::pow(1.0 + vn(j, i), dim.p());
            N = analyze(as.grid, out);
        }
        rep.residual_norms.push_back(weighted_norm(N, spec));
        rep.residual_sups.push_back(psik.sup_norm);

        // rhs for the fixed operator: c_n psi + Q(u) = N(u) - L_G(u)
        std::map<int, std::array<double, 4>> defic;
        {
            const double eps = as.cfg.eps;
            const double upp0 = dim.a2() * eps - dim.b() * std::pow(eps, dim.p());
            defic[0] = {d.left.alpha_neck / eps, d.left.alpha_trans * upp0 / eps,
                        d.right.alpha_neck / eps, d.right.alpha_trans * upp0 / eps};
        }
        const CylinderField LGu = apply_operator(ctx, defic, v);
        CylinderField rhs = N - LGu;
        // the padding period hosts closure artifacts and the tail taper; the
        // equation is posed on the physical domain
        for (int i = 0; i < g.Nt; ++i)
            if (std::abs(g.tnodes[std::size_t(i)]) > as.B) rhs.coeffs.col(i).setZero();

        SolutionOperatorResult sol = solution_operator(ctx, rhs, tol);
        // u_{k+1} = -G(rhs)
        CylinderField v_next = sol.v;
        v_next *= -1.0;
        std::array<double, 4> c0{};
        if (auto itc = sol.deficiency.find(0); itc != sol.deficiency.end())
            for (int j = 0; j < 4; ++j) c0[std::size_t(j)] = -itc->second[std::size_t(j)];
        std::map<int, std::array<double, 4>> all_neg;
        for (auto& [k, arr] : sol.deficiency) {
            std::array<double, 4> na{};
            for (int j = 0; j < 4; ++j) na[std::size_t(j)] = -arr[std::size_t(j)];
            all_neg[k] = na;
        }
        DeformationParams d_next = deficiency_to_deformation(as, c0, all_neg);

        // hysteresis: re-deforming the background re-integrates the deformed
        // orbit, whose sampling differences sit around 1e-8 in the curvature;
        // once the geometric update falls below that scale, freeze d and fold
        // the remaining deficiency coefficients into the field linearly (the
        // basis elements are ordinary fields), keeping the discrete fixed
        // point exact.
        {
            DeformationParams delta_d;
            delta_d.left.alpha_neck = d_next.left.alpha_neck - d.left.alpha_neck;
            delta_d.left.alpha_trans = d_next.left.alpha_trans - d.left.alpha_trans;
            delta_d.right.alpha_neck = d_next.right.alpha_neck - d.right.alpha_neck;
            delta_d.right.alpha_trans = d_next.right.alpha_trans - d.right.alpha_trans;
            if (delta_d.norm() <= std::max(1e-9, 0.02 * d.norm())) {
                d_next = d;
                const double eps = as.cfg.eps;
                const double upp0 = dim.a2() * eps - dim.b() * std::pow(eps, dim.p());
                std::array<double, 4> c_frozen = {
                    d.left.alpha_neck / eps, d.left.alpha_trans * upp0 / eps,
                    d.right.alpha_neck / eps, d.right.alpha_trans * upp0 / eps};
                ctx.prepare(0);
                const auto& B = ctx.deficiency().elements.at(0);
                for (int j = 0; j < 4; ++j) {
                    const double c_res = c0[std::size_t(j)] - c_frozen[std::size_t(j)];
                    v_next.coeffs.row(0) += c_res * B[std::size_t(j)].transpose();
                }
            }
        }

        // step size and contraction factor
        CylinderField dv = v_next - v;
        DeformationParams dd;
        dd.left.alpha_neck = d_next.left.alpha_neck - d.left.alpha_neck;
        dd.left.alpha_trans = d_next.left.alpha_trans - d.left.alpha_trans;
        dd.right.alpha_neck = d_next.right.alpha_neck - d.right.alpha_neck;
        dd.right.alpha_trans = d_next.right.alpha_trans - d.right.alpha_trans;
        // step measured in the sup metric: the weighted norm amplifies
        // seam-level roundoff by e^{delta R} and would never settle
        const double step = dd.norm() + sup_norm(dv);
        if (prev_step > 0) rep.contraction_factors.push_back(step / prev_step);
        prev_step = step;
        if (it == 0) first_step = step;

        d = d_next;
        v = v_next;
        rep.iterations = it + 1;
        rep.iterate_norms.push_back(iterate_norm(ctx, d, v));

        // stopping: small step and small end-to-end residual at the new state
        if (step <= 0.1 * tol) {
            ApproximateSolution bg_f = deform_background(as, d);
            const PsiField pf = psi(deform_by_factor(bg_f.bg, v), spec);
            rep.final_max_residual = pf.sup_norm;
            if (rep.final_max_residual <= tol) {
                rep.converged = true;
                break;
            }
        }
    }

    if (!rep.converged) {
        ApproximateSolution bg_f = deform_background(as, d);
        const PsiField pf = psi(deform_by_factor(bg_f.bg, v), spec);
        rep.final_max_residual = pf.sup_norm;
        rep.converged = rep.final_max_residual <= tol;
        if (!rep.converged) {
            bool contracting = true;
            for (std::size_t i = 1; i < rep.contraction_factors.size(); ++i)
                if (rep.contraction_factors[i] > 0.5) contracting = false;
            rep.failure = contracting ? "iteration budget exhausted"
                                      : "contraction failure (factor > 1/2 persists)";
        }
    }
    // a-posteriori Banach ball check: the fixed point stays within twice the
    // first correction (the standard 2 |G| |c_n psi| sizing, with |G| |c_n psi|
    // estimated by the first step)
    rep.ball_ok = (d.norm() + sup_norm(v)) <= 2.0 * first_step + 1e-14;
    rep.final_deformation = d;
    rep.final_v = v;
    {
        // report the deficiency coefficients corresponding to the final state
        const double eps = as.cfg.eps;
        const double upp0 = dim.a2() * eps - dim.b() * std::pow(eps, dim.p());
        rep.final_deficiency[0] = {d.left.alpha_neck / eps, d.left.alpha_trans * upp0 / eps,
                                   d.right.alpha_neck / eps,
                                   d.right.alpha_trans * upp0 / eps};
    }
    return rep;
}

std::vector<ProbeRow> nondegeneracy_probe(const GlueConfig& cfg_template,
                                          const std::vector<int>& m_list, double delta,
                                          double tol, double mismatch) {
    std::vector<ProbeRow> rows;
    for (int m : m_list) {
        GlueConfig cfg = cfg_template;
        cfg.m = m;
        ApproximateSolution as = build_approximate_factor(cfg);
        const ZonalGrid& g = *as.grid;

        bool converged = true;
        Eigen::VectorXd w0(g.Nt);
        if (mismatch == 0.0) {
            SolveReport rep = picard_solve(as, delta, tol, 30);
            converged = rep.converged;
            ApproximateSolution bg_f = deform_background(as, rep.final_deformation);
            const ConformalBackground bg_full = deform_by_factor(bg_f.bg, rep.final_v);
            w0 = bg_full.w.coeffs.row(0).transpose();
        } else {
            // negative control: splice mismatched necksizes at the seam
            DelaunayOrbit other = integrate_orbit({cfg.dim, cfg.eps + mismatch, 0.0});
            for (int i = 0; i < g.Nt; ++i) {
                const double t = g.tnodes[std::size_t(i)];
                const double chi = cutoff(t, 0.0, cfg.cutoff_width);
                w0(i) = chi * as.orbit->eval(t).first + (1 - chi) * other.eval(t).first;
            }
            converged = false;
        }

        Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(g.Nt);
        SolverContext ctx(as.grid, as.orbit, as.R, w0, psi0, delta, as.B - as.R);
        for (int k = 0; k <= g.K; ++k) {
            ProbeRow r;
            r.m = m;
            r.R = as.R;
            r.k = k;
            r.sigma_min = ctx.smallest_singular_value(k);
            r.converged = converged;
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace csc
