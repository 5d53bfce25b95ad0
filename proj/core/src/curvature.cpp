#include "csc/curvature.hpp"

#include <cmath>
#include <stdexcept>

namespace csc {

namespace {

Eigen::MatrixXd nodal_of(const CylinderField& f) { return synthesize(f); }

void check_positive(const Eigen::MatrixXd& w_nodal, const char* who) {
    if (!(w_nodal.minCoeff() > 0.0))
        throw std::domain_error(std::string(who) + ": conformal factor must stay positive");
}

} // namespace

double sup_norm(const CylinderField& f) {
    return synthesize(f).cwiseAbs().maxCoeff();
}

ConformalBackground delaunay_background(std::shared_ptr<const ZonalGrid> grid,
                                        std::shared_ptr<const DelaunayOrbit> orbit) {
    ConformalBackground bg;
    bg.grid = grid;
    bg.w = CylinderField(grid);
    for (int i = 0; i < grid->Nt; ++i)
        bg.w.coeffs(0, i) = orbit->eval(grid->tnodes[std::size_t(i)]).first;
    bg.has_split = true;
    bg.base_u = [orbit](double t) { return orbit->eval(t).first; };
    bg.base_upp = [orbit](double t) { return orbit->upp(t); };
    bg.tau = CylinderField(grid);
    return bg;
}

ConformalBackground radial_background(std::shared_ptr<const ZonalGrid> grid,
                                      const std::function<double(double)>& w_of_t) {
    ConformalBackground bg;
    bg.grid = grid;
    bg.w = CylinderField(grid);
    for (int i = 0; i < grid->Nt; ++i)
        bg.w.coeffs(0, i) = w_of_t(grid->tnodes[std::size_t(i)]);
    return bg;
}

CylinderField scalar_curvature(const ConformalBackground& bg) {
    const ZonalGrid& g = *bg.grid;
    const Dimension dim = g.dim;
    const Eigen::MatrixXd w_nodal = nodal_of(bg.w);
    check_positive(w_nodal, "scalar_curvature");

    const CylinderField lap = cylinder_laplacian(bg.w);
    const Eigen::MatrixXd lap_nodal = synthesize(lap);

    const double scyl = dim.cylinder_curvature();
    const double cprime = 4.0 * double(dim.n - 1) / double(dim.n - 2);
    Eigen::MatrixXd s_nodal(w_nodal.rows(), w_nodal.cols());
    for (Eigen::Index j = 0; j < w_nodal.rows(); ++j)
        for (Eigen::Index i = 0; i < w_nodal.cols(); ++i) {
            const double w = w_nodal(j, i);
            s_nodal(j, i) = std::pow(w, -dim.p()) * (scyl * w - cprime * lap_nodal(j, i));
        }
    return analyze(bg.grid, s_nodal);
}

namespace {

// perturbation form of the numerator of psi:
//   psi = w^{-p} [ c' Lap w - (n-1)(n-2) w + n(n-1) w^p ],
// with the base's contribution cancelled analytically through its ODE, so
// every term is O(tau)-sized and|the seam signal keeps relative accuracy.
Eigen::MatrixXd psi_nodal_split(const ConformalBackground& bg) {
    const ZonalGrid& g = *bg.grid;
    const Dimension dim = g.dim;
    const double cprime = 4.0 * double(dim.n - 1) / double(dim.n - 2);
    const double lin = dim.cylinder_curvature(); // (n-1)(n-2)
    const double nl = dim.target_curvature();    // n(n-1)
    const double p = dim.p();

    const CylinderField lap_tau = cylinder_laplacian(bg.tau);
    const Eigen::MatrixXd lap_tau_nodal = synthesize(lap_tau);
    const Eigen::MatrixXd tau_nodal = synthesize(bg.tau);

    Eigen::MatrixXd out(g.Ntheta, g.Nt);
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        const double u = bg.base_u(t);
        const double up2 = std::pow(u, p);
        for (int j = 0; j < g.Ntheta; ++j) {
            const double tau = tau_nodal(j, i);
            const double w = u + tau;
            if (!(w > 0.0))
                throw std::domain_error("psi: conformal factor must stay positive");
            // n(n-1) [ (u+tau)^p - u^p ] with full relative accuracy at tiny tau
            const double pow_diff = up2 * std::expm1(p * std::log1p(tau / u));
            const double numer = cprime * lap_tau_nodal(j, i) - lin * tau + nl * pow_diff;
            out(j, i) = numer * std::exp(-p * std::log(w));
        }
    }
    return out;
}

} // namespace

PsiField psi(const ConformalBackground& bg, const WeightedNormSpec& spec,
             double splice_half) {
    const ZonalGrid& g = *bg.grid;
    PsiField out;
    out.spec = spec;
    out.splice_half = splice_half;

    Eigen::MatrixXd psi_nodal;
    if (bg.has_split) {
        psi_nodal = psi_nodal_split(bg);
    } else {
        const CylinderField s = scalar_curvature(bg);
        psi_nodal = -synthesize(s);
        psi_nodal.array() += g.dim.target_curvature();
    }
    out.psi = analyze(bg.grid, psi_nodal);

    double sup = 0.0, sup_splice = 0.0;
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        if (std::abs(t) > spec.sup_limit) continue;
        const double colmax = psi_nodal.col(i).cwiseAbs().maxCoeff();
        sup = std::max(sup, colmax);
        if (std::abs(t) <= splice_half) sup_splice = std::max(sup_splice, colmax);
    }
    out.sup_norm = sup;
    double lo = g.L, hi = -g.L;
    const double floor = 1e-3 * out.sup_norm;
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        if (std::abs(t) > spec.sup_limit) continue;
        const double colmax = psi_nodal.col(i).cwiseAbs().maxCoeff();
        if (colmax > floor) {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    }
    out.sup_splice = sup_splice;
    if (lo > hi) lo = hi = 0.0;
    out.support_lo = lo;
    out.support_hi = hi;
    out.weighted = weighted_norm(out.psi, spec);
    return out;
}

CylinderField linearized_jacobi(const ConformalBackground& bg, const CylinderField& psi_f,
                                const CylinderField& v) {
    const ZonalGrid& g = *bg.grid;
    if (v.grid.get() != bg.grid.get() || psi_f.grid.get() != bg.grid.get())
        throw std::invalid_argument("linearized_jacobi: grid mismatch");
    const Dimension dim = g.dim;

    const Eigen::MatrixXd w_nodal = nodal_of(bg.w);
    check_positive(w_nodal, "linearized_jacobi");
    const Eigen::MatrixXd psi_nodal = nodal_of(psi_f);
    const Eigen::MatrixXd v_nodal = nodal_of(v);

    // log w and its t-derivative (FD), x-derivative (spectral)
    Eigen::MatrixXd logw(g.Ntheta, g.Nt);
    for (int j = 0; j < g.Ntheta; ++j)
        for (int i = 0; i < g.Nt; ++i) logw(j, i) = std::log(w_nodal(j, i));
    CylinderField logw_f = analyze(bg.grid, logw);

    const Eigen::MatrixXd dlogw_dt = synthesize(d_dt(logw_f));
    const Eigen::MatrixXd dlogw_dx = synthesize_dx(logw_f);
    const Eigen::MatrixXd dv_dt = synthesize(d_dt(v));
    const Eigen::MatrixXd dv_dx = synthesize_dx(v);
    const Eigen::MatrixXd lap_v = synthesize(cylinder_laplacian(v));

    Eigen::MatrixXd out(g.Ntheta, g.Nt);
    const double cn = dim.cn();
    for (int j = 0; j < g.Ntheta; ++j) {
        const double x = g.xnodes[std::size_t(j)];
        const double sin2 = 1.0 - x * x; // <d theta a, d theta b> = (1-x^2) a_x b_x
        for (int i = 0; i < g.Nt; ++i) {
            const double grad = dlogw_dt(j, i) * dv_dt(j, i) +
                                sin2 * dlogw_dx(j, i) * dv_dx(j, i);
            const double lap_g = std::pow(w_nodal(j, i), -dim.r()) *
                                 (lap_v(j, i) + 2.0 * grad);
            out(j, i) = lap_g + dim.n * v_nodal(j, i) + cn * psi_nodal(j, i) * v_nodal(j, i);
        }
    }
    return analyze(bg.grid, out);
}

CylinderField nonlinear_remainder(const CylinderField& v) {
    const ZonalGrid& g = *v.grid;
    const Dimension dim = g.dim;
    const double p = dim.p(), A = dim.b(); // n(n-2)/4
    const Eigen::MatrixXd v_nodal = synthesize(v);
    Eigen::MatrixXd out(v_nodal.rows(), v_nodal.cols());
    for (Eigen::Index j = 0; j < v_nodal.rows(); ++j)
        for (Eigen::Index i = 0; i < v_nodal.cols(); ++i) {
            const double vv = v_nodal(j, i);
            if (!(1.0 + vv > 0.0))
                throw std::domain_error("nonlinear_remainder: 1 + v must stay positive");
            out(j, i) = A * (std::expm1(p * std::log1p(vv)) - p * vv);
        }
    return analyze(v.grid, out);
}

CylinderField residual(const ConformalBackground& bg, const CylinderField& psi_field,
                       const CylinderField& v) {
    CylinderField out = linearized_jacobi(bg, psi_field, v);
    out += nonlinear_remainder(v);
    CylinderField affine = psi_field;
    affine *= bg.grid->dim.cn();
    out += affine;
    return out;
}

ConformalBackground deform_by_factor(const ConformalBackground& bg, const CylinderField& v) {
    const Eigen::MatrixXd w_nodal = nodal_of(bg.w);
    const Eigen::MatrixXd v_nodal = synthesize(v);
    Eigen::MatrixXd new_w = w_nodal.array() * (1.0 + v_nodal.array());
    check_positive(new_w, "deform_by_factor");

    ConformalBackground out;
    out.grid = bg.grid;
    out.w = analyze(bg.grid, new_w);
    if (bg.has_split) {
        out.has_split = true;
        out.base_u = bg.base_u;
        out.base_upp = bg.base_upp;
        // w(1+v) = base + [tau + w v]
        Eigen::MatrixXd tau_nodal = synthesize(bg.tau) + (w_nodal.array() * v_nodal.array()).matrix();
        out.tau = analyze(bg.grid, tau_nodal);
    }
    return out;
}

CylinderField residual_via_curvature(const ConformalBackground& bg, const CylinderField& v) {
    const Dimension dim = bg.grid->dim;
    const ConformalBackground deformed = deform_by_factor(bg, v);

    Eigen::MatrixXd psi_nodal;
    if (deformed.has_split) {
        WeightedNormSpec spec{1.5, std::max(0.0, bg.grid->L - 1.0)};
        psi_nodal = synthesize(psi(deformed, spec).psi);
    } else {
        psi_nodal = -synthesize(scalar_curvature(deformed));
        psi_nodal.array() += dim.target_curvature();
    }
    const Eigen::MatrixXd v_nodal = synthesize(v);
    Eigen::MatrixXd out(bg.grid->Ntheta, bg.grid->Nt);
    for (int j = 0; j < bg.grid->Ntheta; ++j)
        for (int i = 0; i < bg.grid->Nt; ++i)
            out(j, i) = dim.cn() * psi_nodal(j, i) *
                        std::pow(1.0 + v_nodal(j, i), dim.p());
    return analyze(bg.grid, out);
}

} // namespace csc
