#include "csc/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csc {

namespace {

void validate(const DelaunayParams& p) {
    const double cb = cylinder_value(p.dim);
    if (!(p.eps > 0.0) || p.eps > cb * (1.0 + 1e-12))
        throw std::domain_error("DelaunayParams: eps must lie in (0, cbar]");
    if (!std::isfinite(p.T)) throw std::domain_error("DelaunayParams: T must be finite");
}

bool is_cylinder(const DelaunayParams& p) {
    return std::abs(p.eps - cylinder_value(p.dim)) <= 1e-13 * cylinder_value(p.dim);
}

// Radicand of the turning-point quadrature, written so R(eps) = 0 holds
// exactly: R(u) = a2 [ (u^2 - eps^2) - (u^q - eps^q) ].
double radicand(Dimension dim, double eps, double u) {
    const double a2 = dim.a2(), q = dim.q();
    return a2 * ((u * u - eps * eps) - (std::pow(u, q) - std::pow(eps, q)));
}

} // namespace

double hamiltonian(Dimension dim, double u, double up) {
    if (!(u > 0.0)) throw std::domain_error("hamiltonian: u must be positive");
    const double a2 = dim.a2();
    return up * up - a2 * u * u + a2 * std::pow(u, dim.q());
}

double orbit_max(Dimension dim, double eps) {
    const double cb = cylinder_value(dim);
    if (std::abs(eps - cb) <= 1e-13 * cb) return cb;
    // R(u) rises from 0 at u = eps, peaks, and crosses zero again at u_max < 1.
    double lo = cb; // R(cb) > 0 for eps < cb
    double hi = 1.0;
    while (radicand(dim, eps, hi) > 0) hi += 0.5; // paranoia; u_max < 1 in theory
    return brent_root([&](double u) { return radicand(dim, eps, u); }, lo, hi);
}

double period(const DelaunayParams& params) {
    validate(params);
    const Dimension dim = params.dim;
    if (is_cylinder(params)) return 2.0 * M_PI / std::sqrt(double(dim.n - 2));

    const double eps = params.eps;
    const double umax = orbit_max(dim, eps);

    // Substitution u = (eps+umax)/2 - (umax-eps)/2 cos(phi) removes both
    // square-root singularities; the integrand is smooth in phi and
    // Gauss-Legendre converges rapidly.
    //   T = 2 * int_eps^umax du / sqrt(R(u))
    //     = int_0^pi (umax-eps) sin(phi) dphi / sqrt(R(u(phi)))
    const int N = 240;
    std::vector<double> x, w;
    gauss_legendre(N, x, w);
    const double mid = 0.5 * (eps + umax), half = 0.5 * (umax - eps);
    double T = 0.0;
    for (int i = 0; i < N; ++i) {
        const double phi = 0.5 * M_PI * (x[i] + 1.0);
        const double u = mid - half * std::cos(phi);
        const double s = std::sin(phi);
        const double r = radicand(dim, eps, u);
        if (!(r > 0))
            throw std::runtime_error("period: quadrature hit a nonpositive radicand");
        T += w[i] * (half * s) / std::sqrt(r);
    }
    T *= 0.5 * M_PI; // phi-interval scaling
    return 2.0 * T;
}

OdeResult integrate_ivp(Dimension dim, double u0, double up0, double t0, double t1,
                        double rtol, double atol) {
    const double a2 = dim.a2(), b = dim.b(), p = dim.p();
    auto rhs = [a2, b, p](double, const double* y, double* dy) {
        dy[0] = y[1];
        dy[1] = a2 * y[0] - b * std::pow(y[0], p);
    };
    return integrate_dopri5(rhs, {u0, up0}, t0, t1, rtol, atol);
}

double period_by_events(const DelaunayParams& params, double tol) {
    validate(params);
    if (is_cylinder(params)) return 2.0 * M_PI / std::sqrt(double(params.dim.n - 2));
    const Dimension dim = params.dim;
    // integrate long enough to cover one period, then locate the second zero
    // of u' (min -> max -> min).
    const double T_quad = period(params);
    auto res = integrate_ivp(dim, params.eps, 0.0, 0.0, 1.25 * T_quad, tol, tol * 1e-2);
    const auto& s = res.samples;
    auto up_at = [&](double t) {
        // locate segment and Hermite-evaluate u'
        std::size_t lo = 0, hi = s.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            (s[mid].t <= t ? lo : hi) = mid;
        }
        double y[2], dy[2];
        hermite_eval(s[lo].t, s[lo].y.data(), s[lo].dy.data(), s[lo + 1].t,
                     s[lo + 1].y.data(), s[lo + 1].dy.data(), 2, t, y, dy);
        return y[1];
    };
    // scan for the second sign change of u' after t=0
    int crossings = 0;
    double prev_t = s.front().t, prev_up = 0.0;
    bool have_prev = false;
    for (const auto& smp : res.samples) {
        const double up = smp.y[1];
        if (have_prev && prev_up != 0.0 && up != 0.0 && (prev_up < 0) != (up < 0)) {
            ++crossings;
            if (crossings == 2)
                return brent_root(up_at, prev_t, smp.t, 1e-15);
        }
        if (up != 0.0) {
            prev_t = smp.t;
            prev_up = up;
            have_prev = true;
        }
    }
    throw std::runtime_error("period_by_events: no full period found");
}

DelaunayOrbit integrate_orbit(const DelaunayParams& params, double tol, int n_samples) {
    validate(params);
    const Dimension dim = params.dim;

    DelaunayOrbit orb;
    orb.params = params;
    orb.energy = hamiltonian(dim, params.eps, 0.0);

    if (is_cylinder(params)) {
        const double cb = cylinder_value(dim);
        orb.constant = true;
        orb.period = 2.0 * M_PI / std::sqrt(double(dim.n - 2));
        orb.u_max = cb;
        orb.us.assign(std::size_t(n_samples), cb);
        orb.ups.assign(std::size_t(n_samples), 0.0);
        return orb;
    }

    orb.period = period(params);
    orb.u_max = orbit_max(dim, params.eps);

    // Sequential fixed-substep DP5 refinement onto the uniform sample grid;
    // substeps sized so the accumulated local error stays near roundoff.
    const double h = orb.period / double(n_samples - 1);
    const int nsub = std::max(1, int(std::ceil(h / 6e-4)));
    const double a2 = dim.a2(), b = dim.b(), p = dim.p();
    auto rhs = [a2, b, p](double, const double* y, double* dy) {
        dy[0] = y[1];
        dy[1] = a2 * y[0] - b * std::pow(y[0], p);
    };

    orb.us.resize(std::size_t(n_samples));
    orb.ups.resize(std::size_t(n_samples));
    std::vector<double> y = {params.eps, 0.0};
    orb.us[0] = y[0];
    orb.ups[0] = y[1];
    for (int i = 1; i < n_samples; ++i) {
        const double t0 = (i - 1) * h;
        const double t1 = i * h;
        const double hs = (t1 - t0) / nsub;
        for (int ss = 0; ss < nsub; ++ss) {
            // one forced Dormand-Prince step of size hs
            auto res = integrate_dopri5(rhs, y, t0 + ss * hs, t0 + (ss + 1) * hs,
                                        1e-14, 1e-16, hs);
            y = res.samples.back().y;
        }
        orb.us[std::size_t(i)] = y[0];
        orb.ups[std::size_t(i)] = y[1];
    }

    // sanity: the orbit closes up
    const double close_u = std::abs(orb.us.back() - params.eps);
    const double close_up = std::abs(orb.ups.back());
    if (close_u > 1e4 * tol * params.eps + 1e-9 || close_up > 1e4 * tol + 1e-9)
        throw std::runtime_error("integrate_orbit: orbit failed to close over one period");
    (void)tol;
    return orb;
}

double DelaunayOrbit::upp(double t) const {
    const auto [u, up] = eval(t);
    (void)up;
    return params.dim.a2() * u - params.dim.b() * std::pow(u, params.dim.p());
}

double DelaunayOrbit::uppp(double t) const {
    const auto [u, up] = eval(t);
    const double p = params.dim.p();
    return params.dim.a2() * up - params.dim.b() * p * std::pow(u, p - 1.0) * up;
}

std::pair<double, double> DelaunayOrbit::eval(double t) const {
    if (constant) return {us.front(), 0.0};
    // phase and periodic reduction
    double tau = t + params.T;
    tau -= period * std::floor(tau / period);
    if (tau >= period) tau -= period;
    if (tau < 0) tau = 0;

    const std::size_t n = us.size();
    const double h = period / double(n - 1);
    std::size_t i = std::min(std::size_t(tau / h), n - 2);
    const double t0 = double(i) * h;
    const double s = (tau - t0) / h;

    // quintic Hermite from (u, u', u'') at both segment ends
    const Dimension dim = params.dim;
    const double u0 = us[i], d0 = ups[i];
    const double u1 = us[i + 1], d1 = ups[i + 1];
    const double c0 = dim.a2() * u0 - dim.b() * std::pow(u0, dim.p());
    const double c1 = dim.a2() * u1 - dim.b() * std::pow(u1, dim.p());

    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    // value basis
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    const double H3 = 10 * s3 - 15 * s4 + 6 * s5;
    const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double H5 = 0.5 * s3 - s4 + 0.5 * s5;
    // derivative basis (d/ds)
    const double G0 = -30 * s2 + 60 * s3 - 30 * s4;
    const double G1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    const double G2 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
    const double G3 = 30 * s2 - 60 * s3 + 30 * s4;
    const double G4 = -12 * s2 + 28 * s3 - 15 * s4;
    const double G5 = 1.5 * s2 - 4 * s3 + 2.5 * s4;

    const double u = u0 * H0 + h * d0 * H1 + h * h * c0 * H2 + u1 * H3 + h * d1 * H4 +
                     h * h * c1 * H5;
    const double up = (u0 * G0 + h * d0 * G1 + h * h * c0 * G2 + u1 * G3 + h * d1 * G4 +
                       h * h * c1 * G5) / h;
    return {u, up};
}

} // namespace csc
