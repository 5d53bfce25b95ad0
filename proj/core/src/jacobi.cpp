#include "csc/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csc {

namespace {

// rhs of the first-order system for q columns of (v, v')
struct ModeRhs {
    const DelaunayOrbit* orbit;
    double lambda;
    void operator()(double t, const double* y, double* dy) const {
        const auto [u, up] = orbit->eval(t);
        const double c = orbit->params.dim.n * std::pow(u, orbit->params.dim.r()) - lambda;
        const double g = 2.0 * up / u;
        // columns packed as (v, v') pairs
        dy[0] = y[1];
        dy[1] = -g * y[1] - c * y[0];
        dy[2] = y[3];
        dy[3] = -g * y[3] - c * y[2];
    }
};

std::array<double, 4> matmul2(const std::array<double, 4>& A, const std::array<double, 4>& B) {
    return {A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
            A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3]};
}

// ad - bc with Kahan's fma compensation; full relative accuracy under
// cancellation.
double det2_kahan(double a, double b, double c, double d) {
    const double w = b * c;
    const double e = std::fma(-b, c, w);
    const double f = std::fma(a, d, -w);
    return f + e;
}

std::array<double, 4> matpow2(std::array<double, 4> M, long m) {
    // det(M) = 1, so the inverse is the adjugate
    if (m < 0) {
        M = {M[3], -M[1], -M[2], M[0]};
        m = -m;
    }
    std::array<double, 4> R = {1, 0, 0, 1};
    while (m > 0) {
        if (m & 1) R = matmul2(R, M);
        M = matmul2(M, M);
        m >>= 1;
    }
    return R;
}

} // namespace

std::pair<double, long> mode_eigenvalue(Dimension dim, ModeIndex mk) {
    if (mk.k < 0) throw std::domain_error("mode_eigenvalue: k must be >= 0");
    const long k = mk.k, n = dim.n;
    const double lambda = double(k) * double(k + n - 2);
    auto binom = [](long a, long b) -> long {
        if (b < 0 || b > a) return 0;
        long r = 1;
        for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
        return r;
    };
    const long mult = (k == 0) ? 1 : binom(k + n - 1, k) - binom(k + n - 3, k - 2);
    return {lambda, mult};
}

ModeSolution fundamental_pair(const DelaunayOrbit& orbit, ModeIndex mk, double tol,
                              int n_samples) {
    if (orbit.params.T != 0.0)
        throw std::invalid_argument("fundamental_pair: orbit must be neck-anchored (T = 0)");
    ModeSolution ms;
    ms.params = orbit.params;
    ms.k = mk.k;
    ms.lambda = mode_eigenvalue(orbit.params.dim, mk).first;
    ms.period = orbit.period;
    ms.orbit = &orbit;

    ModeRhs rhs{&orbit, ms.lambda};
    const double T = orbit.period;
    const double h = T / double(n_samples - 1);
    const int nsub = std::max(1, int(std::ceil(h / 6e-4)));

    ms.samples.resize(std::size_t(n_samples));
    ms.wronskian_samples.resize(std::size_t(n_samples));
    std::vector<double> y = {1, 0, 0, 1};
    ms.samples[0] = {1, 0, 0, 1};
    ms.wronskian_samples[0] = 1.0;

    // alongside the fundamental pair, run an orthonormal frame whose interval
    // transfer determinants accumulate the Wronskian at O(1) scale
    double q1v = 1.0, q1d = 0.0, q2v = 0.0, q2d = 1.0;
    double wrun = 1.0;

    auto step_interval = [&](std::vector<double>& state, double t0, double hs,
                             int nsubs) {
        for (int ss = 0; ss < nsubs; ++ss) {
            auto res = integrate_dopri5([&rhs](double t, const double* yy, double* dy) { rhs(t, yy, dy); },
                                        state, t0 + ss * hs, t0 + (ss + 1) * hs, 1e-13,
                                        1e-15, std::abs(hs));
            state = res.samples.back().y;
        }
    };

    for (int i = 1; i < n_samples; ++i) {
        const double t0 = (i - 1) * h, t1 = i * h;
        const double hs = (t1 - t0) / nsub;
        step_interval(y, t0, hs, nsub);
        ms.samples[std::size_t(i)] = {y[0], y[1], y[2], y[3]};

        std::vector<double> q = {q1v, q1d, q2v, q2d};
        step_interval(q, t0, hs, nsub);
        wrun *= det2_kahan(q[0], q[2], q[1], q[3]);
        ms.wronskian_samples[std::size_t(i)] = wrun;
        // re-orthonormalize with exact determinant +1
        const double nq = std::hypot(q[0], q[1]);
        q1v = q[0] / nq;
        q1d = q[1] / nq;
        q2v = -q1d;
        q2d = q1v;
    }
    (void)tol;

    // monodromy = value of the fundamental matrix at T, columns (v+, v-)
    const auto& last = ms.samples.back();
    ms.monodromy = {last[0], last[2], last[1], last[3]};
    ms.det = wrun;

    const double tr = ms.monodromy[0] + ms.monodromy[3];
    if (std::abs(tr) <= 2.0 + 1e-6) {
        ms.gamma = 0.0;
    } else {
        const double mu = 0.5 * (std::abs(tr) + std::sqrt(tr * tr - 4.0));
        ms.gamma = std::log(mu) / T;
    }
    return ms;
}

std::array<double, 4> ModeSolution::eval(double t) const {
    // the background is even about the neck, so v+ is even and v- odd; the
    // parity continuation avoids the catastrophic cancellation of Y(tau) M^{-m}
    if (t < 0) {
        const auto y = eval(-t);
        return {y[0], -y[1], -y[2], y[3]};
    }
    const double T = period;
    double m_real = std::floor(t / T);
    double tau = t - m_real * T;
    if (tau >= T) {
        tau -= T;
        m_real += 1;
    }
    const long m = long(m_real);
    if (std::abs(m_real) > 200)
        throw std::domain_error("ModeSolution::eval: period count out of range");

    // Hermite within [0, T]
    const std::size_t n = samples.size();
    const double h = T / double(n - 1);
    std::size_t i = std::min(std::size_t(tau / h), n - 2);
    const double t0i = double(i) * h;

    // cubic Hermite per component pair, then correct with quintic via v''
    auto comp = [&](int base) -> std::array<double, 2> {
        const double v0 = samples[i][std::size_t(base)], d0 = samples[i][std::size_t(base) + 1];
        const double v1 = samples[i + 1][std::size_t(base)], d1 = samples[i + 1][std::size_t(base) + 1];
        // second derivatives from the ODE at the segment ends
        const auto [ua, upa] = orbit->eval(t0i);
        const auto [ub, upb] = orbit->eval(t0i + h);
        const double ca = params.dim.n * std::pow(ua, params.dim.r()) - lambda;
        const double cb = params.dim.n * std::pow(ub, params.dim.r()) - lambda;
        const double dd0 = -2.0 * upa / ua * d0 - ca * v0;
        const double dd1 = -2.0 * upb / ub * d1 - cb * v1;

        const double s = (tau - t0i) / h;
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
        const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
        const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
        const double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        const double H3 = 10 * s3 - 15 * s4 + 6 * s5;
        const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
        const double H5 = 0.5 * s3 - s4 + 0.5 * s5;
        const double G0 = -30 * s2 + 60 * s3 - 30 * s4;
        const double G1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
        const double G2 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
        const double G3 = 30 * s2 - 60 * s3 + 30 * s4;
        const double G4 = -12 * s2 + 28 * s3 - 15 * s4;
        const double G5 = 1.5 * s2 - 4 * s3 + 2.5 * s4;
        const double v = v0 * H0 + h * d0 * H1 + h * h * dd0 * H2 + v1 * H3 + h * d1 * H4 +
                         h * h * dd1 * H5;
        const double d = (v0 * G0 + h * d0 * G1 + h * h * dd0 * G2 + v1 * G3 + h * d1 * G4 +
                          h * h * dd1 * G5) / h;
        return {v, d};
    };
    const auto vp = comp(0);
    const auto vm = comp(2);

    if (m == 0) return {vp[0], vp[1], vm[0], vm[1]};

    // continuation: the fundamental matrix satisfies Y(tau + mT) = Y(tau) M^m
    const auto Mm = matpow2(monodromy, m);
    // Y(tau) columns are (v+, v-)
    const double a = vp[0], b = vm[0], c = vp[1], d = vm[1];
    return {a * Mm[0] + b * Mm[2], c * Mm[0] + d * Mm[2],
            a * Mm[1] + b * Mm[3], c * Mm[1] + d * Mm[3]};
}

double ModeSolution::wronskian(double t) const {
    // interpolate the renormalized accumulation; W' = -2(u'/u) W supplies the
    // derivative data, and W(t + mT) = det^m W(t)
    const double T = period;
    double m_real = std::floor(t / T);
    double tau = t - m_real * T;
    if (tau >= T) {
        tau -= T;
        m_real += 1;
    }
    const std::size_t n = wronskian_samples.size();
    const double h = T / double(n - 1);
    std::size_t i = std::min(std::size_t(tau / h), n - 2);
    const double t0i = double(i) * h;

    const double w0 = wronskian_samples[i], w1 = wronskian_samples[i + 1];
    const auto [ua, upa] = orbit->eval(t0i);
    const auto [ub, upb] = orbit->eval(t0i + h);
    const double d0 = -2.0 * upa / ua * w0;
    const double d1 = -2.0 * upb / ub * w1;
    double wv, wd;
    const double ya[1] = {w0}, dya[1] = {d0}, yb[1] = {w1}, dyb[1] = {d1};
    hermite_eval(t0i, ya, dya, t0i + h, yb, dyb, 1, tau, &wv, &wd);
    return wv * std::pow(det, m_real);
}

double wronskian(const ModeSolution& ms, double t) { return ms.wronskian(t); }

std::array<double, 4> monodromy(const DelaunayOrbit& orbit, ModeIndex k) {
    return fundamental_pair(orbit, k).monodromy;
}

double indicial_root(const DelaunayOrbit& orbit, ModeIndex k) {
    return fundamental_pair(orbit, k).gamma;
}

GrowthFit growth_rate_fit(const DelaunayOrbit& orbit, ModeIndex mk, int n_periods) {
    if (n_periods < 5)
        throw std::invalid_argument("growth_rate_fit: need a span of at least 5 periods");
    const double lambda = mode_eigenvalue(orbit.params.dim, mk).first;
    ModeRhs rhs{&orbit, lambda};
    const double T = orbit.period;
    const double rt2 = std::sqrt(0.5);
    std::vector<double> y = {rt2, rt2, 0, 0}; // generic seed in the first column

    GrowthFit fit;
    std::vector<double> logmax;
    for (int per = 0; per < n_periods; ++per) {
        // fine fixed sampling of max |v| over this period
        const int nn = 256;
        double mx = std::abs(y[0]);
        const double t0 = per * T;
        for (int i = 1; i <= nn; ++i) {
            auto res = integrate_dopri5([&rhs](double t, const double* yy, double* dy) { rhs(t, yy, dy); },
                                        y, t0 + (i - 1) * T / nn, t0 + i * T / nn, 1e-12, 1e-300);
            y = res.samples.back().y;
            mx = std::max(mx, std::abs(y[0]));
        }
        logmax.push_back(std::log(mx));
    }
    // skip the first period (transient), regress log max against period midpoints
    const int m0 = 1;
    const int npts = n_periods - m0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < npts; ++i) {
        const double x = (m0 + i + 1) * T;
        sx += x;
        sy += logmax[std::size_t(m0 + i)];
        sxx += x * x;
        sxy += x * logmax[std::size_t(m0 + i)];
    }
    const double denom = npts * sxx - sx * sx;
    fit.rate = (npts * sxy - sx * sy) / denom;
    double ss = 0;
    const double icpt = (sy - fit.rate * sx) / npts;
    for (int i = 0; i < npts; ++i) {
        const double x = (m0 + i + 1) * T;
        const double r = logmax[std::size_t(m0 + i)] - (icpt + fit.rate * x);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / npts);
    fit.reliable = (fit.rate > 0.1) && (fit.residual < 0.05 * std::max(1.0, fit.rate * T));
    return fit;
}

FloquetProfile select_decaying_solution(const DelaunayOrbit& orbit, ModeIndex mk,
                                        int direction) {
    ModeSolution ms = fundamental_pair(orbit, mk);
    if (ms.gamma <= 0.0)
        throw std::domain_error("select_decaying_solution: no decaying Floquet solution (gamma = 0)");
    const double T = orbit.period;
    const auto& M = ms.monodromy;
    const double tr = M[0] + M[3];
    if (tr < 0)
        throw std::runtime_error("select_decaying_solution: negative Floquet multipliers unsupported");
    const double mu_big = 0.5 * (tr + std::sqrt(tr * tr - 4.0));
    const double mu_dec = 1.0 / mu_big; // det = 1

    // eigenvector for mu_dec; pick the better-scaled row form
    double v0 = M[1], v1 = mu_dec - M[0];
    {
        const double w0 = mu_dec - M[3], w1 = M[2];
        if (std::hypot(w0, w1) > std::hypot(v0, v1)) {
            v0 = w0;
            v1 = w1;
        }
    }
    const double nv = std::hypot(v0, v1);
    v0 /= nv;
    v1 /= nv;

    // integrate backwards from T with terminal data mu_dec * v: backward in
    // time the decaying mode dominates, so contamination by the growing one
    // dies off instead of being amplified.
    ModeRhs rhs{&orbit, ms.lambda};
    const int n_samples = int(ms.samples.size());
    const double h = T / double(n_samples - 1);
    const int nsub = std::max(1, int(std::ceil(h / 6e-4)));

    FloquetProfile fp;
    fp.k = mk.k;
    fp.gamma = ms.gamma;
    fp.period = T;
    fp.direction = direction;
    fp.orbit = &orbit;
    fp.samples.resize(std::size_t(n_samples));

    std::vector<double> y = {mu_dec * v0, mu_dec * v1, 0, 0};
    fp.samples[std::size_t(n_samples - 1)] = {y[0], y[1]};
    for (int i = n_samples - 2; i >= 0; --i) {
        const double t1 = (i + 1) * h, t0 = i * h;
        const double hs = (t1 - t0) / nsub;
        for (int ss = 0; ss < nsub; ++ss) {
            auto res = integrate_dopri5([&rhs](double t, const double* yy, double* dy) { rhs(t, yy, dy); },
                                        y, t1 - ss * hs, t1 - (ss + 1) * hs, 1e-13, 1e-16, hs);
            y = res.samples.back().y;
        }
        fp.samples[std::size_t(i)] = {y[0], y[1]};
    }

    const double s0 = fp.samples[0][0];
    if (std::abs(s0) < 1e-8)
        throw std::runtime_error("select_decaying_solution: profile vanishes at the reference neck");
    for (auto& s : fp.samples) {
        s[0] /= s0;
        s[1] /= s0;
    }
    return fp;
}

std::array<double, 2> FloquetProfile::eval(double t) const {
    const double tt = (direction > 0) ? t : -t;
    const double T = period;
    double m_real = std::floor(tt / T);
    double tau = tt - m_real * T;
    if (tau >= T) {
        tau -= T;
        m_real += 1;
    }
    // s(tau + mT) = e^{-gamma T m} s(tau)
    const double scale = std::exp(-gamma * T * m_real);

    const std::size_t n = samples.size();
    const double h = T / double(n - 1);
    std::size_t i = std::min(std::size_t(tau / h), n - 2);
    const double t0i = double(i) * h;

    const double v0 = samples[i][0], d0 = samples[i][1];
    const double v1 = samples[i + 1][0], d1 = samples[i + 1][1];
    const auto [ua, upa] = orbit->eval(t0i);
    const auto [ub, upb] = orbit->eval(t0i + h);
    const double lambda = double(ModeIndex{k}.k) * double(k + orbit->params.dim.n - 2);
    const double ca = orbit->params.dim.n * std::pow(ua, orbit->params.dim.r()) - lambda;
    const double cb = orbit->params.dim.n * std::pow(ub, orbit->params.dim.r()) - lambda;
    const double dd0 = -2.0 * upa / ua * d0 - ca * v0;
    const double dd1 = -2.0 * upb / ub * d1 - cb * v1;

    const double s = (tau - t0i) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    const double H3 = 10 * s3 - 15 * s4 + 6 * s5;
    const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double H5 = 0.5 * s3 - s4 + 0.5 * s5;
    const double G0 = -30 * s2 + 60 * s3 - 30 * s4;
    const double G1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    const double G2 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
    const double G3 = 30 * s2 - 60 * s3 + 30 * s4;
    const double G4 = -12 * s2 + 28 * s3 - 15 * s4;
    const double G5 = 1.5 * s2 - 4 * s3 + 2.5 * s4;
    double v = v0 * H0 + h * d0 * H1 + h * h * dd0 * H2 + v1 * H3 + h * d1 * H4 +
               h * h * dd1 * H5;
    double d = (v0 * G0 + h * d0 * G1 + h * h * dd0 * G2 + v1 * G3 + h * d1 * G4 +
                h * h * dd1 * G5) / h;
    v *= scale;
    d *= scale;
    if (direction < 0) d = -d; // chain rule of the reflection
    return {v, d};
}

double FloquetProfile::log_deriv(double t) const {
    const auto [s, sp] = eval(t);
    return sp / s;
}

ExpansionCoefficients expansion_coefficients(double f, double fp, const ModeSolution& ms,
                                             double t0) {
    const auto y = ms.eval(t0);
    const double vp = y[0], vpp = y[1], vm = y[2], vmp = y[3];
    const double W = ms.wronskian(t0);
    ExpansionCoefficients out;
    const double scale = std::max({std::abs(vp), std::abs(vm), std::abs(f)});
    if (!(std::abs(W) > 0) || scale > 1e120 || !std::isfinite(scale)) {
        out.ill_conditioned = true;
        return out;
    }
    out.a_plus = (f * vmp - vm * fp) / W;
    out.a_minus = -(f * vpp - vp * fp) / W;
    // both basis elements huge next to the Wronskian: extraction is noise
    if (scale * scale * 1e-16 > std::abs(W) * 1e-4) out.ill_conditioned = true;
    return out;
}

std::vector<IndicialRow> indicial_sweep(Dimension dim, const std::vector<double>& eps_list,
                                        int k_max) {
    std::vector<IndicialRow> rows;
    for (double eps : eps_list) {
        const DelaunayOrbit orbit = integrate_orbit({dim, eps, 0.0});
        for (int k = 0; k <= k_max; ++k) {
            ModeSolution ms = fundamental_pair(orbit, ModeIndex{k});
            IndicialRow r;
            r.n = dim.n;
            r.eps = eps;
            r.k = k;
            r.lambda = ms.lambda;
            r.gamma = ms.gamma;
            r.trace = ms.monodromy[0] + ms.monodromy[3];
            r.det = ms.det;
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace csc
