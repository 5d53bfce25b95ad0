#include "csc/ode.hpp"

#include <algorithm>
#include <cmath>

namespace csc {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// error = y5 - y4
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace

OdeResult integrate_dopri5(const std::function<void(double, const double*, double*)>& rhs,
                           std::vector<double> y0, double t0, double t1,
                           double rtol, double atol, double h_init) {
    const std::size_t dim = y0.size();
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    OdeResult out;
    std::vector<double> y = y0, k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
                        k7(dim), yt(dim), ynew(dim);

    double t = t0;
    rhs(t, y.data(), k1.data());
    out.samples.push_back({t, y, k1});

    double h = h_init > 0 ? h_init : span * 1e-4;
    h = std::min(h, span);
    const double h_min = span * 1e-14 + 1e-300;

    double err_prev = 1.0;
    int stalled = 0;

    while (dir * (t1 - t) > 0) {
        h = std::min(h, std::abs(t1 - t));
        const double hd = dir * h;

        for (std::size_t i = 0; i < dim; ++i) yt[i] = y[i] + hd * a21 * k1[i];
        rhs(t + c2 * hd, yt.data(), k2.data());
        for (std::size_t i = 0; i < dim; ++i)
            yt[i] = y[i] + hd * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * hd, yt.data(), k3.data());
        for (std::size_t i = 0; i < dim; ++i)
            yt[i] = y[i] + hd * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * hd, yt.data(), k4.data());
        for (std::size_t i = 0; i < dim; ++i)
            yt[i] = y[i] + hd * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * hd, yt.data(), k5.data());
        for (std::size_t i = 0; i < dim; ++i)
            yt[i] = y[i] + hd * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        rhs(t + hd, yt.data(), k6.data());
        for (std::size_t i = 0; i < dim; ++i)
            ynew[i] = y[i] + hd * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                   b6 * k6[i]);
        rhs(t + hd, ynew.data(), k7.data());

        // embedded error estimate
        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double e = hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            err = std::max(err, std::abs(e) / sc);
        }

        if (err <= 1.0) {
            t += hd;
            y = ynew;
            k1 = k7; // FSAL
            out.samples.push_back({t, y, k1});
            ++out.n_steps;
            // PI controller
            const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                               std::pow(err_prev, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-10);
            stalled = 0;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            ++out.n_rejected;
            if (++stalled > 60 || h < h_min)
                throw OdeError("integrate_dopri5: step control failed");
        }
        if (out.n_steps > 50'000'000)
            throw OdeError("integrate_dopri5: step budget exhausted");
    }
    return out;
}

void hermite_eval(double ta, const double* ya, const double* dya,
                  double tb, const double* yb, const double* dyb,
                  std::size_t dim, double t, double* y_out, double* dy_out) {
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double g00 = (6 * s2 - 6 * s) / h, g10 = 3 * s2 - 4 * s + 1;
    const double g01 = (6 * s - 6 * s2) / h, g11 = 3 * s2 - 2 * s;
    for (std::size_t i = 0; i < dim; ++i) {
        if (y_out)
            y_out[i] = h00 * ya[i] + h10 * h * dya[i] + h01 * yb[i] + h11 * h * dyb[i];
        if (dy_out)
            dy_out[i] = g00 * ya[i] + g10 * dya[i] + g01 * yb[i] + g11 * dyb[i];
    }
}

double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0) throw std::invalid_argument("brent_root: no sign change");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2 * 1e-16 * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2 * xm * s;
                q = 1 - s;
            } else {
                q = fa / fc; r = fb / fc;
                p = s * (2 * xm * q * (q - r) - (b - a) * (r - 1));
                q = (q - 1) * (r - 1) * (s - 1);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2 * p < std::min(3 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) {
            c = a; fc = fa; d = b - a; e = d;
        }
    }
    return b;
}

std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    // Fornberg, Math. Comp. 51 (1988). Weights for derivative order m at x0.
    const int nn = int(x.size());
    std::vector<double> C(std::size_t(nn) * std::size_t(m + 1), 0.0);
    auto at = [&](int i, int j) -> double& { return C[std::size_t(i) * (m + 1) + j]; };
    double c1 = 1.0;
    double c4 = x[0] - x0;
    at(0, 0) = 1.0;
    for (int i = 1; i < nn; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
                at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k)
                at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
            at(j, 0) = c4 * at(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(nn);
    for (int i = 0; i < nn; ++i) w[i] = at(i, m);
    return w;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    // Newton iteration from Chebyshev initial guesses.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
    }
}

} // namespace csc
