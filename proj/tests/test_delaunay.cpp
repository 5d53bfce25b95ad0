#include "csc/delaunay.hpp"
#include "harness.hpp"

#include <cmath>

using namespace csc;

namespace {

// independent oracle: u_max^2 solves the energy level set; root-bracketed on
// the radicand directly (duplicates orbit_max through a coarser method)
double umax_oracle(Dimension dim, double eps) {
    const double a2 = dim.a2(), q = dim.q();
    const double H = -a2 * eps * eps + a2 * std::pow(eps, q);
    auto f = [&](double u) { return H + a2 * u * u - a2 * std::pow(u, q); };
    double lo = cylinder_value(dim), hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void test_cylinder_value() {
    harness::section("cylinder_value closed forms");
    CHECK_CLOSE(cylinder_value(Dimension(3)), std::pow(1.0 / 3.0, 0.25), 1e-15);
    CHECK_CLOSE(cylinder_value(Dimension(3)), 0.7598357, 5e-8);
    CHECK_CLOSE(cylinder_value(Dimension(4)), std::sqrt(0.5), 1e-15);
    CHECK_CLOSE(cylinder_value(Dimension(6)), 2.0 / 3.0, 1e-15);
    CHECK_THROWS(Dimension(2));
    CHECK_THROWS(Dimension(10));
}

void test_hamiltonian() {
    harness::section("hamiltonian values");
    CHECK_CLOSE(hamiltonian(Dimension(3), 0.5, 0.0), -0.05859375, 1e-16);
    CHECK_CLOSE(hamiltonian(Dimension(3), 1.0, 0.0), 0.0, 1e-16);
    CHECK_CLOSE(hamiltonian(Dimension(4), 1.0, 0.0), 0.0, 1e-16);
    CHECK_THROWS(hamiltonian(Dimension(3), -1.0, 0.0));
    CHECK_THROWS(hamiltonian(Dimension(3), 0.0, 0.0));
}

void test_homoclinic() {
    harness::section("homoclinic closed form (cosh)");
    // u(t) = cosh(t)^{-(n-2)/2} solves the ODE with u(0)=1, u'(0)=0
    auto res = integrate_ivp(Dimension(3), 1.0, 0.0, 0.0, 1.0, 1e-13, 1e-15);
    const double u1 = res.samples.back().y[0];
    CHECK_CLOSE(u1, std::pow(std::cosh(1.0), -0.5), 1e-11);
    CHECK_CLOSE(u1, 0.8050182, 1e-7);
    // and in n=5
    auto res5 = integrate_ivp(Dimension(5), 1.0, 0.0, 0.0, 1.5, 1e-13, 1e-15);
    CHECK_CLOSE(res5.samples.back().y[0], std::pow(std::cosh(1.5), -1.5), 1e-11);
}

void test_orbit_range() {
    harness::section("orbit range and symmetry");
    const Dimension dim(3);
    DelaunayOrbit orb = integrate_orbit({dim, 0.5, 0.0});
    const double umax = umax_oracle(dim, 0.5);
    CHECK_CLOSE(umax, std::sqrt((-0.25 + std::sqrt(3.8125)) / 2.0), 1e-12);
    double lo = 1e300, hi = 0;
    for (double u : orb.us) {
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK_CLOSE(lo, 0.5, 1e-10);
    CHECK_CLOSE(hi, umax, 1e-9);
    CHECK(hi <= 0.9226517); // the stated enclosing interval
    CHECK(lo > 0);

    // reflection symmetry u(T - t) = u(t)
    double worst = 0;
    for (double t : {0.3, 1.1, 2.7, 0.5 * orb.period}) {
        worst = std::max(worst,
                         std::abs(orb.eval(orb.period - t).first - orb.eval(t).first));
    }
    CHECK_MSG(worst <= 1e-9, "reflection asymmetry %.3e", worst);

    // half-period value is the maximum, derivative zero there
    const auto [uh, uph] = orb.eval(0.5 * orb.period);
    CHECK_CLOSE(uh, umax, 1e-9);
    CHECK_CLOSE(uph, 0.0, 1e-9);
}

void test_orbit_constant() {
    harness::section("eps = cbar constant orbit");
    const Dimension dim(3);
    const double cb = cylinder_value(dim);
    DelaunayOrbit orb = integrate_orbit({dim, cb, 0.0});
    CHECK(orb.constant);
    for (double u : orb.us) CHECK_CLOSE(u, cb, 0.0);
    CHECK_CLOSE(period({dim, cb, 0.0}), 2.0 * M_PI, 1e-14);
}

void test_period() {
    harness::section("period: quadrature vs oracles");
    const Dimension dim(3);
    const double cb = cylinder_value(dim);
    // near the cylinder the period approaches the linearization value 2 pi
    CHECK_CLOSE(period({dim, 0.99 * cb, 0.0}), 2.0 * M_PI, 0.01 * 2.0 * M_PI);
    // quadrature and event detection agree
    const double Tq = period({dim, 0.5, 0.0});
    const double Te = period_by_events({dim, 0.5, 0.0});
    CHECK_MSG(std::abs(Tq - Te) <= 1e-8 * Tq, "Tq=%.12f Te=%.12f", Tq, Te);
    // periods diverge as eps -> 0
    CHECK(period({dim, 0.1, 0.0}) > period({dim, 0.3, 0.0}));
    CHECK_THROWS(period({dim, -0.1, 0.0}));
    CHECK_THROWS(period({dim, 0.9, 0.0}));
}

void test_eval_periodicity() {
    harness::section("eval_u periodicity and phase");
    const Dimension dim(3);
    DelaunayOrbit orb = integrate_orbit({dim, 0.5, 0.0});
    const auto [u0, up0] = orb.eval(0.0);
    CHECK_CLOSE(u0, 0.5, 1e-12);
    CHECK_CLOSE(up0, 0.0, 1e-12);
    const auto [uT, upT] = orb.eval(orb.period);
    CHECK_CLOSE(uT, 0.5, 1e-11);
    CHECK_CLOSE(upT, 0.0, 1e-11);

    for (int k : {1, 7, -3, 40}) {
        for (double t : {0.17, 1.9, 5.2}) {
            const auto a = orb.eval(t);
            const auto b = orb.eval(t + k * orb.period);
            CHECK_CLOSE(a.first, b.first, 1e-12);
            CHECK_CLOSE(a.second, b.second, 1e-12);
        }
    }

    // translation phase: eval at t=0 with phase T gives u(T)
    DelaunayOrbit shifted = orb;
    shifted.params.T = 1.25;
    CHECK_CLOSE(shifted.eval(0.0).first, orb.eval(1.25).first, 1e-13);
}

void test_ode_residual_and_energy() {
    harness::section("ODE residual and energy drift at sample nodes");
    const Dimension dim(4);
    DelaunayOrbit orb = integrate_orbit({dim, 0.4, 0.0});
    double drift = 0, res = 0;
    const double H0 = orb.energy;
    const std::size_t n = orb.us.size();
    const double h = orb.period / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        drift = std::max(drift,
                         std::abs(hamiltonian(dim, orb.us[i], orb.ups[i]) - H0));
        // residual through the interpolated second derivative: compare the
        // ODE's u'' against a centered difference of the sampled u'
        if (i > 0 && i + 1 < n) {
            const double upp_fd = (orb.ups[i + 1] - orb.ups[i - 1]) / (2 * h);
            const double upp_ode = dim.a2() * orb.us[i] - dim.b() * std::pow(orb.us[i], dim.p());
            res = std::max(res, std::abs(upp_fd - upp_ode));
        }
    }
    CHECK_MSG(drift <= 1e-12 * std::abs(H0) + 1e-15, "energy drift %.3e", drift);
    CHECK_MSG(res <= 1e-5, "ODE residual through FD %.3e", res); // FD-limited
}

void test_energy_conservation_long() {
    harness::section("energy conservation over ten periods");
    for (int n : {3, 4, 5}) {
        const Dimension dim(n);
        for (double eps : {0.2, 0.5, 0.7 * cylinder_value(dim) / 0.76}) {
            if (eps >= cylinder_value(dim)) continue;
            const double T = period({dim, eps, 0.0});
            auto res = integrate_ivp(dim, eps, 0.0, 0.0, 10.0 * T, 1e-13, 1e-15);
            const double H0 = hamiltonian(dim, eps, 0.0);
            double drift = 0;
            for (const auto& s : res.samples)
                drift = std::max(drift, std::abs(hamiltonian(dim, s.y[0], s.y[1]) - H0));
            CHECK_MSG(drift / std::abs(H0) <= 1e-10, "n=%d eps=%.3f drift %.3e", n, eps,
                      drift / std::abs(H0));
        }
    }
}

void test_monotone_amplitude() {
    harness::section("monotone necksize -> amplitude");
    const Dimension dim(3);
    double prev = 2.0;
    for (double eps : {0.2, 0.35, 0.5, 0.65}) {
        const double um = orbit_max(dim, eps);
        CHECK(um < prev);
        prev = um;
    }
}

} // namespace

int main() {
    test_cylinder_value();
    test_hamiltonian();
    test_homoclinic();
    test_orbit_range();
    test_orbit_constant();
    test_period();
    test_eval_periodicity();
    test_ode_residual_and_energy();
    test_energy_conservation_long();
    test_monotone_amplitude();
    return harness::finish("delaunay_core");
}
