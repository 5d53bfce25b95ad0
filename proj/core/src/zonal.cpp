#include "csc/zonal.hpp"

#include "csc/ode.hpp"

#include <cmath>
#include <stdexcept>

namespace csc {

namespace {

// Gegenbauer C_k^alpha and derivative by the three-term recurrence,
// normalized afterwards to Z_k = C_k/C_k(1).
void gegenbauer_eval(int K, double alpha, double x, std::vector<double>& C,
                     std::vector<double>& Cp) {
    C.assign(std::size_t(K + 1), 0.0);
    Cp.assign(std::size_t(K + 1), 0.0);
    C[0] = 1.0;
    if (K >= 1) {
        C[1] = 2.0 * alpha * x;
        Cp[1] = 2.0 * alpha;
    }
    for (int k = 2; k <= K; ++k) {
        C[std::size_t(k)] = (2.0 * (k + alpha - 1) * x * C[std::size_t(k - 1)] -
                             (k + 2 * alpha - 2) * C[std::size_t(k - 2)]) / k;
        Cp[std::size_t(k)] = (2.0 * (k + alpha - 1) * (C[std::size_t(k - 1)] + x * Cp[std::size_t(k - 1)]) -
                              (k + 2 * alpha - 2) * Cp[std::size_t(k - 2)]) / k;
    }
}

// n = 3 has alpha = 1/2 (Legendre); general n gives alpha = (n-2)/2.
double zonal_alpha(Dimension dim) { return 0.5 * double(dim.n - 2); }

} // namespace

double log_cosh(double t) {
    const double a = std::abs(t);
    return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

ZonalGrid::ZonalGrid(Dimension dim_, double L_, int Nt_, int K_, int Ntheta_)
    : dim(dim_), L(L_), Nt(Nt_), K(K_), Ntheta(Ntheta_) {
    if (Nt < 5) throw std::invalid_argument("ZonalGrid: need at least 5 t nodes");
    if (K < 0) throw std::invalid_argument("ZonalGrid: K must be >= 0");
    const int ntheta_min = int(std::ceil(0.5 * (3.0 * K + 2.0)));
    // default to the cubic-safe count: the Taylor-remainder nonlinearity is
    // not purely quadratic, and cubic products alias right at the 3/2 bound
    if (Ntheta == 0) Ntheta = std::max(ntheta_min, 2 * K + 2);
    if (Ntheta < ntheta_min)
        throw std::invalid_argument("ZonalGrid: Ntheta below the dealiasing bound ceil((3K+2)/2)");

    h = 2.0 * L / double(Nt - 1);
    tnodes.resize(std::size_t(Nt));
    for (int i = 0; i < Nt; ++i) tnodes[std::size_t(i)] = -L + i * h;

    const double beta = 0.5 * double(dim.n - 3);
    gauss_gegenbauer(Ntheta, beta, xnodes, xweights);

    const double alpha = zonal_alpha(dim);
    synth.resize(Ntheta, K + 1);
    synth_dx.resize(Ntheta, K + 1);
    std::vector<double> C, Cp, C1, Cp1;
    gegenbauer_eval(K, alpha, 1.0, C1, Cp1);
    for (int j = 0; j < Ntheta; ++j) {
        gegenbauer_eval(K, alpha, xnodes[std::size_t(j)], C, Cp);
        for (int k = 0; k <= K; ++k) {
            synth(j, k) = C[std::size_t(k)] / C1[std::size_t(k)];
            synth_dx(j, k) = Cp[std::size_t(k)] / C1[std::size_t(k)];
        }
    }

    // analysis by quadrature: c_k = <f, Z_k>_w / <Z_k, Z_k>_w
    analyze_op.resize(K + 1, Ntheta);
    for (int k = 0; k <= K; ++k) {
        double hk = 0.0;
        for (int j = 0; j < Ntheta; ++j)
            hk += xweights[std::size_t(j)] * synth(j, k) * synth(j, k);
        for (int j = 0; j < Ntheta; ++j)
            analyze_op(k, j) = xweights[std::size_t(j)] * synth(j, k) / hk;
    }
}

int ZonalGrid::node_index(double t) const {
    int i = int(std::lround((t + L) / h));
    return std::min(std::max(i, 0), Nt - 1);
}

std::shared_ptr<const ZonalGrid> make_grid(Dimension dim, double L, int Nt, int K,
                                           int Ntheta) {
    return std::make_shared<const ZonalGrid>(dim, L, Nt, K, Ntheta);
}

CylinderField& CylinderField::operator+=(const CylinderField& o) {
    coeffs += o.coeffs;
    return *this;
}
CylinderField& CylinderField::operator-=(const CylinderField& o) {
    coeffs -= o.coeffs;
    return *this;
}
CylinderField& CylinderField::operator*=(double c) {
    coeffs *= c;
    return *this;
}
CylinderField operator+(CylinderField a, const CylinderField& b) { return a += b; }
CylinderField operator-(CylinderField a, const CylinderField& b) { return a -= b; }
CylinderField operator*(double c, CylinderField a) { return a *= c; }

CylinderField analyze(std::shared_ptr<const ZonalGrid> grid, const Eigen::MatrixXd& nodal) {
    if (nodal.rows() != grid->Ntheta || nodal.cols() != grid->Nt)
        throw std::invalid_argument("analyze: nodal shape mismatch");
    CylinderField f(grid);
    f.coeffs = grid->analyze_op * nodal;
    return f;
}

Eigen::MatrixXd synthesize(const CylinderField& f) { return f.grid->synth * f.coeffs; }

Eigen::MatrixXd synthesize_dx(const CylinderField& f) {
    return f.grid->synth_dx * f.coeffs;
}

namespace {

// 4th-order derivative rows; interior centered, 6-node one-sided near edges.
void apply_derivative(const ZonalGrid& g, const Eigen::MatrixXd& in, Eigen::MatrixXd& out,
                      int order) {
    const int Nt = g.Nt;
    if (Nt < 7) throw std::invalid_argument("derivative: grid too small (< 7 t-nodes)");
    const double h = g.h;
    out.resize(in.rows(), Nt);

    static const double c1[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    static const double c2[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};

    // precompute one-sided weights for the 2 nodes at each boundary
    std::vector<double> xs(7);
    for (int j = 0; j < 7; ++j) xs[std::size_t(j)] = j * h;
    auto w_at = [&](int pos) { return fd_weights(pos * h, xs, order); };
    const auto w0 = w_at(0), w1 = w_at(1);

    const double hp = (order == 1) ? h : h * h;
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
        for (int i = 0; i < Nt; ++i) {
            double acc = 0.0;
            if (i >= 2 && i <= Nt - 3) {
                const double* c = (order == 1) ? c1 : c2;
                for (int j = -2; j <= 2; ++j) acc += c[j + 2] * in(r, i + j);
                acc /= hp;
            } else if (i < 2) {
                const auto& w = (i == 0) ? w0 : w1;
                for (int j = 0; j < 7; ++j) acc += w[std::size_t(j)] * in(r, j);
            } else {
                const auto& w = (i == Nt - 1) ? w0 : w1;
                for (int j = 0; j < 7; ++j) {
                    const double sign = (order == 1) ? -1.0 : 1.0;
                    acc += sign * w[std::size_t(j)] * in(r, Nt - 1 - j);
                }
            }
            out(r, i) = acc;
        }
    }
}

} // namespace

CylinderField cylinder_laplacian(const CylinderField& f) {
    const ZonalGrid& g = *f.grid;
    CylinderField out(f.grid);
    Eigen::MatrixXd dtt;
    apply_derivative(g, f.coeffs, dtt, 2);
    for (int k = 0; k <= g.K; ++k)
        out.coeffs.row(k) = dtt.row(k) - g.lambda(k) * f.coeffs.row(k);
    return out;
}

CylinderField d_dt(const CylinderField& f) {
    CylinderField out(f.grid);
    Eigen::MatrixXd dt;
    apply_derivative(*f.grid, f.coeffs, dt, 1);
    out.coeffs = dt;
    return out;
}

namespace {

double weight_at(double t, const WeightedNormSpec& spec) {
    const double at = std::abs(t);
    if (at <= spec.R) return std::exp(spec.delta * (log_cosh(spec.R) - log_cosh(t)));
    return std::exp(-spec.delta * (at - spec.R));
}

double decay_weight_at(double t, const WeightedNormSpec& spec) {
    const double at = std::abs(t);
    if (at <= spec.R) return std::exp(spec.delta * (log_cosh(t) - log_cosh(spec.R)));
    return std::exp(spec.delta * (at - spec.R));
}

} // namespace

double weighted_norm(const CylinderField& f, const WeightedNormSpec& spec) {
    const ZonalGrid& g = *f.grid;
    const Eigen::MatrixXd nodal = synthesize(f);
    double nrm = 0.0;
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        if (std::abs(t) > spec.sup_limit) continue;
        const double w = weight_at(t, spec);
        const double colmax = nodal.col(i).cwiseAbs().maxCoeff();
        nrm = std::max(nrm, w * colmax);
    }
    return nrm;
}

double weighted_norm_radial(const ZonalGrid& grid, const Eigen::VectorXd& profile,
                            const WeightedNormSpec& spec) {
    double nrm = 0.0;
    for (int i = 0; i < grid.Nt; ++i) {
        const double t = grid.tnodes[std::size_t(i)];
        if (std::abs(t) > spec.sup_limit) continue;
        nrm = std::max(nrm, weight_at(t, spec) * std::abs(profile(i)));
    }
    return nrm;
}

double decay_norm_radial(const ZonalGrid& grid, const Eigen::VectorXd& profile,
                         const WeightedNormSpec& spec) {
    double nrm = 0.0;
    for (int i = 0; i < grid.Nt; ++i) {
        const double t = grid.tnodes[std::size_t(i)];
        if (std::abs(t) > spec.sup_limit) continue;
        nrm = std::max(nrm, decay_weight_at(t, spec) * std::abs(profile(i)));
    }
    return nrm;
}

} // namespace csc
