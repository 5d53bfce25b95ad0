#include "csc/ode.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace csc {

void gauss_gegenbauer(int n, double beta, std::vector<double>& x, std::vector<double>& w) {
    // Golub-Welsch on the Jacobi(beta, beta) three-term recurrence.
    // Weight (1-x^2)^beta on [-1,1]; beta > -1.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        // symmetric Jacobi: alpha_k = 0; off-diagonal
        // b_k^2 = k(k+2b)(k+b)^2 / ((2k+2b-1)(2k+2b)^2(2k+2b+1)) * 4 ... use the
        // standard Jacobi(β,β) form instead:
        const double kk = k;
        const double num = 4.0 * kk * (kk + beta) * (kk + beta) * (kk + 2 * beta);
        const double den = (2 * kk + 2 * beta - 1) * std::pow(2 * kk + 2 * beta, 2) *
                           (2 * kk + 2 * beta + 1);
        const double bk = std::sqrt(num / den);
        J(k, k - 1) = bk;
        J(k - 1, k) = bk;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::sqrt(M_PI) * std::exp(std::lgamma(beta + 1.0) - std::lgamma(beta + 1.5));
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        w[i] = mu0 * v0 * v0;
    }
}

} // namespace csc
