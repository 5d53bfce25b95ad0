#include "csc/linear_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace csc {

namespace {

using Trip = Eigen::Triplet<double>;

// first-derivative stencil entries at node i over 7 nodes (4th order)
void d1_stencil(const ZonalGrid& g, int i, std::vector<std::pair<int, double>>& out) {
    out.clear();
    const int Nt = g.Nt;
    const double h = g.h;
    if (i >= 3 && i <= Nt - 4) {
        static const double c[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
        for (int j = -2; j <= 2; ++j)
            if (c[j + 2] != 0.0) out.emplace_back(i + j, c[j + 2] / h);
        return;
    }
    const int base = (i < 3) ? 0 : Nt - 7;
    std::vector<double> xs(7);
    for (int j = 0; j < 7; ++j) xs[std::size_t(j)] = (base + j) * h;
    const auto w = fd_weights(i * h, xs, 1);
    for (int j = 0; j < 7; ++j) out.emplace_back(base + j, w[std::size_t(j)]);
}

} // namespace

SolverContext::SolverContext(std::shared_ptr<const ZonalGrid> grid,
                             std::shared_ptr<const DelaunayOrbit> orbit, double R,
                             Eigen::VectorXd w0, Eigen::VectorXd psi0, double delta,
                             double outer_len)
    : grid_(std::move(grid)), orbit_(std::move(orbit)), R_(R), w0_(std::move(w0)),
      psi0_(std::move(psi0)), delta_(delta) {
    const ZonalGrid& g = *grid_;
    if (w0_.size() != g.Nt || psi0_.size() != g.Nt)
        throw std::invalid_argument("SolverContext: radial profile size mismatch");
    if (!(w0_.minCoeff() > 0))
        throw std::domain_error("SolverContext: background must be positive");

    // w0' by the same 4th-order stencils the operator rows use
    w0p_.resize(g.Nt);
    std::vector<std::pair<int, double>> st;
    for (int i = 0; i < g.Nt; ++i) {
        d1_stencil(g, i, st);
        double acc = 0;
        for (auto& [j, c] : st) acc += c * w0_(j);
        w0p_(i) = acc;
    }

    // deficiency cutoffs sit mid-way out on the physical outer regions;
    // sections are deeper, where the cutoffs are identically one.
    const double L_out = (outer_len > 0) ? outer_len : (g.L - R_);
    basis_.cutoff_width = 2.0;
    basis_.cutoff_center_left = -(R_ + 0.5 * L_out);
    basis_.cutoff_center_right = R_ + 0.5 * L_out;
    i_sec_left_ = g.node_index(-(R_ + 0.85 * L_out));
    i_sec_right_ = g.node_index(R_ + 0.85 * L_out);
    t_sec_left_ = g.tnodes[std::size_t(i_sec_left_)];
    t_sec_right_ = g.tnodes[std::size_t(i_sec_right_)];
    if (t_sec_left_ > basis_.cutoff_center_left - 0.5 * basis_.cutoff_width - 0.5)
        throw std::invalid_argument("SolverContext: outer region too short for sections");
}

void SolverContext::build_mode(int k) const {
    const ZonalGrid& g = *grid_;
    const Dimension dim = g.dim;
    const int Nt = g.Nt;
    ModeData md;
    md.lambda = g.lambda(k);
    md.ms = std::make_shared<ModeSolution>(fundamental_pair(*orbit_, ModeIndex{k}));

    const double r = dim.r(), cn = dim.cn();

    // physical rows: L_k phi = w0^{-r}(phi'' + 2(w0'/w0)phi' - lambda phi)
    //                + (n + cn psi0) phi
    auto row_entries = [&](int i, std::vector<std::pair<int, double>>& out) {
        out.clear();
        const double winv = std::pow(w0_(i), -r);
        const double gcoef = 2.0 * w0p_(i) / w0_(i);
        const double diag0 = -md.lambda * winv + dim.n + cn * psi0_(i);
        const double h = g.h;
        if (i >= 3 && i <= Nt - 4) {
            static const double c2[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
            static const double c1[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
            for (int j = -2; j <= 2; ++j) {
                double val = winv * (c2[j + 2] / (h * h) + gcoef * c1[j + 2] / h);
                if (j == 0) val += diag0;
                out.emplace_back(i + j, val);
            }
        } else {
            const int base = (i < 3) ? 0 : Nt - 7;
            std::vector<double> xs(7);
            for (int j = 0; j < 7; ++j) xs[std::size_t(j)] = (base + j) * h;
            const auto w2 = fd_weights(i * h, xs, 2);
            const auto w1 = fd_weights(i * h, xs, 1);
            for (int j = 0; j < 7; ++j) {
                double val = winv * (w2[std::size_t(j)] + gcoef * w1[std::size_t(j)]);
                if (base + j == i) val += diag0;
                out.emplace_back(base + j, val);
            }
        }
    };

    std::vector<Trip> trips_apply, trips_solve, trips_dir;
    std::vector<std::pair<int, double>> entries;
    for (int i = 0; i < Nt; ++i) {
        row_entries(i, entries);
        for (auto& [j, c] : entries) trips_apply.emplace_back(i, j, c);
        if (i > 0 && i < Nt - 1) {
            for (auto& [j, c] : entries) {
                trips_solve.emplace_back(i, j, c);
                trips_dir.emplace_back(i, j, c);
            }
        }
    }

    // content-extraction rows: coefficients of the local solution basis at
    // the two sections from (phi, phi') there.
    auto content_row = [&](int isec, bool pick_first, bool floquet_basis) {
        Eigen::SparseVector<double> row(Nt);
        const double t = g.tnodes[std::size_t(isec)];
        double b00, b01, b10, b11; // columns = basis vectors (value, deriv)
        if (!floquet_basis) {
            const auto y = md.ms->eval(t);
            b00 = y[0]; b10 = y[1]; // v+
            b01 = y[2]; b11 = y[3]; // v-
        } else {
            const auto yp = md.dec_plus->eval(t);         // decays t -> +inf
            const auto ym = md.dec_plus->eval(-t);        // reflected: decays t -> -inf
            b00 = yp[0]; b10 = yp[1];
            b01 = ym[0]; b11 = -ym[1];
        }
        const double det = b00 * b11 - b01 * b10;
        // row of the inverse picking the requested coefficient
        double cv, cd;
        if (pick_first) { cv = b11 / det; cd = -b01 / det; }
        else { cv = -b10 / det; cd = b00 / det; }
        std::vector<std::pair<int, double>> st;
        d1_stencil(g, isec, st);
        row.coeffRef(isec) += cv;
        for (auto& [j, c] : st) row.coeffRef(j) += cd * c;
        return row;
    };

    if (k >= 1) {
        md.dec_plus = std::make_shared<FloquetProfile>(
            select_decaying_solution(*orbit_, ModeIndex{k}, +1));
    }

    const bool floq = (k >= 1);
    // directions: [left: growing-at-left, left: other, right: growing-at-right, right: other]
    // For k=0 "growing at left" means the v+ (linearly growing) coefficient;
    // the closure pair is (v+ at left, v- at right) which pins the kernel.
    md.content_rows[0] = content_row(i_sec_left_, true, floq);   // left, first dir
    md.content_rows[1] = content_row(i_sec_left_, false, floq);  // left, second dir
    md.content_rows[2] = content_row(i_sec_right_, true, floq);  // right, first dir
    md.content_rows[3] = content_row(i_sec_right_, false, floq); // right, second dir

    // closure rows (normalized: the kill condition is scale-free)
    auto push_row = [&](std::vector<Trip>& trips, int i, const Eigen::SparseVector<double>& row) {
        double mx = 0;
        for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it)
            mx = std::max(mx, std::abs(it.value()));
        for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it)
            trips.emplace_back(i, int(it.index()), it.value() / mx);
    };
    if (k >= 2) {
        // Robin decay rows from the frozen Floquet log-derivative
        std::vector<std::pair<int, double>> st;
        const double sigL = [&] {
            const auto ym = md.dec_plus->eval(-g.tnodes[0]); // left-decaying at -B
            return -ym[1] / ym[0];
        }();
        d1_stencil(g, 0, st);
        for (auto& [j, c] : st) trips_solve.emplace_back(0, j, c);
        trips_solve.emplace_back(0, 0, -sigL);
        const double sigR = md.dec_plus->log_deriv(g.tnodes[std::size_t(Nt - 1)]);
        d1_stencil(g, Nt - 1, st);
        for (auto& [j, c] : st) trips_solve.emplace_back(Nt - 1, j, c);
        trips_solve.emplace_back(Nt - 1, Nt - 1, -sigR);
    } else {
        // content-killing closures: left kills the component growing toward
        // the left boundary, right kills the one growing toward the right.
        // k=0: (v+ left, v- right); k=1: (s+ left, s- right).
        push_row(trips_solve, 0, md.content_rows[0]);
        push_row(trips_solve, Nt - 1, md.content_rows[3]);
    }

    // stripped variant: plain Dirichlet rows
    trips_dir.emplace_back(0, 0, 1.0);
    trips_dir.emplace_back(Nt - 1, Nt - 1, 1.0);

    md.A_apply.resize(Nt, Nt);
    md.A_apply.setFromTriplets(trips_apply.begin(), trips_apply.end());
    md.A_solve.resize(Nt, Nt);
    md.A_solve.setFromTriplets(trips_solve.begin(), trips_solve.end());
    md.A_dirichlet.resize(Nt, Nt);
    md.A_dirichlet.setFromTriplets(trips_dir.begin(), trips_dir.end());

    md.lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    md.lu->compute(md.A_solve);
    if (md.lu->info() != Eigen::Success)
        throw std::runtime_error("SolverContext: singular bordered system (possible degeneracy)");
    md.lu_dirichlet = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    md.lu_dirichlet->compute(md.A_dirichlet);

    if (k <= 1) {
        md.vplus_nodal.resize(Nt);
        md.vminus_nodal.resize(Nt);
        for (int i = 0; i < Nt; ++i) {
            const auto y = md.ms->eval(g.tnodes[std::size_t(i)]);
            md.vplus_nodal(i) = y[0];
            md.vminus_nodal(i) = y[2];
        }
        // deficiency basis elements: cutoff-localized fundamental solutions
        Eigen::VectorXd chiL(Nt), chiR(Nt);
        for (int i = 0; i < Nt; ++i) {
            const double t = g.tnodes[std::size_t(i)];
            chiL(i) = cutoff_c4(t, basis_.cutoff_center_left, basis_.cutoff_width);
            chiR(i) = 1.0 - cutoff_c4(t, basis_.cutoff_center_right, basis_.cutoff_width);
        }
        basis_.elements[k] = {chiL.cwiseProduct(md.vplus_nodal),
                              chiL.cwiseProduct(md.vminus_nodal),
                              chiR.cwiseProduct(md.vplus_nodal),
                              chiR.cwiseProduct(md.vminus_nodal)};
    }
    modes_.emplace(k, std::move(md));
}

const SolverContext::ModeData& SolverContext::mode(int k) const {
    auto it = modes_.find(k);
    if (it == modes_.end()) {
        build_mode(k);
        it = modes_.find(k);
    }
    return it->second;
}

Eigen::VectorXd SolverContext::apply_mode(int k, const Eigen::VectorXd& profile) const {
    return mode(k).A_apply * profile;
}

void SolverContext::prepare(int k) const { mode(k); }

std::array<double, 2> SolverContext::nondecaying_contents(int k, const Eigen::VectorXd& v) const {
    const ModeData& md = mode(k);
    return {md.content_rows[0].dot(v), md.content_rows[3].dot(v)};
}

ModeSolveResult SolverContext::solve_mode(int k, const Eigen::VectorXd& rhs, double tol,
                                          const SolveOptions& opt) const {
    const ZonalGrid& g = *grid_;
    const int Nt = g.Nt;
    const ModeData& md = mode(k);

    Eigen::VectorXd r0 = rhs;
    r0(0) = 0.0;
    r0(Nt - 1) = 0.0;

    ModeSolveResult out;
    if (opt.strip_deficiency) {
        out.v = md.lu_dirichlet->solve(r0);
    } else if (opt.raw_bordered) {
        out.v = md.lu->solve(r0);
    } else {
        Eigen::VectorXd phi = md.lu->solve(r0);
        if (k == 0) {
            // remaining contents and the minimal-norm deficiency split
            const double beta_L = md.content_rows[1].dot(phi);  // v- at left
            const double alpha_R = md.content_rows[2].dot(phi); // v+ at right
            const double a = -0.5 * alpha_R, b = -0.5 * beta_L;
            Eigen::VectorXd u = phi + a * md.vplus_nodal + b * md.vminus_nodal;
            out.deficiency_coeffs = {a, beta_L + b, alpha_R + a, b};
            const auto& B = basis_.elements.at(0);
            out.v = u;
            for (int j = 0; j < 4; ++j) out.v -= out.deficiency_coeffs[std::size_t(j)] * B[std::size_t(j)];
        } else {
            out.v = phi; // closures certify both ends; min-norm coefficients are zero
        }
    }

    // certification: non-decaying contents of the decaying part
    out.certification = nondecaying_contents(k, out.v);
    if (k == 0 && !opt.strip_deficiency) {
        // the two complementary contents as well
        const double c1 = mode(0).content_rows[1].dot(out.v);
        const double c2 = mode(0).content_rows[2].dot(out.v);
        out.certification[0] = std::max(std::abs(out.certification[0]), std::abs(c1));
        out.certification[1] = std::max(std::abs(out.certification[1]), std::abs(c2));
    }

    // interior residual of the full (deficiency + decaying) solution
    Eigen::VectorXd full = out.v;
    if (k <= 1 && !opt.strip_deficiency && !opt.raw_bordered) {
        const auto& B = basis_.elements.at(k);
        for (int j = 0; j < 4; ++j) full += out.deficiency_coeffs[std::size_t(j)] * B[std::size_t(j)];
    }
    Eigen::VectorXd res = md.A_apply * full - rhs;
    res(0) = 0;
    res(Nt - 1) = 0;
    out.residual_norm = res.cwiseAbs().maxCoeff();
    WeightedNormSpec spec{delta_, R_};
    const double rhs_norm = std::max(weighted_norm_radial(g, rhs, spec), 1e-300);
    double cnorm = 0;
    for (double c : out.deficiency_coeffs) cnorm += c * c;
    out.bound_constant =
        (std::sqrt(cnorm) + weighted_norm_radial(g, out.v, spec)) / rhs_norm;
    out.decay_bound = decay_norm_radial(g, out.v, spec) /
                      std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    out.tolerance_met =
        out.residual_norm <= tol * std::max(1.0, rhs.cwiseAbs().maxCoeff());
    return out;
}

double SolverContext::smallest_singular_value(int k, const SolveOptions& opt) const {
    const ModeData& md = mode(k);
    const auto& lu = opt.strip_deficiency ? md.lu_dirichlet : md.lu;
    const auto& A = opt.strip_deficiency ? md.A_dirichlet : md.A_solve;
    const Eigen::SparseMatrix<double> At = A.transpose();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> luT;
    luT.compute(At);
    if (lu->info() != Eigen::Success || luT.info() != Eigen::Success) return 0.0;

    // power iteration on (A^T A)^{-1}: x <- A^{-1} A^{-T} x
    Eigen::VectorXd x = Eigen::VectorXd::Ones(grid_->Nt).normalized();
    double s2 = 0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXd y = luT.solve(x);
        y = lu->solve(y);
        const double ny = y.norm();
        if (!(ny > 0) || !std::isfinite(ny)) return 0.0;
        s2 = ny;
        x = y / ny;
    }
    return 1.0 / std::sqrt(s2);
}

SolutionOperatorResult solution_operator(const SolverContext& ctx, const CylinderField& rhs,
                                         double tol) {
    const ZonalGrid& g = *rhs.grid;
    SolutionOperatorResult out;
    out.v = CylinderField(rhs.grid);
    double bc = 0, rn = 0;
    for (int k = 0; k <= g.K; ++k) {
        Eigen::VectorXd rk = rhs.coeffs.row(k).transpose();
        ModeSolveResult mr = ctx.solve_mode(k, rk, tol);
        out.v.coeffs.row(k) = mr.v.transpose();
        if (k <= 1) out.deficiency[k] = mr.deficiency_coeffs;
        bc = std::max(bc, mr.bound_constant);
        rn = std::max(rn, mr.residual_norm);
        out.tolerance_met = out.tolerance_met && mr.tolerance_met;
    }
    out.bound_constant = bc;
    out.residual_norm = rn;
    return out;
}

CylinderField apply_operator(const SolverContext& ctx,
                             const std::map<int, std::array<double, 4>>& deficiency,
                             const CylinderField& v) {
    const ZonalGrid& g = *v.grid;
    CylinderField out(v.grid);
    for (int k = 0; k <= g.K; ++k) {
        ctx.prepare(k);
        Eigen::VectorXd profile = v.coeffs.row(k).transpose();
        auto it = deficiency.find(k);
        if (it != deficiency.end()) {
            const auto& B = ctx.deficiency().elements.at(k);
            for (int j = 0; j < 4; ++j) profile += it->second[std::size_t(j)] * B[std::size_t(j)];
        }
        out.coeffs.row(k) = ctx.apply_mode(k, profile).transpose();
    }
    return out;
}

std::vector<UniformityRow> uniformity_sweep(const GlueConfig& cfg_template,
                                            const std::vector<int>& m_list,
                                            const std::vector<int>& modes, double tol,
                                            bool strip_deficiency) {
    if (m_list.size() < 4)
        throw std::invalid_argument("uniformity_sweep: need at least 4 values of m");
    std::vector<UniformityRow> rows;
    for (int m : m_list) {
        GlueConfig cfg = cfg_template;
        cfg.m = m;
        ApproximateSolution as = build_approximate_factor(cfg);
        const ZonalGrid& g = *as.grid;
        Eigen::VectorXd w0(g.Nt), psi0 = Eigen::VectorXd::Zero(g.Nt);
        for (int i = 0; i < g.Nt; ++i)
            w0(i) = as.orbit->eval(g.tnodes[std::size_t(i)]).first;
        SolverContext ctx(as.grid, as.orbit, as.R, w0, psi0, cfg.delta, as.B - as.R);
        Eigen::VectorXd probe(g.Nt);
        for (int i = 0; i < g.Nt; ++i) {
            const double t = g.tnodes[std::size_t(i)];
            probe(i) = std::exp(-2.0 * t * t);
        }
        for (int k : modes) {
            SolveOptions opt{strip_deficiency, false};
            ModeSolveResult r = ctx.solve_mode(k, probe, tol, opt);
            UniformityRow row;
            row.m = m;
            row.R = as.R;
            row.k = k;
            row.bound_constant = r.bound_constant;
            row.decay_bound = r.decay_bound;
            row.smallest_singular_value = ctx.smallest_singular_value(k, opt);
            rows.push_back(row);
        }
    }
    return rows;
}

FiniteCylinderResult finite_cylinder_solve(const DelaunayOrbit& orbit, int k, double T_half,
                                           const std::function<double(double)>& rhs,
                                           double delta, double tol,
                                           std::optional<std::array<double, 2>> dirichlet,
                                           double nodes_per_unit) {
    const Dimension dim = orbit.params.dim;
    const int Nt = int(std::lround(2.0 * T_half * nodes_per_unit)) + 1;
    auto grid = make_grid(dim, T_half, Nt, std::max(k, 1));
    auto orb = std::make_shared<const DelaunayOrbit>(orbit);

    Eigen::VectorXd w0(grid->Nt), psi0 = Eigen::VectorXd::Zero(grid->Nt);
    for (int i = 0; i < grid->Nt; ++i)
        w0(i) = orb->eval(grid->tnodes[std::size_t(i)]).first;

    // treat the outermost stretch as the "outer region" so the closure
    // sections and deficiency cutoffs fit inside the finite cylinder
    const double Rctx = T_half - std::min(6.0, 0.5 * T_half);
    SolverContext ctx(grid, orb, Rctx, w0, psi0, delta);

    Eigen::VectorXd r(grid->Nt);
    for (int i = 0; i < grid->Nt; ++i) r(i) = rhs(grid->tnodes[std::size_t(i)]);

    FiniteCylinderResult out;
    out.grid = grid;
    if (!dirichlet) {
        // the finite-cylinder operator has no outer ends: the raw bordered
        // solution (bounded boundary values, no decay split) is the answer
        ModeSolveResult mr = ctx.solve_mode(k, r, tol, {false, true});
        out.v = mr.v;
        out.residual_norm = mr.residual_norm;
    } else {
        // Dirichlet rows with the given boundary values
        Eigen::VectorXd r0 = r;
        r0(0) = (*dirichlet)[0];
        r0(grid->Nt - 1) = (*dirichlet)[1];
        // rebuild a small dedicated system
        ModeSolveResult mr = ctx.solve_mode(k, r, tol, {true});
        // strip_deficiency uses homogeneous Dirichlet; correct the boundary
        // values with the homogeneous-solution pair.
        (void)mr;
        Eigen::VectorXd v = ctx.solve_mode(k, r, tol, {true}).v;
        // add a (v+, v-) combination matching the requested boundary values
        ModeSolution ms = fundamental_pair(*orb, ModeIndex{k});
        const auto yl = ms.eval(grid->tnodes[0]);
        const auto yr = ms.eval(grid->tnodes[std::size_t(grid->Nt - 1)]);
        Eigen::Matrix2d M;
        M << yl[0], yl[2], yr[0], yr[2];
        Eigen::Vector2d b((*dirichlet)[0] - v(0), (*dirichlet)[1] - v(grid->Nt - 1));
        Eigen::Vector2d ab = M.fullPivLu().solve(b);
        for (int i = 0; i < grid->Nt; ++i) {
            const auto y = ms.eval(grid->tnodes[std::size_t(i)]);
            v(i) += ab(0) * y[0] + ab(1) * y[2];
        }
        out.v = v;
        Eigen::VectorXd res = ctx.apply_mode(k, out.v) - r;
        res(0) = res(grid->Nt - 1) = 0;
        out.residual_norm = weighted_norm_radial(*grid, res, {delta, T_half});
    }
    WeightedNormSpec spec{delta, T_half};
    const double rn = std::max(weighted_norm_radial(*grid, r, spec), 1e-300);
    out.bound_constant = weighted_norm_radial(*grid, out.v, spec) / rn;
    return out;
}

} // namespace csc
