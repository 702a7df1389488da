#include "duc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace duc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_to_box(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Working copy of the problem after Ruiz equilibration. D scales variables,
// E scales constraints, cost_scale multiplies the objective.
struct ScaledProblem {
    Eigen::SparseMatrix<double> P;
    Eigen::SparseMatrix<double> A;
    Eigen::SparseMatrix<double> At;
    Eigen::VectorXd q, l, u;
    Eigen::VectorXd D, E;
    double cost_scale = 1.0;
    int n = 0, m = 0;
};

ScaledProblem equilibrate(const QuadraticProgram& qp, int passes = 10) {
    ScaledProblem sp;
    sp.n = qp.n_vars();
    sp.m = qp.n_constraints();
    sp.P = qp.objective_matrix;
    sp.A = qp.constraint_matrix;
    sp.q = qp.objective_vector;
    sp.l = qp.lower;
    sp.u = qp.upper;
    for (int i = 0; i < sp.m; ++i) {
        if (sp.l[i] <= -kQpInfinity) sp.l[i] = -kInf;
        if (sp.u[i] >= kQpInfinity) sp.u[i] = kInf;
    }
    sp.D = Eigen::VectorXd::Ones(sp.n);
    sp.E = Eigen::VectorXd::Ones(sp.m);

    Eigen::VectorXd col_norm(sp.n), row_norm(sp.m);
    for (int pass = 0; pass < passes; ++pass) {
        col_norm.setZero();
        row_norm.setZero();
        // P is stored upper-triangular; each entry contributes to both columns.
        for (int k = 0; k < sp.P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sp.P, k); it; ++it) {
                col_norm[it.col()] = std::max(col_norm[it.col()], std::abs(it.value()));
                col_norm[it.row()] = std::max(col_norm[it.row()], std::abs(it.value()));
            }
        for (int k = 0; k < sp.A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sp.A, k); it; ++it) {
                col_norm[it.col()] = std::max(col_norm[it.col()], std::abs(it.value()));
                row_norm[it.row()] = std::max(row_norm[it.row()], std::abs(it.value()));
            }
        Eigen::VectorXd dd(sp.n), de(sp.m);
        for (int j = 0; j < sp.n; ++j)
            dd[j] = (col_norm[j] > 1e-12) ? 1.0 / std::sqrt(col_norm[j]) : 1.0;
        for (int i = 0; i < sp.m; ++i)
            de[i] = (row_norm[i] > 1e-12) ? 1.0 / std::sqrt(row_norm[i]) : 1.0;

        sp.P = dd.asDiagonal() * sp.P * dd.asDiagonal();
        sp.A = de.asDiagonal() * sp.A * dd.asDiagonal();
        sp.q = dd.cwiseProduct(sp.q);
        for (int i = 0; i < sp.m; ++i) {
            if (std::isfinite(sp.l[i])) sp.l[i] *= de[i];
            if (std::isfinite(sp.u[i])) sp.u[i] *= de[i];
        }
        sp.D = sp.D.cwiseProduct(dd);
        sp.E = sp.E.cwiseProduct(de);

        // Cost normalization keeps the objective scale near unity.
        double p_mean = 0.0;
        if (sp.n > 0) {
            Eigen::VectorXd pcol = Eigen::VectorXd::Zero(sp.n);
            for (int k = 0; k < sp.P.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(sp.P, k); it; ++it) {
                    pcol[it.col()] = std::max(pcol[it.col()], std::abs(it.value()));
                    pcol[it.row()] = std::max(pcol[it.row()], std::abs(it.value()));
                }
            p_mean = pcol.mean();
        }
        double q_norm = sp.q.size() ? sp.q.cwiseAbs().maxCoeff() : 0.0;
        double gamma = std::max(p_mean, q_norm);
        gamma = (gamma > 1e-12) ? 1.0 / gamma : 1.0;
        sp.P *= gamma;
        sp.q *= gamma;
        sp.cost_scale *= gamma;
    }
    sp.At = sp.A.transpose();
    return sp;
}

// Diagonally preconditioned conjugate gradient on
// K = P + sigma I + A' diag(rho) A, reusing x as the warm start.
struct CgSolver {
    const ScaledProblem* sp = nullptr;
    double sigma = 0.0;
    Eigen::VectorXd rho_rows;
    Eigen::VectorXd precond;  // diag(K)

    void refresh_preconditioner() {
        precond = Eigen::VectorXd::Constant(sp->n, sigma);
        for (int k = 0; k < sp->P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sp->P, k); it; ++it)
                if (it.row() == it.col()) precond[it.col()] += it.value();
        for (int k = 0; k < sp->A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sp->A, k); it; ++it)
                precond[it.col()] += rho_rows[it.row()] * it.value() * it.value();
        for (int j = 0; j < sp->n; ++j) precond[j] = std::max(precond[j], 1e-12);
    }

    Eigen::VectorXd multiply(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out = sp->P.selfadjointView<Eigen::Upper>() * v + sigma * v;
        if (sp->m > 0) {
            Eigen::VectorXd av = sp->A * v;
            out.noalias() += sp->At * rho_rows.cwiseProduct(av).eval();
        }
        return out;
    }

    int solve(const Eigen::VectorXd& b, Eigen::VectorXd& x, double rel_tol) const {
        Eigen::VectorXd r = b - multiply(x);
        double b_norm = b.norm();
        double tol = std::max(rel_tol * b_norm, 1e-14);
        if (r.norm() <= tol) return 0;
        Eigen::VectorXd z = r.cwiseQuotient(precond);
        Eigen::VectorXd p = z;
        double rz = r.dot(z);
        int max_cg = 4 * sp->n + 20;
        for (int it = 0; it < max_cg; ++it) {
            Eigen::VectorXd kp = multiply(p);
            double denom = p.dot(kp);
            if (denom <= 0.0) return it;
            double step = rz / denom;
            x += step * p;
            r -= step * kp;
            if (r.norm() <= tol) return it + 1;
            Eigen::VectorXd z_next = r.cwiseQuotient(precond);
            double rz_next = r.dot(z_next);
            p = z_next + (rz_next / rz) * p;
            z = z_next;
            rz = rz_next;
        }
        return max_cg;
    }
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double dual_scale = 1.0;
};

Residuals unscaled_residuals(const QuadraticProgram& qp, const ScaledProblem& sp,
                             const Eigen::VectorXd& x_s, const Eigen::VectorXd& y_s) {
    Eigen::VectorXd x = sp.D.cwiseProduct(x_s);
    Eigen::VectorXd y = sp.m > 0 ? (sp.E.cwiseProduct(y_s) / sp.cost_scale).eval() : Eigen::VectorXd();
    Residuals res;
    Eigen::VectorXd px = qp.objective_matrix.selfadjointView<Eigen::Upper>() * x;
    Eigen::VectorXd dual_vec = px + qp.objective_vector;
    double aty_norm = 0.0;
    if (sp.m > 0) {
        Eigen::VectorXd ax = qp.constraint_matrix * x;
        for (int i = 0; i < sp.m; ++i) {
            double lo = qp.lower[i] <= -kQpInfinity ? -kInf : qp.lower[i];
            double hi = qp.upper[i] >= kQpInfinity ? kInf : qp.upper[i];
            res.primal = std::max(res.primal, std::abs(ax[i] - clamp_to_box(ax[i], lo, hi)));
        }
        Eigen::VectorXd aty = qp.constraint_matrix.transpose() * y;
        aty_norm = aty.cwiseAbs().maxCoeff();
        dual_vec += aty;
    }
    res.dual = dual_vec.size() ? dual_vec.cwiseAbs().maxCoeff() : 0.0;
    double px_norm = px.size() ? px.cwiseAbs().maxCoeff() : 0.0;
    double q_norm = qp.objective_vector.size() ? qp.objective_vector.cwiseAbs().maxCoeff() : 0.0;
    res.dual_scale = std::max({px_norm, q_norm, aty_norm, 1e-12});
    return res;
}

}  // namespace

double qp_objective(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
    return 0.5 * x.dot(qp.objective_matrix.selfadjointView<Eigen::Upper>() * x) +
           qp.objective_vector.dot(x);
}

QpSolution solve_qp(const QuadraticProgram& qp, const QpSettings& settings,
                    const QpSolution* warm_start) {
    const int n = qp.n_vars();
    const int m = qp.n_constraints();
    if (qp.objective_matrix.rows() != n || qp.objective_matrix.cols() != n ||
        qp.constraint_matrix.rows() != m || qp.constraint_matrix.cols() != n ||
        qp.lower.size() != m || qp.upper.size() != m)
        throw DimensionError("qp dimensions inconsistent");
    for (int i = 0; i < m; ++i)
        if (qp.lower[i] > qp.upper[i])
            throw ValidationError("qp has l > u at row " + std::to_string(i),
                                  {"l > u at row " + std::to_string(i)});

    ScaledProblem sp = equilibrate(qp);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    if (warm_start && warm_start->x.size() == n) {
        x = sp.D.cwiseInverse().cwiseProduct(warm_start->x);
        if (warm_start->z.size() == m && warm_start->dual.size() == m) {
            z = sp.E.cwiseProduct(warm_start->z);
            y = sp.cost_scale * warm_start->dual.cwiseQuotient(sp.E);
        }
    }

    double rho = settings.step_penalty;
    auto row_rho = [&](double base) {
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) {
            bool equality = std::isfinite(sp.l[i]) && std::isfinite(sp.u[i]) &&
                            (sp.u[i] - sp.l[i]) < 1e-12;
            r[i] = equality ? base * 1e3 : base;
        }
        return r;
    };

    CgSolver cg;
    cg.sp = &sp;
    cg.sigma = settings.sigma_reg;
    cg.rho_rows = row_rho(rho);
    cg.refresh_preconditioner();

    QpSolution sol;
    Eigen::VectorXd x_tilde = x;
    Eigen::VectorXd y_prev = y;

    auto finish = [&](QpStatus status, const Residuals& res, int iter) {
        sol.status = status;
        sol.x = sp.D.cwiseProduct(x);
        sol.z = m > 0 ? sp.E.cwiseInverse().cwiseProduct(z).eval() : Eigen::VectorXd();
        sol.dual = m > 0 ? (sp.E.cwiseProduct(y) / sp.cost_scale).eval() : Eigen::VectorXd();
        sol.primal_residual = res.primal;
        sol.dual_residual = res.dual;
        sol.iterations = iter;
        sol.objective = qp_objective(qp, sol.x);
        return sol;
    };

    for (int iter = 1; iter <= settings.max_iters; ++iter) {
        Eigen::VectorXd rhs = cg.sigma * x - sp.q;
        if (m > 0) rhs.noalias() += sp.At * (cg.rho_rows.cwiseProduct(z) - y).eval();
        cg.solve(rhs, x_tilde, settings.cg_tol);

        if (m > 0) {
            Eigen::VectorXd z_tilde = sp.A * x_tilde;
            Eigen::VectorXd z_relaxed =
                settings.alpha * z_tilde + (1.0 - settings.alpha) * z;
            x = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
            Eigen::VectorXd z_next(m);
            for (int i = 0; i < m; ++i)
                z_next[i] = clamp_to_box(z_relaxed[i] + y[i] / cg.rho_rows[i], sp.l[i], sp.u[i]);
            y += cg.rho_rows.cwiseProduct(z_relaxed - z_next);
            z = z_next;
        } else {
            x = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
        }

        if (iter % settings.check_interval == 0 || iter == settings.max_iters) {
            Residuals res = unscaled_residuals(qp, sp, x, y);
            if (settings.track_objective)
                sol.objective_trace.push_back(qp_objective(qp, sp.D.cwiseProduct(x)));
            bool primal_ok = res.primal <= settings.eps_abs;
            bool dual_ok = res.dual <= settings.eps_abs + settings.eps_rel * res.dual_scale;
            if (primal_ok && dual_ok) return finish(QpStatus::Solved, res, iter);

            // Primal infeasibility certificate from the dual direction.
            if (m > 0) {
                Eigen::VectorXd dy = y - y_prev;
                double dy_norm = dy.cwiseAbs().maxCoeff();
                if (dy_norm > 1e-10) {
                    Eigen::VectorXd dyn = dy / dy_norm;
                    double aty = (sp.At * dyn).cwiseAbs().maxCoeff();
                    double support = 0.0;
                    bool unbounded_dir = false;
                    for (int i = 0; i < m; ++i) {
                        if (dyn[i] > 1e-12) {
                            if (!std::isfinite(sp.u[i])) { unbounded_dir = true; break; }
                            support += sp.u[i] * dyn[i];
                        } else if (dyn[i] < -1e-12) {
                            if (!std::isfinite(sp.l[i])) { unbounded_dir = true; break; }
                            support += sp.l[i] * dyn[i];
                        }
                    }
                    if (!unbounded_dir && aty <= 1e-8 && support <= -1e-8)
                        return finish(QpStatus::Infeasible, res, iter);
                }
                y_prev = y;
            }

            // Rebalance the step penalty when residuals diverge in scale.
            if (iter % (settings.check_interval * 20) == 0 && m > 0) {
                Eigen::VectorXd ax = sp.A * x;
                double prim_scale = std::max({ax.cwiseAbs().maxCoeff(),
                                              z.cwiseAbs().maxCoeff(), 1e-12});
                Eigen::VectorXd px_s = sp.P.selfadjointView<Eigen::Upper>() * x;
                Eigen::VectorXd aty_s = sp.At * y;
                double dual_scale_s = std::max({px_s.cwiseAbs().maxCoeff(),
                                                sp.q.cwiseAbs().maxCoeff(),
                                                aty_s.cwiseAbs().maxCoeff(), 1e-12});
                double rp = (ax - z).cwiseAbs().maxCoeff() / prim_scale;
                double rd = (px_s + sp.q + aty_s).cwiseAbs().maxCoeff() / dual_scale_s;
                double ratio = std::sqrt(std::max(rp, 1e-16) / std::max(rd, 1e-16));
                if (ratio > 5.0 || ratio < 0.2) {
                    rho = std::clamp(rho * ratio, 1e-6, 1e6);
                    cg.rho_rows = row_rho(rho);
                    cg.refresh_preconditioner();
                }
            }
        }
    }
    Residuals res = unscaled_residuals(qp, sp, x, y);
    return finish(QpStatus::MaxIters, res, settings.max_iters);
}

std::string dump_qp(const QuadraticProgram& qp) {
    std::ostringstream os;
    auto put_matrix = [&os](const char* name, const Eigen::SparseMatrix<double>& mat) {
        os << "%% " << name << " " << mat.rows() << " " << mat.cols() << " "
           << mat.nonZeros() << "\n";
        for (int k = 0; k < mat.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat, k); it; ++it)
                os << it.row() << " " << it.col() << " " << util::format_double(it.value())
                   << "\n";
    };
    auto put_vector = [&os](const char* name, const Eigen::VectorXd& v) {
        os << "%% " << name << " " << v.size() << "\n";
        for (int i = 0; i < v.size(); ++i) os << i << " " << util::format_double(v[i]) << "\n";
    };
    put_matrix("P", qp.objective_matrix);
    put_vector("q", qp.objective_vector);
    put_matrix("A", qp.constraint_matrix);
    put_vector("l", qp.lower);
    put_vector("u", qp.upper);
    return os.str();
}

}  // namespace duc
