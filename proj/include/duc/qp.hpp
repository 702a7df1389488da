#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "duc/common.hpp"

namespace duc {

/// Sentinel for missing bounds; anything at or beyond it is treated as infinite.
inline constexpr double kQpInfinity = 1e20;

/// minimize 1/2 x'Px + q'x  subject to  l <= Ax <= u
struct QuadraticProgram {
    // P is symmetric PSD and stored as its upper triangle (diagonal included);
    // symmetry holds by construction.
    Eigen::SparseMatrix<double> objective_matrix;
    Eigen::VectorXd objective_vector;               // q
    Eigen::SparseMatrix<double> constraint_matrix;  // A
    Eigen::VectorXd lower;                          // l
    Eigen::VectorXd upper;                          // u
    std::vector<std::string> variable_names;        // diagnostics, may be empty
    std::vector<std::string> constraint_names;

    int n_vars() const { return static_cast<int>(objective_vector.size()); }
    int n_constraints() const { return static_cast<int>(lower.size()); }
};

struct QpSettings {
    double eps_abs = 1e-6;
    double eps_rel = 1e-6;
    int max_iters = 20000;
    double step_penalty = 0.1;   // ADMM step rho; adapted during the solve
    double sigma_reg = 1e-6;     // regularization on the linear system
    double alpha = 1.6;          // over-relaxation, in (0,2)
    double cg_tol = 1e-10;       // relative tolerance of the inner CG solve
    int check_interval = 10;
    bool track_objective = false;
};

enum class QpStatus { Solved, MaxIters, Infeasible };

struct QpSolution {
    Eigen::VectorXd x;       // primal
    Eigen::VectorXd z;       // constraint activations, Ax at convergence
    Eigen::VectorXd dual;    // multipliers on l <= Ax <= u
    QpStatus status = QpStatus::MaxIters;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    double objective = 0.0;
    std::vector<double> objective_trace;  // filled when track_objective is set
};

QpSolution solve_qp(const QuadraticProgram& qp, const QpSettings& settings,
                    const QpSolution* warm_start = nullptr);

double qp_objective(const QuadraticProgram& qp, const Eigen::VectorXd& x);

/// Matrix-market-style text listing of (P, q, A, l, u) for debugging.
std::string dump_qp(const QuadraticProgram& qp);

}  // namespace duc
