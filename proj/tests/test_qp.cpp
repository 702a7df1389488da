#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "duc/qp.hpp"

using namespace duc;

namespace {

Eigen::SparseMatrix<double> sparse_from_dense_upper(const Eigen::MatrixXd& dense) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < dense.rows(); ++i)
        for (int j = i; j < dense.cols(); ++j)
            if (dense(i, j) != 0.0) trip.emplace_back(i, j, dense(i, j));
    Eigen::SparseMatrix<double> out(dense.rows(), dense.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Eigen::SparseMatrix<double> identity_sparse(int n) {
    Eigen::SparseMatrix<double> out(n, n);
    out.setIdentity();
    return out;
}

// Box-constrained strictly convex problem with dense symmetric P.
struct BoxQp {
    Eigen::MatrixXd P;
    Eigen::VectorXd q, lo, hi;

    QuadraticProgram to_program() const {
        QuadraticProgram qp;
        qp.objective_matrix = sparse_from_dense_upper(P);
        qp.objective_vector = q;
        qp.constraint_matrix = identity_sparse(static_cast<int>(q.size()));
        qp.lower = lo;
        qp.upper = hi;
        return qp;
    }
    double objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(P * x) + q.dot(x); }
};

BoxQp random_box_qp(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    BoxQp p;
    p.P = m.transpose() * m + 0.5 * Eigen::MatrixXd::Identity(n, n);
    p.q = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return normal(rng); });
    p.lo = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return -0.7 + 0.2 * normal(rng); });
    p.hi = p.lo.array() + 1.2;
    return p;
}

// Oracle: projected gradient descent run to a tight fixed-point tolerance.
Eigen::VectorXd projected_gradient_oracle(const BoxQp& p, double tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.P);
    double step = 1.0 / es.eigenvalues().maxCoeff();
    Eigen::VectorXd x = 0.5 * (p.lo + p.hi);
    for (int it = 0; it < 2000000; ++it) {
        Eigen::VectorXd g = p.P * x + p.q;
        Eigen::VectorXd next = (x - step * g).cwiseMax(p.lo).cwiseMin(p.hi);
        if ((next - x).lpNorm<Eigen::Infinity>() < tol) return next;
        x = next;
    }
    return x;
}

// Oracle: enumerate every {lower, upper, free} activity pattern and keep the
// best feasible candidate. Exact for box-constrained convex QPs.
double active_set_enumeration_oracle(const BoxQp& p) {
    const int n = static_cast<int>(p.q.size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pattern(n, 0);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (long code = 0; code < total; ++code) {
        long c = code;
        std::vector<int> free_idx;
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
            pattern[i] = static_cast<int>(c % 3);
            c /= 3;
            if (pattern[i] == 0)
                x[i] = p.lo[i];
            else if (pattern[i] == 1)
                x[i] = p.hi[i];
            else
                free_idx.push_back(i);
        }
        if (!free_idx.empty()) {
            int f = static_cast<int>(free_idx.size());
            Eigen::MatrixXd pff(f, f);
            Eigen::VectorXd rhs(f);
            for (int a = 0; a < f; ++a) {
                rhs[a] = -p.q[free_idx[a]];
                for (int b = 0; b < f; ++b) pff(a, b) = p.P(free_idx[a], free_idx[b]);
                for (int i = 0; i < n; ++i)
                    if (pattern[i] != 2) rhs[a] -= p.P(free_idx[a], i) * x[i];
            }
            Eigen::VectorXd xf = pff.ldlt().solve(rhs);
            bool feasible = true;
            for (int a = 0; a < f; ++a) {
                x[free_idx[a]] = xf[a];
                if (xf[a] < p.lo[free_idx[a]] - 1e-12 || xf[a] > p.hi[free_idx[a]] + 1e-12)
                    feasible = false;
            }
            if (!feasible) continue;
        }
        best = std::min(best, p.objective(x));
    }
    return best;
}

}  // namespace

TEST_CASE("min x^2 subject to x >= 1") {
    QuadraticProgram qp;
    qp.objective_matrix = sparse_from_dense_upper(Eigen::MatrixXd::Constant(1, 1, 2.0));
    qp.objective_vector = Eigen::VectorXd::Zero(1);
    qp.constraint_matrix = identity_sparse(1);
    qp.lower = Eigen::VectorXd::Constant(1, 1.0);
    qp.upper = Eigen::VectorXd::Constant(1, kQpInfinity);
    QpSolution sol = solve_qp(qp, {});
    REQUIRE(sol.status == QpStatus::Solved);
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("unconstrained minimum of 0.5||x||^2 + q'x is -q") {
    QuadraticProgram qp;
    qp.objective_matrix = identity_sparse(2);
    qp.objective_vector = Eigen::VectorXd(2);
    qp.objective_vector << 1.0, -2.0;
    qp.constraint_matrix.resize(0, 2);
    qp.lower.resize(0);
    qp.upper.resize(0);
    QpSolution sol = solve_qp(qp, {});
    REQUIRE(sol.status == QpStatus::Solved);
    CHECK(sol.x[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(sol.x[1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("20-variable box QP matches the projected-gradient oracle") {
    std::mt19937_64 rng(321);
    BoxQp p = random_box_qp(20, rng);
    QpSolution sol = solve_qp(p.to_program(), {});
    REQUIRE(sol.status == QpStatus::Solved);
    Eigen::VectorXd oracle = projected_gradient_oracle(p);
    double f_solver = p.objective(sol.x);
    double f_oracle = p.objective(oracle);
    CHECK(std::abs(f_solver - f_oracle) <= 1e-5 * std::max(1.0, std::abs(f_oracle)));
}

TEST_CASE("dense problems up to 10 variables match active-set enumeration") {
    std::mt19937_64 rng(777);
    for (int n : {2, 4, 7, 10}) {
        BoxQp p = random_box_qp(n, rng);
        QpSolution sol = solve_qp(p.to_program(), {});
        REQUIRE(sol.status == QpStatus::Solved);
        double exact = active_set_enumeration_oracle(p);
        CHECK(p.objective(sol.x) == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("KKT residuals at a solved point stay within 10x the tolerance") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    QpSettings settings;
    for (int trial = 0; trial < 8; ++trial) {
        int n = 6 + trial;
        int m = n + 4;
        Eigen::MatrixXd mdense(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mdense(i, j) = normal(rng);
        Eigen::MatrixXd pd = mdense.transpose() * mdense + 0.3 * Eigen::MatrixXd::Identity(n, n);

        Eigen::MatrixXd adense(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) adense(i, j) = normal(rng);
        Eigen::VectorXd x0 =
            Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return normal(rng); });
        Eigen::VectorXd ax0 = adense * x0;

        QuadraticProgram qp;
        qp.objective_matrix = sparse_from_dense_upper(pd);
        qp.objective_vector =
            Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return normal(rng); });
        qp.constraint_matrix = adense.sparseView();
        qp.lower = ax0.array() - 0.3;
        qp.upper = ax0.array() + 0.7;

        QpSolution sol = solve_qp(qp, settings);
        REQUIRE(sol.status == QpStatus::Solved);

        Eigen::VectorXd ax = adense * sol.x;
        double primal = 0.0, comp = 0.0;
        for (int i = 0; i < m; ++i) {
            primal = std::max(primal, std::max(qp.lower[i] - ax[i], ax[i] - qp.upper[i]));
            if (sol.dual[i] > 0.0) comp = std::max(comp, sol.dual[i] * (qp.upper[i] - ax[i]));
            if (sol.dual[i] < 0.0) comp = std::max(comp, -sol.dual[i] * (ax[i] - qp.lower[i]));
        }
        double station = (pd * sol.x + qp.objective_vector + adense.transpose() * sol.dual)
                             .lpNorm<Eigen::Infinity>();
        CHECK(primal <= 10 * settings.eps_abs);
        CHECK(station <= 10 * (settings.eps_abs +
                               settings.eps_rel * (pd * sol.x).lpNorm<Eigen::Infinity>()));
        CHECK(comp <= 10 * settings.eps_abs * std::max(1.0, sol.dual.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("objective trace is non-increasing in its running best") {
    std::mt19937_64 rng(11);
    BoxQp p = random_box_qp(12, rng);
    QpSettings settings;
    settings.track_objective = true;
    QpSolution sol = solve_qp(p.to_program(), settings);
    REQUIRE(sol.status == QpStatus::Solved);
    REQUIRE(!sol.objective_trace.empty());
    double best = sol.objective_trace.front();
    std::vector<double> running;
    for (double v : sol.objective_trace) {
        best = std::min(best, v);
        running.push_back(best);
    }
    for (std::size_t k = 1; k < running.size(); ++k)
        CHECK(running[k] <= running[k - 1] + 1e-9 * std::max(1.0, std::abs(running[k - 1])));
}

TEST_CASE("warm start never worsens the objective beyond tolerance") {
    std::mt19937_64 rng(55);
    BoxQp p = random_box_qp(15, rng);
    QuadraticProgram qp = p.to_program();
    QpSolution cold = solve_qp(qp, {});
    REQUIRE(cold.status == QpStatus::Solved);
    // Perturb the linear term, as the outer loop does between iterations.
    qp.objective_vector.array() += 0.01;
    QpSolution warm = solve_qp(qp, {}, &cold);
    QpSolution fresh = solve_qp(qp, {});
    REQUIRE(warm.status == QpStatus::Solved);
    CHECK(warm.objective <= fresh.objective + 1e-5 * std::max(1.0, std::abs(fresh.objective)));
}

TEST_CASE("contradictory bounds are detected as infeasible") {
    QuadraticProgram qp;
    qp.objective_matrix = identity_sparse(1);
    qp.objective_vector = Eigen::VectorXd::Zero(1);
    Eigen::SparseMatrix<double> a(2, 1);
    a.insert(0, 0) = 1.0;
    a.insert(1, 0) = 1.0;
    qp.constraint_matrix = a;
    qp.lower = Eigen::VectorXd(2);
    qp.upper = Eigen::VectorXd(2);
    qp.lower << 1.0, -kQpInfinity;
    qp.upper << kQpInfinity, 0.0;  // x >= 1 and x <= 0
    QpSolution sol = solve_qp(qp, {});
    CHECK(sol.status == QpStatus::Infeasible);
}

TEST_CASE("dimension mismatches are rejected") {
    QuadraticProgram qp;
    qp.objective_matrix = identity_sparse(2);
    qp.objective_vector = Eigen::VectorXd::Zero(3);
    qp.constraint_matrix.resize(0, 2);
    CHECK_THROWS_AS(solve_qp(qp, {}), DimensionError);
}

TEST_CASE("qp debug dump lists all blocks") {
    QuadraticProgram qp;
    qp.objective_matrix = identity_sparse(2);
    qp.objective_vector = Eigen::VectorXd::Zero(2);
    qp.constraint_matrix = identity_sparse(2);
    qp.lower = Eigen::VectorXd::Zero(2);
    qp.upper = Eigen::VectorXd::Ones(2);
    std::string dump = dump_qp(qp);
    for (const char* section : {"%% P", "%% q", "%% A", "%% l", "%% u"})
        CHECK(dump.find(section) != std::string::npos);
}
