#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "duc/block1.hpp"

using namespace duc;

namespace {

UcInstance tiny_instance(int n_units, int horizon, int n_scenarios) {
    UcInstance inst;
    inst.horizon = horizon;
    for (int i = 0; i < n_units; ++i) {
        GeneratorParams g;
        g.p_min = 8.0 + i;
        g.p_max = 90.0 + 12.0 * i;
        g.ramp_up = 45.0;
        g.ramp_down = 48.0;
        g.startup_ramp = 50.0;
        g.shutdown_ramp = 55.0;
        g.min_up = 1;
        g.min_down = 1;
        g.cost_fixed = 6.0 + i;
        g.cost_linear = 21.0 + 3.0 * i;
        g.cost_quad = 0.03;
        g.cost_startup = 110.0;
        g.cost_shutdown = 35.0;
        inst.generators.push_back(g);
    }
    inst.initial.committed.assign(n_units, 1);
    inst.initial.power.assign(n_units, 20.0);
    auto& sc = inst.scenarios;
    sc.n_scenarios = n_scenarios;
    sc.probability.assign(n_scenarios, 1.0 / n_scenarios);
    double correction = 1.0;
    for (int s = 1; s < n_scenarios; ++s) correction -= sc.probability[s];
    sc.probability[0] = correction;
    std::size_t cells = static_cast<std::size_t>(horizon) * n_scenarios;
    sc.net_load.assign(cells, 0.0);
    sc.reserve_up.assign(cells, 3.0);
    sc.reserve_down.assign(cells, 1.5);
    double per_unit = 45.0;
    for (int t = 0; t < horizon; ++t)
        for (int s = 0; s < n_scenarios; ++s)
            sc.net_load[static_cast<std::size_t>(t) * n_scenarios + s] =
                per_unit * n_units * (0.9 + 0.05 * t) * (1.0 + 0.03 * s);
    sc.response_window = 1.0;
    return inst;
}

AdmmState random_state(const UcInstance& inst, std::uint64_t seed, double rho = 2.0,
                       double beta = 3.0) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (rng() >> 11) * 0x1.0p-53;
    };
    AdmmState st = AdmmState::zeros(inst.n_units(), inst.horizon, inst.n_scenarios());
    st.rho_commit = st.rho_startup = st.rho_shutdown = rho;
    st.beta_commit = st.beta_startup = st.beta_shutdown = beta;
    for (auto fam : st.families())
        for (std::size_t k = 0; k < fam.relaxed->size(); ++k) {
            (*fam.relaxed)[k] = uniform(0.0, 1.0);
            (*fam.proxy)[k] = rng() % 2;
            (*fam.slack)[k] = uniform(0.0, 0.4);
            (*fam.dual)[k] = uniform(-2.0, 2.0);
        }
    for (int s = 0; s < st.n_scenarios; ++s)
        for (std::size_t k = 0; k < st.power[s].size(); ++k) {
            st.power[s][k] = uniform(0.0, 80.0);
            st.reserve_up[s][k] = uniform(0.0, 5.0);
            st.reserve_down[s][k] = uniform(0.0, 5.0);
        }
    return st;
}

// Second, literal implementation of the augmented Lagrangian: each term of
// the objective and the three consensus families summed exactly as written.
double auglag_literal(const UcInstance& inst, const AdmmState& st) {
    double total = 0.0;
    const int horizon = inst.horizon;
    for (int t = 0; t < horizon; ++t)
        for (int i = 0; i < inst.n_units(); ++i) {
            std::size_t k = static_cast<std::size_t>(i) * horizon + t;
            total += inst.generators[i].cost_fixed * st.commit[k];
            total += inst.generators[i].cost_startup * st.startup[k];
            total += inst.generators[i].cost_shutdown * st.shutdown[k];
        }
    for (int s = 0; s < inst.n_scenarios(); ++s)
        for (int t = 0; t < horizon; ++t)
            for (int i = 0; i < inst.n_units(); ++i) {
                std::size_t k = static_cast<std::size_t>(i) * horizon + t;
                double p = st.power[s][k];
                total += inst.scenarios.probability[s] *
                         (inst.generators[i].cost_linear * p +
                          inst.generators[i].cost_quad * p * p);
            }
    for (int i = 0; i < inst.n_units(); ++i)
        for (int t = 0; t < horizon; ++t) {
            std::size_t k = static_cast<std::size_t>(i) * horizon + t;
            double ry = st.commit[k] - st.proxy_commit[k] + st.slack_commit[k];
            double ru = st.startup[k] - st.proxy_startup[k] + st.slack_startup[k];
            double rv = st.shutdown[k] - st.proxy_shutdown[k] + st.slack_shutdown[k];
            total += st.dual_commit[k] * ry + 0.5 * st.rho_commit * ry * ry;
            total += st.dual_startup[k] * ru + 0.5 * st.rho_startup * ru * ru;
            total += st.dual_shutdown[k] * rv + 0.5 * st.rho_shutdown * rv * rv;
            total += 0.5 * st.beta_commit * st.slack_commit[k] * st.slack_commit[k];
            total += 0.5 * st.beta_startup * st.slack_startup[k] * st.slack_startup[k];
            total += 0.5 * st.beta_shutdown * st.slack_shutdown[k] * st.slack_shutdown[k];
        }
    return total;
}

int count_rows_with_prefix(const QuadraticProgram& qp, const std::string& prefix) {
    int count = 0;
    for (const auto& name : qp.constraint_names)
        if (name.rfind(prefix, 0) == 0) ++count;
    return count;
}

}  // namespace

TEST_CASE("single unit single period QP has the full row complement") {
    UcInstance inst = tiny_instance(1, 1, 1);
    AdmmState st = random_state(inst, 1);
    QuadraticProgram qp = assemble_block1_qp(inst, st);

    CHECK(qp.n_vars() == 6);
    CHECK(count_rows_with_prefix(qp, "balance") == 1);
    CHECK(count_rows_with_prefix(qp, "cap_min") == 1);
    CHECK(count_rows_with_prefix(qp, "cap_max") == 1);
    CHECK(count_rows_with_prefix(qp, "logic") == 1);
    CHECK(count_rows_with_prefix(qp, "excl") == 1);
    CHECK(count_rows_with_prefix(qp, "min_up") == 1);
    CHECK(count_rows_with_prefix(qp, "min_down") == 1);
    CHECK(count_rows_with_prefix(qp, "ramp_up") == 1);
    CHECK(count_rows_with_prefix(qp, "ramp_down") == 1);
    CHECK(count_rows_with_prefix(qp, "res_up_room") == 1);
    CHECK(count_rows_with_prefix(qp, "res_down_room") == 1);
    CHECK(count_rows_with_prefix(qp, "adequacy_up") == 1);
    CHECK(count_rows_with_prefix(qp, "adequacy_down") == 1);
    CHECK(count_rows_with_prefix(qp, "box_commit") == 1);
    CHECK(count_rows_with_prefix(qp, "box_startup") == 1);
    CHECK(count_rows_with_prefix(qp, "box_shutdown") == 1);
    CHECK(count_rows_with_prefix(qp, "box_r_up") == 1);
    CHECK(count_rows_with_prefix(qp, "box_r_down") == 1);
    CHECK(qp.n_constraints() == 18);
}

TEST_CASE("dispatch quadratic coefficient is twice the probability-weighted cost") {
    UcInstance inst = tiny_instance(2, 2, 2);
    AdmmState st = random_state(inst, 3);
    QuadraticProgram qp = assemble_block1_qp(inst, st);
    VarLayout lay{2, 2, 2};
    Eigen::MatrixXd p_dense = Eigen::MatrixXd(qp.objective_matrix);
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 2; ++i) {
            int col = lay.power(s, i, 0);
            double expected = 2.0 * inst.scenarios.probability[s] * inst.generators[i].cost_quad;
            CHECK(p_dense(col, col) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("commitment linear term matches the expanded consensus penalty") {
    // lambda = 0, slack = 0, proxy = 1, rho = 2 gives cost_fixed - 2.
    UcInstance inst = tiny_instance(1, 1, 1);
    AdmmState st = AdmmState::zeros(1, 1, 1);
    st.rho_commit = st.rho_startup = st.rho_shutdown = 2.0;
    st.beta_commit = st.beta_startup = st.beta_shutdown = 1.0;
    st.proxy_commit[0] = 1.0;
    QuadraticProgram qp = assemble_block1_qp(inst, st);
    VarLayout lay{1, 1, 1};
    CHECK(qp.objective_vector[lay.commit(0, 0)] ==
          doctest::Approx(inst.generators[0].cost_fixed - 2.0).epsilon(1e-12));

    // Finite-difference oracle on the augmented Lagrangian in the commit entry.
    double h = 1e-6;
    AdmmState plus = st, minus = st;
    plus.commit[0] += h;
    minus.commit[0] -= h;
    double fd = (evaluate_augmented_lagrangian(inst, plus) -
                 evaluate_augmented_lagrangian(inst, minus)) /
                (2 * h);
    // gradient at commit=0 equals the q entry (P diagonal contributes 0 there)
    CHECK(fd == doctest::Approx(qp.objective_vector[lay.commit(0, 0)]).epsilon(1e-6));
}

TEST_CASE("augmented Lagrangian vanishes on the all-zero state") {
    UcInstance inst = tiny_instance(2, 3, 1);
    AdmmState st = AdmmState::zeros(2, 3, 1);
    st.rho_commit = st.rho_startup = st.rho_shutdown = 2.0;
    st.beta_commit = st.beta_startup = st.beta_shutdown = 1.0;
    CHECK(evaluate_augmented_lagrangian(inst, st) == doctest::Approx(0.0));
}

TEST_CASE("satisfied consensus leaves only the schedule cost") {
    UcInstance inst = tiny_instance(2, 2, 1);
    AdmmState st = random_state(inst, 9);
    // Force commit = proxy - slack with slack = 0: residual terms vanish.
    for (auto fam : st.families())
        for (std::size_t k = 0; k < fam.relaxed->size(); ++k) {
            (*fam.slack)[k] = 0.0;
            (*fam.relaxed)[k] = (*fam.proxy)[k];
        }
    double cost_only = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int t = 0; t < 2; ++t) {
            std::size_t k = static_cast<std::size_t>(i) * 2 + t;
            cost_only += inst.generators[i].cost_fixed * st.commit[k] +
                         inst.generators[i].cost_startup * st.startup[k] +
                         inst.generators[i].cost_shutdown * st.shutdown[k];
        }
    for (int s = 0; s < 1; ++s)
        for (std::size_t k = 0; k < st.power[s].size(); ++k) {
            int i = static_cast<int>(k) / 2;
            cost_only += inst.generators[i].cost_linear * st.power[s][k] +
                         inst.generators[i].cost_quad * st.power[s][k] * st.power[s][k];
        }
    CHECK(evaluate_augmented_lagrangian(inst, st) ==
          doctest::Approx(cost_only).epsilon(1e-12));
}

TEST_CASE("augmented Lagrangian matches the literal oracle on random states") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        UcInstance inst = tiny_instance(3, 4, 2);
        AdmmState st = random_state(inst, seed);
        CHECK(evaluate_augmented_lagrangian(inst, st) ==
              doctest::Approx(auglag_literal(inst, st)).epsilon(1e-10));
    }
}

TEST_CASE("finite differences of the Lagrangian match the assembled gradient") {
    UcInstance inst = tiny_instance(2, 3, 2);
    AdmmState st = random_state(inst, 17);
    QuadraticProgram qp = assemble_block1_qp(inst, st);
    VarLayout lay{2, 3, 2};

    // Stack the state's continuous variables in QP order.
    Eigen::VectorXd x(lay.n_vars());
    for (int i = 0; i < 2; ++i)
        for (int t = 0; t < 3; ++t) {
            std::size_t k = st.at(i, t);
            x[lay.commit(i, t)] = st.commit[k];
            x[lay.startup(i, t)] = st.startup[k];
            x[lay.shutdown(i, t)] = st.shutdown[k];
            for (int s = 0; s < 2; ++s) {
                x[lay.power(s, i, t)] = st.power[s][k];
                x[lay.r_up(s, i, t)] = st.reserve_up[s][k];
                x[lay.r_down(s, i, t)] = st.reserve_down[s][k];
            }
        }
    Eigen::VectorXd grad =
        qp.objective_matrix.selfadjointView<Eigen::Upper>() * x + qp.objective_vector;

    auto write_var = [&](AdmmState& target, int col, double value) {
        for (int i = 0; i < 2; ++i)
            for (int t = 0; t < 3; ++t) {
                std::size_t k = target.at(i, t);
                if (col == lay.commit(i, t)) target.commit[k] = value;
                if (col == lay.startup(i, t)) target.startup[k] = value;
                if (col == lay.shutdown(i, t)) target.shutdown[k] = value;
                for (int s = 0; s < 2; ++s) {
                    if (col == lay.power(s, i, t)) target.power[s][k] = value;
                    if (col == lay.r_up(s, i, t)) target.reserve_up[s][k] = value;
                    if (col == lay.r_down(s, i, t)) target.reserve_down[s][k] = value;
                }
            }
    };

    double h = 1e-6;
    for (int col = 0; col < lay.n_vars(); ++col) {
        AdmmState plus = st, minus = st;
        write_var(plus, col, x[col] + h);
        write_var(minus, col, x[col] - h);
        double fd = (evaluate_augmented_lagrangian(inst, plus) -
                     evaluate_augmented_lagrangian(inst, minus)) /
                    (2 * h);
        CHECK(std::abs(fd - grad[col]) <= 1e-6 * std::max(1.0, std::abs(grad[col])));
    }
}

TEST_CASE("solved relaxation is feasible and balances power") {
    UcInstance inst = tiny_instance(3, 4, 2);
    AdmmState st = AdmmState::zeros(3, 4, 2);
    st.rho_commit = st.rho_startup = st.rho_shutdown = 10.0;
    st.beta_commit = st.beta_startup = st.beta_shutdown = 20.0;
    QuadraticProgram qp = assemble_block1_qp(inst, st);
    QpSettings settings;
    QpSolution sol = solve_qp(qp, settings);
    REQUIRE(sol.status == QpStatus::Solved);
    RelaxedSolution rel = extract_solution(sol, inst);

    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 4; ++t) {
            double sum = 0.0;
            for (int i = 0; i < 3; ++i) sum += rel.power[s][st.at(i, t)];
            CHECK(std::abs(sum - inst.scenarios.load(t, s)) <= 1e-5);
        }

    FeasibilityReport rep = check_feasibility(inst, rel.commit, rel.startup, rel.shutdown,
                                              rel.power, rel.reserve_up, rel.reserve_down);
    CHECK(rep.max_violation() <= 10 * settings.eps_abs);
}

TEST_CASE("solution is the minimizer among random feasible perturbations") {
    UcInstance inst = tiny_instance(2, 2, 1);
    AdmmState st = random_state(inst, 23, 10.0, 20.0);
    QuadraticProgram qp = assemble_block1_qp(inst, st);
    QpSolution sol = solve_qp(qp, {});
    REQUIRE(sol.status == QpStatus::Solved);
    RelaxedSolution rel = extract_solution(sol, inst);
    AdmmState at_opt = st;
    apply_relaxed_solution(at_opt, rel);
    double f_opt = evaluate_augmented_lagrangian(inst, at_opt);

    // Random feasible perturbations: move power between two units at one
    // period, keeping every constraint satisfied by rejection.
    std::mt19937_64 rng(555);
    int accepted = 0;
    for (int trial = 0; trial < 50000 && accepted < 100; ++trial) {
        AdmmState perturbed = at_opt;
        int t = static_cast<int>(rng() % 2);
        int a = static_cast<int>(rng() % 2);
        int b = 1 - a;
        double delta = ((rng() >> 11) * 0x1.0p-53 - 0.5) * 0.2;
        perturbed.power[0][perturbed.at(a, t)] += delta;
        perturbed.power[0][perturbed.at(b, t)] -= delta;
        FeasibilityReport rep = check_feasibility(
            inst, perturbed.commit, perturbed.startup, perturbed.shutdown, perturbed.power,
            perturbed.reserve_up, perturbed.reserve_down);
        if (rep.max_violation() > 1e-7) continue;
        ++accepted;
        CHECK(f_opt <= evaluate_augmented_lagrangian(inst, perturbed) + 1e-6);
    }
    CHECK(accepted >= 100);
}

TEST_CASE("extraction clamps tolerance-level bound violations") {
    UcInstance inst = tiny_instance(1, 1, 1);
    VarLayout lay{1, 1, 1};
    QpSolution sol;
    sol.x = Eigen::VectorXd::Zero(lay.n_vars());
    sol.x[lay.commit(0, 0)] = 1.0 + 1e-9;
    sol.x[lay.startup(0, 0)] = -1e-9;
    RelaxedSolution rel = extract_solution(sol, inst);
    CHECK(rel.commit[0] == 1.0);
    CHECK(rel.startup[0] == 0.0);

    QpSolution wrong;
    wrong.x = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(extract_solution(wrong, inst), DimensionError);
}

TEST_CASE("shape mismatches raise dimension errors") {
    UcInstance inst = tiny_instance(2, 2, 1);
    AdmmState st = AdmmState::zeros(3, 2, 1);  // wrong unit count
    st.rho_commit = st.rho_startup = st.rho_shutdown = 1.0;
    CHECK_THROWS_AS(assemble_block1_qp(inst, st), DimensionError);
    CHECK_THROWS_AS(evaluate_augmented_lagrangian(inst, st), DimensionError);
}

TEST_CASE("pinned assembly fixes the binary boxes to the schedule") {
    UcInstance inst = tiny_instance(2, 2, 1);
    AdmmState st = AdmmState::zeros(2, 2, 1);
    st.rho_commit = st.rho_startup = st.rho_shutdown = 5.0;
    st.beta_commit = st.beta_startup = st.beta_shutdown = 5.0;
    BinarySchedule pin;
    pin.commit = {1, 1, 1, 0};
    pin.startup = {0, 0, 0, 0};
    pin.shutdown = {0, 0, 0, 1};
    QuadraticProgram qp = assemble_block1_qp(inst, st, &pin);
    QpSolution sol = solve_qp(qp, {});
    REQUIRE(sol.status == QpStatus::Solved);
    RelaxedSolution rel = extract_solution(sol, inst);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(rel.commit[k] == doctest::Approx(pin.commit[k]).epsilon(1e-5));
        CHECK(rel.shutdown[k] == doctest::Approx(pin.shutdown[k]).epsilon(1e-5));
    }
}
