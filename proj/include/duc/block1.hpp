#pragma once

#include <array>
#include <string>
#include <vector>

#include "duc/qp.hpp"
#include "duc/uc_model.hpp"

namespace duc {

enum class BinKind { Commit = 0, Startup = 1, Shutdown = 2 };

inline const char* kind_name(BinKind k) {
    switch (k) {
        case BinKind::Commit: return "commit";
        case BinKind::Startup: return "startup";
        default: return "shutdown";
    }
}

/// Full iterate of the consensus scheme. Binary-family arrays are N*T
/// (index i*T + t); dispatch and reserves are per scenario.
struct AdmmState {
    int n_units = 0;
    int horizon = 0;
    int n_scenarios = 1;

    // Relaxed first-stage variables in [0,1].
    std::vector<double> commit, startup, shutdown;
    // Binary proxies.
    std::vector<double> proxy_commit, proxy_startup, proxy_shutdown;
    // Nonnegative slacks tying relaxed variables to proxies.
    std::vector<double> slack_commit, slack_startup, slack_shutdown;
    // Consensus multipliers.
    std::vector<double> dual_commit, dual_startup, dual_shutdown;
    // Scenario-indexed dispatch and reserves, [s][i*T + t].
    std::vector<std::vector<double>> power, reserve_up, reserve_down;

    double rho_commit = 0.0, rho_startup = 0.0, rho_shutdown = 0.0;
    double beta_commit = 0.0, beta_startup = 0.0, beta_shutdown = 0.0;

    static AdmmState zeros(int n_units, int horizon, int n_scenarios);
    std::size_t at(int i, int t) const { return static_cast<std::size_t>(i) * horizon + t; }

    struct Family {
        BinKind kind;
        std::vector<double>* relaxed;
        std::vector<double>* proxy;
        std::vector<double>* slack;
        std::vector<double>* dual;
        double rho;
        double beta;
    };
    std::array<Family, 3> families();
    std::array<Family, 3> families() const;  // pointers into the const object
};

/// Relaxed Block-1 minimizer of the augmented Lagrangian.
struct RelaxedSolution {
    std::vector<double> commit, startup, shutdown;          // N*T
    std::vector<std::vector<double>> power, reserve_up, reserve_down;  // [s][N*T]
    double objective = 0.0;
};

/// Maps (variable, unit, time, scenario) to positions in the stacked QP
/// vector: [commit | startup | shutdown] then per scenario [power | r_up | r_down].
struct VarLayout {
    int n_units = 0, horizon = 0, n_scenarios = 1;
    int nt() const { return n_units * horizon; }
    int n_vars() const { return 3 * nt() + 3 * nt() * n_scenarios; }
    int commit(int i, int t) const { return i * horizon + t; }
    int startup(int i, int t) const { return nt() + i * horizon + t; }
    int shutdown(int i, int t) const { return 2 * nt() + i * horizon + t; }
    int power(int s, int i, int t) const { return 3 * nt() + 3 * nt() * s + i * horizon + t; }
    int r_up(int s, int i, int t) const { return 3 * nt() + 3 * nt() * s + nt() + i * horizon + t; }
    int r_down(int s, int i, int t) const { return 3 * nt() + 3 * nt() * s + 2 * nt() + i * horizon + t; }
};

struct BinarySchedule {
    std::vector<int> commit, startup, shutdown;  // N*T each
};

/// Builds the Block-1 QP: quadratic consensus/cost terms plus constraint
/// rows for power balance, capacity, logic, minimum up/down, ramping,
/// reserve deliverability, caps, adequacy, and [0,1] bounds. With `pin`
/// the binary boxes collapse to the given schedule, which recovers the
/// dispatch for a fixed commitment.
QuadraticProgram assemble_block1_qp(const UcInstance& inst, const AdmmState& state,
                                    const BinarySchedule* pin = nullptr);

/// Exact value of the augmented Lagrangian at the given iterate.
double evaluate_augmented_lagrangian(const UcInstance& inst, const AdmmState& state);

RelaxedSolution extract_solution(const QpSolution& sol, const UcInstance& inst);

/// Writes a relaxed solution's variables back into the iterate.
void apply_relaxed_solution(AdmmState& state, const RelaxedSolution& rel);

/// One violation magnitude per constraint family of the relaxed model;
/// all entries <= tol means feasible. `binary_logic_exact` additionally
/// requires the logic rows to hold exactly on integral inputs.
struct FeasibilityReport {
    double balance = 0.0;
    double capacity = 0.0;
    double logic = 0.0;
    double exclusivity = 0.0;
    double min_up_down = 0.0;
    double ramping = 0.0;
    double reserve_box = 0.0;
    double reserve_caps = 0.0;
    double reserve_adequacy = 0.0;
    double max_violation() const;
};

FeasibilityReport check_feasibility(const UcInstance& inst,
                                    const std::vector<double>& commit,
                                    const std::vector<double>& startup,
                                    const std::vector<double>& shutdown,
                                    const std::vector<std::vector<double>>& power,
                                    const std::vector<std::vector<double>>& reserve_up,
                                    const std::vector<std::vector<double>>& reserve_down);

}  // namespace duc
