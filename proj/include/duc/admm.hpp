#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duc/qubo_solve.hpp"

namespace duc {

enum class Decomposition { Monolithic, Three, Micro, Batched };
enum class Backend { Brute, Dvqe };

const char* decomposition_name(Decomposition d);
const char* backend_name(Backend b);
std::optional<Decomposition> parse_decomposition(const std::string& s);
std::optional<Backend> parse_backend(const std::string& s);

struct AdmmConfig {
    double rho_commit = 9e5, rho_startup = 9e5, rho_shutdown = 9e5;
    double beta_commit = 2e6, beta_startup = 2e6, beta_shutdown = 2e6;
    double eps_primal = 1e-3, eps_dual = 1e-3;
    int max_iter = 4000;
    Decomposition mode = Decomposition::Batched;
    int n_batches = 3;
    bool unit_coherent = false;
    Backend backend = Backend::Brute;
    // When unset, penalty weights follow the standard fractions of rho_commit.
    std::optional<PenaltyWeights> penalty_override;
    HardnessWeights hardness;
    DvqeConfig dvqe;
    std::uint64_t seed = 1;
    double lyapunov_kappa = -1.0;  // negative selects 2 * max(rho)
    bool track_block2_match = true;
    QpSettings qp;
    // Debug listings, written once at the first iteration when set.
    std::string dump_qp_path;
    std::string dump_qubo_dir;

    PenaltyWeights penalties() const {
        return penalty_override ? *penalty_override : PenaltyWeights::from_rho(rho_commit);
    }
    double kappa() const {
        return lyapunov_kappa >= 0.0
                   ? lyapunov_kappa
                   : 2.0 * std::max({rho_commit, rho_startup, rho_shutdown});
    }
};

struct Residuals {
    double pri_commit = 0.0, pri_startup = 0.0, pri_shutdown = 0.0;
    double dual = 0.0;
    double max_primal() const { return std::max({pri_commit, pri_startup, pri_shutdown}); }
};

struct IterationRow {
    int iter = 0;
    Residuals residuals;
    double aug_lagrangian = 0.0;
    double true_cost = 0.0;  // objective (1a)-style cost at the binary proxies
    double lyapunov = 0.0;
    double block2_candidate_energy = 0.0;  // before the safeguard
    double block2_energy = 0.0;            // after the safeguard
    long telegate_ops = 0;
    double t_block1_ms = 0.0, t_block2_ms = 0.0;
    long block2_units = 0, block2_matched = 0;
};

struct ConvergenceReport {
    enum class Status { Converged, MaxIter };
    Status status = Status::MaxIter;
    // Final binary schedule and the dispatch recovered with binaries pinned.
    std::vector<int> commit, startup, shutdown;                        // N*T
    std::vector<std::vector<double>> power, reserve_up, reserve_down;  // [s][N*T]
    double final_cost = 0.0;
    Residuals final_residuals;
    double max_slack = 0.0;
    std::vector<IterationRow> trace;
    double total_wall_ms = 0.0;
    bool dispatch_recovered = true;  // false when the pinned re-solve failed

    int iterations() const { return static_cast<int>(trace.size()); }
    long block2_units() const;
    long block2_matched() const;
    // Fraction of Block-2 subproblems where the backend hit the exact optimum.
    double block2_match_rate() const;
};

ConvergenceReport run_admm(const UcInstance& inst, const AdmmConfig& config);

/// Proximal slack step followed by projection onto the nonnegative orthant.
void update_slacks(AdmmState& state);

/// Gradient-ascent multiplier step on the consensus residuals.
void update_duals(AdmmState& state);

/// Primal norms from the current iterate; dual norm from proxy and slack
/// movement, scaled per family by its penalty.
Residuals compute_residuals(const AdmmState& current, const AdmmState& previous);

/// Augmented Lagrangian plus kappa/2 times the squared consensus residual.
double lyapunov_value(const UcInstance& inst, const AdmmState& state, double kappa);

}  // namespace duc
