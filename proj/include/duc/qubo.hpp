#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "duc/block1.hpp"

namespace duc {

struct VarLabel {
    int unit = 0;
    int time = 0;
    BinKind kind = BinKind::Commit;
};

/// Quadratic binary objective with single-counted upper-triangular couplings:
/// E(x) = sum_{i<j} Q_ij x_i x_j + sum_i c_i x_i + offset.
struct Qubo {
    int n = 0;
    std::vector<double> linear;
    std::map<std::pair<int, int>, double> couplings;  // keys (i, j) with i < j
    double offset = 0.0;
    std::vector<VarLabel> labels;

    void add_coupling(int i, int j, double v);
    double energy(const std::vector<std::uint8_t>& bits) const;
};

/// Three-variable QUBO over (commit, startup, shutdown) of one unit-time pair.
struct MicroQubo {
    Qubo qubo;                 // n = 3, variable order commit, startup, shutdown
    int unit = 0;
    int time = 0;
    double prev_commit_ref = 0.0;  // commitment reference from the previous period
    double anchor_commit = 0.0, anchor_startup = 0.0, anchor_shutdown = 0.0;
};

struct PenaltyWeights {
    double logic = 0.0;             // weight on (z_c - z_s + z_d - ref)^2
    double start_stop = 0.0;        // discourages simultaneous startup and shutdown
    double start_implies_on = 0.0;
    double stop_implies_off = 0.0;
    double anchor_commit = 0.0, anchor_startup = 0.0, anchor_shutdown = 0.0;

    static PenaltyWeights from_rho(double rho_commit);
};

struct HardnessWeights {
    double gap = 0.2;
    double degeneracy = 0.2;
    double frustration = 0.2;
    double coupling_ratio = 0.2;
    double dynamic_range = 0.2;
};

struct HardnessScore {
    double total = 0.0;
    // Unweighted components, in weight order: inverse gap, near-degeneracy,
    // frustration flag, coupling-to-field ratio, dynamic range.
    double components[5] = {0, 0, 0, 0, 0};
    HardnessWeights weights;
};

struct BatchPlan {
    std::vector<std::vector<std::pair<int, int>>> batches;  // (unit, time) members
    std::vector<double> hardness_sums;
    bool unit_coherent = false;
};

struct UnaryCoefficients {
    double commit = 0.0, startup = 0.0, shutdown = 0.0;
};

/// One-bit QUBO coefficients of the consensus terms at (i, t).
UnaryCoefficients unary_coefficients(const AdmmState& state, int i, int t);

/// Penalty-augmented micro-QUBO from explicit inputs; the state-based
/// overload pulls unary coefficients and anchors from the iterate.
MicroQubo build_micro_qubo(const UnaryCoefficients& unary, double anchor_commit,
                           double anchor_startup, double anchor_shutdown,
                           double prev_commit_ref, const PenaltyWeights& weights, int unit,
                           int time);
MicroQubo build_micro_qubo(const AdmmState& state, const PenaltyWeights& weights, int i, int t,
                           double prev_commit_ref);

/// Commitment reference for (i, t): the previous-period relaxed commitment,
/// or the initial unit state for the first period.
double prev_commit_reference(const UcInstance& inst, const AdmmState& state, int i, int t);

double hardness_epsilon(double min_energy);
HardnessScore hardness_score(const MicroQubo& micro, const HardnessWeights& weights,
                             double epsilon, double eta_guard = 1e-6);

BatchPlan plan_batches(const std::map<std::pair<int, int>, HardnessScore>& scores, int n_batches,
                       bool unit_coherent);

Qubo assemble_batched_qubo(const std::map<std::pair<int, int>, MicroQubo>& micros,
                           const std::vector<std::pair<int, int>>& batch);

/// Linear-only QUBOs split by variable type, each over N*T bits.
struct ThreeQubos {
    Qubo commit, startup, shutdown;
};
ThreeQubos partition_three_qubos(const AdmmState& state);

/// Block-diagonal union of every micro-QUBO (3*N*T variables).
Qubo assemble_monolithic(const UcInstance& inst, const AdmmState& state,
                         const PenaltyWeights& weights);

std::string export_qubo(const Qubo& q);
Qubo parse_qubo(const std::string& text);

}  // namespace duc
