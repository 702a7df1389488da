#pragma once

#include <complex>
#include <cstdint>
#include <tuple>
#include <vector>

#include "duc/qubo.hpp"

namespace duc {

/// H = sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j + offset, with the spin map
/// x = (1 - s)/2 so bit 1 corresponds to spin -1. QUBO and Ising energies
/// agree exactly under this map.
struct IsingHamiltonian {
    int n = 0;
    std::vector<double> fields;                          // h
    std::vector<std::tuple<int, int, double>> couplings;  // (i, j, J) with i < j, sorted
    double offset = 0.0;

    double spin_energy(const std::vector<std::uint8_t>& bits) const;  // includes offset
};

struct RegisterLayout {
    std::vector<int> sizes;
    std::vector<int> qubit_register;  // qubit index -> register index
    int cross_coupling_count = 0;
};

/// Hardware-style ansatz: per layer one RY and one RZ on every qubit, a CNOT
/// chain inside each register, then one CNOT per cut coupling across registers.
struct AnsatzSpec {
    int depth = 1;
    std::vector<double> angles;  // 2 * n * depth, indexed (layer, qubit, axis)
    std::vector<std::pair<int, int>> cross_pairs;
    std::uint64_t seed = 0;
};

struct DvqeConfig {
    int depth = 2;
    double learning_rate = 0.1;
    int max_iters = 100;
    int shots = 1024;
    std::uint64_t seed = 1;
};

struct SolveReport {
    std::vector<std::uint8_t> best_bits;
    double best_energy = 0.0;
    std::vector<std::pair<std::vector<std::uint8_t>, int>> histogram;  // top 10 by count
    long iterations = 0;
    double final_expectation = 0.0;
    std::vector<double> grad_norm_trace;
    long telegate_ops = 0;
    double wall_ms = 0.0;
};

class TooLargeError : public Error {
 public:
    using Error::Error;
};

/// Exhaustive minimization; independent coupling components are enumerated
/// separately, each limited to 26 variables. Ties resolve to the bitstring
/// whose integer value (bit 0 least significant) is smallest.
SolveReport brute_force_solve(const Qubo& qubo);

IsingHamiltonian qubo_to_ising(const Qubo& qubo);

/// Greedy allocation: qubits in decreasing order of total coupling weight,
/// each placed where the fewest new couplings are cut, preferring emptier
/// registers and then lower register indices on ties.
RegisterLayout allocate_qubits(const IsingHamiltonian& ham,
                               const std::vector<int>& register_sizes);

std::vector<std::pair<int, int>> cut_couplings(const IsingHamiltonian& ham,
                                               const RegisterLayout& layout);

std::vector<int> default_register_sizes(int n, int register_size = 3);

/// Simulated distributed VQE. Register groups joined by cut couplings are
/// simulated as one statevector (at most 20 qubits each); cross-register
/// entanglers are counted as telegate operations.
SolveReport dvqe_solve(const Qubo& qubo, const std::vector<int>& register_sizes,
                       const DvqeConfig& config);

/// Exact expectation of the Hamiltonian in the ansatz state (offset included).
double energy_expectation(const IsingHamiltonian& ham, const RegisterLayout& layout,
                          const AnsatzSpec& spec);

/// Exact gradient of the expectation via +-pi/2 parameter shifts.
std::vector<double> parameter_shift_gradient(const IsingHamiltonian& ham,
                                             const RegisterLayout& layout,
                                             const AnsatzSpec& spec);

/// Keeps whichever bitstring has the lower exact energy; ties keep the incumbent.
std::vector<std::uint8_t> accept_if_better(const std::vector<std::uint8_t>& candidate,
                                           const std::vector<std::uint8_t>& incumbent,
                                           const Qubo& qubo);

std::string format_solve_report(const SolveReport& report);

/// Dense simulator over n <= 20 qubits; qubit q is bit q of the state index.
class Statevector {
 public:
    explicit Statevector(int n_qubits);
    void apply_ry(int qubit, double theta);
    void apply_rz(int qubit, double theta);
    void apply_cnot(int control, int target);
    double norm() const;
    int n_qubits() const { return n_; }
    const std::vector<std::complex<double>>& amplitudes() const { return amp_; }

 private:
    int n_;
    std::vector<std::complex<double>> amp_;
};

/// Runs the ansatz circuit from |0...0>, counting cross-register entanglers.
Statevector build_ansatz_state(int n_qubits, const RegisterLayout& layout,
                               const AnsatzSpec& spec, long* telegate_counter = nullptr);

}  // namespace duc
