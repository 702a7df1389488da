#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "duc/qubo_solve.hpp"

namespace duc {

namespace {
constexpr int kMaxSimQubits = 20;
constexpr double kHalfPi = 1.5707963267948966;
}  // namespace

Statevector::Statevector(int n_qubits) : n_(n_qubits) {
    if (n_ < 0 || n_ > kMaxSimQubits)
        throw TooLargeError("statevector limited to " + std::to_string(kMaxSimQubits) +
                            " qubits, got " + std::to_string(n_));
    amp_.assign(std::size_t(1) << n_, {0.0, 0.0});
    amp_[0] = {1.0, 0.0};
}

void Statevector::apply_ry(int qubit, double theta) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const std::size_t mask = std::size_t(1) << qubit;
    for (std::size_t base = 0; base < amp_.size(); ++base) {
        if (base & mask) continue;
        auto a0 = amp_[base];
        auto a1 = amp_[base | mask];
        amp_[base] = c * a0 - s * a1;
        amp_[base | mask] = s * a0 + c * a1;
    }
}

void Statevector::apply_rz(int qubit, double theta) {
    const std::complex<double> phase0 = std::polar(1.0, -0.5 * theta);
    const std::complex<double> phase1 = std::polar(1.0, 0.5 * theta);
    const std::size_t mask = std::size_t(1) << qubit;
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] *= (i & mask) ? phase1 : phase0;
}

void Statevector::apply_cnot(int control, int target) {
    const std::size_t cmask = std::size_t(1) << control;
    const std::size_t tmask = std::size_t(1) << target;
    for (std::size_t i = 0; i < amp_.size(); ++i)
        if ((i & cmask) && !(i & tmask)) std::swap(amp_[i], amp_[i | tmask]);
}

double Statevector::norm() const {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return std::sqrt(s);
}

Statevector build_ansatz_state(int n_qubits, const RegisterLayout& layout, const AnsatzSpec& spec,
                               long* telegate_counter) {
    if (static_cast<int>(spec.angles.size()) != 2 * n_qubits * spec.depth)
        throw DimensionError("ansatz expects 2 * n * depth angles");
    Statevector psi(n_qubits);

    std::vector<std::vector<int>> register_qubits(layout.sizes.size());
    for (int q = 0; q < n_qubits; ++q) register_qubits[layout.qubit_register[q]].push_back(q);

    for (int layer = 0; layer < spec.depth; ++layer) {
        for (int q = 0; q < n_qubits; ++q) {
            psi.apply_ry(q, spec.angles[2 * (layer * n_qubits + q)]);
            psi.apply_rz(q, spec.angles[2 * (layer * n_qubits + q) + 1]);
        }
        for (const auto& reg : register_qubits)
            for (std::size_t k = 0; k + 1 < reg.size(); ++k) psi.apply_cnot(reg[k], reg[k + 1]);
        for (const auto& [a, b] : spec.cross_pairs) {
            psi.apply_cnot(a, b);
            if (telegate_counter) ++(*telegate_counter);
        }
    }
    return psi;
}

namespace {

// Diagonal spin energy per basis state, offset excluded.
std::vector<double> diagonal_energies(const IsingHamiltonian& ham) {
    std::size_t count = std::size_t(1) << ham.n;
    std::vector<double> diag(count, 0.0);
    for (std::size_t x = 0; x < count; ++x) {
        double e = 0.0;
        for (int i = 0; i < ham.n; ++i) e += ham.fields[i] * ((x >> i & 1u) ? -1.0 : 1.0);
        for (const auto& [i, j, v] : ham.couplings)
            e += v * ((x >> i & 1u) ? -1.0 : 1.0) * ((x >> j & 1u) ? -1.0 : 1.0);
        diag[x] = e;
    }
    return diag;
}

double expectation_from_diag(const Statevector& psi, const std::vector<double>& diag) {
    const auto& amp = psi.amplitudes();
    double e = 0.0;
    for (std::size_t x = 0; x < amp.size(); ++x) e += std::norm(amp[x]) * diag[x];
    return e;
}

}  // namespace

double energy_expectation(const IsingHamiltonian& ham, const RegisterLayout& layout,
                          const AnsatzSpec& spec) {
    if (ham.n > kMaxSimQubits)
        throw TooLargeError("expectation limited to " + std::to_string(kMaxSimQubits) + " qubits");
    auto diag = diagonal_energies(ham);
    Statevector psi = build_ansatz_state(ham.n, layout, spec, nullptr);
    return expectation_from_diag(psi, diag) + ham.offset;
}

std::vector<double> parameter_shift_gradient(const IsingHamiltonian& ham,
                                             const RegisterLayout& layout,
                                             const AnsatzSpec& spec) {
    auto diag = diagonal_energies(ham);
    AnsatzSpec shifted = spec;
    std::vector<double> grad(spec.angles.size(), 0.0);
    for (std::size_t p = 0; p < spec.angles.size(); ++p) {
        shifted.angles[p] = spec.angles[p] + kHalfPi;
        double plus = expectation_from_diag(build_ansatz_state(ham.n, layout, shifted, nullptr),
                                            diag);
        shifted.angles[p] = spec.angles[p] - kHalfPi;
        double minus = expectation_from_diag(build_ansatz_state(ham.n, layout, shifted, nullptr),
                                             diag);
        shifted.angles[p] = spec.angles[p];
        grad[p] = 0.5 * (plus - minus);
    }
    return grad;
}

namespace {

struct Island {
    std::vector<int> qubits;          // global indices, ascending
    std::vector<int> register_ids;    // global register indices, ascending
};

// Registers linked by cut couplings must share one simulated statevector.
std::vector<Island> split_islands(const IsingHamiltonian& ham, const RegisterLayout& layout) {
    int n_regs = static_cast<int>(layout.sizes.size());
    std::vector<int> parent(n_regs);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (const auto& [i, j, v] : ham.couplings) {
        if (v == 0.0) continue;
        int ra = layout.qubit_register[i], rb = layout.qubit_register[j];
        if (ra != rb) parent[find(ra)] = find(rb);
    }
    std::map<int, Island> groups;
    for (int r = 0; r < n_regs; ++r) groups[find(r)].register_ids.push_back(r);
    for (int q = 0; q < ham.n; ++q) groups[find(layout.qubit_register[q])].qubits.push_back(q);
    std::vector<Island> islands;
    for (auto& [root, isl] : groups)
        if (!isl.qubits.empty()) islands.push_back(std::move(isl));
    std::sort(islands.begin(), islands.end(),
              [](const Island& a, const Island& b) { return a.qubits.front() < b.qubits.front(); });
    return islands;
}

struct AdamOptimizer {
    double lr;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    int step_count = 0;

    explicit AdamOptimizer(std::size_t n, double learning_rate)
        : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad) {
        ++step_count;
        double bc1 = 1.0 - std::pow(beta1, step_count);
        double bc2 = 1.0 - std::pow(beta2, step_count);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

}  // namespace

SolveReport dvqe_solve(const Qubo& qubo, const std::vector<int>& register_sizes,
                       const DvqeConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    IsingHamiltonian ham = qubo_to_ising(qubo);
    RegisterLayout layout = allocate_qubits(ham, register_sizes);
    std::vector<Island> islands = split_islands(ham, layout);
    const int shots = std::max(config.shots, 1);

    SolveReport report;
    report.best_bits.assign(qubo.n, 0);
    std::vector<std::vector<std::vector<std::uint8_t>>> island_samples;  // [island][shot]
    double expectation_sum = ham.offset;

    for (const Island& island : islands) {
        const int m = static_cast<int>(island.qubits.size());
        if (m > kMaxSimQubits)
            throw TooLargeError("coupled register group needs " + std::to_string(m) +
                                " qubits; the simulator supports " +
                                std::to_string(kMaxSimQubits));

        std::vector<int> local_of(qubo.n, -1);
        for (int k = 0; k < m; ++k) local_of[island.qubits[k]] = k;

        // Island Hamiltonian and QUBO restriction in local indexing.
        IsingHamiltonian sub;
        sub.n = m;
        sub.fields.resize(m);
        for (int k = 0; k < m; ++k) sub.fields[k] = ham.fields[island.qubits[k]];
        for (const auto& [i, j, v] : ham.couplings)
            if (local_of[i] >= 0 && local_of[j] >= 0) {
                int a = local_of[i], b = local_of[j];
                if (a > b) std::swap(a, b);
                sub.couplings.emplace_back(a, b, v);
            }
        Qubo sub_qubo;
        sub_qubo.n = m;
        sub_qubo.linear.resize(m);
        for (int k = 0; k < m; ++k) sub_qubo.linear[k] = qubo.linear[island.qubits[k]];
        for (const auto& [ij, v] : qubo.couplings)
            if (local_of[ij.first] >= 0 && local_of[ij.second] >= 0)
                sub_qubo.couplings[{local_of[ij.first], local_of[ij.second]}] = v;

        RegisterLayout sub_layout;
        std::vector<int> local_reg(layout.sizes.size(), -1);
        for (std::size_t r = 0; r < island.register_ids.size(); ++r) {
            local_reg[island.register_ids[r]] = static_cast<int>(r);
            sub_layout.sizes.push_back(0);
        }
        sub_layout.qubit_register.resize(m);
        for (int k = 0; k < m; ++k) {
            int r = local_reg[layout.qubit_register[island.qubits[k]]];
            sub_layout.qubit_register[k] = r;
            ++sub_layout.sizes[r];
        }

        AnsatzSpec spec;
        spec.depth = config.depth;
        spec.seed = config.seed;
        for (const auto& [i, j, v] : sub.couplings)
            if (sub_layout.qubit_register[i] != sub_layout.qubit_register[j])
                spec.cross_pairs.emplace_back(i, j);
        std::sort(spec.cross_pairs.begin(), spec.cross_pairs.end());
        sub_layout.cross_coupling_count = static_cast<int>(spec.cross_pairs.size());

        // Every island draws from an identically seeded stream, so solving a
        // block-diagonal batch reproduces the standalone per-block solves.
        std::mt19937_64 rng(util::mix_seed(config.seed, 0x5D));
        spec.angles.resize(2 * std::size_t(m) * config.depth);
        for (auto& a : spec.angles) a = -0.1 + 0.2 * util::to_unit_interval(rng());

        auto diag = diagonal_energies(sub);
        AdamOptimizer adam(spec.angles.size(), config.learning_rate);
        for (int iter = 0; iter < config.max_iters; ++iter) {
            AnsatzSpec shifted = spec;
            std::vector<double> grad(spec.angles.size());
            for (std::size_t p = 0; p < spec.angles.size(); ++p) {
                shifted.angles[p] = spec.angles[p] + kHalfPi;
                double plus = expectation_from_diag(
                    build_ansatz_state(m, sub_layout, shifted, &report.telegate_ops), diag);
                shifted.angles[p] = spec.angles[p] - kHalfPi;
                double minus = expectation_from_diag(
                    build_ansatz_state(m, sub_layout, shifted, &report.telegate_ops), diag);
                shifted.angles[p] = spec.angles[p];
                grad[p] = 0.5 * (plus - minus);
            }
            double gnorm = 0.0;
            for (double g : grad) gnorm += g * g;
            gnorm = std::sqrt(gnorm);
            report.grad_norm_trace.push_back(gnorm);
            ++report.iterations;
            if (gnorm < 1e-10) break;
            adam.step(spec.angles, grad);
            for (double a : spec.angles)
                if (!std::isfinite(a)) throw SolverError("DVQE parameters diverged");
        }

        Statevector psi = build_ansatz_state(m, sub_layout, spec, &report.telegate_ops);
        expectation_sum += expectation_from_diag(psi, diag);

        // Cumulative distribution sampling of the trained state.
        std::vector<double> cdf(psi.amplitudes().size());
        double acc = 0.0;
        for (std::size_t x = 0; x < cdf.size(); ++x) {
            acc += std::norm(psi.amplitudes()[x]);
            cdf[x] = acc;
        }
        std::vector<std::vector<std::uint8_t>> samples;
        samples.reserve(shots);
        std::vector<std::uint8_t> best_local;
        double best_local_energy = 0.0;
        for (int shot = 0; shot < shots; ++shot) {
            double u = util::to_unit_interval(rng()) * acc;
            std::size_t x = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            if (x >= cdf.size()) x = cdf.size() - 1;
            std::vector<std::uint8_t> bits(m);
            for (int k = 0; k < m; ++k) bits[k] = static_cast<std::uint8_t>(x >> k & 1u);
            double e = sub_qubo.energy(bits);
            if (shot == 0 || e < best_local_energy) {
                best_local_energy = e;
                best_local = bits;
            }
            samples.push_back(std::move(bits));
        }
        for (int k = 0; k < m; ++k) report.best_bits[island.qubits[k]] = best_local[k];
        island_samples.push_back(std::move(samples));
    }

    report.best_energy = qubo.energy(report.best_bits);
    report.final_expectation = expectation_sum;

    // Global histogram: shot j concatenates shot j of every island.
    std::map<std::vector<std::uint8_t>, int> counts;
    for (int shot = 0; shot < shots; ++shot) {
        std::vector<std::uint8_t> bits(qubo.n, 0);
        for (std::size_t isl = 0; isl < islands.size(); ++isl)
            for (std::size_t k = 0; k < islands[isl].qubits.size(); ++k)
                bits[islands[isl].qubits[k]] = island_samples[isl][shot][k];
        ++counts[bits];
    }
    std::vector<std::pair<std::vector<std::uint8_t>, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > 10) ranked.resize(10);
    report.histogram = std::move(ranked);

    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace duc
