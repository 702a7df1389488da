#include "duc/qubo_solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace duc {

namespace {

// Union-find over QUBO variables; components can be solved independently.
struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<std::vector<int>> coupling_components(int n,
                                                  const std::map<std::pair<int, int>, double>& c) {
    DisjointSets ds(n);
    for (const auto& [ij, v] : c)
        if (v != 0.0) ds.unite(ij.first, ij.second);
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[ds.find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

}  // namespace

double IsingHamiltonian::spin_energy(const std::vector<std::uint8_t>& bits) const {
    if (static_cast<int>(bits.size()) != n)
        throw DimensionError("bitstring arity does not match the Hamiltonian");
    double e = offset;
    for (int i = 0; i < n; ++i) e += fields[i] * (bits[i] ? -1.0 : 1.0);
    for (const auto& [i, j, v] : couplings)
        e += v * (bits[i] ? -1.0 : 1.0) * (bits[j] ? -1.0 : 1.0);
    return e;
}

SolveReport brute_force_solve(const Qubo& qubo) {
    auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    report.best_bits.assign(qubo.n, 0);
    report.best_energy = qubo.offset;

    for (const auto& comp : coupling_components(qubo.n, qubo.couplings)) {
        int m = static_cast<int>(comp.size());
        if (m > 26)
            throw TooLargeError("brute force limited to 26 coupled variables, got " +
                                std::to_string(m));
        std::vector<std::pair<std::pair<int, int>, double>> local_couplings;
        std::vector<int> pos(qubo.n, -1);
        for (int k = 0; k < m; ++k) pos[comp[k]] = k;
        for (const auto& [ij, v] : qubo.couplings)
            if (pos[ij.first] >= 0 && pos[ij.second] >= 0)
                local_couplings.push_back({{pos[ij.first], pos[ij.second]}, v});

        double best = 0.0;
        std::uint32_t best_x = 0;
        const std::uint32_t count = 1u << m;
        for (std::uint32_t x = 0; x < count; ++x) {
            double e = 0.0;
            for (int k = 0; k < m; ++k)
                if (x >> k & 1u) e += qubo.linear[comp[k]];
            for (const auto& [kk, v] : local_couplings)
                if ((x >> kk.first & 1u) && (x >> kk.second & 1u)) e += v;
            if (x == 0 || e < best) {
                best = e;
                best_x = x;
            }
        }
        for (int k = 0; k < m; ++k)
            report.best_bits[comp[k]] = static_cast<std::uint8_t>(best_x >> k & 1u);
        report.best_energy += best;
    }
    report.histogram.push_back({report.best_bits, 1});
    report.final_expectation = report.best_energy;
    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return report;
}

IsingHamiltonian qubo_to_ising(const Qubo& qubo) {
    IsingHamiltonian ham;
    ham.n = qubo.n;
    ham.fields.assign(qubo.n, 0.0);
    ham.offset = qubo.offset;
    for (int i = 0; i < qubo.n; ++i) {
        ham.fields[i] = -0.5 * qubo.linear[i];
        ham.offset += 0.5 * qubo.linear[i];
    }
    for (const auto& [ij, v] : qubo.couplings) {
        if (v == 0.0) continue;
        ham.couplings.emplace_back(ij.first, ij.second, 0.25 * v);
        ham.fields[ij.first] -= 0.25 * v;
        ham.fields[ij.second] -= 0.25 * v;
        ham.offset += 0.25 * v;
    }
    return ham;
}

RegisterLayout allocate_qubits(const IsingHamiltonian& ham,
                               const std::vector<int>& register_sizes) {
    int total = std::accumulate(register_sizes.begin(), register_sizes.end(), 0);
    if (total != ham.n)
        throw DimensionError("register sizes sum to " + std::to_string(total) + ", expected " +
                             std::to_string(ham.n));
    for (int s : register_sizes)
        if (s < 1) throw DimensionError("every register needs at least one qubit");

    std::vector<double> degree(ham.n, 0.0);
    std::vector<std::vector<std::pair<int, double>>> neighbors(ham.n);
    for (const auto& [i, j, v] : ham.couplings) {
        if (v == 0.0) continue;
        degree[i] += std::abs(v);
        degree[j] += std::abs(v);
        neighbors[i].push_back({j, v});
        neighbors[j].push_back({i, v});
    }
    std::vector<int> order(ham.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (degree[a] != degree[b]) return degree[a] > degree[b];
        return a < b;
    });

    RegisterLayout layout;
    layout.sizes = register_sizes;
    layout.qubit_register.assign(ham.n, -1);
    std::vector<int> occupancy(register_sizes.size(), 0);
    for (int q : order) {
        int best_reg = -1;
        int best_cut = 0;
        for (int r = 0; r < static_cast<int>(register_sizes.size()); ++r) {
            if (occupancy[r] >= register_sizes[r]) continue;
            int cut = 0;
            for (const auto& [other, v] : neighbors[q])
                if (layout.qubit_register[other] >= 0 && layout.qubit_register[other] != r) ++cut;
            if (best_reg < 0 || cut < best_cut ||
                (cut == best_cut && occupancy[r] < occupancy[best_reg])) {
                best_reg = r;
                best_cut = cut;
            }
        }
        layout.qubit_register[q] = best_reg;
        ++occupancy[best_reg];
    }
    for (const auto& [i, j, v] : ham.couplings)
        if (v != 0.0 && layout.qubit_register[i] != layout.qubit_register[j])
            ++layout.cross_coupling_count;
    return layout;
}

std::vector<std::pair<int, int>> cut_couplings(const IsingHamiltonian& ham,
                                               const RegisterLayout& layout) {
    std::vector<std::pair<int, int>> cuts;
    for (const auto& [i, j, v] : ham.couplings)
        if (v != 0.0 && layout.qubit_register[i] != layout.qubit_register[j])
            cuts.emplace_back(i, j);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

std::vector<int> default_register_sizes(int n, int register_size) {
    std::vector<int> sizes(n / register_size, register_size);
    if (int rem = n % register_size) sizes.push_back(rem);
    if (sizes.empty()) sizes.push_back(n);
    return sizes;
}

std::vector<std::uint8_t> accept_if_better(const std::vector<std::uint8_t>& candidate,
                                           const std::vector<std::uint8_t>& incumbent,
                                           const Qubo& qubo) {
    if (static_cast<int>(candidate.size()) != qubo.n ||
        static_cast<int>(incumbent.size()) != qubo.n)
        throw DimensionError("bitstring arity does not match the QUBO");
    return qubo.energy(candidate) < qubo.energy(incumbent) ? candidate : incumbent;
}

std::string format_solve_report(const SolveReport& report) {
    std::ostringstream os;
    os << "bitstring ";
    for (auto b : report.best_bits) os << int(b);
    os << "\n";
    os << "energy " << util::format_double(report.best_energy) << "\n";
    os << "iterations " << report.iterations << "\n";
    os << "telegate_ops " << report.telegate_ops << "\n";
    os << "expectation " << util::format_double(report.final_expectation) << "\n";
    for (const auto& [bits, count] : report.histogram) {
        os << "histogram ";
        for (auto b : bits) os << int(b);
        os << " " << count << "\n";
    }
    return os.str();
}

}  // namespace duc
