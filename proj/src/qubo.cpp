#include "duc/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace duc {

void Qubo::add_coupling(int i, int j, double v) {
    if (i == j) {  // x^2 = x on binaries, fold into the linear term
        linear[i] += v;
        return;
    }
    if (i > j) std::swap(i, j);
    couplings[{i, j}] += v;
}

double Qubo::energy(const std::vector<std::uint8_t>& bits) const {
    if (static_cast<int>(bits.size()) != n)
        throw DimensionError("bitstring arity does not match the QUBO");
    double e = offset;
    for (int i = 0; i < n; ++i)
        if (bits[i]) e += linear[i];
    for (const auto& [key, v] : couplings)
        if (bits[key.first] && bits[key.second]) e += v;
    return e;
}

PenaltyWeights PenaltyWeights::from_rho(double rho_commit) {
    PenaltyWeights w;
    w.logic = 0.20 * rho_commit;
    w.start_stop = 0.10 * rho_commit;
    w.start_implies_on = 0.05 * rho_commit;
    w.stop_implies_off = 0.05 * rho_commit;
    w.anchor_commit = 0.10 * rho_commit;
    w.anchor_startup = 0.10 * rho_commit;
    w.anchor_shutdown = 0.10 * rho_commit;
    return w;
}

UnaryCoefficients unary_coefficients(const AdmmState& st, int i, int t) {
    std::size_t k = st.at(i, t);
    UnaryCoefficients q;
    q.commit = -st.dual_commit[k] - st.rho_commit * (st.commit[k] + st.slack_commit[k]) +
               0.5 * st.rho_commit;
    q.startup = -st.dual_startup[k] - st.rho_startup * (st.startup[k] + st.slack_startup[k]) +
                0.5 * st.rho_startup;
    q.shutdown = -st.dual_shutdown[k] -
                 st.rho_shutdown * (st.shutdown[k] + st.slack_shutdown[k]) +
                 0.5 * st.rho_shutdown;
    return q;
}

MicroQubo build_micro_qubo(const UnaryCoefficients& unary, double anchor_commit,
                           double anchor_startup, double anchor_shutdown, double prev_commit_ref,
                           const PenaltyWeights& w, int unit, int time) {
    MicroQubo m;
    m.unit = unit;
    m.time = time;
    m.prev_commit_ref = prev_commit_ref;
    m.anchor_commit = anchor_commit;
    m.anchor_startup = anchor_startup;
    m.anchor_shutdown = anchor_shutdown;

    Qubo& q = m.qubo;
    q.n = 3;
    q.linear = {unary.commit, unary.startup, unary.shutdown};
    q.labels = {{unit, time, BinKind::Commit},
                {unit, time, BinKind::Startup},
                {unit, time, BinKind::Shutdown}};

    const double ref = prev_commit_ref;
    q.linear[0] += w.logic * (1.0 - 2.0 * ref) + w.anchor_commit * (1.0 - 2.0 * anchor_commit);
    q.linear[1] += w.logic * (1.0 + 2.0 * ref) + w.anchor_startup * (1.0 - 2.0 * anchor_startup) +
                   w.start_implies_on;
    q.linear[2] += w.logic * (1.0 - 2.0 * ref) + w.anchor_shutdown * (1.0 - 2.0 * anchor_shutdown);
    q.add_coupling(0, 1, -2.0 * w.logic - w.start_implies_on);
    q.add_coupling(0, 2, 2.0 * w.logic + w.stop_implies_off);
    q.add_coupling(1, 2, -2.0 * w.logic + w.start_stop);
    q.offset += w.logic * ref * ref + w.anchor_commit * anchor_commit * anchor_commit +
                w.anchor_startup * anchor_startup * anchor_startup +
                w.anchor_shutdown * anchor_shutdown * anchor_shutdown;

    // Zero couplings would otherwise linger as map keys.
    for (auto it = q.couplings.begin(); it != q.couplings.end();)
        it = (it->second == 0.0) ? q.couplings.erase(it) : std::next(it);
    return m;
}

MicroQubo build_micro_qubo(const AdmmState& st, const PenaltyWeights& weights, int i, int t,
                           double prev_commit_ref) {
    std::size_t k = st.at(i, t);
    return build_micro_qubo(unary_coefficients(st, i, t), st.commit[k], st.startup[k],
                            st.shutdown[k], prev_commit_ref, weights, i, t);
}

double prev_commit_reference(const UcInstance& inst, const AdmmState& st, int i, int t) {
    return t == 0 ? static_cast<double>(inst.initial.committed[i]) : st.commit[st.at(i, t - 1)];
}

double hardness_epsilon(double min_energy) { return 0.01 * std::max(1.0, std::abs(min_energy)); }

HardnessScore hardness_score(const MicroQubo& micro, const HardnessWeights& w, double epsilon,
                             double eta_guard) {
    const Qubo& q = micro.qubo;
    if (q.n != 3) throw DimensionError("hardness score is defined for 3-variable micro-QUBOs");

    double energies[8];
    for (int x = 0; x < 8; ++x) {
        std::vector<std::uint8_t> bits = {static_cast<std::uint8_t>(x & 1),
                                          static_cast<std::uint8_t>((x >> 1) & 1),
                                          static_cast<std::uint8_t>((x >> 2) & 1)};
        energies[x] = q.energy(bits);
    }
    double sorted[8];
    std::copy(energies, energies + 8, sorted);
    std::sort(sorted, sorted + 8);
    double gap = sorted[1] - sorted[0];
    int near = 0;
    for (double e : energies)
        if (e <= sorted[0] + epsilon) ++near;

    auto coupling = [&q](int i, int j) {
        auto it = q.couplings.find({i, j});
        return it == q.couplings.end() ? 0.0 : it->second;
    };
    double jyu = coupling(0, 1), jyv = coupling(0, 2), juv = coupling(1, 2);
    // Triangle frustration on the Ising-converted couplings (J = Q/4 keeps signs).
    bool frustrated = jyu != 0.0 && jyv != 0.0 && juv != 0.0 && jyu * jyv * juv > 0.0;

    double coupling_sum = std::abs(jyu) + std::abs(jyv) + std::abs(juv);
    double field_sum = std::abs(q.linear[0]) + std::abs(q.linear[1]) + std::abs(q.linear[2]);
    double ratio = coupling_sum / (field_sum + eta_guard);

    std::vector<double> magnitudes;
    for (double c : q.linear)
        if (c != 0.0) magnitudes.push_back(std::abs(c));
    for (double c : {jyu, jyv, juv})
        if (c != 0.0) magnitudes.push_back(std::abs(c));
    double range = 0.0;
    if (magnitudes.size() >= 2) {
        auto [mn, mx] = std::minmax_element(magnitudes.begin(), magnitudes.end());
        range = std::clamp(std::log10(*mx / *mn) / 4.0, 0.0, 1.0);
    }

    HardnessScore score;
    score.weights = w;
    score.components[0] = 1.0 / (gap + eta_guard);
    score.components[1] = (near - 1) / 7.0;
    score.components[2] = frustrated ? 1.0 : 0.0;
    score.components[3] = ratio / (1.0 + ratio);
    score.components[4] = range;
    score.total = w.gap * score.components[0] + w.degeneracy * score.components[1] +
                  w.frustration * score.components[2] + w.coupling_ratio * score.components[3] +
                  w.dynamic_range * score.components[4];
    return score;
}

BatchPlan plan_batches(const std::map<std::pair<int, int>, HardnessScore>& scores, int n_batches,
                       bool unit_coherent) {
    if (n_batches < 1)
        throw ValidationError("batch count must be >= 1", {"batch count must be >= 1"});

    struct Item {
        double hardness;
        int order_key;                            // unit, or flattened (i, t)
        std::vector<std::pair<int, int>> members;
    };
    std::vector<Item> items;
    if (unit_coherent) {
        std::map<int, Item> by_unit;
        for (const auto& [key, sc] : scores) {
            auto& it = by_unit[key.first];
            it.hardness += sc.total;
            it.order_key = key.first;
            it.members.push_back(key);
        }
        if (n_batches > static_cast<int>(by_unit.size()))
            throw ValidationError("unit-coherent batching needs K <= unit count",
                                  {"unit-coherent batching needs K <= unit count"});
        for (auto& [unit, it] : by_unit) items.push_back(std::move(it));
    } else {
        for (const auto& [key, sc] : scores)
            items.push_back({sc.total, 0, {key}});
        // map iteration is already (i, t)-ordered; keep that order for ties
        for (std::size_t k = 0; k < items.size(); ++k) items[k].order_key = static_cast<int>(k);
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.hardness != b.hardness) return a.hardness > b.hardness;
        return a.order_key < b.order_key;
    });

    BatchPlan plan;
    plan.unit_coherent = unit_coherent;
    plan.batches.resize(n_batches);
    plan.hardness_sums.assign(n_batches, 0.0);
    for (const auto& item : items) {
        int best = 0;
        for (int b = 1; b < n_batches; ++b)
            if (plan.hardness_sums[b] < plan.hardness_sums[best]) best = b;
        plan.hardness_sums[best] += item.hardness;
        for (const auto& m : item.members) plan.batches[best].push_back(m);
    }
    for (auto& b : plan.batches) std::sort(b.begin(), b.end());
    return plan;
}

Qubo assemble_batched_qubo(const std::map<std::pair<int, int>, MicroQubo>& micros,
                           const std::vector<std::pair<int, int>>& batch) {
    std::vector<std::pair<int, int>> members = batch;
    std::sort(members.begin(), members.end());
    Qubo out;
    out.n = 3 * static_cast<int>(members.size());
    out.linear.reserve(out.n);
    for (const auto& key : members) {
        auto it = micros.find(key);
        if (it == micros.end())
            throw ValidationError("batch member has no micro-QUBO",
                                  {"batch member has no micro-QUBO"});
        const Qubo& q = it->second.qubo;
        int base = static_cast<int>(out.linear.size());
        out.linear.insert(out.linear.end(), q.linear.begin(), q.linear.end());
        out.labels.insert(out.labels.end(), q.labels.begin(), q.labels.end());
        for (const auto& [ij, v] : q.couplings)
            out.couplings[{base + ij.first, base + ij.second}] = v;
        out.offset += q.offset;
    }
    return out;
}

ThreeQubos partition_three_qubos(const AdmmState& st) {
    ThreeQubos out;
    int nt = st.n_units * st.horizon;
    for (Qubo* q : {&out.commit, &out.startup, &out.shutdown}) {
        q->n = nt;
        q->linear.assign(nt, 0.0);
        q->labels.resize(nt);
    }
    for (int i = 0; i < st.n_units; ++i)
        for (int t = 0; t < st.horizon; ++t) {
            auto u = unary_coefficients(st, i, t);
            int k = i * st.horizon + t;
            out.commit.linear[k] = u.commit;
            out.startup.linear[k] = u.startup;
            out.shutdown.linear[k] = u.shutdown;
            out.commit.labels[k] = {i, t, BinKind::Commit};
            out.startup.labels[k] = {i, t, BinKind::Startup};
            out.shutdown.labels[k] = {i, t, BinKind::Shutdown};
        }
    return out;
}

Qubo assemble_monolithic(const UcInstance& inst, const AdmmState& st,
                         const PenaltyWeights& weights) {
    std::map<std::pair<int, int>, MicroQubo> micros;
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < st.n_units; ++i)
        for (int t = 0; t < st.horizon; ++t) {
            micros[{i, t}] =
                build_micro_qubo(st, weights, i, t, prev_commit_reference(inst, st, i, t));
            all.emplace_back(i, t);
        }
    return assemble_batched_qubo(micros, all);
}

std::string export_qubo(const Qubo& q) {
    std::ostringstream os;
    os << q.n << "\n";
    for (const auto& [ij, v] : q.couplings)
        os << ij.first << " " << ij.second << " " << util::format_double(v) << "\n";
    for (int i = 0; i < q.n; ++i)
        if (q.linear[i] != 0.0) os << i << " " << util::format_double(q.linear[i]) << "\n";
    os << "offset " << util::format_double(q.offset) << "\n";
    return os.str();
}

Qubo parse_qubo(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    Qubo q;
    bool have_n = false;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string_view sv(line);
        auto hash = sv.find('#');
        if (hash != std::string_view::npos) sv = sv.substr(0, hash);
        std::istringstream ls{std::string(sv)};
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        try {
            if (!have_n) {
                q.n = std::stoi(tok.at(0));
                if (q.n < 0 || tok.size() != 1) throw ParseError("bad variable count");
                q.linear.assign(q.n, 0.0);
                have_n = true;
            } else if (tok[0] == "offset") {
                if (tok.size() != 2) throw ParseError("bad offset line");
                q.offset = std::stod(tok[1]);
            } else if (tok.size() == 2) {
                int i = std::stoi(tok[0]);
                q.linear.at(i) += std::stod(tok[1]);
            } else if (tok.size() == 3) {
                int i = std::stoi(tok[0]);
                int j = std::stoi(tok[1]);
                if (i < 0 || j < 0 || i >= q.n || j >= q.n || i == j)
                    throw ParseError("bad coupling indices");
                q.add_coupling(i, j, std::stod(tok[2]));
            } else {
                throw ParseError("unrecognized line");
            }
        } catch (const ParseError&) {
            throw ParseError("qubo text line " + std::to_string(line_no) + ": " + line);
        } catch (const std::exception&) {
            throw ParseError("qubo text line " + std::to_string(line_no) + ": " + line);
        }
    }
    if (!have_n) throw ParseError("qubo text is empty");
    q.labels.resize(q.n);
    return q;
}

}  // namespace duc
