#include "duc/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace duc {

const char* decomposition_name(Decomposition d) {
    switch (d) {
        case Decomposition::Monolithic: return "monolithic";
        case Decomposition::Three: return "three";
        case Decomposition::Micro: return "micro";
        default: return "batched";
    }
}

const char* backend_name(Backend b) { return b == Backend::Brute ? "brute" : "dvqe"; }

std::optional<Decomposition> parse_decomposition(const std::string& s) {
    if (s == "monolithic") return Decomposition::Monolithic;
    if (s == "three") return Decomposition::Three;
    if (s == "micro") return Decomposition::Micro;
    if (s == "batched") return Decomposition::Batched;
    return std::nullopt;
}

std::optional<Backend> parse_backend(const std::string& s) {
    if (s == "brute") return Backend::Brute;
    if (s == "dvqe") return Backend::Dvqe;
    return std::nullopt;
}

long ConvergenceReport::block2_units() const {
    long total = 0;
    for (const auto& row : trace) total += row.block2_units;
    return total;
}

long ConvergenceReport::block2_matched() const {
    long total = 0;
    for (const auto& row : trace) total += row.block2_matched;
    return total;
}

double ConvergenceReport::block2_match_rate() const {
    long total = block2_units();
    return total == 0 ? 1.0 : static_cast<double>(block2_matched()) / total;
}

void update_slacks(AdmmState& st) {
    for (auto fam : st.families())
        for (std::size_t k = 0; k < fam.slack->size(); ++k) {
            double raw = -((*fam.dual)[k] + fam.rho * ((*fam.relaxed)[k] - (*fam.proxy)[k])) /
                         (fam.beta + fam.rho);
            (*fam.slack)[k] = std::max(raw, 0.0);
        }
}

void update_duals(AdmmState& st) {
    for (auto fam : st.families())
        for (std::size_t k = 0; k < fam.dual->size(); ++k)
            (*fam.dual)[k] +=
                fam.rho * ((*fam.relaxed)[k] - (*fam.proxy)[k] + (*fam.slack)[k]);
}

Residuals compute_residuals(const AdmmState& cur, const AdmmState& prev) {
    Residuals res;
    auto families_cur = cur.families();
    auto families_prev = prev.families();
    double dual_sq = 0.0;
    double* primal[3] = {&res.pri_commit, &res.pri_startup, &res.pri_shutdown};
    for (int f = 0; f < 3; ++f) {
        const auto& fc = families_cur[f];
        const auto& fp = families_prev[f];
        double pri_sq = 0.0, move_sq = 0.0;
        for (std::size_t k = 0; k < fc.relaxed->size(); ++k) {
            double r = (*fc.relaxed)[k] - (*fc.proxy)[k] + (*fc.slack)[k];
            pri_sq += r * r;
            double d = ((*fc.proxy)[k] - (*fp.proxy)[k]) - ((*fc.slack)[k] - (*fp.slack)[k]);
            move_sq += d * d;
        }
        *primal[f] = std::sqrt(pri_sq);
        dual_sq += fc.rho * fc.rho * move_sq;
    }
    res.dual = std::sqrt(dual_sq);
    return res;
}

double lyapunov_value(const UcInstance& inst, const AdmmState& st, double kappa) {
    double value = evaluate_augmented_lagrangian(inst, st);
    double r_sq = 0.0;
    for (const auto& fam : st.families())
        for (std::size_t k = 0; k < fam.relaxed->size(); ++k) {
            double r = (*fam.relaxed)[k] - (*fam.proxy)[k] + (*fam.slack)[k];
            r_sq += r * r;
        }
    return value + 0.5 * kappa * r_sq;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double* proxy_array(AdmmState& st, BinKind kind) {
    switch (kind) {
        case BinKind::Commit: return st.proxy_commit.data();
        case BinKind::Startup: return st.proxy_startup.data();
        default: return st.proxy_shutdown.data();
    }
}

// Objective-(1a)-style cost of the binary proxies with the current dispatch.
double schedule_cost(const UcInstance& inst, const std::vector<double>& z_commit,
                     const std::vector<double>& z_startup, const std::vector<double>& z_shutdown,
                     const std::vector<std::vector<double>>& power) {
    double cost = 0.0;
    const int horizon = inst.horizon;
    for (int i = 0; i < inst.n_units(); ++i) {
        const auto& g = inst.generators[i];
        for (int t = 0; t < horizon; ++t) {
            std::size_t k = static_cast<std::size_t>(i) * horizon + t;
            cost += g.cost_fixed * z_commit[k] + g.cost_startup * z_startup[k] +
                    g.cost_shutdown * z_shutdown[k];
        }
    }
    for (int s = 0; s < inst.n_scenarios(); ++s) {
        double pi = inst.scenarios.probability[s];
        for (int i = 0; i < inst.n_units(); ++i) {
            const auto& g = inst.generators[i];
            for (int t = 0; t < horizon; ++t) {
                double p = power[s][static_cast<std::size_t>(i) * horizon + t];
                cost += pi * (g.cost_linear * p + g.cost_quad * p * p);
            }
        }
    }
    return cost;
}

// One safeguarded acceptance group: candidate bits are judged against the
// incumbent on this sub-QUBO's exact energy.
struct AcceptUnit {
    Qubo qubo;
};

struct Block2Result {
    double candidate_energy = 0.0;
    double accepted_energy = 0.0;
    long telegate_ops = 0;
    long units = 0;
    long matched = 0;
};

std::vector<std::uint8_t> bits_from_labels(const Qubo& q, const AdmmState& st,
                                           const std::vector<double>& commit,
                                           const std::vector<double>& startup,
                                           const std::vector<double>& shutdown) {
    std::vector<std::uint8_t> bits(q.n);
    for (int k = 0; k < q.n; ++k) {
        const VarLabel& lab = q.labels[k];
        const std::vector<double>& arr = lab.kind == BinKind::Commit ? commit
                                         : lab.kind == BinKind::Startup ? startup
                                                                        : shutdown;
        bits[k] = arr[st.at(lab.unit, lab.time)] > 0.5 ? 1 : 0;
    }
    return bits;
}

void dump_block1_qp(const QuadraticProgram& qp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (out) out << dump_qp(qp);
}

void dump_task_qubos(const std::vector<Qubo>& tasks, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::ofstream out(std::filesystem::path(dir) / ("qubo_" + std::to_string(i) + ".txt"),
                          std::ios::binary);
        if (out) out << export_qubo(tasks[i]);
    }
}

Block2Result run_block2(const UcInstance& inst, AdmmState& st, const AdmmConfig& cfg,
                        BinarySchedule& incumbent, bool dump_debug) {
    const int horizon = st.horizon;
    const PenaltyWeights weights = cfg.penalties();

    // Solver tasks for the configured decomposition.
    std::vector<Qubo> tasks;
    std::vector<AcceptUnit> accept_units;
    std::map<std::pair<int, int>, MicroQubo> micros;

    auto build_all_micros = [&] {
        for (int i = 0; i < st.n_units; ++i)
            for (int t = 0; t < horizon; ++t)
                micros[{i, t}] =
                    build_micro_qubo(st, weights, i, t, prev_commit_reference(inst, st, i, t));
    };

    switch (cfg.mode) {
        case Decomposition::Monolithic: {
            tasks.push_back(assemble_monolithic(inst, st, weights));
            accept_units.push_back({tasks[0]});
            break;
        }
        case Decomposition::Three: {
            ThreeQubos three = partition_three_qubos(st);
            tasks = {three.commit, three.startup, three.shutdown};
            for (const Qubo& q : tasks)
                for (int k = 0; k < q.n; ++k) {
                    Qubo bit;
                    bit.n = 1;
                    bit.linear = {q.linear[k]};
                    bit.labels = {q.labels[k]};
                    accept_units.push_back({std::move(bit)});
                }
            break;
        }
        case Decomposition::Micro: {
            build_all_micros();
            for (const auto& [key, m] : micros) {
                tasks.push_back(m.qubo);
                accept_units.push_back({m.qubo});
            }
            break;
        }
        case Decomposition::Batched: {
            build_all_micros();
            std::map<std::pair<int, int>, HardnessScore> scores;
            for (const auto& [key, m] : micros) {
                double e_min = brute_force_solve(m.qubo).best_energy;
                scores[key] = hardness_score(m, cfg.hardness, hardness_epsilon(e_min));
            }
            BatchPlan plan = plan_batches(scores, cfg.n_batches, cfg.unit_coherent);
            for (const auto& batch : plan.batches) {
                if (batch.empty()) continue;
                tasks.push_back(assemble_batched_qubo(micros, batch));
                for (const auto& key : batch) accept_units.push_back({micros.at(key).qubo});
            }
            break;
        }
    }

    if (dump_debug && !cfg.dump_qubo_dir.empty()) dump_task_qubos(tasks, cfg.dump_qubo_dir);

    // Solve tasks in parallel; slot-indexed results keep reduction deterministic.
    std::vector<SolveReport> reports(tasks.size());
    util::parallel_for(tasks.size(), [&](std::size_t idx) {
        if (cfg.backend == Backend::Brute) {
            reports[idx] = brute_force_solve(tasks[idx]);
        } else {
            DvqeConfig dv = cfg.dvqe;
            dv.seed = util::mix_seed(cfg.seed, idx);
            reports[idx] =
                dvqe_solve(tasks[idx], default_register_sizes(tasks[idx].n), dv);
        }
    });

    // Candidate proxies from the solver reports.
    std::vector<double> cand_commit = st.proxy_commit;
    std::vector<double> cand_startup = st.proxy_startup;
    std::vector<double> cand_shutdown = st.proxy_shutdown;
    for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        const Qubo& q = tasks[idx];
        for (int k = 0; k < q.n; ++k) {
            const VarLabel& lab = q.labels[k];
            std::vector<double>& arr = lab.kind == BinKind::Commit ? cand_commit
                                       : lab.kind == BinKind::Startup ? cand_startup
                                                                      : cand_shutdown;
            arr[st.at(lab.unit, lab.time)] = reports[idx].best_bits[k];
        }
    }

    Block2Result result;
    for (const auto& rep : reports) result.telegate_ops += rep.telegate_ops;

    std::vector<double> inc_commit(incumbent.commit.begin(), incumbent.commit.end());
    std::vector<double> inc_startup(incumbent.startup.begin(), incumbent.startup.end());
    std::vector<double> inc_shutdown(incumbent.shutdown.begin(), incumbent.shutdown.end());

    const bool track = cfg.track_block2_match && cfg.backend == Backend::Dvqe;
    std::vector<long> unit_matched(accept_units.size(), 0);
    if (track) {
        util::parallel_for(accept_units.size(), [&](std::size_t idx) {
            const Qubo& q = accept_units[idx].qubo;
            auto cand = bits_from_labels(q, st, cand_commit, cand_startup, cand_shutdown);
            double exact = brute_force_solve(q).best_energy;
            unit_matched[idx] = std::abs(q.energy(cand) - exact) <= 1e-9 ? 1 : 0;
        });
    }

    for (std::size_t idx = 0; idx < accept_units.size(); ++idx) {
        const Qubo& q = accept_units[idx].qubo;
        auto cand = bits_from_labels(q, st, cand_commit, cand_startup, cand_shutdown);
        auto inc = bits_from_labels(q, st, inc_commit, inc_startup, inc_shutdown);
        auto accepted = accept_if_better(cand, inc, q);
        result.candidate_energy += q.energy(cand);
        result.accepted_energy += q.energy(accepted);
        result.units += 1;
        result.matched += track ? unit_matched[idx] : 1;
        for (int k = 0; k < q.n; ++k) {
            const VarLabel& lab = q.labels[k];
            std::size_t pos = st.at(lab.unit, lab.time);
            proxy_array(st, lab.kind)[pos] = accepted[k];
            auto& inc_arr = lab.kind == BinKind::Commit ? incumbent.commit
                            : lab.kind == BinKind::Startup ? incumbent.startup
                                                           : incumbent.shutdown;
            inc_arr[pos] = accepted[k];
        }
    }
    return result;
}

}  // namespace

ConvergenceReport run_admm(const UcInstance& inst, const AdmmConfig& cfg) {
    require_valid(inst);
    {
        std::vector<std::string> bad;
        if (cfg.rho_commit <= 0 || cfg.rho_startup <= 0 || cfg.rho_shutdown <= 0)
            bad.push_back("penalties rho must be > 0");
        if (cfg.beta_commit <= 0 || cfg.beta_startup <= 0 || cfg.beta_shutdown <= 0)
            bad.push_back("proximal weights beta must be > 0");
        if (cfg.eps_primal <= 0 || cfg.eps_dual <= 0) bad.push_back("tolerances must be > 0");
        if (cfg.max_iter < 1) bad.push_back("max_iter must be >= 1");
        if (cfg.n_batches < 1) bad.push_back("batch count must be >= 1");
        if (!bad.empty()) throw ValidationError("invalid ADMM configuration", std::move(bad));
    }
    auto run_start = Clock::now();
    const int n_units = inst.n_units();
    const int horizon = inst.horizon;
    const int n_scen = inst.n_scenarios();
    const std::size_t nt = static_cast<std::size_t>(n_units) * horizon;

    AdmmState st = AdmmState::zeros(n_units, horizon, n_scen);
    st.rho_commit = cfg.rho_commit;
    st.rho_startup = cfg.rho_startup;
    st.rho_shutdown = cfg.rho_shutdown;
    st.beta_commit = cfg.beta_commit;
    st.beta_startup = cfg.beta_startup;
    st.beta_shutdown = cfg.beta_shutdown;

    // Relaxed start: half-on commitment, load split evenly, everything else zero.
    std::fill(st.commit.begin(), st.commit.end(), 0.5);
    for (int s = 0; s < n_scen; ++s)
        for (int i = 0; i < n_units; ++i)
            for (int t = 0; t < horizon; ++t)
                st.power[s][st.at(i, t)] = inst.scenarios.load(t, s) / n_units;

    // The safeguard incumbent starts from the committed initial state.
    BinarySchedule incumbent;
    incumbent.commit.assign(nt, 1);
    incumbent.startup.assign(nt, 0);
    incumbent.shutdown.assign(nt, 0);

    ConvergenceReport report;
    QpSolution qp_warm;
    bool have_warm = false;

    AdmmState best_state = st;
    double best_max_primal = std::numeric_limits<double>::infinity();
    int best_trace_index = -1;

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        IterationRow row;
        row.iter = iter;

        auto t_b1 = Clock::now();
        QuadraticProgram qp = assemble_block1_qp(inst, st);
        if (iter == 1 && !cfg.dump_qp_path.empty()) dump_block1_qp(qp, cfg.dump_qp_path);
        QpSolution sol;
        try {
            sol = solve_qp(qp, cfg.qp, have_warm ? &qp_warm : nullptr);
        } catch (const Error& e) {
            throw SolverError("Block 1 failed at iteration " + std::to_string(iter) + ": " +
                              e.what());
        }
        if (sol.status == QpStatus::Infeasible)
            throw SolverError("Block 1 reported an infeasible QP at iteration " +
                              std::to_string(iter));
        qp_warm = sol;
        have_warm = true;
        apply_relaxed_solution(st, extract_solution(sol, inst));
        row.t_block1_ms = ms_since(t_b1);

        AdmmState previous = st;  // proxies and slacks before this iteration's updates

        auto t_b2 = Clock::now();
        Block2Result b2 = run_block2(inst, st, cfg, incumbent, iter == 1);
        row.t_block2_ms = ms_since(t_b2);
        row.block2_candidate_energy = b2.candidate_energy;
        row.block2_energy = b2.accepted_energy;
        row.telegate_ops = b2.telegate_ops;
        row.block2_units = b2.units;
        row.block2_matched = b2.matched;

        update_slacks(st);
        update_duals(st);

        row.residuals = compute_residuals(st, previous);
        row.aug_lagrangian = evaluate_augmented_lagrangian(inst, st);
        row.true_cost = schedule_cost(inst, st.proxy_commit, st.proxy_startup,
                                      st.proxy_shutdown, st.power);
        row.lyapunov = lyapunov_value(inst, st, cfg.kappa());
        report.trace.push_back(row);

        double slack_max = 0.0;
        for (const auto& fam : st.families())
            for (double v : *fam.slack) slack_max = std::max(slack_max, v);

        if (row.residuals.max_primal() < best_max_primal) {
            best_max_primal = row.residuals.max_primal();
            best_state = st;
            best_trace_index = static_cast<int>(report.trace.size()) - 1;
        }

        bool primal_ok = row.residuals.pri_commit <= cfg.eps_primal &&
                         row.residuals.pri_startup <= cfg.eps_primal &&
                         row.residuals.pri_shutdown <= cfg.eps_primal;
        if (primal_ok && row.residuals.dual <= cfg.eps_dual && slack_max <= cfg.eps_primal) {
            report.status = ConvergenceReport::Status::Converged;
            break;
        }
    }

    // Converged runs report the final iterate; otherwise the iterate with the
    // smallest worst-case primal residual.
    if (report.status == ConvergenceReport::Status::Converged) {
        report.final_residuals = report.trace.back().residuals;
    } else if (best_trace_index >= 0) {
        st = best_state;
        report.final_residuals = report.trace[best_trace_index].residuals;
    }
    for (const auto& fam : st.families())
        for (double v : *fam.slack)
            report.max_slack = std::max(report.max_slack, v);

    report.commit.resize(nt);
    report.startup.resize(nt);
    report.shutdown.resize(nt);
    BinarySchedule pin;
    pin.commit.resize(nt);
    pin.startup.resize(nt);
    pin.shutdown.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        pin.commit[k] = st.proxy_commit[k] > 0.5 ? 1 : 0;
        pin.startup[k] = st.proxy_startup[k] > 0.5 ? 1 : 0;
        pin.shutdown[k] = st.proxy_shutdown[k] > 0.5 ? 1 : 0;
        report.commit[k] = pin.commit[k];
        report.startup[k] = pin.startup[k];
        report.shutdown[k] = pin.shutdown[k];
    }

    // Dispatch recovery: one more Block-1 solve with the binaries pinned.
    try {
        QuadraticProgram pinned = assemble_block1_qp(inst, st, &pin);
        QpSolution sol = solve_qp(pinned, cfg.qp, have_warm ? &qp_warm : nullptr);
        if (sol.status == QpStatus::Infeasible) throw SolverError("pinned dispatch infeasible");
        RelaxedSolution rel = extract_solution(sol, inst);
        report.power = rel.power;
        report.reserve_up = rel.reserve_up;
        report.reserve_down = rel.reserve_down;
    } catch (const Error&) {
        report.dispatch_recovered = false;
        report.power = st.power;
        report.reserve_up = st.reserve_up;
        report.reserve_down = st.reserve_down;
    }
    report.final_cost = schedule_cost(inst, st.proxy_commit, st.proxy_startup,
                                      st.proxy_shutdown, report.power);
    report.total_wall_ms = ms_since(run_start);
    return report;
}

}  // namespace duc
