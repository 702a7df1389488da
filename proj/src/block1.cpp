#include "duc/block1.hpp"

#include <algorithm>
#include <cmath>

namespace duc {

AdmmState AdmmState::zeros(int n_units, int horizon, int n_scenarios) {
    AdmmState st;
    st.n_units = n_units;
    st.horizon = horizon;
    st.n_scenarios = n_scenarios;
    std::size_t nt = static_cast<std::size_t>(n_units) * horizon;
    for (auto* v : {&st.commit, &st.startup, &st.shutdown, &st.proxy_commit, &st.proxy_startup,
                    &st.proxy_shutdown, &st.slack_commit, &st.slack_startup, &st.slack_shutdown,
                    &st.dual_commit, &st.dual_startup, &st.dual_shutdown})
        v->assign(nt, 0.0);
    st.power.assign(n_scenarios, std::vector<double>(nt, 0.0));
    st.reserve_up.assign(n_scenarios, std::vector<double>(nt, 0.0));
    st.reserve_down.assign(n_scenarios, std::vector<double>(nt, 0.0));
    return st;
}

std::array<AdmmState::Family, 3> AdmmState::families() {
    return {{{BinKind::Commit, &commit, &proxy_commit, &slack_commit, &dual_commit, rho_commit,
              beta_commit},
             {BinKind::Startup, &startup, &proxy_startup, &slack_startup, &dual_startup,
              rho_startup, beta_startup},
             {BinKind::Shutdown, &shutdown, &proxy_shutdown, &slack_shutdown, &dual_shutdown,
              rho_shutdown, beta_shutdown}}};
}

std::array<AdmmState::Family, 3> AdmmState::families() const {
    return const_cast<AdmmState*>(this)->families();
}

namespace {

void check_shapes(const UcInstance& inst, const AdmmState& st) {
    std::size_t nt = static_cast<std::size_t>(inst.n_units()) * inst.horizon;
    bool ok = st.n_units == inst.n_units() && st.horizon == inst.horizon &&
              st.n_scenarios == inst.n_scenarios() && st.commit.size() == nt &&
              st.power.size() == static_cast<std::size_t>(inst.n_scenarios());
    for (const auto& fam : st.families())
        ok = ok && fam.relaxed->size() == nt && fam.proxy->size() == nt &&
             fam.slack->size() == nt && fam.dual->size() == nt;
    for (int s = 0; ok && s < st.n_scenarios; ++s)
        ok = st.power[s].size() == nt && st.reserve_up[s].size() == nt &&
             st.reserve_down[s].size() == nt;
    if (!ok) throw DimensionError("ADMM state shape does not match instance");
}

}  // namespace

QuadraticProgram assemble_block1_qp(const UcInstance& inst, const AdmmState& st,
                                    const BinarySchedule* pin) {
    check_shapes(inst, st);
    const int n_units = inst.n_units();
    const int horizon = inst.horizon;
    const int n_scen = inst.n_scenarios();
    VarLayout lay{n_units, horizon, n_scen};
    const int n = lay.n_vars();

    QuadraticProgram qp;
    qp.objective_vector = Eigen::VectorXd::Zero(n);
    qp.variable_names.resize(n);

    std::vector<Eigen::Triplet<double>> p_trip;
    for (auto fam : st.families()) {
        for (int i = 0; i < n_units; ++i) {
            for (int t = 0; t < horizon; ++t) {
                int col = fam.kind == BinKind::Commit ? lay.commit(i, t)
                          : fam.kind == BinKind::Startup ? lay.startup(i, t)
                                                         : lay.shutdown(i, t);
                const auto& g = inst.generators[i];
                double base_cost = fam.kind == BinKind::Commit ? g.cost_fixed
                                   : fam.kind == BinKind::Startup ? g.cost_startup
                                                                  : g.cost_shutdown;
                std::size_t k = st.at(i, t);
                p_trip.emplace_back(col, col, fam.rho);
                qp.objective_vector[col] = base_cost + (*fam.dual)[k] +
                                           fam.rho * ((*fam.slack)[k] - (*fam.proxy)[k]);
                qp.variable_names[col] = std::string(kind_name(fam.kind)) + "[" +
                                         std::to_string(i) + "," + std::to_string(t) + "]";
            }
        }
    }
    for (int s = 0; s < n_scen; ++s) {
        double pi = inst.scenarios.probability[s];
        for (int i = 0; i < n_units; ++i) {
            const auto& g = inst.generators[i];
            for (int t = 0; t < horizon; ++t) {
                int cp = lay.power(s, i, t);
                p_trip.emplace_back(cp, cp, 2.0 * pi * g.cost_quad);
                qp.objective_vector[cp] = pi * g.cost_linear;
                std::string suffix = "[" + std::to_string(i) + "," + std::to_string(t) + "," +
                                     std::to_string(s) + "]";
                qp.variable_names[cp] = "power" + suffix;
                qp.variable_names[lay.r_up(s, i, t)] = "r_up" + suffix;
                qp.variable_names[lay.r_down(s, i, t)] = "r_down" + suffix;
            }
        }
    }
    qp.objective_matrix.resize(n, n);
    qp.objective_matrix.setFromTriplets(p_trip.begin(), p_trip.end());

    std::vector<Eigen::Triplet<double>> a_trip;
    std::vector<double> lo, hi;
    int row = 0;
    auto add_row = [&](const std::string& name, double l, double u) {
        lo.push_back(l);
        hi.push_back(u);
        qp.constraint_names.push_back(name);
        return row++;
    };
    auto coef = [&](int r, int col, double v) { a_trip.emplace_back(r, col, v); };
    const double inf = kQpInfinity;

    // Power balance, one equality per (t, s).
    for (int t = 0; t < horizon; ++t)
        for (int s = 0; s < n_scen; ++s) {
            double load = inst.scenarios.load(t, s);
            int r = add_row("balance[" + std::to_string(t) + "," + std::to_string(s) + "]",
                            load, load);
            for (int i = 0; i < n_units; ++i) coef(r, lay.power(s, i, t), 1.0);
        }

    for (int i = 0; i < n_units; ++i) {
        const auto& g = inst.generators[i];
        for (int t = 0; t < horizon; ++t) {
            std::string it_tag = "[" + std::to_string(i) + "," + std::to_string(t) + "]";
            for (int s = 0; s < n_scen; ++s) {
                std::string tag = "[" + std::to_string(i) + "," + std::to_string(t) + "," +
                                  std::to_string(s) + "]";
                int r = add_row("cap_min" + tag, 0.0, inf);
                coef(r, lay.power(s, i, t), 1.0);
                coef(r, lay.commit(i, t), -g.p_min);
                r = add_row("cap_max" + tag, -inf, 0.0);
                coef(r, lay.power(s, i, t), 1.0);
                coef(r, lay.commit(i, t), -g.p_max);
            }

            // Commitment logic; the t=0 row carries the initial state.
            if (t == 0) {
                int r = add_row("logic" + it_tag, inst.initial.committed[i],
                                inst.initial.committed[i]);
                coef(r, lay.commit(i, 0), 1.0);
                coef(r, lay.startup(i, 0), -1.0);
                coef(r, lay.shutdown(i, 0), 1.0);
            } else {
                int r = add_row("logic" + it_tag, 0.0, 0.0);
                coef(r, lay.commit(i, t), 1.0);
                coef(r, lay.commit(i, t - 1), -1.0);
                coef(r, lay.startup(i, t), -1.0);
                coef(r, lay.shutdown(i, t), 1.0);
            }

            int r = add_row("excl" + it_tag, -inf, 1.0);
            coef(r, lay.startup(i, t), 1.0);
            coef(r, lay.shutdown(i, t), 1.0);

            r = add_row("min_up" + it_tag, -inf, 0.0);
            for (int k = std::max(0, t - g.min_up + 1); k <= t; ++k)
                coef(r, lay.startup(i, k), 1.0);
            coef(r, lay.commit(i, t), -1.0);

            r = add_row("min_down" + it_tag, -inf, 1.0);
            for (int k = std::max(0, t - g.min_down + 1); k <= t; ++k)
                coef(r, lay.shutdown(i, k), 1.0);
            coef(r, lay.commit(i, t), 1.0);

            for (int s = 0; s < n_scen; ++s) {
                std::string tag = "[" + std::to_string(i) + "," + std::to_string(t) + "," +
                                  std::to_string(s) + "]";
                if (t == 0) {
                    double p0 = inst.initial.power[i];
                    int y0 = inst.initial.committed[i];
                    int rr = add_row("ramp_up" + tag, -inf, p0 + g.ramp_up * y0);
                    coef(rr, lay.power(s, i, 0), 1.0);
                    coef(rr, lay.startup(i, 0), -g.startup_ramp);
                    rr = add_row("ramp_down" + tag, -inf, -p0);
                    coef(rr, lay.power(s, i, 0), -1.0);
                    coef(rr, lay.commit(i, 0), -g.ramp_down);
                    coef(rr, lay.shutdown(i, 0), -g.shutdown_ramp);
                } else {
                    int rr = add_row("ramp_up" + tag, -inf, 0.0);
                    coef(rr, lay.power(s, i, t), 1.0);
                    coef(rr, lay.power(s, i, t - 1), -1.0);
                    coef(rr, lay.commit(i, t - 1), -g.ramp_up);
                    coef(rr, lay.startup(i, t), -g.startup_ramp);
                    rr = add_row("ramp_down" + tag, -inf, 0.0);
                    coef(rr, lay.power(s, i, t - 1), 1.0);
                    coef(rr, lay.power(s, i, t), -1.0);
                    coef(rr, lay.commit(i, t), -g.ramp_down);
                    coef(rr, lay.shutdown(i, t), -g.shutdown_ramp);
                }

                int rr = add_row("res_up_room" + tag, -inf, 0.0);
                coef(rr, lay.r_up(s, i, t), 1.0);
                coef(rr, lay.power(s, i, t), 1.0);
                coef(rr, lay.commit(i, t), -g.p_max);
                rr = add_row("res_down_room" + tag, -inf, 0.0);
                coef(rr, lay.r_down(s, i, t), 1.0);
                coef(rr, lay.power(s, i, t), -1.0);
                coef(rr, lay.commit(i, t), g.p_min);
            }
        }
    }

    // Reserve adequacy per (t, s).
    for (int t = 0; t < horizon; ++t)
        for (int s = 0; s < n_scen; ++s) {
            std::string tag = "[" + std::to_string(t) + "," + std::to_string(s) + "]";
            int r = add_row("adequacy_up" + tag, inst.scenarios.r_up(t, s), inf);
            for (int i = 0; i < n_units; ++i) coef(r, lay.r_up(s, i, t), 1.0);
            r = add_row("adequacy_down" + tag, inst.scenarios.r_down(t, s), inf);
            for (int i = 0; i < n_units; ++i) coef(r, lay.r_down(s, i, t), 1.0);
        }

    // Variable boxes: binaries in [0,1]; reserves in [0, ramp * response window].
    for (auto fam : st.families())
        for (int i = 0; i < n_units; ++i)
            for (int t = 0; t < horizon; ++t) {
                int col = fam.kind == BinKind::Commit ? lay.commit(i, t)
                          : fam.kind == BinKind::Startup ? lay.startup(i, t)
                                                         : lay.shutdown(i, t);
                double lo_b = 0.0, hi_b = 1.0;
                if (pin) {
                    const auto& vals = fam.kind == BinKind::Commit ? pin->commit
                                       : fam.kind == BinKind::Startup ? pin->startup
                                                                      : pin->shutdown;
                    lo_b = hi_b = vals[st.at(i, t)];
                }
                int r = add_row("box_" + qp.variable_names[col], lo_b, hi_b);
                coef(r, col, 1.0);
            }
    for (int s = 0; s < n_scen; ++s)
        for (int i = 0; i < n_units; ++i) {
            const auto& g = inst.generators[i];
            double dt = inst.scenarios.response_window;
            for (int t = 0; t < horizon; ++t) {
                int r = add_row("box_" + qp.variable_names[lay.r_up(s, i, t)], 0.0,
                                g.ramp_up * dt);
                coef(r, lay.r_up(s, i, t), 1.0);
                r = add_row("box_" + qp.variable_names[lay.r_down(s, i, t)], 0.0,
                            g.ramp_down * dt);
                coef(r, lay.r_down(s, i, t), 1.0);
            }
        }

    qp.constraint_matrix.resize(row, n);
    qp.constraint_matrix.setFromTriplets(a_trip.begin(), a_trip.end());
    qp.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), row);
    qp.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), row);
    return qp;
}

double evaluate_augmented_lagrangian(const UcInstance& inst, const AdmmState& st) {
    check_shapes(inst, st);
    const int n_units = inst.n_units();
    const int horizon = inst.horizon;
    double total = 0.0;

    for (int i = 0; i < n_units; ++i) {
        const auto& g = inst.generators[i];
        for (int t = 0; t < horizon; ++t) {
            std::size_t k = st.at(i, t);
            total += g.cost_fixed * st.commit[k] + g.cost_startup * st.startup[k] +
                     g.cost_shutdown * st.shutdown[k];
        }
    }
    for (int s = 0; s < st.n_scenarios; ++s) {
        double pi = inst.scenarios.probability[s];
        for (int i = 0; i < n_units; ++i) {
            const auto& g = inst.generators[i];
            for (int t = 0; t < horizon; ++t) {
                double p = st.power[s][st.at(i, t)];
                total += pi * (g.cost_linear * p + g.cost_quad * p * p);
            }
        }
    }
    for (const auto& fam : st.families()) {
        for (std::size_t k = 0; k < fam.relaxed->size(); ++k) {
            double resid = (*fam.relaxed)[k] - (*fam.proxy)[k] + (*fam.slack)[k];
            double slack = (*fam.slack)[k];
            total += (*fam.dual)[k] * resid + 0.5 * fam.rho * resid * resid +
                     0.5 * fam.beta * slack * slack;
        }
    }
    return total;
}

RelaxedSolution extract_solution(const QpSolution& sol, const UcInstance& inst) {
    VarLayout lay{inst.n_units(), inst.horizon, inst.n_scenarios()};
    if (sol.x.size() != lay.n_vars())
        throw DimensionError("QP solution does not match the Block-1 layout");
    RelaxedSolution rel;
    std::size_t nt = static_cast<std::size_t>(lay.nt());
    rel.commit.resize(nt);
    rel.startup.resize(nt);
    rel.shutdown.resize(nt);
    rel.power.assign(lay.n_scenarios, std::vector<double>(nt));
    rel.reserve_up.assign(lay.n_scenarios, std::vector<double>(nt));
    rel.reserve_down.assign(lay.n_scenarios, std::vector<double>(nt));
    for (int i = 0; i < lay.n_units; ++i)
        for (int t = 0; t < lay.horizon; ++t) {
            std::size_t k = static_cast<std::size_t>(i) * lay.horizon + t;
            rel.commit[k] = std::clamp(sol.x[lay.commit(i, t)], 0.0, 1.0);
            rel.startup[k] = std::clamp(sol.x[lay.startup(i, t)], 0.0, 1.0);
            rel.shutdown[k] = std::clamp(sol.x[lay.shutdown(i, t)], 0.0, 1.0);
            for (int s = 0; s < lay.n_scenarios; ++s) {
                rel.power[s][k] = sol.x[lay.power(s, i, t)];
                rel.reserve_up[s][k] = std::max(sol.x[lay.r_up(s, i, t)], 0.0);
                rel.reserve_down[s][k] = std::max(sol.x[lay.r_down(s, i, t)], 0.0);
            }
        }
    rel.objective = sol.objective;
    return rel;
}

void apply_relaxed_solution(AdmmState& st, const RelaxedSolution& rel) {
    st.commit = rel.commit;
    st.startup = rel.startup;
    st.shutdown = rel.shutdown;
    st.power = rel.power;
    st.reserve_up = rel.reserve_up;
    st.reserve_down = rel.reserve_down;
}

double FeasibilityReport::max_violation() const {
    return std::max({balance, capacity, logic, exclusivity, min_up_down, ramping, reserve_box,
                     reserve_caps, reserve_adequacy});
}

FeasibilityReport check_feasibility(const UcInstance& inst, const std::vector<double>& commit,
                                    const std::vector<double>& startup,
                                    const std::vector<double>& shutdown,
                                    const std::vector<std::vector<double>>& power,
                                    const std::vector<std::vector<double>>& reserve_up,
                                    const std::vector<std::vector<double>>& reserve_down) {
    const int n_units = inst.n_units();
    const int horizon = inst.horizon;
    const int n_scen = inst.n_scenarios();
    FeasibilityReport rep;
    auto at = [horizon](int i, int t) { return static_cast<std::size_t>(i) * horizon + t; };

    for (int t = 0; t < horizon; ++t)
        for (int s = 0; s < n_scen; ++s) {
            double sum = 0.0;
            for (int i = 0; i < n_units; ++i) sum += power[s][at(i, t)];
            rep.balance = std::max(rep.balance, std::abs(sum - inst.scenarios.load(t, s)));
            double up = 0.0, dn = 0.0;
            for (int i = 0; i < n_units; ++i) {
                up += reserve_up[s][at(i, t)];
                dn += reserve_down[s][at(i, t)];
            }
            rep.reserve_adequacy = std::max(rep.reserve_adequacy,
                                            std::max(inst.scenarios.r_up(t, s) - up,
                                                     inst.scenarios.r_down(t, s) - dn));
        }

    for (int i = 0; i < n_units; ++i) {
        const auto& g = inst.generators[i];
        for (int t = 0; t < horizon; ++t) {
            std::size_t k = at(i, t);
            double y = commit[k], u = startup[k], v = shutdown[k];
            double y_prev = (t == 0) ? inst.initial.committed[i] : commit[at(i, t - 1)];
            rep.logic = std::max(rep.logic, std::abs(y - y_prev - u + v));
            rep.exclusivity = std::max(rep.exclusivity, u + v - 1.0);
            double up_sum = 0.0;
            for (int kk = std::max(0, t - g.min_up + 1); kk <= t; ++kk) up_sum += startup[at(i, kk)];
            rep.min_up_down = std::max(rep.min_up_down, up_sum - y);
            double dn_sum = 0.0;
            for (int kk = std::max(0, t - g.min_down + 1); kk <= t; ++kk)
                dn_sum += shutdown[at(i, kk)];
            rep.min_up_down = std::max(rep.min_up_down, dn_sum - (1.0 - y));

            for (int s = 0; s < n_scen; ++s) {
                double p = power[s][k];
                double p_prev = (t == 0) ? inst.initial.power[i] : power[s][at(i, t - 1)];
                rep.capacity = std::max({rep.capacity, g.p_min * y - p, p - g.p_max * y});
                rep.ramping = std::max(rep.ramping,
                                       p - p_prev - g.ramp_up * y_prev - g.startup_ramp * u);
                rep.ramping = std::max(rep.ramping,
                                       p_prev - p - g.ramp_down * y - g.shutdown_ramp * v);
                double ru = reserve_up[s][k], rd = reserve_down[s][k];
                rep.reserve_box = std::max({rep.reserve_box, -ru, -rd,
                                            ru - (g.p_max * y - p), rd - (p - g.p_min * y)});
                double dt = inst.scenarios.response_window;
                rep.reserve_caps = std::max({rep.reserve_caps, ru - g.ramp_up * dt,
                                             rd - g.ramp_down * dt});
            }
        }
    }
    return rep;
}

}  // namespace duc
