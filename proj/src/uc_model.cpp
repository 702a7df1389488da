#include "duc/uc_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace duc {

namespace {

using json = nlohmann::ordered_json;

std::string unit_tag(int i) { return "unit " + std::to_string(i); }

}  // namespace

std::vector<std::string> validate_instance(const UcInstance& inst) {
    std::vector<std::string> bad;
    const int n = inst.n_units();
    const int horizon = inst.horizon;
    const int n_scen = inst.scenarios.n_scenarios;

    if (n < 1) bad.push_back("instance has no generators");
    if (horizon < 1) bad.push_back("horizon must be >= 1");
    if (n_scen < 1) bad.push_back("scenario count must be >= 1");

    for (int i = 0; i < n; ++i) {
        const auto& g = inst.generators[i];
        if (g.p_min < 0.0) bad.push_back(unit_tag(i) + ": p_min < 0");
        if (g.p_min > g.p_max) bad.push_back(unit_tag(i) + ": p_min > p_max");
        if (g.ramp_up < 0.0 || g.ramp_down < 0.0)
            bad.push_back(unit_tag(i) + ": negative ramp limit");
        if (g.startup_ramp < 0.0 || g.shutdown_ramp < 0.0)
            bad.push_back(unit_tag(i) + ": negative startup/shutdown ramp");
        if (g.cost_quad < 0.0) bad.push_back(unit_tag(i) + ": quadratic cost < 0 breaks convexity");
        if (g.min_up < 1 || g.min_down < 1)
            bad.push_back(unit_tag(i) + ": min up/down times must be >= 1");
    }

    if (static_cast<int>(inst.initial.committed.size()) != n)
        bad.push_back("initial.y0 length != unit count");
    if (static_cast<int>(inst.initial.power.size()) != n)
        bad.push_back("initial.p0 length != unit count");
    if (static_cast<int>(inst.initial.committed.size()) == n &&
        static_cast<int>(inst.initial.power.size()) == n) {
        for (int i = 0; i < n; ++i) {
            int y0 = inst.initial.committed[i];
            double p0 = inst.initial.power[i];
            if (y0 != 0 && y0 != 1) bad.push_back(unit_tag(i) + ": y0 not binary");
            double lo = inst.generators[i].p_min * y0;
            double hi = inst.generators[i].p_max * y0;
            if (p0 < lo - 1e-9 || p0 > hi + 1e-9)
                bad.push_back(unit_tag(i) + ": p0 outside [p_min*y0, p_max*y0]");
        }
    }

    const auto& sc = inst.scenarios;
    if (static_cast<int>(sc.probability.size()) != n_scen) {
        bad.push_back("pi length != scenario count");
    } else {
        double sum = 0.0;
        for (double p : sc.probability) {
            if (p < 0.0) bad.push_back("scenario probability < 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "probabilities sum " << sum << " != 1";
            bad.push_back(os.str());
        }
    }
    std::size_t cells = static_cast<std::size_t>(horizon) * std::max(n_scen, 0);
    if (sc.net_load.size() != cells) bad.push_back("net_load is not a T x S matrix");
    if (sc.reserve_up.size() != cells) bad.push_back("r_up is not a T x S matrix");
    if (sc.reserve_down.size() != cells) bad.push_back("r_down is not a T x S matrix");
    for (double v : sc.net_load)
        if (v < 0.0) { bad.push_back("negative net load entry"); break; }
    if (sc.response_window <= 0.0) bad.push_back("delta_tau must be > 0");

    // Structural feasibility: installed capacity covers peak load plus upward reserve.
    if (n >= 1 && sc.net_load.size() == cells && sc.reserve_up.size() == cells) {
        double cap = 0.0;
        for (const auto& g : inst.generators) cap += g.p_max;
        for (std::size_t k = 0; k < cells; ++k) {
            if (sc.net_load[k] + sc.reserve_up[k] > cap + 1e-9) {
                bad.push_back("net load + upward reserve exceeds total capacity");
                break;
            }
        }
    }
    return bad;
}

void require_valid(const UcInstance& inst) {
    auto bad = validate_instance(inst);
    if (bad.empty()) return;
    std::string msg = "invalid instance:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ValidationError(msg, std::move(bad));
}

namespace {

std::vector<double> read_matrix(const json& j, const char* key, int rows, int cols) {
    const auto& m = j.at(key);
    if (!m.is_array() || static_cast<int>(m.size()) != rows)
        throw ParseError(std::string(key) + ": expected " + std::to_string(rows) + " rows");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& row : m) {
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError(std::string(key) + ": expected rows of " + std::to_string(cols) + " values");
        for (const auto& v : row) out.push_back(v.get<double>());
    }
    return out;
}

json write_matrix(const std::vector<double>& data, int rows, int cols) {
    json m = json::array();
    for (int r = 0; r < rows; ++r) {
        json row = json::array();
        for (int c = 0; c < cols; ++c) row.push_back(data[static_cast<std::size_t>(r) * cols + c]);
        m.push_back(std::move(row));
    }
    return m;
}

}  // namespace

UcInstance parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("instance file is not valid JSON: ") + e.what());
    }
    UcInstance inst;
    try {
        inst.horizon = j.at("horizon").get<int>();
        for (const auto& gj : j.at("generators")) {
            GeneratorParams g;
            g.p_min = gj.at("p_min").get<double>();
            g.p_max = gj.at("p_max").get<double>();
            g.ramp_up = gj.at("ru").get<double>();
            g.ramp_down = gj.at("rd").get<double>();
            g.startup_ramp = gj.at("su").get<double>();
            g.shutdown_ramp = gj.at("sd").get<double>();
            g.min_up = gj.at("min_up").get<int>();
            g.min_down = gj.at("min_down").get<int>();
            g.cost_fixed = gj.at("a").get<double>();
            g.cost_linear = gj.at("b").get<double>();
            g.cost_quad = gj.at("c").get<double>();
            g.cost_startup = gj.at("s_cost").get<double>();
            g.cost_shutdown = gj.at("h_cost").get<double>();
            inst.generators.push_back(g);
        }
        const auto& init = j.at("initial");
        inst.initial.committed = init.at("y0").get<std::vector<int>>();
        inst.initial.power = init.at("p0").get<std::vector<double>>();

        const auto& sj = j.at("scenarios");
        inst.scenarios.probability = sj.at("pi").get<std::vector<double>>();
        inst.scenarios.n_scenarios = static_cast<int>(inst.scenarios.probability.size());
        int cols = std::max(inst.scenarios.n_scenarios, 1);
        inst.scenarios.net_load = read_matrix(sj, "net_load", inst.horizon, cols);
        inst.scenarios.reserve_up = read_matrix(sj, "r_up", inst.horizon, cols);
        inst.scenarios.reserve_down = read_matrix(sj, "r_down", inst.horizon, cols);
        inst.scenarios.response_window = sj.at("delta_tau").get<double>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("instance schema error: ") + e.what());
    }
    require_valid(inst);
    return inst;
}

UcInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str());
}

std::string serialize_instance(const UcInstance& inst) {
    json j;
    json gens = json::array();
    for (const auto& g : inst.generators) {
        json gj;
        gj["p_min"] = g.p_min;
        gj["p_max"] = g.p_max;
        gj["ru"] = g.ramp_up;
        gj["rd"] = g.ramp_down;
        gj["su"] = g.startup_ramp;
        gj["sd"] = g.shutdown_ramp;
        gj["min_up"] = g.min_up;
        gj["min_down"] = g.min_down;
        gj["a"] = g.cost_fixed;
        gj["b"] = g.cost_linear;
        gj["c"] = g.cost_quad;
        gj["s_cost"] = g.cost_startup;
        gj["h_cost"] = g.cost_shutdown;
        gens.push_back(std::move(gj));
    }
    j["generators"] = std::move(gens);
    j["initial"] = {{"y0", inst.initial.committed}, {"p0", inst.initial.power}};
    j["horizon"] = inst.horizon;
    json sj;
    sj["net_load"] = write_matrix(inst.scenarios.net_load, inst.horizon, inst.scenarios.n_scenarios);
    sj["pi"] = inst.scenarios.probability;
    sj["r_up"] = write_matrix(inst.scenarios.reserve_up, inst.horizon, inst.scenarios.n_scenarios);
    sj["r_down"] = write_matrix(inst.scenarios.reserve_down, inst.horizon, inst.scenarios.n_scenarios);
    sj["delta_tau"] = inst.scenarios.response_window;
    j["scenarios"] = std::move(sj);
    return j.dump(2) + "\n";
}

void save_instance(const UcInstance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write instance file: " + path);
    out << serialize_instance(inst);
}

UcInstance generate_synthetic(int n_units, int horizon, int n_scenarios, std::uint64_t seed) {
    if (n_units < 1) throw ValidationError("n_units must be >= 1", {"n_units must be >= 1"});
    if (horizon < 1) throw ValidationError("horizon must be >= 1", {"horizon must be >= 1"});
    if (n_scenarios < 1) throw ValidationError("n_scenarios must be >= 1", {"n_scenarios must be >= 1"});

    std::mt19937_64 rng(util::mix_seed(seed, 0xD2));
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * util::to_unit_interval(rng());
    };

    UcInstance inst;
    inst.horizon = horizon;
    double capacity = 0.0;
    // Minimum up/down times stay short relative to the horizon; long holds on
    // short horizons leave no feasible commitment patterns to search over.
    int updown_cap = std::max(1, std::min(3, horizon / 6 + 1));
    for (int i = 0; i < n_units; ++i) {
        GeneratorParams g;
        g.p_max = uniform(40.0, 160.0);
        g.p_min = g.p_max * uniform(0.10, 0.22);
        g.ramp_up = g.p_max * uniform(0.35, 0.60);
        g.ramp_down = g.p_max * uniform(0.35, 0.60);
        // Startup/shutdown ramps admit a cold start to p_min and a one-step
        // shutdown from the initial 20 MW operating point.
        g.startup_ramp = std::max({g.p_min + 5.0, g.p_max * uniform(0.40, 0.60), 25.0});
        g.shutdown_ramp = std::max({g.p_min + 5.0, g.p_max * uniform(0.40, 0.60), 25.0});
        g.min_up = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(updown_cap));
        g.min_down = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(updown_cap));
        g.cost_fixed = uniform(4.0, 16.0);
        g.cost_linear = uniform(15.0, 55.0);
        g.cost_quad = uniform(0.02, 0.06);
        g.cost_startup = uniform(60.0, 220.0);
        g.cost_shutdown = uniform(15.0, 70.0);
        inst.generators.push_back(g);
        capacity += g.p_max;
    }

    inst.initial.committed.assign(n_units, 1);
    inst.initial.power.resize(n_units);
    for (int i = 0; i < n_units; ++i)
        inst.initial.power[i] = std::clamp(20.0, inst.generators[i].p_min, inst.generators[i].p_max);

    // Smooth daily-shape load well inside the feasible band.
    std::vector<double> base(horizon);
    for (int t = 0; t < horizon; ++t) {
        double phase = (t + 0.5) / horizon;
        double frac = 0.50 + 0.14 * std::sin(3.14159265358979323846 * phase) + uniform(-0.01, 0.01);
        base[t] = capacity * std::clamp(frac, 0.44, 0.80);
    }

    auto& sc = inst.scenarios;
    sc.n_scenarios = n_scenarios;
    sc.probability.assign(n_scenarios, 1.0 / n_scenarios);
    double correction = 1.0;
    for (int s = 1; s < n_scenarios; ++s) correction -= sc.probability[s];
    sc.probability[0] = correction;  // exact unit sum
    sc.response_window = 1.0;
    std::size_t cells = static_cast<std::size_t>(horizon) * n_scenarios;
    sc.net_load.resize(cells);
    sc.reserve_up.resize(cells);
    sc.reserve_down.resize(cells);
    for (int t = 0; t < horizon; ++t) {
        for (int s = 0; s < n_scenarios; ++s) {
            double spread = (n_scenarios == 1) ? 0.0
                                               : -0.10 + 0.20 * s / (n_scenarios - 1.0);
            double load = base[t] * (1.0 + spread);
            std::size_t k = static_cast<std::size_t>(t) * n_scenarios + s;
            sc.net_load[k] = load;
            sc.reserve_up[k] = 0.04 * load;
            sc.reserve_down[k] = 0.02 * load;
        }
    }
    require_valid(inst);
    return inst;
}

UcInstance deterministic_view(const UcInstance& inst) {
    if (inst.scenarios.n_scenarios == 1) return inst;
    UcInstance out = inst;
    auto& sc = out.scenarios;
    int n_scen = inst.scenarios.n_scenarios;
    sc.n_scenarios = 1;
    sc.probability = {1.0};
    sc.net_load.assign(inst.horizon, 0.0);
    sc.reserve_up.assign(inst.horizon, 0.0);
    sc.reserve_down.assign(inst.horizon, 0.0);
    for (int t = 0; t < inst.horizon; ++t) {
        for (int s = 0; s < n_scen; ++s) {
            double pi = inst.scenarios.probability[s];
            sc.net_load[t] += pi * inst.scenarios.load(t, s);
            sc.reserve_up[t] += pi * inst.scenarios.r_up(t, s);
            sc.reserve_down[t] += pi * inst.scenarios.r_down(t, s);
        }
    }
    return out;
}

}  // namespace duc
