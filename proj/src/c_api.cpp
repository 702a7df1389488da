#include "duc.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "duc/io.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

duc_status classify(const std::exception& e) {
    if (dynamic_cast<const duc::ParseError*>(&e)) return DUC_ERR_PARSE;
    if (dynamic_cast<const duc::ValidationError*>(&e)) return DUC_ERR_VALIDATION;
    if (dynamic_cast<const duc::IoError*>(&e)) return DUC_ERR_IO;
    if (dynamic_cast<const duc::TooLargeError*>(&e)) return DUC_ERR_TOO_LARGE;
    if (dynamic_cast<const duc::SolverError*>(&e)) return DUC_ERR_SOLVER;
    if (dynamic_cast<const duc::DimensionError*>(&e)) return DUC_ERR_INVALID_ARG;
    return DUC_ERR_INTERNAL;
}

template <typename Fn>
duc_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        set_error(e.what());
        return classify(e);
    } catch (...) {
        set_error("unknown failure");
        return DUC_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct duc_instance {
    duc::UcInstance inst;
    duc::InstanceSource source;
};

struct duc_config {
    duc::AdmmConfig cfg;
};

struct duc_report {
    duc::ConvergenceReport rep;
    int horizon = 0;
    int units = 0;
};

extern "C" {

const char* duc_version(void) { return duc::kToolVersion; }

const char* duc_last_error(void) { return g_last_error.c_str(); }

duc_status duc_instance_load(const char* path, duc_instance** out) {
    if (!path || !out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        auto* handle = new duc_instance{duc::load_instance(path), {}};
        handle->source.path = path;
        *out = handle;
        return DUC_OK;
    });
}

duc_status duc_instance_generate(int units, int horizon, int scenarios, uint64_t seed,
                                 duc_instance** out) {
    if (!out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        auto* handle =
            new duc_instance{duc::generate_synthetic(units, horizon, scenarios, seed), {}};
        handle->source.units = units;
        handle->source.horizon = horizon;
        handle->source.scenarios = scenarios;
        handle->source.gen_seed = seed;
        *out = handle;
        return DUC_OK;
    });
}

duc_status duc_instance_save(const duc_instance* inst, const char* path) {
    if (!inst || !path) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        duc::save_instance(inst->inst, path);
        return DUC_OK;
    });
}

duc_status duc_instance_deterministic_view(const duc_instance* inst, duc_instance** out) {
    if (!inst || !out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        auto* handle = new duc_instance{duc::deterministic_view(inst->inst), {}};
        *out = handle;  // derived instance, no reproducible source of its own
        return DUC_OK;
    });
}

void duc_instance_free(duc_instance* inst) { delete inst; }

int duc_instance_units(const duc_instance* inst) { return inst ? inst->inst.n_units() : 0; }
int duc_instance_horizon(const duc_instance* inst) { return inst ? inst->inst.horizon : 0; }
int duc_instance_scenarios(const duc_instance* inst) {
    return inst ? inst->inst.n_scenarios() : 0;
}

duc_status duc_config_create(duc_config** out) {
    if (!out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    *out = new duc_config{};
    return DUC_OK;
}

void duc_config_free(duc_config* cfg) { delete cfg; }

duc_status duc_config_set(duc_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&]() -> duc_status {
        std::string k = key, v = value;
        duc::AdmmConfig& c = cfg->cfg;
        auto as_double = [&] { return std::stod(v); };
        auto as_int = [&] { return std::stoi(v); };
        auto as_bool = [&] { return v == "1" || v == "true" || v == "on"; };
        auto gamma = [&](double duc::PenaltyWeights::*field) {
            duc::PenaltyWeights w = c.penalties();
            w.*field = as_double();
            c.penalty_override = w;
        };
        if (k == "mode") {
            auto m = duc::parse_decomposition(v);
            if (!m) {
                set_error("unknown mode: " + v);
                return DUC_ERR_INVALID_ARG;
            }
            c.mode = *m;
        } else if (k == "backend") {
            auto b = duc::parse_backend(v);
            if (!b) {
                set_error("unknown backend: " + v);
                return DUC_ERR_INVALID_ARG;
            }
            c.backend = *b;
        } else if (k == "rho") {
            c.rho_commit = c.rho_startup = c.rho_shutdown = as_double();
        } else if (k == "rho_commit") {
            c.rho_commit = as_double();
        } else if (k == "rho_startup") {
            c.rho_startup = as_double();
        } else if (k == "rho_shutdown") {
            c.rho_shutdown = as_double();
        } else if (k == "beta") {
            c.beta_commit = c.beta_startup = c.beta_shutdown = as_double();
        } else if (k == "beta_commit") {
            c.beta_commit = as_double();
        } else if (k == "beta_startup") {
            c.beta_startup = as_double();
        } else if (k == "beta_shutdown") {
            c.beta_shutdown = as_double();
        } else if (k == "eps") {
            c.eps_primal = c.eps_dual = as_double();
        } else if (k == "eps_primal") {
            c.eps_primal = as_double();
        } else if (k == "eps_dual") {
            c.eps_dual = as_double();
        } else if (k == "max_iter") {
            c.max_iter = as_int();
        } else if (k == "batches") {
            c.n_batches = as_int();
        } else if (k == "unit_coherent") {
            c.unit_coherent = as_bool();
        } else if (k == "depth") {
            c.dvqe.depth = as_int();
        } else if (k == "lr") {
            c.dvqe.learning_rate = as_double();
        } else if (k == "dvqe_iters") {
            c.dvqe.max_iters = as_int();
        } else if (k == "shots") {
            c.dvqe.shots = as_int();
        } else if (k == "seed") {
            c.seed = std::stoull(v);
        } else if (k == "kappa") {
            c.lyapunov_kappa = as_double();
        } else if (k == "track_match") {
            c.track_block2_match = as_bool();
        } else if (k == "gamma_logic") {
            gamma(&duc::PenaltyWeights::logic);
        } else if (k == "gamma_ss") {
            gamma(&duc::PenaltyWeights::start_stop);
        } else if (k == "gamma_start_on") {
            gamma(&duc::PenaltyWeights::start_implies_on);
        } else if (k == "gamma_stop_off") {
            gamma(&duc::PenaltyWeights::stop_implies_off);
        } else if (k == "gamma_anchor_commit") {
            gamma(&duc::PenaltyWeights::anchor_commit);
        } else if (k == "gamma_anchor_startup") {
            gamma(&duc::PenaltyWeights::anchor_startup);
        } else if (k == "gamma_anchor_shutdown") {
            gamma(&duc::PenaltyWeights::anchor_shutdown);
        } else if (k == "dump_qp") {
            c.dump_qp_path = v;
        } else if (k == "dump_qubo_dir") {
            c.dump_qubo_dir = v;
        } else if (k == "qp_eps_abs") {
            c.qp.eps_abs = as_double();
        } else if (k == "qp_eps_rel") {
            c.qp.eps_rel = as_double();
        } else if (k == "qp_max_iters") {
            c.qp.max_iters = as_int();
        } else {
            set_error("unknown config key: " + k);
            return DUC_ERR_INVALID_ARG;
        }
        return DUC_OK;
    });
}

namespace {

duc::RunManifest make_manifest(const duc_instance* inst, const duc::AdmmConfig& cfg,
                               const char* out_dir) {
    duc::RunManifest m;
    m.config = cfg;
    m.out_dir = out_dir ? out_dir : "";
    m.instance = inst->source;
    if (m.instance.path.empty() && m.instance.units == 0 && !m.out_dir.empty()) {
        // Derived instance with no reproducible source; persist it next to
        // the outputs so the manifest can be re-run.
        std::filesystem::create_directories(m.out_dir);
        std::string path = (std::filesystem::path(m.out_dir) / "instance.json").string();
        duc::save_instance(inst->inst, path);
        m.instance.path = path;
    }
    // Deterministic run id: identical inputs name identical runs.
    std::uint64_t h = 0x6475630d;
    m.run_id = "";
    duc::RunManifest probe = m;
    probe.run_id = "probe";
    for (unsigned char ch : duc::serialize_manifest(probe)) h = duc::util::mix_seed(h, ch);
    char buf[20];
    std::snprintf(buf, sizeof buf, "run-%016llx", static_cast<unsigned long long>(h));
    m.run_id = buf;
    return m;
}

}  // namespace

duc_status duc_solve(const duc_instance* inst, const duc_config* cfg, const char* out_dir,
                     duc_report** out) {
    if (!inst || !cfg || !out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        duc::RunManifest manifest = make_manifest(inst, cfg->cfg, out_dir);
        duc::SolveArtifacts art = duc::run_and_write(inst->inst, manifest);
        *out = new duc_report{std::move(art.report), inst->inst.horizon, inst->inst.n_units()};
        return DUC_OK;
    });
}

duc_status duc_solve_manifest(const char* manifest_path, duc_report** out) {
    if (!manifest_path || !out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        duc::RunManifest manifest = duc::load_manifest(manifest_path);
        duc::UcInstance inst = duc::resolve_instance(manifest.instance);
        duc::SolveArtifacts art = duc::run_and_write(inst, manifest);
        *out = new duc_report{std::move(art.report), inst.horizon, inst.n_units()};
        return DUC_OK;
    });
}

int duc_report_converged(const duc_report* rep) {
    return rep && rep->rep.status == duc::ConvergenceReport::Status::Converged ? 1 : 0;
}

int duc_report_iterations(const duc_report* rep) { return rep ? rep->rep.iterations() : 0; }

double duc_report_final_cost(const duc_report* rep) { return rep ? rep->rep.final_cost : 0.0; }

double duc_report_residual(const duc_report* rep, int which) {
    if (!rep) return 0.0;
    switch (which) {
        case 0: return rep->rep.final_residuals.pri_commit;
        case 1: return rep->rep.final_residuals.pri_startup;
        case 2: return rep->rep.final_residuals.pri_shutdown;
        case 3: return rep->rep.final_residuals.dual;
        default: return 0.0;
    }
}

double duc_report_match_rate(const duc_report* rep) {
    return rep ? rep->rep.block2_match_rate() : 0.0;
}

double duc_report_wall_ms(const duc_report* rep) { return rep ? rep->rep.total_wall_ms : 0.0; }

int duc_report_commit(const duc_report* rep, int unit, int t) {
    if (!rep || unit < 0 || unit >= rep->units || t < 0 || t >= rep->horizon) return -1;
    return rep->rep.commit[static_cast<std::size_t>(unit) * rep->horizon + t];
}

void duc_report_free(duc_report* rep) { delete rep; }

duc_status duc_compare(const duc_instance* inst, const duc_config* const* cfgs,
                       const char* const* labels, int n, const char* out_dir, char** csv_out) {
    if (!inst || !cfgs || !labels || n < 2 || !csv_out) {
        set_error(n < 2 ? "compare needs at least two configurations" : "null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        std::vector<duc::CompareEntry> entries;
        for (int i = 0; i < n; ++i) entries.push_back({labels[i], cfgs[i]->cfg});
        std::string csv = duc::run_compare(inst->inst, entries, out_dir ? out_dir : "");
        *csv_out = dup_string(csv);
        return DUC_OK;
    });
}

duc_status duc_qubo_solve_file(const char* path, const duc_config* cfg, char** report_out) {
    if (!path || !cfg || !report_out) {
        set_error("null argument");
        return DUC_ERR_INVALID_ARG;
    }
    return guarded([&] {
        duc::Qubo qubo = duc::parse_qubo(duc::read_text_file(path));
        duc::SolveReport report;
        if (cfg->cfg.backend == duc::Backend::Brute) {
            report = duc::brute_force_solve(qubo);
        } else {
            duc::DvqeConfig dv = cfg->cfg.dvqe;
            dv.seed = cfg->cfg.seed;
            report = duc::dvqe_solve(qubo, duc::default_register_sizes(qubo.n), dv);
        }
        *report_out = dup_string(duc::format_solve_report(report));
        return DUC_OK;
    });
}

void duc_string_free(char* s) { std::free(s); }

}  // extern "C"
