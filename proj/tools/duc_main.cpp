// Command-line front end over the duc C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "duc.h"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitUsage = 2;
constexpr int kExitMaxIter = 3;
constexpr int kExitInternal = 4;

struct ConfigHandle {
    duc_config* ptr = nullptr;
    ConfigHandle() { duc_config_create(&ptr); }
    ~ConfigHandle() { duc_config_free(ptr); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
};

struct InstanceHandle {
    duc_instance* ptr = nullptr;
    ~InstanceHandle() { duc_instance_free(ptr); }
};

[[noreturn]] void die(int code, const std::string& message) {
    std::fprintf(stderr, "error: %s\n", message.c_str());
    std::exit(code);
}

// Argument and input problems exit 2; solver failures exit 4.
int exit_code_for(duc_status status) {
    switch (status) {
        case DUC_ERR_INVALID_ARG:
        case DUC_ERR_PARSE:
        case DUC_ERR_VALIDATION:
        case DUC_ERR_IO: return kExitUsage;
        default: return kExitInternal;
    }
}

void set_or_die(duc_config* cfg, const char* key, const std::string& value) {
    if (duc_config_set(cfg, key, value.c_str()) != DUC_OK)
        die(kExitUsage, std::string(key) + ": " + duc_last_error());
}

struct SolverFlags {
    std::string mode = "batched";
    std::string backend = "brute";
    int batches = 3;
    bool unit_coherent = false;
    double rho = 9e5;
    double beta = 2e6;
    double eps = 1e-3;
    int max_iter = 4000;
    int depth = 2;
    double lr = 0.1;
    int dvqe_iters = 100;
    int shots = 1024;
    std::uint64_t seed = 1;
    std::string dump_qp;
    std::string dump_qubo;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mode", mode, "Block-2 decomposition")
            ->check(CLI::IsMember({"monolithic", "three", "micro", "batched"}));
        cmd->add_option("--backend", backend, "QUBO backend")
            ->check(CLI::IsMember({"brute", "dvqe"}));
        cmd->add_option("--batches", batches, "number of batched QUBOs");
        cmd->add_flag("--unit-coherent", unit_coherent,
                      "keep all periods of a unit in one batch");
        cmd->add_option("--rho", rho, "consensus penalty");
        cmd->add_option("--beta", beta, "proximal slack weight");
        cmd->add_option("--eps", eps, "primal and dual stopping tolerance");
        cmd->add_option("--max-iter", max_iter, "iteration cap");
        cmd->add_option("--depth", depth, "ansatz layers");
        cmd->add_option("--lr", lr, "ADAM learning rate");
        cmd->add_option("--dvqe-iters", dvqe_iters, "DVQE training iterations");
        cmd->add_option("--shots", shots, "bitstring samples per solve");
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_option("--dump-qp", dump_qp, "write the first Block-1 QP listing here");
        cmd->add_option("--dump-qubo", dump_qubo, "write first-iteration QUBO listings here");
    }

    void apply(duc_config* cfg) const {
        set_or_die(cfg, "mode", mode);
        set_or_die(cfg, "backend", backend);
        set_or_die(cfg, "batches", std::to_string(batches));
        set_or_die(cfg, "unit_coherent", unit_coherent ? "1" : "0");
        set_or_die(cfg, "rho", std::to_string(rho));
        set_or_die(cfg, "beta", std::to_string(beta));
        set_or_die(cfg, "eps", std::to_string(eps));
        set_or_die(cfg, "max_iter", std::to_string(max_iter));
        set_or_die(cfg, "depth", std::to_string(depth));
        set_or_die(cfg, "lr", std::to_string(lr));
        set_or_die(cfg, "dvqe_iters", std::to_string(dvqe_iters));
        set_or_die(cfg, "shots", std::to_string(shots));
        set_or_die(cfg, "seed", std::to_string(seed));
        if (!dump_qp.empty()) set_or_die(cfg, "dump_qp", dump_qp);
        if (!dump_qubo.empty()) set_or_die(cfg, "dump_qubo_dir", dump_qubo);
    }
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-block ADMM unit-commitment solver with QUBO decompositions"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic instance file");
    int g_units = 5, g_horizon = 6, g_scenarios = 1;
    std::uint64_t g_seed = 42;
    std::string g_out = "instance.json";
    gen->add_option("--units", g_units, "generator count");
    gen->add_option("--horizon", g_horizon, "scheduling periods");
    gen->add_option("--scenarios", g_scenarios, "net-load scenarios");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--out", g_out, "output file path");

    // solve
    auto* solve = app.add_subcommand("solve", "run the solver on an instance");
    std::string s_instance, s_manifest, s_out;
    SolverFlags s_flags;
    solve->add_option("instance", s_instance, "instance file");
    solve->add_option("--manifest", s_manifest, "re-run a written manifest");
    solve->add_option("--out", s_out, "output directory for trace/dispatch/manifest");
    s_flags.attach(solve);

    // compare
    auto* compare = app.add_subcommand("compare", "run several configurations side by side");
    std::string c_instance, c_modes, c_backends, c_out;
    SolverFlags c_flags;
    compare->add_option("instance", c_instance, "instance file")->required();
    compare->add_option("--modes", c_modes, "comma-separated decomposition list");
    compare->add_option("--backends", c_backends, "comma-separated backend list");
    compare->add_option("--out", c_out, "output directory for compare.csv");
    c_flags.attach(compare);

    // qubo
    auto* qubo = app.add_subcommand("qubo", "solve a QUBO text file");
    std::string q_file, q_backend = "brute";
    int q_depth = 2, q_iters = 100, q_shots = 1024;
    double q_lr = 0.1;
    std::uint64_t q_seed = 1;
    qubo->add_option("file", q_file, "QUBO listing")->required();
    qubo->add_option("--backend", q_backend)->check(CLI::IsMember({"brute", "dvqe"}));
    qubo->add_option("--depth", q_depth);
    qubo->add_option("--lr", q_lr);
    qubo->add_option("--dvqe-iters", q_iters);
    qubo->add_option("--shots", q_shots);
    qubo->add_option("--seed", q_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (gen->parsed()) {
        InstanceHandle inst;
        duc_status st = duc_instance_generate(g_units, g_horizon, g_scenarios, g_seed, &inst.ptr);
        if (st != DUC_OK) die(exit_code_for(st), duc_last_error());
        st = duc_instance_save(inst.ptr, g_out.c_str());
        if (st != DUC_OK) die(exit_code_for(st), duc_last_error());
        std::printf("%s\n", g_out.c_str());
        return 0;
    }

    if (solve->parsed()) {
        duc_report* report = nullptr;
        duc_status st;
        if (!s_manifest.empty()) {
            st = duc_solve_manifest(s_manifest.c_str(), &report);
        } else {
            if (s_instance.empty()) die(kExitUsage, "solve needs an instance file or --manifest");
            InstanceHandle inst;
            st = duc_instance_load(s_instance.c_str(), &inst.ptr);
            if (st != DUC_OK) die(exit_code_for(st), duc_last_error());
            ConfigHandle cfg;
            s_flags.apply(cfg.ptr);
            st = duc_solve(inst.ptr, cfg.ptr, s_out.empty() ? nullptr : s_out.c_str(), &report);
        }
        if (st != DUC_OK) die(exit_code_for(st), duc_last_error());
        int converged = duc_report_converged(report);
        std::printf("status %s\n", converged ? "converged" : "max_iter");
        std::printf("iterations %d\n", duc_report_iterations(report));
        std::printf("final_cost %.6f\n", duc_report_final_cost(report));
        std::printf("residuals %.3e %.3e %.3e %.3e\n", duc_report_residual(report, 0),
                    duc_report_residual(report, 1), duc_report_residual(report, 2),
                    duc_report_residual(report, 3));
        std::printf("wall_ms %.1f\n", duc_report_wall_ms(report));
        duc_report_free(report);
        return converged ? kExitConverged : kExitMaxIter;
    }

    if (compare->parsed()) {
        InstanceHandle inst;
        duc_status st = duc_instance_load(c_instance.c_str(), &inst.ptr);
        if (st != DUC_OK) die(exit_code_for(st), duc_last_error());

        std::vector<std::string> modes =
            c_modes.empty() ? std::vector<std::string>{c_flags.mode} : split_csv(c_modes);
        std::vector<std::string> backends = c_backends.empty()
                                                ? std::vector<std::string>{c_flags.backend}
                                                : split_csv(c_backends);
        std::vector<std::unique_ptr<ConfigHandle>> configs;
        std::vector<std::string> labels;
        for (const auto& m : modes)
            for (const auto& b : backends) {
                auto handle = std::make_unique<ConfigHandle>();
                SolverFlags flags = c_flags;
                flags.mode = m;
                flags.backend = b;
                flags.apply(handle->ptr);
                labels.push_back(m + "-" + b);
                configs.push_back(std::move(handle));
            }
        if (configs.size() < 2)
            die(kExitUsage, "compare needs at least two configurations (see --modes/--backends)");

        std::vector<const duc_config*> cfg_ptrs;
        std::vector<const char*> label_ptrs;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            cfg_ptrs.push_back(configs[i]->ptr);
            label_ptrs.push_back(labels[i].c_str());
        }
        char* csv = nullptr;
        st = duc_compare(inst.ptr, cfg_ptrs.data(), label_ptrs.data(),
                         static_cast<int>(cfg_ptrs.size()), c_out.empty() ? nullptr : c_out.c_str(),
                         &csv);
        if (st != DUC_OK) die(exit_code_for(st), duc_last_error());
        std::fputs(csv, stdout);
        duc_string_free(csv);
        return 0;
    }

    if (qubo->parsed()) {
        ConfigHandle cfg;
        set_or_die(cfg.ptr, "backend", q_backend);
        set_or_die(cfg.ptr, "depth", std::to_string(q_depth));
        set_or_die(cfg.ptr, "lr", std::to_string(q_lr));
        set_or_die(cfg.ptr, "dvqe_iters", std::to_string(q_iters));
        set_or_die(cfg.ptr, "shots", std::to_string(q_shots));
        set_or_die(cfg.ptr, "seed", std::to_string(q_seed));
        char* record = nullptr;
        duc_status st = duc_qubo_solve_file(q_file.c_str(), cfg.ptr, &record);
        if (st != DUC_OK) die(exit_code_for(st), duc_last_error());
        std::fputs(record, stdout);
        duc_string_free(record);
        return 0;
    }
    return kExitUsage;
}
