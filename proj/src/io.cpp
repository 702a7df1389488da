#include "duc/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace duc {

namespace {
using json = nlohmann::ordered_json;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

UcInstance resolve_instance(const InstanceSource& source) {
    if (!source.is_generated()) return load_instance(source.path);
    return generate_synthetic(source.units, source.horizon, source.scenarios, source.gen_seed);
}

std::string serialize_manifest(const RunManifest& m) {
    json j;
    j["run_id"] = m.run_id;
    j["tool_version"] = m.tool_version;
    if (m.instance.is_generated()) {
        j["instance"] = {{"units", m.instance.units},
                         {"horizon", m.instance.horizon},
                         {"scenarios", m.instance.scenarios},
                         {"seed", m.instance.gen_seed}};
    } else {
        j["instance"] = {{"path", m.instance.path}};
    }
    const AdmmConfig& c = m.config;
    json cfg;
    cfg["mode"] = decomposition_name(c.mode);
    cfg["backend"] = backend_name(c.backend);
    cfg["rho_commit"] = c.rho_commit;
    cfg["rho_startup"] = c.rho_startup;
    cfg["rho_shutdown"] = c.rho_shutdown;
    cfg["beta_commit"] = c.beta_commit;
    cfg["beta_startup"] = c.beta_startup;
    cfg["beta_shutdown"] = c.beta_shutdown;
    cfg["eps_primal"] = c.eps_primal;
    cfg["eps_dual"] = c.eps_dual;
    cfg["max_iter"] = c.max_iter;
    cfg["batches"] = c.n_batches;
    cfg["unit_coherent"] = c.unit_coherent;
    PenaltyWeights w = c.penalties();
    cfg["penalty"] = {{"logic", w.logic},
                      {"start_stop", w.start_stop},
                      {"start_implies_on", w.start_implies_on},
                      {"stop_implies_off", w.stop_implies_off},
                      {"anchor_commit", w.anchor_commit},
                      {"anchor_startup", w.anchor_startup},
                      {"anchor_shutdown", w.anchor_shutdown}};
    cfg["hardness_weights"] = {c.hardness.gap, c.hardness.degeneracy, c.hardness.frustration,
                               c.hardness.coupling_ratio, c.hardness.dynamic_range};
    cfg["dvqe"] = {{"depth", c.dvqe.depth},
                   {"learning_rate", c.dvqe.learning_rate},
                   {"max_iters", c.dvqe.max_iters},
                   {"shots", c.dvqe.shots}};
    cfg["seed"] = c.seed;
    cfg["lyapunov_kappa"] = c.kappa();
    cfg["track_block2_match"] = c.track_block2_match;
    j["config"] = std::move(cfg);
    j["out_dir"] = m.out_dir;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest m;
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.tool_version = j.value("tool_version", std::string(kToolVersion));
        const auto& inst = j.at("instance");
        if (inst.contains("path")) {
            m.instance.path = inst.at("path").get<std::string>();
        } else {
            m.instance.units = inst.at("units").get<int>();
            m.instance.horizon = inst.at("horizon").get<int>();
            m.instance.scenarios = inst.at("scenarios").get<int>();
            m.instance.gen_seed = inst.at("seed").get<std::uint64_t>();
        }
        const auto& cfg = j.at("config");
        AdmmConfig& c = m.config;
        auto mode = parse_decomposition(cfg.at("mode").get<std::string>());
        auto backend = parse_backend(cfg.at("backend").get<std::string>());
        if (!mode || !backend) throw ParseError("manifest has unknown mode or backend");
        c.mode = *mode;
        c.backend = *backend;
        c.rho_commit = cfg.at("rho_commit").get<double>();
        c.rho_startup = cfg.at("rho_startup").get<double>();
        c.rho_shutdown = cfg.at("rho_shutdown").get<double>();
        c.beta_commit = cfg.at("beta_commit").get<double>();
        c.beta_startup = cfg.at("beta_startup").get<double>();
        c.beta_shutdown = cfg.at("beta_shutdown").get<double>();
        c.eps_primal = cfg.at("eps_primal").get<double>();
        c.eps_dual = cfg.at("eps_dual").get<double>();
        c.max_iter = cfg.at("max_iter").get<int>();
        c.n_batches = cfg.at("batches").get<int>();
        c.unit_coherent = cfg.at("unit_coherent").get<bool>();
        const auto& w = cfg.at("penalty");
        PenaltyWeights pw;
        pw.logic = w.at("logic").get<double>();
        pw.start_stop = w.at("start_stop").get<double>();
        pw.start_implies_on = w.at("start_implies_on").get<double>();
        pw.stop_implies_off = w.at("stop_implies_off").get<double>();
        pw.anchor_commit = w.at("anchor_commit").get<double>();
        pw.anchor_startup = w.at("anchor_startup").get<double>();
        pw.anchor_shutdown = w.at("anchor_shutdown").get<double>();
        c.penalty_override = pw;
        const auto& hw = cfg.at("hardness_weights");
        c.hardness.gap = hw.at(0).get<double>();
        c.hardness.degeneracy = hw.at(1).get<double>();
        c.hardness.frustration = hw.at(2).get<double>();
        c.hardness.coupling_ratio = hw.at(3).get<double>();
        c.hardness.dynamic_range = hw.at(4).get<double>();
        const auto& dv = cfg.at("dvqe");
        c.dvqe.depth = dv.at("depth").get<int>();
        c.dvqe.learning_rate = dv.at("learning_rate").get<double>();
        c.dvqe.max_iters = dv.at("max_iters").get<int>();
        c.dvqe.shots = dv.at("shots").get<int>();
        c.seed = cfg.at("seed").get<std::uint64_t>();
        c.lyapunov_kappa = cfg.at("lyapunov_kappa").get<double>();
        c.track_block2_match = cfg.at("track_block2_match").get<bool>();
        m.out_dir = j.at("out_dir").get<std::string>();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("manifest schema error: ") + e.what());
    }
    return m;
}

RunManifest load_manifest(const std::string& path) {
    return parse_manifest(read_text_file(path));
}

std::string trace_csv(const ConvergenceReport& report) {
    std::ostringstream os;
    os << "iter,pri_y,pri_u,pri_v,dual,auglag,cost,lyapunov,block2_energy,telegate_ops,"
          "t_block1_ms,t_block2_ms\n";
    for (const auto& row : report.trace) {
        os << row.iter << "," << util::format_double(row.residuals.pri_commit) << ","
           << util::format_double(row.residuals.pri_startup) << ","
           << util::format_double(row.residuals.pri_shutdown) << ","
           << util::format_double(row.residuals.dual) << ","
           << util::format_double(row.aug_lagrangian) << ","
           << util::format_double(row.true_cost) << "," << util::format_double(row.lyapunov)
           << "," << util::format_double(row.block2_energy) << "," << row.telegate_ops << ","
           << util::format_double(row.t_block1_ms) << ","
           << util::format_double(row.t_block2_ms) << "\n";
    }
    return os.str();
}

std::string dispatch_csv(const UcInstance& inst, const ConvergenceReport& report) {
    std::ostringstream os;
    os << "s,t";
    for (int i = 0; i < inst.n_units(); ++i) os << ",p" << (i + 1);
    os << ",sum_p,net_load\n";
    for (int s = 0; s < inst.n_scenarios(); ++s)
        for (int t = 0; t < inst.horizon; ++t) {
            os << s << "," << t;
            double sum = 0.0;
            for (int i = 0; i < inst.n_units(); ++i) {
                double p = report.power[s][static_cast<std::size_t>(i) * inst.horizon + t];
                sum += p;
                os << "," << util::format_double(p);
            }
            os << "," << util::format_double(sum) << ","
               << util::format_double(inst.scenarios.load(t, s)) << "\n";
        }
    return os.str();
}

std::string schedule_csv(const UcInstance& inst, const ConvergenceReport& report) {
    std::ostringstream os;
    os << "unit,t,commit,startup,shutdown\n";
    for (int i = 0; i < inst.n_units(); ++i)
        for (int t = 0; t < inst.horizon; ++t) {
            std::size_t k = static_cast<std::size_t>(i) * inst.horizon + t;
            os << i << "," << t << "," << report.commit[k] << "," << report.startup[k] << ","
               << report.shutdown[k] << "\n";
        }
    return os.str();
}

SolveArtifacts run_and_write(const UcInstance& inst, const RunManifest& manifest) {
    SolveArtifacts art;
    art.report = run_admm(inst, manifest.config);
    if (!manifest.out_dir.empty()) {
        std::filesystem::create_directories(manifest.out_dir);
        auto join = [&](const char* name) {
            return (std::filesystem::path(manifest.out_dir) / name).string();
        };
        art.trace_path = join("trace.csv");
        art.dispatch_path = join("dispatch.csv");
        art.schedule_path = join("schedule.csv");
        art.manifest_path = join("manifest.json");
        write_text_file(art.trace_path, trace_csv(art.report));
        write_text_file(art.dispatch_path, dispatch_csv(inst, art.report));
        write_text_file(art.schedule_path, schedule_csv(inst, art.report));
        write_text_file(art.manifest_path, serialize_manifest(manifest));
    }
    return art;
}

std::string run_compare(const UcInstance& inst, const std::vector<CompareEntry>& entries,
                        const std::string& out_dir) {
    std::ostringstream os;
    os << "label,mode,backend,status,iterations,final_cost,pri_y,pri_u,pri_v,dual,"
          "block2_match_rate,wall_ms\n";
    for (const auto& entry : entries) {
        ConvergenceReport rep = run_admm(inst, entry.config);
        os << entry.label << "," << decomposition_name(entry.config.mode) << ","
           << backend_name(entry.config.backend) << ","
           << (rep.status == ConvergenceReport::Status::Converged ? "converged" : "max_iter")
           << "," << rep.iterations() << "," << util::format_double(rep.final_cost) << ","
           << util::format_double(rep.final_residuals.pri_commit) << ","
           << util::format_double(rep.final_residuals.pri_startup) << ","
           << util::format_double(rep.final_residuals.pri_shutdown) << ","
           << util::format_double(rep.final_residuals.dual) << ","
           << util::format_double(rep.block2_match_rate()) << ","
           << util::format_double(rep.total_wall_ms) << "\n";
    }
    std::string csv = os.str();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text_file((std::filesystem::path(out_dir) / "compare.csv").string(), csv);
    }
    return csv;
}

}  // namespace duc
