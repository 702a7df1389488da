#pragma once

#include <string>
#include <utility>
#include <vector>

#include "duc/admm.hpp"

namespace duc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Instance origin: a file on disk, or deterministic generator arguments.
struct InstanceSource {
    std::string path;  // empty when generated
    int units = 0, horizon = 0, scenarios = 0;
    std::uint64_t gen_seed = 0;
    bool is_generated() const { return path.empty(); }
};

UcInstance resolve_instance(const InstanceSource& source);

struct RunManifest {
    InstanceSource instance;
    AdmmConfig config;
    std::string out_dir;
    std::string run_id;
    std::string tool_version = kToolVersion;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const std::string& path);

std::string trace_csv(const ConvergenceReport& report);
std::string dispatch_csv(const UcInstance& inst, const ConvergenceReport& report);
std::string schedule_csv(const UcInstance& inst, const ConvergenceReport& report);

struct SolveArtifacts {
    ConvergenceReport report;
    std::string trace_path, dispatch_path, schedule_path, manifest_path;
};

/// Runs the solver and, when the manifest names an output directory, writes
/// trace.csv, dispatch.csv, schedule.csv, and manifest.json there.
SolveArtifacts run_and_write(const UcInstance& inst, const RunManifest& manifest);

struct CompareEntry {
    std::string label;
    AdmmConfig config;
};

/// Side-by-side run of several configurations on one instance; returns the
/// comparison table as CSV and optionally writes compare.csv.
std::string run_compare(const UcInstance& inst, const std::vector<CompareEntry>& entries,
                        const std::string& out_dir);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace duc
