#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpp/weights.hpp"
#include "json.hpp"

namespace fpp {

inline constexpr int kReportSchemaVersion = 1;

/// Parses `key = value` lines. Blank lines and text after '#' are ignored;
/// a repeated key or a line without '=' is a ConfigError.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// `exponential(rate)`, `uniform(a,b)`, `shifted-power(shift,alpha)` or `constant(c)`.
WeightSpec parse_weight_spec(std::string_view text);

/// Experiment kinds, with the CLI subcommand hosting each.
struct KindInfo {
    std::string kind;
    std::string command;
};
const std::vector<KindInfo>& experiment_kinds();

struct ExperimentConfig {
    std::string kind;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 1;
    int replicas = 10;
    int workers = 0;  // 0: OpenMP default; never part of the hash
    /// Run a single replica with this seed, as recorded in a failure report.
    std::optional<std::uint64_t> replay_seed;

    const std::string& get(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    WeightSpec weights() const;

    /// Sorted `key=value` lines covering kind, seed, replicas and params.
    std::string canonical_text() const;
    /// FNV-1a 64 of canonical_text(), as 16 hex digits.
    std::string hash() const;
};

/// Builds a config from parsed key-values. `seed`, `replicas`, `workers`
/// and `kind` are lifted out of the map; `command` supplies the default kind
/// and restricts the allowed ones. Fills defaults and validates every
/// parameter before any computation; throws ConfigError.
ExperimentConfig make_config(const std::map<std::string, std::string>& kv, std::string_view command);

struct Artifact {
    std::string name;
    std::string bytes;
};

struct ExperimentReport {
    nlohmann::json report;
    std::vector<nlohmann::json> records;  // one per kept replica, replica order
    std::vector<Artifact> artifacts;

    const nlohmann::json& aggregates() const { return report.at("aggregates"); }
};

/// Runs all replicas (in parallel over cfg.workers) and aggregates them in
/// replica order, so the aggregates section depends only on the config.
/// Throws AssertionFailure carrying the seed of the lowest failing replica.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.json, aggregates.json, replicas.jsonl and the artifacts into `dir`.
void write_report(const ExperimentReport& r, const std::filesystem::path& dir);

}  // namespace fpp
