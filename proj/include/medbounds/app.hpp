#pragma once

#include "medbounds/bootstrap.hpp"
#include "medbounds/bounds.hpp"
#include "medbounds/csv_ingest.hpp"
#include "medbounds/errors.hpp"
#include "medbounds/mediation_law.hpp"
#include "medbounds/world.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace medbounds {

inline constexpr int kSchemaVersion = 1;

struct EstimateConfig {
    std::string input;
    IngestConfig ingest;
    /// Empty means every regime applicable to the data's shape.
    std::vector<AssumptionSet> assumptions;
    ZeroCellPolicy policy = ZeroCellPolicy::Error;
    std::optional<BootstrapOptions> bootstrap;
    bool keep_replicates = false;
    std::string output;  // empty means stdout
    std::string format = "json";
};

/// Reads an estimate config from TOML. Relative input paths resolve against
/// the config file's directory.
EstimateConfig load_estimate_config(const std::string& path);
EstimateConfig parse_estimate_config(const std::string& toml_text, const std::string& base_dir = "");

/// One record per requested regime, in config order.
nlohmann::json estimate_document(const Dataset& data, const EstimateConfig& config);
nlohmann::json run_estimate(const EstimateConfig& config);

struct StudyConfig {
    std::vector<AssumptionSet> assumptions;  // empty: applicable regimes
    std::size_t n = 2000;
    std::size_t repetitions = 200;
    /// Estimate from the population law instead of sampled data.
    bool population = false;
    std::size_t bootstrap_replicates = 0;
    double level = 0.95;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
    ZeroCellPolicy policy = ZeroCellPolicy::Error;
};

StudyConfig parse_study_config(const std::string& toml_text);
StudyConfig load_study_config(const std::string& path);

struct RegimeStudy {
    AssumptionSet assumptions;
    /// Identified interval computed from the population law.
    IntervalEstimate population;
    std::size_t runs = 0;
    std::size_t failures = 0;
    /// Runs whose estimated interval contains the true gamma0.
    std::size_t contained = 0;
    /// Runs with a bootstrap CI, and how many covered the population interval
    /// and the true gamma0.
    std::size_t bootstrapped = 0;
    std::size_t covered_identified = 0;
    std::size_t covered_truth = 0;

    double containment_rate() const;
    double coverage_rate() const;
};

struct StudyReport {
    WorldTruth truth;
    std::vector<RegimeStudy> regimes;
};

StudyReport run_study(const WorldSpec& spec, const StudyConfig& config);
nlohmann::json study_document(const StudyReport& report, const StudyConfig& config);

nlohmann::json oracle_document(const WorldSpec& spec);

/// Plot-ready CSV: one row per regime.
std::string estimate_csv(const nlohmann::json& document);

nlohmann::json error_document(const Error& e);
/// 2 for configuration, input and parse errors; 3 otherwise.
int exit_code_for(ErrorCode code);

std::string serialize(const nlohmann::json& doc);

}  // namespace medbounds
