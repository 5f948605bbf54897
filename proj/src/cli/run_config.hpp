#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "censmax/estimation.hpp"
#include "censmax/io.hpp"
#include "censmax/time_series.hpp"

namespace censmax::cli {

using json = nlohmann::json;

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"fit", "simulate", "return-level", "bootstrap", "validate", "pot", "grid"};
    return names;
}

// Defaults merged under the user configuration before validation, so the
// recorded configuration is complete.
json command_defaults(const std::string& command);

bool accepts_key(const std::string& command, const std::string& key);

// Throws ConfigError naming the first offending key.
void validate_config(const std::string& command, const json& cfg);

// Defaults, then the config file, then explicit flags; validated.
json effective_config(const std::string& command, const json& file_config, const json& flag_overrides);

// FNV-1a 64 of the canonical dump with output paths and thread counts removed.
std::string config_hash(const json& cfg);

OptimizerConfig optimizer_from(const json& cfg);
EstimatorSpec estimator_from(const json& cfg);
EstimatorSpec parse_estimator_name(const std::string& name);

struct PreparedData {
    std::vector<RawRecord> records;  // as read (sorted)
    TimeSeries series;               // windowed and blocked as configured
    bool blocked = false;            // one block per year (monthly filter)
    double years = 0.0;              // record length in years (blocks when blocked)
};

PreparedData load_data(const json& cfg);

// Applies the optional window and month filters to already-read records.
PreparedData prepare_records(std::vector<RawRecord> records, const json& cfg);

// Absolute `threshold` or the `threshold_quantile` of the series values.
double resolve_threshold(const json& cfg, const TimeSeries& series);

// Layout with one block per year: the monthly blocks themselves, or the
// record cut into consecutive 365-day years (complete years only when at
// least one exists).
TimeSeries year_layout(const PreparedData& data);

}  // namespace censmax::cli
