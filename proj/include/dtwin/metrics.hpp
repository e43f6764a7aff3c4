#pragma once

#include "dtwin/channel.hpp"
#include "dtwin/trace.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dtwin {

struct ErrorSeries {
    std::vector<double> values;  // meters, one per step
    double max = 0.0;
    double mean = 0.0;
    double rmse = 0.0;

    static ErrorSeries from(std::vector<double> values);
};

/// Per-step planar distance between estimates and ground truth.
ErrorSeries positioning_error(std::span<const Vec2> estimated, std::span<const Vec2> ground_truth);

/// Per-step planar distance between the twin's pose and ground truth.
ErrorSeries modeling_error(std::span<const Vec2> simulated, std::span<const Vec2> ground_truth);

/// log2(1 + p ||H w||^2 / (noise + interference)), bits/s/Hz.
double achievable_rate(const CMatrix& H, const CVector& w, double power, double noise_power,
                       double interference = 0.0);

struct RunSummary {
    std::size_t steps = 0;
    ErrorSeries positioning;
    std::optional<ErrorSeries> modeling;
    std::map<std::string, double> mean_rates;  // rate column -> mean bits/s/Hz
};

RunSummary summarize_run(const std::vector<TraceRecord>& records, bool has_dt_pose = true);
RunSummary summarize_trace(const LoadedTrace& trace);

nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& doc);
std::string summary_table(const RunSummary& s);

}  // namespace dtwin
