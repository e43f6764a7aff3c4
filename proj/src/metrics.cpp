#include "dtwin/metrics.hpp"

#include "dtwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace dtwin {

namespace {

ErrorSeries planar_distances(std::span<const Vec2> a, std::span<const Vec2> b) {
    if (a.size() != b.size()) fail(ErrorCode::shape_mismatch, "trajectories have different lengths");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = (a[i] - b[i]).norm();
    return ErrorSeries::from(std::move(d));
}

}  // namespace

ErrorSeries ErrorSeries::from(std::vector<double> values) {
    ErrorSeries s;
    s.values = std::move(values);
    if (s.values.empty()) return s;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : s.values) {
        s.max = std::max(s.max, v);
        sum += v;
        sum_sq += v * v;
    }
    const auto n = static_cast<double>(s.values.size());
    s.mean = sum / n;
    s.rmse = std::sqrt(sum_sq / n);
    return s;
}

ErrorSeries positioning_error(std::span<const Vec2> estimated, std::span<const Vec2> ground_truth) {
    return planar_distances(estimated, ground_truth);
}

ErrorSeries modeling_error(std::span<const Vec2> simulated, std::span<const Vec2> ground_truth) {
    return planar_distances(simulated, ground_truth);
}

double achievable_rate(const CMatrix& H, const CVector& w, double power, double noise_power, double interference) {
    if (!(noise_power > 0.0)) fail(ErrorCode::invalid_argument, "noise power must be positive");
    if (H.cols() != w.size()) fail(ErrorCode::shape_mismatch, "beamformer length does not match channel");
    const double gain = (H * w).squaredNorm();
    return std::log2(1.0 + power * gain / (noise_power + interference));
}

RunSummary summarize_run(const std::vector<TraceRecord>& records, bool has_dt_pose) {
    if (records.empty()) fail(ErrorCode::invalid_argument, "empty trace");
    RunSummary s;
    s.steps = records.size();
    std::vector<Vec2> est;
    std::vector<Vec2> truth;
    std::vector<Vec2> twin;
    std::map<std::string, std::pair<double, std::size_t>> rates;
    for (const auto& r : records) {
        for (const auto& a : r.agents) {
            est.push_back(a.estimate.head<2>());
            truth.push_back(a.true_pose.position.head<2>());
            twin.push_back(a.dt_pose.position.head<2>());
            for (const auto& [link, rate] : a.rates) {
                auto& acc = rates[link];
                acc.first += rate;
                ++acc.second;
            }
        }
    }
    s.positioning = positioning_error(est, truth);
    if (has_dt_pose) s.modeling = modeling_error(twin, truth);
    for (const auto& [link, acc] : rates) s.mean_rates[link] = acc.first / static_cast<double>(acc.second);
    return s;
}

RunSummary summarize_trace(const LoadedTrace& trace) { return summarize_run(trace.records, trace.has_dt_pose); }

nlohmann::json summary_to_json(const RunSummary& s) {
    nlohmann::json doc;
    doc["steps"] = s.steps;
    doc["max_pos_err_m"] = s.positioning.max;
    doc["mean_pos_err_m"] = s.positioning.mean;
    doc["rmse_pos_err_m"] = s.positioning.rmse;
    if (s.modeling) {
        doc["max_model_err_m"] = s.modeling->max;
        doc["mean_model_err_m"] = s.modeling->mean;
        doc["rmse_model_err_m"] = s.modeling->rmse;
    } else {
        doc["max_model_err_m"] = nullptr;
        doc["mean_model_err_m"] = nullptr;
        doc["rmse_model_err_m"] = nullptr;
    }
    doc["mean_rate_bps_hz"] = nlohmann::json::object();
    for (const auto& [link, rate] : s.mean_rates) doc["mean_rate_bps_hz"][link] = rate;
    return doc;
}

RunSummary summary_from_json(const nlohmann::json& doc) {
    RunSummary s;
    try {
        s.steps = doc.at("steps").get<std::size_t>();
        s.positioning.max = doc.at("max_pos_err_m").get<double>();
        s.positioning.mean = doc.at("mean_pos_err_m").get<double>();
        s.positioning.rmse = doc.at("rmse_pos_err_m").get<double>();
        if (!doc.at("max_model_err_m").is_null()) {
            ErrorSeries m;
            m.max = doc.at("max_model_err_m").get<double>();
            m.mean = doc.at("mean_model_err_m").get<double>();
            m.rmse = doc.at("rmse_model_err_m").get<double>();
            s.modeling = m;
        }
        for (const auto& [link, rate] : doc.at("mean_rate_bps_hz").items()) s.mean_rates[link] = rate.get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("malformed summary: ") + e.what());
    }
    return s;
}

std::string summary_table(const RunSummary& s) {
    std::string out;
    char line[160];
    auto row = [&](const char* name, double max, double mean, double rmse) {
        std::snprintf(line, sizeof line, "%-20s %10.4f %10.4f %10.4f\n", name, max, mean, rmse);
        out += line;
    };
    std::snprintf(line, sizeof line, "steps: %zu\n%-20s %10s %10s %10s\n", s.steps, "error [m]", "max", "mean", "rmse");
    out += line;
    row("positioning", s.positioning.max, s.positioning.mean, s.positioning.rmse);
    if (s.modeling) row("modeling", s.modeling->max, s.modeling->mean, s.modeling->rmse);
    else out += "modeling             (no twin pose file)\n";
    for (const auto& [link, rate] : s.mean_rates) {
        std::snprintf(line, sizeof line, "%-32s %10.4f bits/s/Hz\n", link.c_str(), rate);
        out += line;
    }
    return out;
}

}  // namespace dtwin
