#pragma once

#include "dtwin/agent.hpp"
#include "dtwin/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace dtwin {

struct AgentRecord {
    std::string agent_id;
    Pose true_pose;  // ground truth (noiseless odometry)
    Pose dt_pose;    // the agent's pose inside the twin
    Vec3 estimate = Vec3::Zero();
    double score = 0.0;
    Control control;
    std::map<std::string, double> rates;  // column name -> bits/s/Hz
};

struct TraceRecord {
    std::int64_t step = 0;
    double time = 0.0;  // seconds at which the recorded poses hold
    std::vector<AgentRecord> agents;
    std::uint64_t rng_digest = 0;
};

/// Column name for the link from transmitter q to receiver v.
std::string rate_column(const std::string& v, const std::string& q);

std::vector<std::string> trace_columns(const std::vector<std::string>& rate_columns);

/// Companion file holding the twin-side poses; the main CSV keeps the documented column set.
std::filesystem::path dt_pose_path(const std::filesystem::path& trace_csv);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Streams records to CSV, flushing after every step so a partial file stays valid.
class TraceWriter {
public:
    TraceWriter(const std::filesystem::path& path, std::vector<std::string> rate_columns);
    void write(const TraceRecord& record);

private:
    std::filesystem::path path_;
    std::vector<std::string> rate_columns_;
    std::ofstream csv_;
    std::ofstream dt_;
};

void record_trace(const std::vector<TraceRecord>& records, const std::filesystem::path& path,
                  const std::vector<std::string>& rate_columns);

struct LoadedTrace {
    std::vector<std::string> rate_columns;
    std::vector<TraceRecord> records;
    bool has_dt_pose = false;
};

LoadedTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace dtwin
