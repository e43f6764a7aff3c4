#include "dtwin/trace.hpp"

#include "dtwin/error.hpp"

#include <charconv>
#include <sstream>

namespace dtwin {

namespace {

const std::vector<std::string> base_columns = {"step",  "time_s", "agent_id",  "true_x", "true_y", "true_yaw",
                                               "est_x", "est_y",  "loc_score", "v_cmd",  "w_cmd"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::parse, "line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

std::string rate_column(const std::string& v, const std::string& q) { return "rate_" + v + "_" + q; }

std::vector<std::string> trace_columns(const std::vector<std::string>& rate_columns) {
    std::vector<std::string> out = base_columns;
    out.insert(out.end(), rate_columns.begin(), rate_columns.end());
    return out;
}

std::filesystem::path dt_pose_path(const std::filesystem::path& trace_csv) {
    std::filesystem::path p = trace_csv;
    p.replace_extension(".dtpose.csv");
    return p;
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

TraceWriter::TraceWriter(const std::filesystem::path& path, std::vector<std::string> rate_columns)
    : path_(path), rate_columns_(std::move(rate_columns)), csv_(path, std::ios::trunc), dt_(dt_pose_path(path), std::ios::trunc) {
    if (!csv_ || !dt_) fail(ErrorCode::io, "cannot open trace output " + path.string());
    const auto columns = trace_columns(rate_columns_);
    for (std::size_t i = 0; i < columns.size(); ++i) csv_ << (i ? "," : "") << columns[i];
    csv_ << '\n';
    dt_ << "step,agent_id,dt_x,dt_y,dt_yaw\n";
    csv_.flush();
    dt_.flush();
}

void TraceWriter::write(const TraceRecord& r) {
    for (const auto& a : r.agents) {
        csv_ << r.step << ',' << format_number(r.time) << ',' << a.agent_id << ','
             << format_number(a.true_pose.position.x()) << ',' << format_number(a.true_pose.position.y()) << ','
             << format_number(a.true_pose.orientation.yaw) << ',' << format_number(a.estimate.x()) << ','
             << format_number(a.estimate.y()) << ',' << format_number(a.score) << ','
             << format_number(a.control.linear) << ',' << format_number(a.control.angular);
        for (const auto& c : rate_columns_) {
            csv_ << ',';
            if (const auto it = a.rates.find(c); it != a.rates.end()) csv_ << format_number(it->second);
        }
        csv_ << '\n';
        dt_ << r.step << ',' << a.agent_id << ',' << format_number(a.dt_pose.position.x()) << ','
            << format_number(a.dt_pose.position.y()) << ',' << format_number(a.dt_pose.orientation.yaw) << '\n';
    }
    csv_.flush();
    dt_.flush();
    if (!csv_ || !dt_) fail(ErrorCode::io, "trace write failed at step " + std::to_string(r.step));
}

void record_trace(const std::vector<TraceRecord>& records, const std::filesystem::path& path,
                  const std::vector<std::string>& rate_columns) {
    TraceWriter writer(path, rate_columns);
    for (const auto& r : records) writer.write(r);
}

LoadedTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open trace " + path.string());
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::parse, "empty trace file");
    const auto header = split_csv(line);
    if (header.size() < base_columns.size() || !std::equal(base_columns.begin(), base_columns.end(), header.begin()))
        fail(ErrorCode::parse, "trace header does not match the expected columns");

    LoadedTrace trace;
    trace.rate_columns.assign(header.begin() + static_cast<std::ptrdiff_t>(base_columns.size()), header.end());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size()) fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": wrong field count");
        const auto step = static_cast<std::int64_t>(parse_number(f[0], line_no));
        if (trace.records.empty() || trace.records.back().step != step) {
            TraceRecord r;
            r.step = step;
            r.time = parse_number(f[1], line_no);
            trace.records.push_back(std::move(r));
        }
        AgentRecord a;
        a.agent_id = f[2];
        a.true_pose.position = Vec3(parse_number(f[3], line_no), parse_number(f[4], line_no), 0.0);
        a.true_pose.orientation.yaw = parse_number(f[5], line_no);
        a.estimate = Vec3(parse_number(f[6], line_no), parse_number(f[7], line_no), 0.0);
        a.score = parse_number(f[8], line_no);
        a.control = {parse_number(f[9], line_no), parse_number(f[10], line_no)};
        for (std::size_t c = 0; c < trace.rate_columns.size(); ++c) {
            const auto& field = f[base_columns.size() + c];
            if (!field.empty()) a.rates[trace.rate_columns[c]] = parse_number(field, line_no);
        }
        a.dt_pose = a.true_pose;
        trace.records.back().agents.push_back(std::move(a));
    }

    std::ifstream dt(dt_pose_path(path));
    if (dt && std::getline(dt, line)) {
        std::size_t row = 0;
        std::size_t dt_line = 1;
        std::vector<AgentRecord*> order;
        for (auto& r : trace.records)
            for (auto& a : r.agents) order.push_back(&a);
        while (std::getline(dt, line)) {
            ++dt_line;
            if (line.empty()) continue;
            const auto f = split_csv(line);
            if (f.size() != 5 || row >= order.size() || order[row]->agent_id != f[1])
                fail(ErrorCode::parse, "twin pose file does not line up with the trace at line " + std::to_string(dt_line));
            order[row]->dt_pose.position = Vec3(parse_number(f[2], dt_line), parse_number(f[3], dt_line), 0.0);
            order[row]->dt_pose.orientation.yaw = parse_number(f[4], dt_line);
            ++row;
        }
        trace.has_dt_pose = row == order.size();
    }
    return trace;
}

}  // namespace dtwin
