// Command-line front end: build-db, run, eval, validate.
#include "dtwin/error.hpp"
#include "dtwin/localization.hpp"
#include "dtwin/metrics.hpp"
#include "dtwin/scenario.hpp"
#include "dtwin/simcore.hpp"
#include "dtwin/trace.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace dtwin;

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += (c == '\n') ? ' ' : c;
    }
    return out + '"';
}

int report(std::string_view code, const std::string& message) {
    std::cerr << "error code=" << code << " message=" << quoted(message) << '\n';
    return 2;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> max_steps;
    std::optional<std::string> out;
    std::optional<std::string> db;
};

ScenarioConfig load_with(const std::string& path, const Overrides& o) {
    ScenarioConfig c = load_scenario(path);
    if (o.seed) c.sim.seed = *o.seed;
    if (o.max_steps) c.sim.max_steps = *o.max_steps;
    if (o.db) c.db.path = fs::path(*o.db);
    return c;
}

void write_db(const ScenarioConfig& c, const fs::path& path) {
    const FingerprintDB db = build_database(c);
    write_fingerprint_db(db, path);
    std::cout << "wrote " << path.string() << ": " << db.points.size() << " points, " << db.ap_ids.size()
              << " access points, " << db.num_bins << " bins of " << db.bin_width << " s\n";
}

int cmd_build_db(const std::string& scenario, const Overrides& o) {
    const ScenarioConfig c = load_with(scenario, o);
    const auto target = o.out ? std::optional<fs::path>(*o.out) : c.db.path;
    if (!target) fail(ErrorCode::config, "no database path; set db.path or pass --out");
    write_db(c, *target);
    return 0;
}

int cmd_run(const std::string& scenario, const Overrides& o) {
    ScenarioConfig c = load_with(scenario, o);
    if (const auto problems = validate_scenario(c); !problems.empty()) fail(ErrorCode::config, problems.front());
    if (c.db.path && !fs::exists(*c.db.path)) write_db(c, *c.db.path);
    const auto out = o.out ? std::optional<fs::path>(*o.out) : c.trace_csv;
    if (!out) fail(ErrorCode::config, "no trace output; set output.trace_csv or pass --out");
    const auto records = run_simulation(c, out);
    std::cout << "wrote " << out->string() << ": " << records.size() << " steps\n";
    std::cout << summary_table(summarize_run(records));
    return 0;
}

int cmd_eval(const std::string& trace, const Overrides& o) {
    const RunSummary s = summarize_trace(read_trace_csv(trace));
    const std::string doc = summary_to_json(s).dump(2);
    std::cout << summary_table(s);
    if (o.out) {
        std::ofstream f(*o.out);
        if (!(f << doc << '\n')) fail(ErrorCode::io, "cannot write " + *o.out);
    } else {
        std::cout << doc << '\n';
    }
    return 0;
}

int cmd_validate(const std::string& scenario, const Overrides& o) {
    const ScenarioConfig c = load_with(scenario, o);
    const auto problems = validate_scenario(c);
    if (problems.empty()) {
        std::cout << "ok " << scenario << '\n';
        return 0;
    }
    for (const auto& p : problems) std::cout << "problem: " << p << '\n';
    return report("config", std::to_string(problems.size()) + " problem(s); first: " + problems.front());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital twin simulator for ISAC networks"};
    app.require_subcommand(1);
    Overrides o;
    std::string input;

    auto add_common = [&](CLI::App* sub, const char* what) {
        sub->add_option("input", input, what)->required();
        sub->add_option("--out", o.out, "Output path");
    };
    auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Override sim.seed");
        sub->add_option("--max-steps", o.max_steps, "Override sim.max_steps");
        sub->add_option("--db", o.db, "Override db.path");
    };
    auto* build = app.add_subcommand("build-db", "Build the fingerprint database of a scenario");
    add_common(build, "Scenario file");
    add_scenario(build);
    auto* run = app.add_subcommand("run", "Run a scenario and write its trace CSV");
    add_common(run, "Scenario file");
    add_scenario(run);
    auto* eval = app.add_subcommand("eval", "Summarize a trace CSV");
    add_common(eval, "Trace CSV");
    auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
    add_common(validate, "Scenario file");
    add_scenario(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("usage", e.what());
    }

    try {
        if (*build) return cmd_build_db(input, o);
        if (*run) return cmd_run(input, o);
        if (*eval) return cmd_eval(input, o);
        return cmd_validate(input, o);
    } catch (const Error& e) {
        return report(to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return report("internal", e.what());
    }
}
