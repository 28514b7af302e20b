#include "fairflow/app.hpp"

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "fairflow/config.hpp"
#include "fairflow/text.hpp"
#include "json.hpp"

namespace fairflow {

namespace {

using nlohmann::ordered_json;

struct OutputFile {
    std::string name;
    std::string content;
};

std::filesystem::path out_dir_of(const RunConfig& rc) {
    return rc.out_dir.empty() ? default_out_dir() : rc.out_dir;
}

// Fails early (before any simulation) when the directory cannot take files.
void check_writable(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    const auto probe = dir / (".fairflow-probe-" + std::to_string(::getpid()));
    {
        std::ofstream f(probe);
        if (!f) throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
}

void commit(const std::filesystem::path& dir, const std::vector<OutputFile>& files,
            std::ostream& log) {
    check_writable(dir);
    const std::string suffix = ".tmp-" + std::to_string(::getpid());
    std::vector<std::filesystem::path> staged;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& p : staged) std::filesystem::remove(p, ec);
    };
    for (const auto& f : files) {
        const auto tmp = dir / (f.name + suffix);
        staged.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary);
        out << f.content;
        out.close();
        if (!out) {
            cleanup();
            throw std::runtime_error("failed writing '" + tmp.string() + "'");
        }
    }
    // everything is on disk; renames within one directory do not fail for space
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        std::filesystem::rename(staged[i], dir / files[i].name, ec);
        if (ec) {
            for (std::size_t j = 0; j < i; ++j) std::filesystem::remove(dir / files[j].name, ec);
            cleanup();
            throw std::runtime_error("cannot write '" + (dir / files[i].name).string() + "'");
        }
    }
    for (const auto& f : files) log << "wrote " << (dir / f.name).string() << "\n";
}

ordered_json to_json(const RunSummary& s) {
    return {{"status", s.status},
            {"cumulative_revenue", s.revenue},
            {"peak_I", s.peak_I},
            {"frac_time_I_over_theta", s.frac_I_over},
            {"peak_q", s.peak_q},
            {"frac_time_q_over_qmax", s.frac_q_over},
            {"fallback_epochs", s.fallback_epochs},
            {"mean_price", s.mean_price},
            {"mean_alpha", s.mean_alpha},
            {"duration", s.duration}};
}

struct PolicyRun {
    RunResult result;
    RunSummary summary;
};

PolicyRun run_policy(Scenario scn, Policy policy) {
    scn.cfg.policy = policy;
    PolicyRun out;
    out.result = run(scn);
    out.summary = summarize(out.result.rows, scn.sp.theta_d, scn.sp.q_max,
                            std::string(to_string(policy)),
                            std::string(to_string(out.result.status)));
    return out;
}

int exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return kExitOk;
        case RunStatus::controller_fault: return kExitControllerFault;
        case RunStatus::numeric_fault: return kExitNumericFault;
    }
    return kExitError;
}

void report(std::ostream& log, const RunSummary& s, const RunResult& r) {
    log << s.policy << ": revenue " << s.revenue << ", peak I " << s.peak_I << ", peak q "
        << s.peak_q << ", mean price " << s.mean_price;
    if (r.status != RunStatus::ok) log << " [" << s.status << ": " << r.message << "]";
    log << "\n";
}

const std::vector<const char*> kSweepFields = {
    "revenue", "peak_I", "frac_I_over", "peak_q", "frac_q_over",
    "fallback_epochs", "mean_price", "mean_alpha", "status"};

std::string field_value(const RunSummary& s, std::string_view f) {
    if (f == "revenue") return format_double(s.revenue);
    if (f == "peak_I") return format_double(s.peak_I);
    if (f == "frac_I_over") return format_double(s.frac_I_over);
    if (f == "peak_q") return format_double(s.peak_q);
    if (f == "frac_q_over") return format_double(s.frac_q_over);
    if (f == "fallback_epochs") return std::to_string(s.fallback_epochs);
    if (f == "mean_price") return format_double(s.mean_price);
    if (f == "mean_alpha") return format_double(s.mean_alpha);
    return s.status;
}

}  // namespace

std::filesystem::path default_out_dir() {
    const char* env = std::getenv("FAIRFLOW_OUT");
    if (env != nullptr && *env != '\0') return env;
    return ".";
}

Preset load_scenarios(const RunConfig& rc) {
    if (rc.preset.empty() == rc.config.empty()) {
        throw ConfigError("choose exactly one of --preset and --config");
    }
    Preset p;
    if (!rc.preset.empty()) {
        p = find_preset(rc.preset);
    } else {
        p.name = rc.config.stem().string();
        p.description = "config " + rc.config.string();
        p.points.push_back({0.0, parse_config(rc.config)});
    }
    for (auto& pt : p.points) {
        for (const auto& [k, v] : rc.overrides) apply_setting(pt.scenario, k, v);
        if (rc.seed) pt.scenario.seed = *rc.seed;
        try {
            pt.scenario.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid scenario: ") + e.what());
        }
    }
    if (rc.policies.empty()) throw ConfigError("no policy selected");
    return p;
}

std::string summary_json(const Scenario& scn, std::span<const RunSummary> runs) {
    ordered_json doc;
    doc["scenario"] = scn.name;
    doc["seed"] = scn.seed;
    doc["t_end"] = scn.t_end;
    doc["theta_d"] = scn.sp.theta_d;
    doc["q_max"] = scn.sp.q_max;
    doc["classes"] = scn.classes.size();
    ordered_json pol = ordered_json::object();
    for (const auto& s : runs) pol[s.policy] = to_json(s);
    doc["policies"] = pol;
    return doc.dump(2) + "\n";
}

int run_command(const RunConfig& rc, std::ostream& log) {
    const Preset p = load_scenarios(rc);
    if (p.is_sweep()) {
        throw ConfigError("preset '" + p.name + "' is a sweep; use the sweep command");
    }
    const auto dir = out_dir_of(rc);
    check_writable(dir);

    const Scenario& scn = p.points.front().scenario;
    std::vector<OutputFile> files;
    std::vector<RunSummary> summaries;
    int code = kExitOk;
    for (Policy pol : rc.policies) {
        auto r = run_policy(scn, pol);
        report(log, r.summary, r.result);
        code = std::max(code, exit_code(r.result.status));
        if (rc.csv) {
            std::ostringstream csv;
            write_trace_csv(csv, r.result.rows, scn.num_classes());
            files.push_back({std::string(to_string(pol)) + "_trace.csv", csv.str()});
        }
        summaries.push_back(std::move(r.summary));
    }
    if (rc.json) files.push_back({"summary.json", summary_json(scn, summaries)});
    commit(dir, files, log);
    return code;
}

int sweep_command(const RunConfig& rc, std::ostream& log) {
    const Preset p = load_scenarios(rc);
    if (!p.is_sweep()) throw ConfigError("'" + p.name + "' is not a sweep preset");
    const auto dir = out_dir_of(rc);
    check_writable(dir);

    std::ostringstream csv;
    csv << csv_field(p.sweep_key);
    for (Policy pol : rc.policies) {
        for (const char* f : kSweepFields) csv << "," << to_string(pol) << "_" << f;
    }
    csv << "\n";
    ordered_json doc;
    doc["preset"] = p.name;
    doc["sweep_key"] = p.sweep_key;
    doc["points"] = ordered_json::array();

    int code = kExitOk;
    for (const auto& pt : p.points) {
        log << p.sweep_key << " = " << pt.value << "\n";
        csv << format_double(pt.value);
        std::vector<RunSummary> summaries;
        for (Policy pol : rc.policies) {
            auto r = run_policy(pt.scenario, pol);
            log << "  ";
            report(log, r.summary, r.result);
            code = std::max(code, exit_code(r.result.status));
            for (const char* f : kSweepFields) csv << "," << csv_field(field_value(r.summary, f));
            summaries.push_back(std::move(r.summary));
        }
        csv << "\n";
        ordered_json point = ordered_json::parse(summary_json(pt.scenario, summaries));
        point["value"] = pt.value;
        doc["points"].push_back(point);
    }

    std::vector<OutputFile> files;
    if (rc.csv) files.push_back({"sweep_summary.csv", csv.str()});
    if (rc.json) files.push_back({"sweep_summary.json", doc.dump(2) + "\n"});
    commit(dir, files, log);
    return code;
}

int presets_command(std::ostream& out, bool json) {
    const auto all = presets();
    if (json) {
        ordered_json doc = ordered_json::array();
        for (const auto& p : all) {
            ordered_json e{{"name", p.name}, {"description", p.description}};
            if (p.is_sweep()) {
                e["sweep_key"] = p.sweep_key;
                ordered_json values = ordered_json::array();
                for (const auto& pt : p.points) values.push_back(pt.value);
                e["values"] = values;
            }
            doc.push_back(e);
        }
        out << doc.dump(2) << "\n";
        return kExitOk;
    }
    for (const auto& p : all) {
        out << p.name;
        if (p.is_sweep()) {
            out << " (sweep over " << p.sweep_key << ":";
            for (const auto& pt : p.points) out << " " << pt.value;
            out << ")";
        }
        out << "\n    " << p.description << "\n";
    }
    return kExitOk;
}

int validate_command(const RunConfig& rc, std::ostream& log) {
    const Preset p = load_scenarios(rc);
    for (const auto& pt : p.points) {
        const auto& s = pt.scenario;
        log << "ok: " << s.name << ", " << s.num_classes() << " classes, t_end " << s.t_end
            << ", theta_d " << s.sp.theta_d << ", seed " << s.seed << "\n";
    }
    return kExitOk;
}

}  // namespace fairflow
