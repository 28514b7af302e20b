#include "fairflow/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "fairflow/text.hpp"

namespace fairflow {

namespace {

std::size_t parse_index(std::string_view s, std::size_t count, std::string_view key) {
    unsigned long long i = 0;
    try {
        i = parse_uint(s, "index");
    } catch (const std::invalid_argument&) {
        throw ConfigError(std::string(key) + ": invalid index '" + std::string(s) + "'");
    }
    if (i < 1 || i > count) {
        throw ConfigError(std::string(key) + ": index " + std::string(s) + " out of range 1.." +
                          std::to_string(count));
    }
    return static_cast<std::size_t>(i - 1);
}

[[noreturn]] void unknown(std::string_view key) {
    throw ConfigError("unknown key '" + std::string(key) + "'");
}

double* system_field(SystemParams& sp, std::string_view f) {
    if (f == "mu_star") return &sp.mu_star;
    if (f == "q_c") return &sp.q_c;
    if (f == "q_max") return &sp.q_max;
    if (f == "p_min") return &sp.p_min;
    if (f == "p_max") return &sp.p_max;
    if (f == "nu_max") return &sp.nu_max;
    if (f == "lambda1") return &sp.lambda1;
    if (f == "lambda2") return &sp.lambda2;
    if (f == "theta_d") return &sp.theta_d;
    if (f == "T_d") return &sp.T_d;
    if (f == "T_I") return &sp.T_I;
    if (f == "dt") return &sp.dt;
    return nullptr;
}

std::vector<std::pair<double, double>> parse_breakpoints(std::string_view v) {
    std::vector<std::pair<double, double>> pts;
    for (auto item : split(v, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw std::invalid_argument("breakpoint '" + std::string(item) + "' is not t:mean");
        }
        pts.emplace_back(parse_double(item.substr(0, colon), "breakpoint time"),
                         parse_double(item.substr(colon + 1), "breakpoint mean"));
    }
    return pts;
}

void set_field(Scenario& scn, std::string_view key, std::string_view value) {
    const auto parts = split(key, '.');
    if (parts.size() < 2) unknown(key);
    const auto section = parts[0];

    if (section == "system" && parts.size() == 2) {
        double* f = system_field(scn.sp, parts[1]);
        if (f == nullptr) unknown(key);
        *f = parse_double(value);
        return;
    }
    if (section == "controller" && parts.size() == 2) {
        auto& c = scn.cfg;
        const auto f = parts[1];
        if (f == "p_grid_size") c.p_grid_size = static_cast<int>(parse_int(value));
        else if (f == "nu_grid_size") c.nu_grid_size = static_cast<int>(parse_int(value));
        else if (f == "b1") c.b1 = parse_double(value);
        else if (f == "b2") c.b2 = parse_double(value);
        else if (f == "b3") c.b3 = parse_double(value);
        else if (f == "objective") c.objective = parse_objective(value);
        else if (f == "margins") c.margins = parse_margin_mode(value);
        else unknown(key);
        return;
    }
    if (section == "sim" && parts.size() == 2) {
        const auto f = parts[1];
        if (f == "name") scn.name = std::string(value);
        else if (f == "t_end") scn.t_end = parse_double(value);
        else if (f == "seed") scn.seed = parse_uint(value, "seed");
        else if (f == "initial_price") scn.initial_price = parse_double(value);
        else if (f == "dropout_sensor_gain") scn.dropout_sensor_gain = parse_double(value);
        else if (f == "initial_q") scn.initial.q = parse_double(value);
        else if (f == "initial_alpha") scn.initial.alpha = parse_double(value);
        else if (f == "initial_x") {
            scn.initial.x.clear();
            for (auto v : split(value, ',')) scn.initial.x.push_back(parse_double(v));
        } else unknown(key);
        return;
    }
    if (section == "classes" && parts.size() == 3) {
        auto& c = scn.classes[parse_index(parts[1], scn.classes.size(), key)];
        if (parts[2] == "r1") c.r1 = parse_double(value);
        else if (parts[2] == "r2") c.r2 = parse_double(value);
        else unknown(key);
        return;
    }
    if (section == "profile" && parts.size() == 3) {
        auto& p = scn.profiles[parse_index(parts[1], scn.profiles.size(), key)];
        const auto f = parts[2];
        if (f == "kind") p.kind = parse_demand_kind(value);
        else if (f == "mean") p.mean = parse_double(value);
        else if (f == "std") p.std = parse_double(value);
        else if (f == "breakpoints") {
            p.breakpoints = parse_breakpoints(value);
            if (!p.breakpoints.empty()) p.mean = p.breakpoints.front().second;
        } else unknown(key);
        return;
    }
    unknown(key);
}

// Runs scenario validation piecewise so the message can carry a key path.
// `where` maps key paths to the line that set them.
void validate_scenario(const Scenario& scn, const std::map<std::string, int>& where,
                       std::string_view source) {
    auto fail = [&](const std::string& section, const std::exception& e) {
        const std::string msg = e.what();
        const std::string first = msg.substr(0, msg.find(' '));
        std::string key = section;
        if (where.count(section + "." + first) != 0) key += "." + first;
        int line = 0;
        if (auto it = where.find(key); it != where.end()) line = it->second;
        std::string prefix(source);
        if (line > 0) prefix += ":" + std::to_string(line);
        throw ConfigError(prefix + ": " + key + ": " + msg, line);
    };
    try {
        scn.sp.validate();
    } catch (const std::invalid_argument& e) {
        fail("system", e);
    }
    try {
        scn.cfg.validate();
    } catch (const std::invalid_argument& e) {
        fail("controller", e);
    }
    for (std::size_t i = 0; i < scn.classes.size(); ++i) {
        const auto& c = scn.classes[i];
        if (!(c.r1 >= 0) || !(c.r2 >= 0)) {
            fail("classes." + std::to_string(i + 1),
                 std::invalid_argument("r1, r2 must be >= 0"));
        }
    }
    for (std::size_t i = 0; i < scn.profiles.size(); ++i) {
        try {
            scn.profiles[i].validate();
        } catch (const std::invalid_argument& e) {
            fail("profile." + std::to_string(i + 1), e);
        }
    }
    try {
        scn.validate();
    } catch (const std::invalid_argument& e) {
        fail("sim", e);
    }
}

}  // namespace

void apply_setting(Scenario& scn, std::string_view key, std::string_view value) {
    try {
        set_field(scn, trim(key), trim(value));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(trim(key)) + ": " + e.what());
    }
}

Scenario parse_config_text(std::string_view text, std::string_view source) {
    Scenario scn;
    scn.name = "config";
    std::map<std::string, int> where;
    std::vector<int> profile_line;  // line of each [profile.<i>] header, 0 if absent
    std::string section;
    int lineno = 0;

    auto error = [&](const std::string& msg) -> ConfigError {
        return {std::string(source) + ":" + std::to_string(lineno) + ": " + msg, lineno};
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
            line = line.substr(0, c);
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw error("unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (name == "system" || name == "controller" || name == "sim") {
                section = std::string(name);
            } else if (name == "classes") {
                scn.classes.push_back({});
                section = "classes." + std::to_string(scn.classes.size());
                where[section] = lineno;
            } else if (name.substr(0, 8) == "profile.") {
                std::size_t i = 0;
                try {
                    i = static_cast<std::size_t>(parse_uint(name.substr(8), "profile index"));
                } catch (const std::invalid_argument& e) {
                    throw error(e.what());
                }
                if (i < 1) throw error("profile indices start at 1");
                if (profile_line.size() < i) {
                    profile_line.resize(i, 0);
                    scn.profiles.resize(i);
                }
                if (profile_line[i - 1] != 0) {
                    throw error("duplicate section [profile." + std::to_string(i) + "]");
                }
                profile_line[i - 1] = lineno;
                section = "profile." + std::to_string(i);
                where[section] = lineno;
            } else {
                throw error("unknown section [" + std::string(name) + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw error("expected key = value");
        if (section.empty()) throw error("key outside of any section");
        const auto key = section + "." + std::string(trim(line.substr(0, eq)));
        if (where.count(key) != 0) throw error("duplicate key '" + key + "'");
        try {
            apply_setting(scn, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw error(e.what());
        }
        where[key] = lineno;
    }

    for (std::size_t i = 0; i < scn.classes.size(); ++i) {
        if (i >= profile_line.size() || profile_line[i] == 0) {
            throw ConfigError(std::string(source) + ": class " + std::to_string(i + 1) +
                              " has no [profile." + std::to_string(i + 1) + "] section");
        }
    }
    if (profile_line.size() > scn.classes.size()) {
        lineno = profile_line.back();
        throw error("[profile." + std::to_string(profile_line.size()) +
                    "] has no matching [classes] section");
    }
    validate_scenario(scn, where, source);
    return scn;
}

Scenario parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::string format_config(const Scenario& scn) {
    std::ostringstream out;
    const auto& sp = scn.sp;
    out << "[system]\n"
        << "mu_star = " << format_double(sp.mu_star) << "\n"
        << "q_c = " << format_double(sp.q_c) << "\n"
        << "q_max = " << format_double(sp.q_max) << "\n"
        << "p_min = " << format_double(sp.p_min) << "\n"
        << "p_max = " << format_double(sp.p_max) << "\n"
        << "nu_max = " << format_double(sp.nu_max) << "\n"
        << "lambda1 = " << format_double(sp.lambda1) << "\n"
        << "lambda2 = " << format_double(sp.lambda2) << "\n"
        << "theta_d = " << format_double(sp.theta_d) << "\n"
        << "T_d = " << format_double(sp.T_d) << "\n"
        << "T_I = " << format_double(sp.T_I) << "\n"
        << "dt = " << format_double(sp.dt) << "\n";
    for (const auto& c : scn.classes) {
        out << "\n[classes]\nr1 = " << format_double(c.r1) << "\nr2 = " << format_double(c.r2)
            << "\n";
    }
    for (std::size_t i = 0; i < scn.profiles.size(); ++i) {
        const auto& p = scn.profiles[i];
        out << "\n[profile." << i + 1 << "]\nkind = " << to_string(p.kind) << "\n";
        if (p.kind == DemandKind::piecewise) {
            out << "breakpoints = ";
            for (std::size_t j = 0; j < p.breakpoints.size(); ++j) {
                out << (j ? ", " : "") << format_double(p.breakpoints[j].first) << ":"
                    << format_double(p.breakpoints[j].second);
            }
            out << "\n";
        } else {
            out << "mean = " << format_double(p.mean) << "\n";
        }
        if (p.kind != DemandKind::constant) out << "std = " << format_double(p.std) << "\n";
    }
    const auto& c = scn.cfg;
    out << "\n[controller]\n"
        << "p_grid_size = " << c.p_grid_size << "\n"
        << "nu_grid_size = " << c.nu_grid_size << "\n"
        << "b1 = " << format_double(c.b1) << "\n"
        << "b2 = " << format_double(c.b2) << "\n"
        << "b3 = " << format_double(c.b3) << "\n"
        << "objective = " << to_string(c.objective) << "\n"
        << "margins = " << to_string(c.margins) << "\n";
    out << "\n[sim]\n"
        << "name = " << scn.name << "\n"
        << "t_end = " << format_double(scn.t_end) << "\n"
        << "seed = " << scn.seed << "\n"
        << "initial_price = " << format_double(scn.initial_price) << "\n"
        << "dropout_sensor_gain = " << format_double(scn.dropout_sensor_gain) << "\n"
        << "initial_q = " << format_double(scn.initial.q) << "\n"
        << "initial_alpha = " << format_double(scn.initial.alpha) << "\n";
    if (!scn.initial.x.empty()) {
        out << "initial_x = ";
        for (std::size_t i = 0; i < scn.initial.x.size(); ++i) {
            out << (i ? ", " : "") << format_double(scn.initial.x[i]);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace fairflow
