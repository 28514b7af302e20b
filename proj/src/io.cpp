#include "fairflow/io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "fairflow/text.hpp"

namespace fairflow {

std::vector<std::string> trace_header(std::size_t n) {
    std::vector<std::string> h{"t", "epoch"};
    for (std::size_t i = 1; i <= n; ++i) h.push_back("K_" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) h.push_back("x_" + std::to_string(i));
    for (const char* c : {"z", "q", "alpha", "p", "nu", "mu", "dropout", "I", "revenue_rate",
                          "revenue", "eta1_star", "eta2_star", "feasible"}) {
        h.emplace_back(c);
    }
    if (n > 2) {
        for (std::size_t i = 1; i <= n; ++i) {
            const auto s = std::to_string(i);
            h.push_back("x_lo_" + s);
            h.push_back("x_hi_" + s);
            h.push_back("x_est_" + s);
        }
    }
    return h;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> parse_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
    out.push_back(std::move(cur));
    return out;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows, std::size_t n) {
    const auto header = trace_header(n);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
    out << "\n";
    std::string line;
    for (const auto& r : rows) {
        if (r.K.size() != n || r.x.size() != n || (n > 2 && r.bounds.size() != n)) {
            throw std::invalid_argument("trace row does not match the class count");
        }
        line.clear();
        auto put = [&line](double v) {
            line += ',';
            line += format_double(v);
        };
        line += format_double(r.t);
        line += ',';
        line += std::to_string(r.epoch);
        for (double v : r.K) put(v);
        for (double v : r.x) put(v);
        for (double v : {r.z, r.q, r.alpha, r.p, r.nu, r.mu, r.dropout, r.I, r.revenue_rate,
                         r.revenue, r.eta1_star, r.eta2_star}) {
            put(v);
        }
        line += r.feasible ? ",1" : ",0";
        if (n > 2) {
            for (const auto& b : r.bounds) {
                put(b.lo);
                put(b.hi);
                put(b.estimate);
            }
        }
        out << line << '\n';
    }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty trace file");
    const auto header = parse_csv_line(line);
    const auto n = static_cast<std::size_t>(
        std::count_if(header.begin(), header.end(), [](const std::string& h) {
            return h.rfind("K_", 0) == 0;
        }));
    if (header != trace_header(n)) throw std::invalid_argument("unexpected trace header");

    std::vector<TraceRow> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = parse_csv_line(line);
        if (f.size() != header.size()) {
            throw std::invalid_argument("trace line " + std::to_string(lineno) + " has " +
                                        std::to_string(f.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        }
        std::size_t c = 0;
        auto next = [&]() {
            const std::size_t k = c++;
            return parse_double(f[k], header[k]);
        };
        TraceRow r;
        r.t = next();
        r.epoch = parse_int(f[c++], "epoch");
        r.K.resize(n);
        r.x.resize(n);
        for (auto& v : r.K) v = next();
        for (auto& v : r.x) v = next();
        for (double* v : {&r.z, &r.q, &r.alpha, &r.p, &r.nu, &r.mu, &r.dropout, &r.I,
                          &r.revenue_rate, &r.revenue, &r.eta1_star, &r.eta2_star}) {
            *v = next();
        }
        const auto& feas = f[c++];
        if (feas != "0" && feas != "1") throw std::invalid_argument("feasible must be 0 or 1");
        r.feasible = feas == "1";
        if (n > 2) {
            r.bounds.resize(n);
            for (auto& b : r.bounds) {
                b.lo = next();
                b.hi = next();
                b.estimate = next();
            }
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

RunSummary summarize(std::span<const TraceRow> rows, double theta_d, double q_max,
                     std::string policy, std::string status) {
    RunSummary s;
    s.policy = std::move(policy);
    s.status = std::move(status);
    if (rows.empty()) return s;

    double prev_t = 0.0;
    double over_I = 0.0;
    double over_q = 0.0;
    double price = 0.0;
    double alpha = 0.0;
    long last_fallback = -1;
    for (const auto& r : rows) {
        const double h = r.t - prev_t;
        prev_t = r.t;
        s.peak_I = std::max(s.peak_I, r.I);
        s.peak_q = std::max(s.peak_q, r.q);
        if (r.I > theta_d) over_I += h;
        if (r.q > q_max) over_q += h;
        price += r.p * h;
        alpha += r.alpha * h;
        if (!r.feasible && r.epoch != last_fallback) {
            ++s.fallback_epochs;
            last_fallback = r.epoch;
        }
    }
    s.duration = rows.back().t;
    s.revenue = rows.back().revenue;
    if (s.duration > 0) {
        s.frac_I_over = over_I / s.duration;
        s.frac_q_over = over_q / s.duration;
        s.mean_price = price / s.duration;
        s.mean_alpha = alpha / s.duration;
    }
    return s;
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::controller_fault: return "controller_fault";
        case RunStatus::numeric_fault: return "numeric_fault";
    }
    return "?";
}

}  // namespace fairflow
