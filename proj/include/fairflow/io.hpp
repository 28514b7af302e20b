#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairflow/sim.hpp"

namespace fairflow {

/// Column names of a trace with n classes. Per-class bound columns
/// (x_lo_i, x_hi_i, x_est_i) are present when n > 2.
std::vector<std::string> trace_header(std::size_t n_classes);

/// Header line plus one line per row; every number in shortest round-trip
/// form, so reading the file back reproduces the rows bit for bit.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows, std::size_t n_classes);
std::vector<TraceRow> read_trace_csv(std::istream& in);

/// RFC 4180 field quoting, only when needed.
std::string csv_field(std::string_view s);
/// Splits one CSV record (no embedded newlines).
std::vector<std::string> parse_csv_line(std::string_view line);

struct RunSummary {
    std::string policy;
    std::string status = "ok";
    double revenue = 0.0;            // cumulative at the last row
    double peak_I = 0.0;
    double frac_I_over = 0.0;        // time fraction with I > theta_d
    double peak_q = 0.0;
    double frac_q_over = 0.0;        // time fraction with q > q_max
    long fallback_epochs = 0;        // epochs decided by the infeasibility fallback
    double mean_price = 0.0;         // time averages
    double mean_alpha = 0.0;
    double duration = 0.0;
};

/// Pure function of the rows; each row stands for the step ending at its t.
RunSummary summarize(std::span<const TraceRow> rows, double theta_d, double q_max,
                     std::string policy, std::string status = "ok");

std::string_view to_string(RunStatus s);

}  // namespace fairflow
