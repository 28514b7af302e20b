#pragma once

#include <deque>
#include <limits>
#include <stdexcept>

namespace fairflow {

/// Sliding-window average of the dropout-to-arrival ratio.
///
/// Samples are sample-and-hold segments: a sample (t_s, r_s) states that the
/// ratio averaged r_s over (t_prev, t_s], where t_prev is the previous
/// sample's timestamp (or the window origin for the first one). Queries past
/// the last sample extend the last ratio. The index at time t integrates
/// over [max(origin, t - T_I), t] and divides by min(t - origin, T_I).
class FairnessWindow {
public:
    /// History part of a one-window-ahead index, reusable across candidate ratios.
    struct Forecast {
        double history = 0.0;   // integral of recorded ratios inside the future window
        double ahead = 0.0;     // length of the predicted segment inside it
        double span = 0.0;      // normalization
        double at(double ratio) const { return span > 0 ? (history + ratio * ahead) / span : 0.0; }
        /// Same, given the integral of the ratio over the predicted segment.
        double with_integral(double integral) const {
            return span > 0 ? (history + integral) / span : 0.0;
        }
    };

    struct Sample {
        double t;
        double ratio;
    };

    explicit FairnessWindow(double horizon, double origin = 0.0, bool evict = true);

    /// ratio = dropout / K, or 0 when K == 0.
    void record(double t, double dropout, double K);
    void record_ratio(double t, double ratio);

    /// Unfairness index at time t; 0 when nothing was recorded.
    double index(double t) const;

    /// Index at t_now + T_d if the ratio equals `predicted_ratio` over
    /// (t_now, t_now + T_d]. Requires t_now >= last recorded timestamp.
    double predict(double t_now, double T_d, double predicted_ratio) const;
    Forecast forecast(double t_now, double T_d) const;

    const std::deque<Sample>& samples() const { return samples_; }
    double horizon() const { return horizon_; }
    double origin() const { return origin_; }
    double last_time() const { return samples_.empty() ? anchor_ : samples_.back().t; }
    bool empty() const { return samples_.empty(); }

private:
    double integral(double a, double b) const;

    double horizon_;
    double origin_;
    double anchor_;  // left end of the first retained segment
    bool evict_;
    std::deque<Sample> samples_;
};

struct RevenueAccumulator {
    double total = 0.0;
    double last_rate = 0.0;

    void step(double p, double alpha, double z, double dt);
};

}  // namespace fairflow
