#include "fairflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fairflow {

FairnessWindow::FairnessWindow(double horizon, double origin, bool evict)
    : horizon_(horizon), origin_(origin), anchor_(origin), evict_(evict) {
    if (!(horizon > 0)) throw std::invalid_argument("fairness horizon must be > 0");
}

void FairnessWindow::record(double t, double dropout, double K) {
    record_ratio(t, K > 0 ? dropout / K : 0.0);
}

void FairnessWindow::record_ratio(double t, double ratio) {
    if (!(t > last_time())) {
        throw std::invalid_argument("fairness sample at t=" + std::to_string(t) +
                                    " is not after the last sample");
    }
    if (!(ratio >= 0) || !std::isfinite(ratio)) {
        throw std::invalid_argument("fairness ratio must be finite and >= 0");
    }
    samples_.push_back({t, ratio});
    if (!evict_) return;
    const double cutoff = t - horizon_;
    while (!samples_.empty() && samples_.front().t < cutoff) {
        anchor_ = samples_.front().t;
        samples_.pop_front();
    }
}

double FairnessWindow::integral(double a, double b) const {
    if (samples_.empty() || b <= a) return 0.0;
    double acc = 0.0;
    double left = anchor_;
    for (const auto& s : samples_) {
        if (left >= b) break;
        const double lo = std::max(left, a);
        const double hi = std::min(s.t, b);
        if (hi > lo) acc += s.ratio * (hi - lo);
        left = s.t;
    }
    // hold the last ratio past the final sample
    if (b > left) acc += samples_.back().ratio * (b - std::max(left, a));
    return acc;
}

double FairnessWindow::index(double t) const {
    if (samples_.empty()) return 0.0;
    const double span = std::min(t - origin_, horizon_);
    if (!(span > 0)) return 0.0;
    const double lo = std::max(origin_, t - horizon_);
    return integral(lo, t) / span;
}

FairnessWindow::Forecast FairnessWindow::forecast(double t_now, double T_d) const {
    if (t_now < last_time()) {
        throw std::invalid_argument("prediction must start at or after the last sample");
    }
    const double t_end = t_now + T_d;
    Forecast f;
    f.span = std::min(t_end - origin_, horizon_);
    if (!(f.span > 0)) return {};
    const double lo = std::max(origin_, t_end - horizon_);
    f.history = lo < t_now ? integral(lo, t_now) : 0.0;
    f.ahead = t_end - std::max(lo, t_now);
    return f;
}

double FairnessWindow::predict(double t_now, double T_d, double predicted_ratio) const {
    return forecast(t_now, T_d).at(predicted_ratio);
}

void RevenueAccumulator::step(double p, double alpha, double z, double dt) {
    last_rate = p * alpha * z;
    total += last_rate * dt;
}

}  // namespace fairflow
