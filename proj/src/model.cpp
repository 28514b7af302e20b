#include "fairflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairflow {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ModelError(what);
}

}  // namespace

void SystemParams::validate() const {
    require(std::isfinite(mu_star) && mu_star > 0, "mu_star must be > 0");
    require(std::isfinite(q_c) && q_c > 0, "q_c must be > 0");
    require(std::isfinite(q_max) && q_max > 0, "q_max must be > 0");
    require(std::isfinite(p_min) && p_min >= 0, "p_min must be >= 0");
    require(std::isfinite(p_max) && p_min < p_max, "p_min must be < p_max");
    require(std::isfinite(nu_max) && nu_max > 0, "nu_max must be > 0");
    require(std::isfinite(lambda1) && lambda1 > 0, "lambda1 must be > 0");
    require(std::isfinite(lambda2) && lambda2 > 0, "lambda2 must be > 0");
    require(theta_d >= 0 && theta_d <= 1, "theta_d out of [0,1]");
    require(std::isfinite(T_d) && T_d > 0, "T_d must be > 0");
    require(std::isfinite(dt) && dt > 0 && dt <= T_d, "dt must be in (0, T_d]");
    require(std::isfinite(T_I) && T_I >= T_d, "T_I must be >= T_d");
}

double HiddenState::z() const {
    return std::accumulate(x.begin(), x.end(), 0.0);
}

double dropout_rate(const ClassParams& c, double p) {
    return std::clamp(c.r1 * p + c.r2, 0.0, 1.0);
}

double service_rate(const SystemParams& sp, double q) {
    if (q <= sp.q_c) return sp.mu_star / sp.q_c * q;
    return sp.mu_star;
}

double service_rate_slope(const SystemParams& sp, double q) {
    if (q < sp.q_c) return sp.mu_star / sp.q_c;
    return 0.0;
}

double mean_dropout(std::span<const ClassParams> classes, std::span<const double> w,
                    double p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) acc += dropout_rate(classes[i], p) * w[i];
    return acc;
}

double aggregate_dropout(std::span<const ClassParams> classes, std::span<const double> x,
                         double p) {
    return mean_dropout(classes, x, p);
}

void check_simplex(std::span<const double> w, std::size_t n, double tol) {
    if (w.size() != n) {
        throw ModelError("proportion vector has " + std::to_string(w.size()) +
                         " entries, expected " + std::to_string(n));
    }
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= -tol)) throw ModelError("proportion vector has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol) throw ModelError("proportion vector does not sum to 1");
}

HiddenState hidden_derivative(const HiddenState& s, const Control& ctrl,
                              std::span<const double> arrivals,
                              const SystemParams& sp,
                              std::span<const ClassParams> classes) {
    const std::size_t n = classes.size();
    if (s.x.size() != n || arrivals.size() != n) {
        throw ModelError("dimension mismatch: " + std::to_string(s.x.size()) + " queues, " +
                         std::to_string(arrivals.size()) + " arrival rates, " +
                         std::to_string(n) + " classes");
    }
    HiddenState ds;
    ds.x.resize(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = dropout_rate(classes[i], ctrl.p);
        ds.x[i] = arrivals[i] - f * s.x[i] - s.alpha * s.x[i];
        z += s.x[i];
    }
    ds.q = s.alpha * z - service_rate(sp, s.q);
    ds.alpha = ctrl.nu;
    return ds;
}

double aggregate_derivative(double z, double alpha, std::span<const double> w,
                            const Control& ctrl, double K,
                            std::span<const ClassParams> classes) {
    check_simplex(w, classes.size());
    return K - z * mean_dropout(classes, w, ctrl.p) - alpha * z;
}

}  // namespace fairflow
