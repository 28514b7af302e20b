#include "fairflow/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fairflow {

namespace {

constexpr double kVertexTol = 1e-12;

std::vector<double> rates_at(const ConsistencySet& cs) {
    std::vector<double> a(cs.classes.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = dropout_rate(cs.classes[i], cs.p_applied);
    return a;
}

}  // namespace

double ConsistencySet::residual(std::span<const double> w) const {
    if (z <= 0) return 0.0;
    return std::abs(mean_dropout(classes, w, p_applied) - d / z);
}

bool ConsistencySet::contains(std::span<const double> w, double tol) const {
    if (w.size() != classes.size()) return false;
    double sum = 0.0;
    for (double v : w) {
        if (v < -tol) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol && residual(w) <= tol;
}

std::vector<Proportions> vertices(const ConsistencySet& cs) {
    const std::size_t n = cs.classes.size();
    if (n == 0) throw EmptyConsistencySet("no user classes");
    std::vector<Proportions> out;

    auto unit = [n](std::size_t i) {
        Proportions e(n, 0.0);
        e[i] = 1.0;
        return e;
    };

    if (cs.z <= 0) {
        if (std::abs(cs.d) > kVertexTol) {
            throw EmptyConsistencySet("dropout " + std::to_string(cs.d) +
                                      " observed with an empty demand queue");
        }
        for (std::size_t i = 0; i < n; ++i) out.push_back(unit(i));
        return out;
    }

    const auto a = rates_at(cs);
    const double c = cs.d / cs.z;
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    if (c < *lo - kVertexTol || c > *hi + kVertexTol) {
        throw EmptyConsistencySet("observed dropout per queued user " + std::to_string(c) +
                                  " outside [" + std::to_string(*lo) + ", " +
                                  std::to_string(*hi) + "]");
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(a[i] - c) <= kVertexTol) out.push_back(unit(i));
    }
    // |a_i - a_j| <= 1, so an interior edge point has both weights > tol
    // exactly when neither endpoint is already a unit-vector vertex.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double gap = a[i] - a[j];
            if (std::abs(gap) <= kVertexTol) continue;
            const double wi = (c - a[j]) / gap;
            const double wj = 1.0 - wi;
            if (wi <= kVertexTol || wj <= kVertexTol) continue;
            Proportions v(n, 0.0);
            v[i] = wi;
            v[j] = wj;
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<FairnessWindow::Forecast> step_forecasts(const FairnessWindow& window, double t_now,
                                                     const SystemParams& sp) {
    std::vector<FairnessWindow::Forecast> out;
    for (double tau : window_step_times(sp, sp.T_d)) out.push_back(window.forecast(t_now, tau));
    return out;
}

double peak_predicted_index(std::span<const FairnessWindow::Forecast> forecasts,
                            const QueueResponse& response, std::span<const double> w,
                            double z, double K) {
    if (!(K > 0)) {
        double peak = 0.0;
        for (const auto& f : forecasts) peak = std::max(peak, f.with_integral(0.0));
        return peak;
    }
    const std::size_t n = response.dropout.size();
    auto base = [&](std::size_t k) {
        double b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            b += response.dropout[i] * w[i] * z / K * response.decay[i][k];
        }
        return b;
    };
    double peak = 0.0;
    double base_int = 0.0;
    double prev_t = 0.0;
    double prev = base(0);
    for (std::size_t k = 0; k < response.times.size(); ++k) {
        const double next = base(k + 1);
        base_int += 0.5 * (prev + next) * (response.times[k] - prev_t);
        prev_t = response.times[k];
        prev = next;
        peak = std::max(peak, forecasts[k].with_integral(base_int + response.worst_fill[k]));
    }
    return peak;
}

std::string_view to_string(MarginMode m) {
    switch (m) {
        case MarginMode::instantaneous: return "instantaneous";
        case MarginMode::window_end: return "window_end";
        case MarginMode::window_peak: return "window_peak";
    }
    return "?";
}

MarginMode parse_margin_mode(std::string_view s) {
    if (s == "instantaneous") return MarginMode::instantaneous;
    if (s == "window_end") return MarginMode::window_end;
    if (s == "window_peak") return MarginMode::window_peak;
    throw std::invalid_argument("unknown margin mode '" + std::string(s) + "'");
}

MarginEvaluator::MarginEvaluator(const ExtendedState& s, double K, const SystemParams& sp,
                                 std::span<const ClassParams> classes,
                                 const FairnessWindow& window, double t_now, MarginMode mode)
    : s_(s), K_(K), sp_(sp), classes_(classes.begin(), classes.end()), mode_(mode),
      end_(window.forecast(t_now, sp.T_d)) {
    if (mode_ == MarginMode::window_peak) {
        times_ = window_step_times(sp, sp.T_d);
        steps_ = step_forecasts(window, t_now, sp);
    }
}

Margins MarginEvaluator::eval(const Control& ctrl, std::span<const double> w,
                              const QueueResponse* response,
                              const StatePrediction* predicted) const {
    Margins m;
    if (mode_ == MarginMode::instantaneous) {
        const double ratio = K_ > 0 ? mean_dropout(classes_, w, ctrl.p) * s_.z / K_ : 0.0;
        m.eta1 = eta1(s_, ctrl, w, K_, sp_, classes_);
        m.eta2 = eta2(end_.at(ratio), sp_.theta_d);
        return m;
    }
    const auto pred = predicted != nullptr
                          ? *predicted
                          : predict_state(s_, ctrl, w, K_, sp_, classes_, sp_.T_d);
    m.eta1 = eta1(pred.state, ctrl, w, K_, sp_, classes_);
    if (mode_ == MarginMode::window_end) {
        m.eta2 = eta2(end_.at(pred.mean_ratio), sp_.theta_d);
    } else {
        m.eta2 = eta2(peak_predicted_index(steps_, *response, w, s_.z, K_), sp_.theta_d);
    }
    return m;
}

Margins MarginEvaluator::at(const Control& ctrl, std::span<const double> w) const {
    if (mode_ != MarginMode::window_peak) return eval(ctrl, w, nullptr, nullptr);
    queue_response(scratch_, s_.alpha, ctrl, classes_, times_);
    return eval(ctrl, w, &scratch_, nullptr);
}

Margins MarginEvaluator::worst(const Control& ctrl, std::span<const Proportions> verts,
                               std::span<const StatePrediction> predicted) const {
    if (verts.empty()) throw EmptyConsistencySet("no vertices to evaluate");
    if (!predicted.empty() && predicted.size() != verts.size()) {
        throw std::invalid_argument("one prediction per vertex expected");
    }
    if (mode_ == MarginMode::window_peak) queue_response(scratch_, s_.alpha, ctrl, classes_, times_);
    Margins worst{std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
    for (std::size_t v = 0; v < verts.size(); ++v) {
        const auto m = eval(ctrl, verts[v], &scratch_, predicted.empty() ? nullptr : &predicted[v]);
        worst.eta1 = std::min(worst.eta1, m.eta1);
        worst.eta2 = std::min(worst.eta2, m.eta2);
    }
    return worst;
}

Margins margins_at(const ExtendedState& s, const Control& ctrl, std::span<const double> w,
                   double K, const SystemParams& sp, std::span<const ClassParams> classes,
                   const FairnessWindow& window, double t_now, MarginMode mode) {
    return MarginEvaluator(s, K, sp, classes, window, t_now, mode).at(ctrl, w);
}

Margins worst_case_margins(const ExtendedState& s, const Control& ctrl,
                           std::span<const Proportions> verts, double K,
                           const SystemParams& sp, std::span<const ClassParams> classes,
                           const FairnessWindow& window, double t_now, MarginMode mode) {
    return MarginEvaluator(s, K, sp, classes, window, t_now, mode).worst(ctrl, verts);
}

double worst_case_eta1(const ExtendedState& s, const Control& ctrl, const ConsistencySet& cs,
                       double K, const SystemParams& sp, MarginMode mode) {
    // eta1 never looks at the fairness window
    const FairnessWindow unused(sp.T_I);
    const auto verts = vertices(cs);
    return worst_case_margins(s, ctrl, verts, K, sp, cs.classes, unused, 0.0, mode).eta1;
}

double worst_case_eta2(const FairnessWindow& window, const ExtendedState& s,
                       const Control& ctrl, const ConsistencySet& cs, double K,
                       const SystemParams& sp, double t_now, MarginMode mode) {
    const auto verts = vertices(cs);
    return worst_case_margins(s, ctrl, verts, K, sp, cs.classes, window, t_now, mode).eta2;
}

Proportions vertex_mean(std::span<const Proportions> verts) {
    if (verts.empty()) return {};
    Proportions mean(verts.front().size(), 0.0);
    for (const auto& v : verts) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
    }
    for (double& m : mean) m /= static_cast<double>(verts.size());
    return mean;
}

std::vector<ClassInterval> state_bounds(const ConsistencySet& cs) {
    const auto verts = vertices(cs);
    const auto mean = vertex_mean(verts);
    std::vector<ClassInterval> out(cs.classes.size());
    const double z = std::max(cs.z, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& v : verts) {
            lo = std::min(lo, v[i]);
            hi = std::max(hi, v[i]);
        }
        out[i] = {z * lo, z * hi, z * mean[i]};
    }
    return out;
}

}  // namespace fairflow
