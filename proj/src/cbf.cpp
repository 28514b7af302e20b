#include "fairflow/cbf.hpp"

#include <algorithm>
#include <cmath>

namespace fairflow {

LieBundle lie_bundle(const ExtendedState& s, std::span<const double> w, double K,
                     const SystemParams& sp, std::span<const ClassParams> classes) {
    double wr1 = 0.0;
    double wr2 = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        wr1 += w[i] * classes[i].r1;
        wr2 += w[i] * classes[i].r2;
    }
    const double mu = service_rate(sp, s.q);
    const double inflow = s.alpha * s.z;

    LieBundle lb;
    lb.b = sp.q_max - s.q;
    lb.Lfb = -inflow + mu;
    lb.Lf2b = (inflow - mu) * service_rate_slope(sp, s.q) -
              s.alpha * (K - s.z * wr2 - inflow);
    lb.LgpLfb = inflow * wr1;
    lb.LgnuLfb = -s.z;
    return lb;
}

double eta1(const LieBundle& lb, const Control& ctrl, const SystemParams& sp) {
    return lb.Lf2b + lb.LgpLfb * ctrl.p + lb.LgnuLfb * ctrl.nu +
           sp.lambda2 * (lb.Lfb + sp.lambda1 * lb.b);
}

double eta1(const ExtendedState& s, const Control& ctrl, std::span<const double> w,
            double K, const SystemParams& sp, std::span<const ClassParams> classes) {
    return eta1(lie_bundle(s, w, K, sp, classes), ctrl, sp);
}

namespace {

struct Rates {
    double q, z, alpha;
};

inline Rates rates(const ExtendedState& s, double nu, double dropout, double K,
                   const SystemParams& sp) {
    return {s.alpha * s.z - service_rate(sp, s.q), K - dropout * s.z - s.alpha * s.z, nu};
}

inline ExtendedState advance(const ExtendedState& s, const Rates& r, double h) {
    return {s.q + h * r.q, s.z + h * r.z, s.alpha + h * r.alpha};
}

}  // namespace

ExtendedState aggregate_rk4_step(const ExtendedState& s, double nu, double dropout, double K,
                                 const SystemParams& sp, double h) {
    const Rates k1 = rates(s, nu, dropout, K, sp);
    const Rates k2 = rates(advance(s, k1, h / 2), nu, dropout, K, sp);
    const Rates k3 = rates(advance(s, k2, h / 2), nu, dropout, K, sp);
    const Rates k4 = rates(advance(s, k3, h), nu, dropout, K, sp);
    return {s.q + h / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
            s.z + h / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z),
            s.alpha + h / 6 * (k1.alpha + 2 * k2.alpha + 2 * k3.alpha + k4.alpha)};
}

StatePrediction predict_state(const ExtendedState& s, const Control& ctrl,
                              std::span<const double> w, double K, const SystemParams& sp,
                              std::span<const ClassParams> classes, double horizon) {
    StatePrediction out{s, 0.0};
    if (!(horizon > 0)) return out;

    const double dropout = mean_dropout(classes, w, ctrl.p);
    const double inv_k = K > 0 ? 1.0 / K : 0.0;
    const auto steps = static_cast<long>(std::ceil(horizon / sp.dt - 1e-9));

    ExtendedState cur = s;
    double ratio_prev = dropout * cur.z * inv_k;
    double weighted = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double h = std::min(sp.dt, horizon - static_cast<double>(k) * sp.dt);
        cur = aggregate_rk4_step(cur, ctrl.nu, dropout, K, sp, h);
        cur.q = std::max(cur.q, 0.0);
        cur.z = std::max(cur.z, 0.0);
        cur.alpha = std::clamp(cur.alpha, 0.0, 1.0);
        const double ratio = dropout * cur.z * inv_k;
        weighted += 0.5 * (ratio_prev + ratio) * h;
        ratio_prev = ratio;
    }
    out.state = cur;
    out.mean_ratio = weighted / horizon;
    return out;
}

namespace {

// RK4 step of x' = a - (f + alpha(t)) x with alpha(t) = alpha + nu * t.
inline double queue_step(double x, double a, double f, double alpha, double nu, double h) {
    const double c0 = f + alpha;
    const double c1 = f + alpha + nu * h / 2;
    const double c2 = f + alpha + nu * h;
    const double k1 = a - c0 * x;
    const double k2 = a - c1 * (x + h / 2 * k1);
    const double k3 = a - c1 * (x + h / 2 * k2);
    const double k4 = a - c2 * (x + h * k3);
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

std::vector<double> window_step_times(const SystemParams& sp, double horizon) {
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / sp.dt - 1e-9));
    std::vector<double> times(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        times[k] = k + 1 == steps ? horizon : static_cast<double>(k + 1) * sp.dt;
    }
    return times;
}

QueueResponse queue_response(double alpha0, const Control& ctrl, const SystemParams& sp,
                             std::span<const ClassParams> classes, double horizon) {
    QueueResponse r;
    const auto times = window_step_times(sp, horizon);
    queue_response(r, alpha0, ctrl, classes, times);
    return r;
}

void queue_response(QueueResponse& r, double alpha0, const Control& ctrl,
                    std::span<const ClassParams> classes, std::span<const double> times) {
    const std::size_t n = classes.size();
    const std::size_t steps = times.size();
    r.times.assign(times.begin(), times.end());
    r.dropout.resize(n);
    r.decay.resize(n);
    r.fill.resize(n);
    r.worst_fill.assign(steps, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const double f = dropout_rate(classes[i], ctrl.p);
        r.dropout[i] = f;
        auto& dec = r.decay[i];
        auto& fil = r.fill[i];
        dec.resize(steps + 1);
        fil.resize(steps + 1);
        dec[0] = 1.0;
        fil[0] = 0.0;
        if (f == 0.0) {
            // carries no weight in the ratio; the queues themselves are not needed
            std::fill(dec.begin() + 1, dec.end(), 0.0);
            std::fill(fil.begin() + 1, fil.end(), 0.0);
            continue;
        }
        double a = alpha0;
        double prev_t = 0.0;
        double extra = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double h = times[k] - prev_t;
            prev_t = times[k];
            dec[k + 1] = queue_step(dec[k], 0.0, f, a, ctrl.nu, h);
            fil[k + 1] = queue_step(fil[k], 1.0, f, a, ctrl.nu, h);
            a = std::clamp(a + ctrl.nu * h, 0.0, 1.0);
            extra += 0.5 * f * (fil[k] + fil[k + 1]) * h;
            r.worst_fill[k] = std::max(r.worst_fill[k], extra);
        }
    }
}

std::vector<double> worst_ratio_integrals(const QueueResponse& r, std::span<const double> w,
                                          double z, double K) {
    const std::size_t steps = r.times.size();
    std::vector<double> out(steps, 0.0);
    if (!(K > 0)) return out;

    const std::size_t n = r.dropout.size();
    // ratio = base(t) + f_j * fill_j(t) when every arrival joins class j
    auto base = [&](std::size_t k) {
        double b = 0.0;
        for (std::size_t i = 0; i < n; ++i) b += r.dropout[i] * w[i] * z / K * r.decay[i][k];
        return b;
    };
    double base_int = 0.0;
    double prev_t = 0.0;
    double prev = base(0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double next = base(k + 1);
        base_int += 0.5 * (prev + next) * (r.times[k] - prev_t);
        prev_t = r.times[k];
        prev = next;
        out[k] = base_int + r.worst_fill[k];
    }
    return out;
}

}  // namespace fairflow
