#include "fairflow/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fairflow {

std::string_view to_string(DemandKind k) {
    switch (k) {
        case DemandKind::constant: return "constant";
        case DemandKind::clipped_gaussian: return "clipped_gaussian";
        case DemandKind::piecewise: return "piecewise";
    }
    return "constant";
}

DemandKind parse_demand_kind(std::string_view s) {
    if (s == "constant") return DemandKind::constant;
    if (s == "clipped_gaussian") return DemandKind::clipped_gaussian;
    if (s == "piecewise") return DemandKind::piecewise;
    throw std::invalid_argument("unknown demand kind '" + std::string(s) + "'");
}

DemandProfile DemandProfile::constant(double mean) {
    DemandProfile p;
    p.mean = mean;
    return p;
}

DemandProfile DemandProfile::gaussian(double mean, double std) {
    DemandProfile p;
    p.kind = DemandKind::clipped_gaussian;
    p.mean = mean;
    p.std = std;
    return p;
}

DemandProfile DemandProfile::piecewise(std::vector<std::pair<double, double>> pts, double std) {
    DemandProfile p;
    p.kind = DemandKind::piecewise;
    p.breakpoints = std::move(pts);
    p.std = std;
    if (!p.breakpoints.empty()) p.mean = p.breakpoints.front().second;
    return p;
}

void DemandProfile::validate() const {
    if (!(mean >= 0) || !std::isfinite(mean)) throw std::invalid_argument("mean must be >= 0");
    if (!(std >= 0) || !std::isfinite(std)) throw std::invalid_argument("std must be >= 0");
    if (kind != DemandKind::piecewise) return;
    if (breakpoints.empty()) throw std::invalid_argument("piecewise profile needs breakpoints");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i].second >= 0)) {
            throw std::invalid_argument("breakpoint means must be >= 0");
        }
        if (i > 0 && breakpoints[i].first < breakpoints[i - 1].first) {
            throw std::invalid_argument("breakpoints must be time-sorted");
        }
    }
}

double DemandProfile::mean_at(double t) const {
    if (kind != DemandKind::piecewise) return mean;
    const auto& bp = breakpoints;
    // last breakpoint with time <= t
    auto it = std::upper_bound(bp.begin(), bp.end(), t,
                               [](double v, const auto& pt) { return v < pt.first; });
    if (it == bp.begin()) return bp.front().second;
    const auto& left = *std::prev(it);
    if (it == bp.end()) return left.second;
    const auto& right = *it;
    const double frac = (t - left.first) / (right.first - left.first);
    return left.second + frac * (right.second - left.second);
}

double sample_arrivals(const DemandProfile& profile, double t, ArrivalRng& rng) {
    switch (profile.kind) {
        case DemandKind::constant:
            return profile.mean;
        case DemandKind::clipped_gaussian:
        case DemandKind::piecewise: {
            const double xi = rng.standard_normal();
            return std::max(0.0, profile.mean_at(t) + profile.std * xi);
        }
    }
    return profile.mean;
}

void Scenario::validate() const {
    if (classes.empty()) throw std::invalid_argument("scenario needs at least one class");
    if (profiles.size() != classes.size()) {
        throw std::invalid_argument("scenario has " + std::to_string(profiles.size()) +
                                    " demand profiles for " + std::to_string(classes.size()) +
                                    " classes");
    }
    for (const auto& c : classes) {
        if (!(c.r1 >= 0) || !(c.r2 >= 0)) throw std::invalid_argument("r1, r2 must be >= 0");
    }
    for (const auto& p : profiles) p.validate();
    sp.validate();
    cfg.validate();
    if (!(t_end > 0)) throw std::invalid_argument("t_end must be > 0");
    const double windows = t_end / sp.T_d;
    if (std::abs(windows - std::round(windows)) > 1e-9 * std::max(1.0, windows)) {
        throw std::invalid_argument("t_end must be an integer multiple of T_d");
    }
    if (!initial.x.empty() && initial.x.size() != classes.size()) {
        throw std::invalid_argument("initial state has the wrong number of queues");
    }
    for (double v : initial.x) {
        if (!(v >= 0)) throw std::invalid_argument("initial queues must be >= 0");
    }
    if (!(dropout_sensor_gain >= 0) || !std::isfinite(dropout_sensor_gain)) {
        throw std::invalid_argument("dropout_sensor_gain must be >= 0");
    }
    if (!(initial.q >= 0)) throw std::invalid_argument("initial q must be >= 0");
    if (!(initial.alpha >= 0 && initial.alpha <= 1)) {
        throw std::invalid_argument("initial alpha out of [0,1]");
    }
}

namespace {

HiddenState axpy(const HiddenState& s, const HiddenState& ds, double h) {
    HiddenState out;
    out.x.resize(s.x.size());
    for (std::size_t i = 0; i < s.x.size(); ++i) out.x[i] = s.x[i] + h * ds.x[i];
    out.q = s.q + h * ds.q;
    out.alpha = s.alpha + h * ds.alpha;
    return out;
}

bool finite(const HiddenState& s) {
    return std::isfinite(s.q) && std::isfinite(s.alpha) &&
           std::all_of(s.x.begin(), s.x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

HiddenState integrate_step(const HiddenState& s, const Control& ctrl,
                           std::span<const double> arrivals, const SystemParams& sp,
                           std::span<const ClassParams> classes, double dt) {
    const auto k1 = hidden_derivative(s, ctrl, arrivals, sp, classes);
    const auto k2 = hidden_derivative(axpy(s, k1, dt / 2), ctrl, arrivals, sp, classes);
    const auto k3 = hidden_derivative(axpy(s, k2, dt / 2), ctrl, arrivals, sp, classes);
    const auto k4 = hidden_derivative(axpy(s, k3, dt), ctrl, arrivals, sp, classes);

    HiddenState out;
    out.x.resize(s.x.size());
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        out.x[i] = s.x[i] + dt / 6 * (k1.x[i] + 2 * k2.x[i] + 2 * k3.x[i] + k4.x[i]);
    }
    out.q = s.q + dt / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    out.alpha = s.alpha + dt / 6 * (k1.alpha + 2 * k2.alpha + 2 * k3.alpha + k4.alpha);
    if (!finite(out)) throw NumericFault("non-finite plant state");

    for (double& v : out.x) v = std::max(v, 0.0);
    out.q = std::max(out.q, 0.0);
    out.alpha = std::clamp(out.alpha, 0.0, 1.0);
    return out;
}

RunResult run(const Scenario& scn, const RunOptions& opts) {
    scn.validate();
    const SystemParams& sp = scn.sp;
    const std::size_t n = scn.num_classes();
    const std::span<const ClassParams> classes(scn.classes);

    RunResult result;
    result.policy = scn.cfg.policy;

    HiddenState s = scn.initial;
    if (s.x.empty()) s.x.assign(n, 0.0);

    FairnessWindow window(sp.T_I, 0.0);
    RevenueAccumulator revenue;
    ArrivalRng rng(scn.seed);
    double p_prev = scn.initial_price;

    const auto epochs = static_cast<long>(std::llround(scn.t_end / sp.T_d));
    const auto steps = static_cast<long>(std::ceil(sp.T_d / sp.dt - 1e-9));
    result.rows.reserve(static_cast<std::size_t>(epochs * steps));

    std::vector<double> arrivals(n);
    for (long k = 0; k < epochs; ++k) {
        const double t_k = static_cast<double>(k) * sp.T_d;
        const double t_next = static_cast<double>(k + 1) * sp.T_d;
        for (std::size_t i = 0; i < n; ++i) arrivals[i] = sample_arrivals(scn.profiles[i], t_k, rng);

        Observation obs;
        obs.z = s.z();
        obs.q = s.q;
        obs.alpha = s.alpha;
        obs.K = std::accumulate(arrivals.begin(), arrivals.end(), 0.0);
        obs.d = scn.dropout_sensor_gain * aggregate_dropout(classes, s.x, p_prev);
        obs.p_applied = p_prev;
        obs.t = t_k;
        const ConsistencySet cs{obs.z, obs.d, obs.p_applied, scn.classes};

        Decision dec;
        std::vector<ClassInterval> bounds;
        try {
            dec = scn.cfg.policy == Policy::robust_fair
                      ? robust_fair_decide(obs, window, obs.K, sp, classes, scn.cfg)
                      : surge_decide(obs, sp, scn.cfg);
            if (n > 2) bounds = state_bounds(cs);
        } catch (const EmptyConsistencySet& e) {
            result.status = RunStatus::controller_fault;
            result.message = "t=" + std::to_string(t_k) + ": " + e.what();
            return result;
        }

        if (opts.on_epoch) {
            EpochRecord rec;
            rec.epoch = k;
            rec.obs = obs;
            rec.truth = &s;
            rec.consistency = &cs;
            rec.window = &window;
            rec.arrivals = arrivals;
            rec.decision = dec;
            opts.on_epoch(rec);
        }

        const Control ctrl{dec.p, dec.nu};
        const double inv_k = obs.K > 0 ? 1.0 / obs.K : 0.0;
        double ratio_prev = aggregate_dropout(classes, s.x, ctrl.p) * inv_k;
        for (long j = 0; j < steps; ++j) {
            const double h = std::min(sp.dt, sp.T_d - static_cast<double>(j) * sp.dt);
            const double t = j + 1 == steps ? t_next : t_k + static_cast<double>(j + 1) * sp.dt;
            try {
                s = integrate_step(s, ctrl, arrivals, sp, classes, h);
            } catch (const NumericFault& e) {
                result.status = RunStatus::numeric_fault;
                result.message = "t=" + std::to_string(t) + ": " + e.what();
                return result;
            }
            const double d_now = aggregate_dropout(classes, s.x, ctrl.p);
            const double ratio = d_now * inv_k;
            window.record_ratio(t, 0.5 * (ratio_prev + ratio));
            ratio_prev = ratio;

            TraceRow row;
            row.t = t;
            row.epoch = k;
            row.K = arrivals;
            row.x = s.x;
            row.z = s.z();
            row.q = s.q;
            row.alpha = s.alpha;
            row.p = ctrl.p;
            row.nu = ctrl.nu;
            row.mu = service_rate(sp, s.q);
            row.dropout = d_now;
            row.I = window.index(t);
            revenue.step(ctrl.p, s.alpha, row.z, h);
            row.revenue_rate = revenue.last_rate;
            row.revenue = revenue.total;
            row.eta1_star = dec.eta1_star;
            row.eta2_star = dec.eta2_star;
            row.feasible = dec.feasible;
            row.bounds = bounds;
            result.rows.push_back(std::move(row));
        }
        p_prev = ctrl.p;
    }
    return result;
}

namespace {

Scenario two_class(std::string name, double k1, double k2) {
    Scenario s;
    s.name = std::move(name);
    s.classes = {{0.05, 0.0}, {0.0, 0.0}};
    s.profiles = {DemandProfile::gaussian(k1, 0.5 * k1), DemandProfile::gaussian(k2, 0.5 * k2)};
    return s;
}

}  // namespace

std::vector<Preset> presets() {
    std::vector<Preset> out;

    out.push_back({"light", "two classes, mean arrivals 4 (elastic) and 2 (inelastic)", "",
                   {{0.0, two_class("light", 4.0, 2.0)}}});
    out.push_back({"heavy", "two classes, mean arrivals 7 (elastic) and 4 (inelastic)", "",
                   {{0.0, two_class("heavy", 7.0, 4.0)}}});

    {
        Scenario s = two_class("dynamic", 4.0, 2.0);
        s.profiles = {
            DemandProfile::piecewise({{0, 4}, {60, 4}, {60, 7}, {180, 7}, {180, 4}}, 2.0),
            DemandProfile::piecewise({{0, 2}, {60, 2}, {60, 8}, {100, 8}, {140, 2}}, 1.0),
        };
        out.push_back({"dynamic", "time-varying demand: inelastic surge at t=60, elastic "
                                  "demand elevated over [60, 180]",
                       "", {{0.0, s}}});
    }

    {
        Preset p{"theta_sweep", "heavy demand with theta_d in {0.2, 0.4, 0.6}", "theta_d", {}};
        for (double theta : {0.2, 0.4, 0.6}) {
            Scenario s = two_class("theta_sweep", 7.0, 4.0);
            s.sp.theta_d = theta;
            p.points.push_back({theta, s});
        }
        out.push_back(std::move(p));
    }

    {
        Preset p{"k1_sweep", "elastic mean arrivals 3..10 with inelastic fixed at 2, t_end 100",
                 "K1", {}};
        for (int k1 = 3; k1 <= 10; ++k1) {
            Scenario s = two_class("k1_sweep", k1, 2.0);
            s.t_end = 100.0;
            p.points.push_back({static_cast<double>(k1), s});
        }
        out.push_back(std::move(p));
    }

    {
        Scenario s;
        s.name = "three_group";
        s.classes = {{0.05, 0.0}, {0.02, 0.0}, {0.0, 0.0}};
        s.profiles = {
            DemandProfile::gaussian(3.0, 1.5),
            DemandProfile::piecewise({{0, 1}, {60, 1}, {60, 4}, {200, 4}, {240, 1}}, 0.5),
            DemandProfile::piecewise({{0, 1}, {150, 1}, {150, 5}, {200, 5}, {240, 1}}, 0.5),
        };
        out.push_back({"three_group",
                       "three classes (highly, moderately, not elastic); surges of groups 2 "
                       "and 3 at t=60 and t=150, decaying after t=200",
                       "", {{0.0, s}}});
    }
    return out;
}

Preset find_preset(std::string_view name) {
    for (auto& p : presets()) {
        if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace fairflow
