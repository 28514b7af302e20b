#include "fairflow/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairflow {

std::string_view to_string(Policy p) {
    return p == Policy::robust_fair ? "robust_fair" : "surge";
}

Policy parse_policy(std::string_view s) {
    if (s == "robust_fair") return Policy::robust_fair;
    if (s == "surge") return Policy::surge;
    throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

std::string_view to_string(ObjectiveForm f) {
    return f == ObjectiveForm::window_end ? "window_end" : "window_start";
}

ObjectiveForm parse_objective(std::string_view s) {
    if (s == "window_end") return ObjectiveForm::window_end;
    if (s == "window_start") return ObjectiveForm::window_start;
    throw std::invalid_argument("unknown objective '" + std::string(s) + "'");
}

void ControllerConfig::validate() const {
    if (p_grid_size < 2) throw std::invalid_argument("p_grid_size must be >= 2");
    if (nu_grid_size < 2) throw std::invalid_argument("nu_grid_size must be >= 2");
    if (!std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(b3)) {
        throw std::invalid_argument("surge coefficients must be finite");
    }
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

Decision to_decision(const GridEvaluation& g, bool feasible) {
    return {g.p, g.nu, g.alpha_next, feasible, g.eta1, g.eta2, g.objective};
}

// true when a should be preferred over b among feasible points
bool better_feasible(const GridEvaluation& a, const GridEvaluation& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    if (a.p != b.p) return a.p > b.p;
    if (std::abs(a.nu) != std::abs(b.nu)) return std::abs(a.nu) < std::abs(b.nu);
    return a.nu < b.nu;
}

double violation(const GridEvaluation& g) { return std::max({-g.eta1, -g.eta2, 0.0}); }

bool better_fallback(const GridEvaluation& a, const GridEvaluation& b) {
    const double va = violation(a);
    const double vb = violation(b);
    if (va != vb) return va < vb;
    if (a.eta1 != b.eta1) return a.eta1 > b.eta1;
    if (a.p != b.p) return a.p < b.p;
    if (std::abs(a.nu) != std::abs(b.nu)) return std::abs(a.nu) < std::abs(b.nu);
    return a.nu < b.nu;
}

}  // namespace

std::vector<double> price_grid(const SystemParams& sp, const ControllerConfig& cfg) {
    return linspace(sp.p_min, sp.p_max, cfg.p_grid_size);
}

std::vector<double> nu_grid(const SystemParams& sp, const ControllerConfig& cfg) {
    return linspace(-sp.nu_max, sp.nu_max, cfg.nu_grid_size);
}

namespace {

class GridSearch {
public:
    GridSearch(const Observation& obs, const FairnessWindow& window, double K_est,
               const SystemParams& sp, std::span<const ClassParams> classes,
               const ControllerConfig& cfg, std::span<const Proportions> verts)
        : obs_(obs), s_{obs.q, obs.z, obs.alpha}, K_(K_est), sp_(sp), classes_(classes),
          cfg_(cfg), verts_(verts), nominal_(vertex_mean(verts)),
          margins_(s_, K_est, sp, classes, window, obs.t, cfg.margins) {
        if (verts.empty()) throw EmptyConsistencySet("no vertices to evaluate");
        for (double p : price_grid(sp, cfg)) {
            for (double nu : nu_grid(sp, cfg)) points_.push_back({p, nu});
        }
        nominal_pred_.resize(points_.size());
    }

    std::size_t size() const { return points_.size(); }

    GridEvaluation with_objective(std::size_t i) {
        const Control& c = points_[i];
        GridEvaluation g;
        g.p = c.p;
        g.nu = c.nu;
        const auto pred = predict_state(s_, c, nominal_, K_, sp_, classes_, sp_.T_d);
        // a single vertex is the nominal w, so its prediction is this one
        if (verts_.size() == 1) nominal_pred_[i] = pred;
        const auto& end = pred.state;
        g.alpha_next = end.alpha;
        g.objective = cfg_.objective == ObjectiveForm::window_end
                          ? sp_.T_d * c.p * end.alpha * end.z
                          : sp_.T_d * c.p * obs_.alpha * obs_.z;
        return g;
    }

    void add_margins(std::size_t i, GridEvaluation& g) const {
        std::span<const StatePrediction> known;
        if (verts_.size() == 1) known = {&nominal_pred_[i], 1};
        const auto m = margins_.worst(points_[i], verts_, known);
        g.eta1 = m.eta1;
        g.eta2 = m.eta2;
    }

private:
    const Observation& obs_;
    ExtendedState s_;
    double K_;
    const SystemParams& sp_;
    std::span<const ClassParams> classes_;
    const ControllerConfig& cfg_;
    std::span<const Proportions> verts_;
    Proportions nominal_;
    MarginEvaluator margins_;
    std::vector<Control> points_;
    std::vector<StatePrediction> nominal_pred_;
};

Decision search(GridSearch grid) {
    std::vector<GridEvaluation> evals(grid.size());
    for (std::size_t i = 0; i < evals.size(); ++i) evals[i] = grid.with_objective(i);
    std::vector<std::size_t> order(evals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return better_feasible(evals[a], evals[b]);
    });
    for (std::size_t i : order) {
        grid.add_margins(i, evals[i]);
        if (evals[i].feasible()) return to_decision(evals[i], true);
    }
    return fallback(evals);
}

}  // namespace

std::vector<GridEvaluation> evaluate_grid(const Observation& obs, const FairnessWindow& window,
                                          double K_est, const SystemParams& sp,
                                          std::span<const ClassParams> classes,
                                          const ControllerConfig& cfg,
                                          std::span<const Proportions> verts) {
    GridSearch grid(obs, window, K_est, sp, classes, cfg, verts);
    std::vector<GridEvaluation> evals(grid.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
        evals[i] = grid.with_objective(i);
        grid.add_margins(i, evals[i]);
    }
    return evals;
}

Decision fallback(std::span<const GridEvaluation> evals) {
    if (evals.empty()) throw std::invalid_argument("fallback needs at least one grid point");
    const GridEvaluation* best = &evals.front();
    for (const auto& g : evals) {
        if (better_fallback(g, *best)) best = &g;
    }
    return to_decision(*best, false);
}

Decision select_decision(std::span<const GridEvaluation> evals) {
    const GridEvaluation* best = nullptr;
    for (const auto& g : evals) {
        if (!g.feasible()) continue;
        if (best == nullptr || better_feasible(g, *best)) best = &g;
    }
    if (best == nullptr) return fallback(evals);
    return to_decision(*best, true);
}

Decision robust_fair_decide(const Observation& obs, const FairnessWindow& window, double K_est,
                            const SystemParams& sp, std::span<const ClassParams> classes,
                            const ControllerConfig& cfg) {
    ConsistencySet cs{obs.z, obs.d, obs.p_applied, {classes.begin(), classes.end()}};
    const auto verts = vertices(cs);
    return search(GridSearch(obs, window, K_est, sp, classes, cfg, verts));
}

Decision nominal_decide(const Observation& obs, const FairnessWindow& window, double K_est,
                        const SystemParams& sp, std::span<const ClassParams> classes,
                        const ControllerConfig& cfg, std::span<const double> w) {
    check_simplex(w, classes.size());
    const std::vector<Proportions> single{Proportions(w.begin(), w.end())};
    return search(GridSearch(obs, window, K_est, sp, classes, cfg, single));
}

double surge_price(double rho, const SystemParams& sp) {
    return std::clamp(1.0 + 9.0 * (3.0 * rho * rho - 2.0 * rho * rho * rho), sp.p_min, sp.p_max);
}

double surge_admission(double rho, const ControllerConfig& cfg) {
    // Horner form of 1 + b1 rho + b2 rho^2 - b3 rho^3
    return std::clamp(1.0 + rho * (cfg.b1 + rho * (cfg.b2 - cfg.b3 * rho)), 0.0, 1.0);
}

Decision surge_decide(const Observation& obs, const SystemParams& sp,
                      const ControllerConfig& cfg) {
    const double rho = std::min(1.0, std::max(obs.q, 0.0) / sp.q_max);
    const double target = surge_admission(rho, cfg);
    Decision d;
    d.p = surge_price(rho, sp);
    d.nu = std::clamp((target - obs.alpha) / sp.T_d, -sp.nu_max, sp.nu_max);
    d.alpha_applied = std::clamp(obs.alpha + d.nu * sp.T_d, 0.0, 1.0);
    d.feasible = true;
    d.eta1_star = std::numeric_limits<double>::quiet_NaN();
    d.eta2_star = std::numeric_limits<double>::quiet_NaN();
    d.objective = sp.T_d * d.p * obs.alpha * obs.z;
    return d;
}

}  // namespace fairflow
