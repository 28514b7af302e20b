#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairflow/metrics.hpp"
#include "fairflow/model.hpp"
#include "fairflow/robust.hpp"

namespace fairflow {

enum class Policy { robust_fair, surge };

/// Which state enters the window revenue p * alpha * z.
enum class ObjectiveForm {
    window_end,    // predicted (alpha, z) at the end of the window
    window_start,  // observed (alpha, z) at the decision epoch
};

std::string_view to_string(Policy p);
Policy parse_policy(std::string_view s);
std::string_view to_string(ObjectiveForm f);
ObjectiveForm parse_objective(std::string_view s);

struct ControllerConfig {
    int p_grid_size = 101;
    int nu_grid_size = 21;
    Policy policy = Policy::robust_fair;
    double b1 = -0.129;
    double b2 = -0.967;
    double b3 = -0.096;
    ObjectiveForm objective = ObjectiveForm::window_end;
    MarginMode margins = MarginMode::window_peak;

    void validate() const;
};

struct Decision {
    double p = 0.0;
    double nu = 0.0;
    double alpha_applied = 0.0;  // admission rate at the end of the window
    bool feasible = false;
    double eta1_star = 0.0;
    double eta2_star = 0.0;
    double objective = 0.0;      // predicted window revenue
};

/// Worst-case margins and nominal objective of one grid point.
struct GridEvaluation {
    double p = 0.0;
    double nu = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double objective = 0.0;
    double alpha_next = 0.0;

    bool feasible() const { return eta1 >= 0.0 && eta2 >= 0.0; }
};

std::vector<double> price_grid(const SystemParams& sp, const ControllerConfig& cfg);
std::vector<double> nu_grid(const SystemParams& sp, const ControllerConfig& cfg);

/// Evaluates every (p, nu) grid point against the given proportion vectors
/// (worst case over them) in p-major, ascending order. The deciders below
/// return what select_decision would pick from this list, but visit the
/// points in preference order and stop at the first feasible one.
std::vector<GridEvaluation> evaluate_grid(const Observation& obs, const FairnessWindow& window,
                                          double K_est, const SystemParams& sp,
                                          std::span<const ClassParams> classes,
                                          const ControllerConfig& cfg,
                                          std::span<const Proportions> verts);

/// Best feasible point: highest objective, then higher p, then lower |nu|,
/// then lower nu. Falls back when nothing is feasible.
Decision select_decision(std::span<const GridEvaluation> evals);

/// Point with the smallest worst violation max(-eta1, -eta2, 0); ties go to
/// higher eta1, then lower p, then lower |nu|. Always reports feasible = false.
Decision fallback(std::span<const GridEvaluation> evals);

/// Robust receding-horizon decision over the consistency set built from the
/// observation. Throws EmptyConsistencySet for inconsistent observations.
Decision robust_fair_decide(const Observation& obs, const FairnessWindow& window, double K_est,
                            const SystemParams& sp, std::span<const ClassParams> classes,
                            const ControllerConfig& cfg);

/// Same search with the proportion vector taken as known.
Decision nominal_decide(const Observation& obs, const FairnessWindow& window, double K_est,
                        const SystemParams& sp, std::span<const ClassParams> classes,
                        const ControllerConfig& cfg, std::span<const double> w);

double surge_price(double rho, const SystemParams& sp);
double surge_admission(double rho, const ControllerConfig& cfg);

/// Monotone congestion pricing. The target admission rate is tracked through
/// nu = (alpha_target - alpha) / T_d, clamped to the nu bounds. Margins are
/// not evaluated and come back as NaN.
Decision surge_decide(const Observation& obs, const SystemParams& sp,
                      const ControllerConfig& cfg);

}  // namespace fairflow
