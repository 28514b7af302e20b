#pragma once

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fairflow/cbf.hpp"
#include "fairflow/metrics.hpp"
#include "fairflow/model.hpp"

namespace fairflow {

/// The observation is incompatible with every proportion vector.
class EmptyConsistencySet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Proportion vectors w with w >= 0, sum w = 1 and sum_i f_i(p_applied) w_i z = d.
/// The price is the one in force when d was measured, not a candidate price.
struct ConsistencySet {
    double z = 0.0;
    double d = 0.0;
    double p_applied = 0.0;
    std::vector<ClassParams> classes;

    bool contains(std::span<const double> w, double tol = 1e-9) const;
    /// |sum_i f_i(p_applied) w_i - d/z| (0 when z == 0).
    double residual(std::span<const double> w) const;
};

/// Basic feasible solutions of the consistency polytope. Every vertex has at
/// most two nonzero entries: unit vectors e_i with f_i == d/z, and points on
/// edges (e_i, e_j) with f_i != f_j. For z == 0 all unit vectors are returned.
std::vector<Proportions> vertices(const ConsistencySet& cs);

struct Margins {
    double eta1 = 0.0;
    double eta2 = 0.0;
};

/// How the margins of a candidate control look ahead.
enum class MarginMode {
    /// Current state; the instantaneous ratio at the candidate price is held
    /// over the window. Both margins are affine in w.
    instantaneous,
    /// eta1 at the predicted end-of-window state, eta2 from the index at the
    /// end of the window under the predicted mean ratio (w held fixed).
    window_end,
    /// eta1 as window_end; eta2 from the largest index over every step end of
    /// the window, with per-class queue responses and the arrival split chosen
    /// adversarially. The index at each step end is affine in w, so the worst
    /// case over the polytope is attained at a vertex.
    window_peak,
};

std::string_view to_string(MarginMode m);
MarginMode parse_margin_mode(std::string_view s);

/// Index forecasts at every step end of the window starting at t_now.
std::vector<FairnessWindow::Forecast> step_forecasts(const FairnessWindow& window, double t_now,
                                                     const SystemParams& sp);

/// Largest predicted index over the window's step ends for queues starting
/// at w z, worst case over the split of K between classes.
double peak_predicted_index(std::span<const FairnessWindow::Forecast> forecasts,
                            const QueueResponse& response, std::span<const double> w,
                            double z, double K);

/// Margins of candidate controls at one decision epoch. Everything that does
/// not depend on the control is computed once at construction. Holds scratch
/// storage, so one instance must not be shared between threads.
class MarginEvaluator {
public:
    MarginEvaluator(const ExtendedState& s, double K, const SystemParams& sp,
                    std::span<const ClassParams> classes, const FairnessWindow& window,
                    double t_now, MarginMode mode);

    Margins at(const Control& ctrl, std::span<const double> w) const;
    /// Component-wise minimum over the vertex list. `predicted`, when not
    /// empty, holds predict_state results for each vertex under ctrl and
    /// saves recomputing them.
    Margins worst(const Control& ctrl, std::span<const Proportions> verts,
                  std::span<const StatePrediction> predicted = {}) const;

    MarginMode mode() const { return mode_; }

private:
    Margins eval(const Control& ctrl, std::span<const double> w, const QueueResponse* response,
                 const StatePrediction* predicted) const;

    ExtendedState s_;
    double K_;
    SystemParams sp_;
    std::vector<ClassParams> classes_;
    MarginMode mode_;
    FairnessWindow::Forecast end_;
    std::vector<double> times_;
    std::vector<FairnessWindow::Forecast> steps_;
    mutable QueueResponse scratch_;
};

Margins margins_at(const ExtendedState& s, const Control& ctrl, std::span<const double> w,
                   double K, const SystemParams& sp, std::span<const ClassParams> classes,
                   const FairnessWindow& window, double t_now,
                   MarginMode mode = MarginMode::window_end);

Margins worst_case_margins(const ExtendedState& s, const Control& ctrl,
                           std::span<const Proportions> verts, double K,
                           const SystemParams& sp, std::span<const ClassParams> classes,
                           const FairnessWindow& window, double t_now,
                           MarginMode mode = MarginMode::window_end);

double worst_case_eta1(const ExtendedState& s, const Control& ctrl, const ConsistencySet& cs,
                       double K, const SystemParams& sp,
                       MarginMode mode = MarginMode::window_end);

double worst_case_eta2(const FairnessWindow& window, const ExtendedState& s,
                       const Control& ctrl, const ConsistencySet& cs, double K,
                       const SystemParams& sp, double t_now,
                       MarginMode mode = MarginMode::window_end);

struct ClassInterval {
    double lo = 0.0;
    double hi = 0.0;
    double estimate = 0.0;  // z times the vertex-mean proportion
};

std::vector<ClassInterval> state_bounds(const ConsistencySet& cs);

/// Plain average of the vertex list.
Proportions vertex_mean(std::span<const Proportions> verts);

}  // namespace fairflow
