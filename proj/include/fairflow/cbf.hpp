#pragma once

#include <span>
#include <vector>

#include "fairflow/model.hpp"

namespace fairflow {

/// Controller-visible state [q, z, alpha]; the barrier is b = q_max - q.
struct ExtendedState {
    double q = 0.0;
    double z = 0.0;
    double alpha = 0.0;
};

/// Lie derivatives of the capacity barrier along the aggregate dynamics.
/// The input gains of b itself (L_Gp b, L_Gnu b) are identically zero.
struct LieBundle {
    double Lfb = 0.0;
    double Lf2b = 0.0;
    double LgpLfb = 0.0;
    double LgnuLfb = 0.0;
    double b = 0.0;
};

/// Uses the unclipped affine coefficients w.r1 and w.r2, so eta1 stays affine
/// in p. This matches the clipped dropout model whenever r1 p + r2 <= 1.
LieBundle lie_bundle(const ExtendedState& s, std::span<const double> w, double K,
                     const SystemParams& sp, std::span<const ClassParams> classes);

double eta1(const LieBundle& lb, const Control& ctrl, const SystemParams& sp);

/// Second-order barrier condition; the control pair is admissible when >= 0.
double eta1(const ExtendedState& s, const Control& ctrl, std::span<const double> w,
            double K, const SystemParams& sp, std::span<const ClassParams> classes);

/// Fairness margin.
inline double eta2(double predicted_index, double theta_d) { return theta_d - predicted_index; }

struct StatePrediction {
    ExtendedState state;
    double mean_ratio = 0.0;  // time-average of sum_i f_i(p) w_i z / K over the horizon
};

/// Holds (p, nu), w and K fixed and integrates the aggregate model with RK4
/// at step sp.dt (the last step is shortened to land on the horizon). After
/// every step z and q are clamped to >= 0 and alpha to [0, 1]. The mean
/// ratio is the trapezoid average over the step endpoints.
StatePrediction predict_state(const ExtendedState& s, const Control& ctrl,
                              std::span<const double> w, double K, const SystemParams& sp,
                              std::span<const ClassParams> classes, double horizon);

/// Per-class queue responses over one window with (p, nu) held fixed.
///
/// Given the admission path, each demand queue obeys a linear ODE, so a
/// queue starting at x0 with arrival rate a is x0 * decay + a * fill at
/// every step end. The RK4 steps and the alpha clamping are the ones the
/// plant integrator uses.
struct QueueResponse {
    std::vector<double> times;               // step-end offsets from the window start
    std::vector<double> dropout;             // f_i(p)
    /// [class][step], step 0 is the window start. Left at zero past step 0
    /// for classes with f_i(p) == 0, which never enter the ratio.
    std::vector<std::vector<double>> decay;
    std::vector<std::vector<double>> fill;
    /// Integral of the arrival-driven part of the ratio up to each step end,
    /// maximized over the class receiving all arrivals (times K, so the same
    /// for every K > 0): max_j int f_j fill_j.
    std::vector<double> worst_fill;
};

/// Step-end offsets used by every window integration: multiples of sp.dt,
/// the last one shortened to land exactly on `horizon`.
std::vector<double> window_step_times(const SystemParams& sp, double horizon);

QueueResponse queue_response(double alpha0, const Control& ctrl, const SystemParams& sp,
                             std::span<const ClassParams> classes, double horizon);

/// Same, on the step grid `times` (from window_step_times), reusing the
/// storage of `out`.
void queue_response(QueueResponse& out, double alpha0, const Control& ctrl,
                    std::span<const ClassParams> classes, std::span<const double> times);

/// Time integral of the dropout ratio from the window start to every step
/// end, for queues starting at w z, maximized over how the arrival rate K
/// is split between classes (the maximum is attained by a single class).
std::vector<double> worst_ratio_integrals(const QueueResponse& r, std::span<const double> w,
                                          double z, double K);

/// One RK4 step of the aggregate model with the per-queue dropout rate
/// `dropout` (= sum_i f_i(p) w_i) held fixed; no clamping.
ExtendedState aggregate_rk4_step(const ExtendedState& s, double nu, double dropout, double K,
                                 const SystemParams& sp, double h);

}  // namespace fairflow
