#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairflow {

/// Raised when model inputs violate a structural precondition
/// (dimension mismatch, proportions off the simplex, bad parameters).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear price-driven dropout coefficients of one user class.
struct ClassParams {
    double r1 = 0.0;  // dropout fraction per unit price per unit time
    double r2 = 0.0;  // baseline dropout fraction per unit time
};

struct SystemParams {
    double mu_star = 5.0;   // maximum service rate
    double q_c = 10.0;      // queue length at which service saturates
    double q_max = 15.0;    // service queue capacity
    double p_min = 0.0;
    double p_max = 10.0;
    double nu_max = 10.0;   // bound on |d alpha / dt|
    double lambda1 = 1.0;   // class-K gains of the barrier
    double lambda2 = 1.0;
    double theta_d = 0.4;   // unfairness threshold
    double T_d = 0.1;       // decision window
    double T_I = 10.0;      // fairness averaging window
    double dt = 0.01;       // integration step

    /// Throws ModelError naming the offending field.
    void validate() const;
};

/// Ground-truth plant state. Per-class queues are never shown to a controller.
struct HiddenState {
    std::vector<double> x;  // per-class demand queues
    double q = 0.0;         // service queue
    double alpha = 1.0;     // admission rate

    double z() const;
};

/// What a controller can measure at a decision epoch.
struct Observation {
    double z = 0.0;
    double q = 0.0;
    double alpha = 0.0;
    double K = 0.0;          // aggregate arrival rate
    double d = 0.0;          // aggregate dropout rate
    double p_applied = 0.0;  // price in force when d was measured
    double t = 0.0;
};

struct Control {
    double p = 0.0;
    double nu = 0.0;
};

using Proportions = std::vector<double>;

double dropout_rate(const ClassParams& c, double p);

double service_rate(const SystemParams& sp, double q);

/// d mu / d q. The kink at q == q_c takes the saturated-side value 0.
double service_rate_slope(const SystemParams& sp, double q);

/// Right-hand side of the per-class demand queues, the service queue and
/// the admission-rate integrator. The result is laid out like a HiddenState.
HiddenState hidden_derivative(const HiddenState& s, const Control& ctrl,
                              std::span<const double> arrivals,
                              const SystemParams& sp,
                              std::span<const ClassParams> classes);

/// Aggregate demand queue rate under proportion vector w (w_i = x_i / z).
double aggregate_derivative(double z, double alpha, std::span<const double> w,
                            const Control& ctrl, double K,
                            std::span<const ClassParams> classes);

/// Sum_i f_i(p) w_i, the dropout rate per queued user.
double mean_dropout(std::span<const ClassParams> classes, std::span<const double> w,
                    double p);

/// Sum_i f_i(p) x_i.
double aggregate_dropout(std::span<const ClassParams> classes, std::span<const double> x,
                         double p);

/// Throws ModelError unless w has matching size, w_i >= -tol and |sum w - 1| <= tol.
void check_simplex(std::span<const double> w, std::size_t n, double tol = 1e-9);

}  // namespace fairflow
