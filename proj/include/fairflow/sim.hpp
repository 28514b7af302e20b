#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/controller.hpp"
#include "fairflow/metrics.hpp"
#include "fairflow/model.hpp"
#include "fairflow/robust.hpp"

namespace fairflow {

/// Non-finite plant state during integration.
class NumericFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DemandKind { constant, clipped_gaussian, piecewise };

std::string_view to_string(DemandKind k);
DemandKind parse_demand_kind(std::string_view s);

struct DemandProfile {
    DemandKind kind = DemandKind::constant;
    double mean = 0.0;
    double std = 0.0;  // absolute; used by clipped_gaussian and piecewise
    std::vector<std::pair<double, double>> breakpoints;  // (time, mean), time-sorted

    /// Deterministic mean at time t. Piecewise profiles interpolate linearly
    /// and are right-continuous at repeated breakpoint times.
    double mean_at(double t) const;
    void validate() const;

    static DemandProfile constant(double mean);
    static DemandProfile gaussian(double mean, double std);
    static DemandProfile piecewise(std::vector<std::pair<double, double>> pts, double std);
};

/// Seeded source of standard normal draws shared by all classes of a run.
class ArrivalRng {
public:
    explicit ArrivalRng(std::uint64_t seed) : engine_(seed) {}
    double standard_normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Arrival rate at t. Gaussian and piecewise profiles consume exactly one
/// standard normal draw per call, so runs with a common seed see the same
/// noise sequence regardless of the profile magnitudes.
double sample_arrivals(const DemandProfile& profile, double t, ArrivalRng& rng);

struct Scenario {
    std::string name = "custom";
    std::vector<ClassParams> classes;
    std::vector<DemandProfile> profiles;
    SystemParams sp;
    ControllerConfig cfg;
    double t_end = 250.0;
    std::uint64_t seed = 1;
    HiddenState initial;        // empty x means all-zero queues
    double initial_price = 0.0; // price assumed in force before t = 0
    /// Multiplies the dropout reading handed to the controller. 1 is a
    /// lossless sensor; other values model miscalibration and can make the
    /// observation inconsistent (a controller fault).
    double dropout_sensor_gain = 1.0;

    void validate() const;
    std::size_t num_classes() const { return classes.size(); }
};

struct TraceRow {
    double t = 0.0;
    long epoch = 0;
    std::vector<double> K;
    std::vector<double> x;
    double z = 0.0;
    double q = 0.0;
    double alpha = 0.0;
    double p = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double dropout = 0.0;
    double I = 0.0;
    double revenue_rate = 0.0;
    double revenue = 0.0;
    double eta1_star = 0.0;
    double eta2_star = 0.0;
    bool feasible = true;
    std::vector<ClassInterval> bounds;  // only filled when N > 2
};

/// RK4 step of the per-class plant, then x_i, q clamped to >= 0 and alpha to [0, 1].
HiddenState integrate_step(const HiddenState& s, const Control& ctrl,
                           std::span<const double> arrivals, const SystemParams& sp,
                           std::span<const ClassParams> classes, double dt);

/// Everything known at one decision epoch, for observers and diagnostics.
struct EpochRecord {
    long epoch = 0;
    Observation obs;
    const HiddenState* truth = nullptr;
    const ConsistencySet* consistency = nullptr;
    const FairnessWindow* window = nullptr;
    std::vector<double> arrivals;
    Decision decision;
};

struct RunOptions {
    std::function<void(const EpochRecord&)> on_epoch;
};

enum class RunStatus { ok, controller_fault, numeric_fault };

struct RunResult {
    Policy policy = Policy::robust_fair;
    std::vector<TraceRow> rows;
    RunStatus status = RunStatus::ok;
    std::string message;
};

/// Closed loop: arrivals are drawn at each decision epoch and held over the
/// window, the policy sees only the aggregate observation, and metrics are
/// recorded from the true state after every integration step.
RunResult run(const Scenario& scn, const RunOptions& opts = {});

struct PresetPoint {
    double value = 0.0;  // sweep coordinate (0 for single scenarios)
    Scenario scenario;
};

struct Preset {
    std::string name;
    std::string description;
    std::string sweep_key;  // empty unless the preset is a sweep
    std::vector<PresetPoint> points;

    bool is_sweep() const { return !sweep_key.empty(); }
};

std::vector<Preset> presets();
/// Throws std::invalid_argument for unknown names.
Preset find_preset(std::string_view name);

}  // namespace fairflow
