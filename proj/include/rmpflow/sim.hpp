#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rmpflow/gds.hpp"
#include "rmpflow/tree.hpp"

namespace rmpflow {

struct SimState {
    double t = 0.0;
    VectorXd q;
    VectorXd qd;
};

// Uniformly sampled run with per-sample diagnostics aligned 1:1 with states.
struct Trajectory {
    double step = 0.0;
    double horizon = 0.0;
    std::vector<SimState> states;
    std::vector<double> lyapunov;       // NaN when no aggregate was supplied
    std::vector<double> kinetic;        // NaN when no aggregate was supplied
    std::vector<double> accel_norm;     // |a| at the sample
    std::vector<VectorXd> obstacle_dist;  // per-obstacle signed distances
    std::string termination;  // "horizon", "converged", "domain_exit: ...", "error: ..."

    size_t size() const { return states.size(); }
    double duration() const { return states.empty() ? 0.0 : states.back().t; }
};

struct IntegrateOptions {
    double step = 1e-3;
    double horizon = 5.0;
    double convergence_vel = 1e-3;
    double convergence_accel = 1e-3;
    double convergence_dwell = 0.1;  // seconds below both thresholds before stopping
};

// Diagnostics recorded along the run.
struct Instrumentation {
    const GdsAggregate* aggregate = nullptr;  // enables V and K columns
    std::vector<std::function<double(const VectorXd&)>> obstacle_distances;
};

using PolicyFn = std::function<VectorXd(const VectorXd& q, const VectorXd& qd)>;

// Classical fixed-step RK4 on the first-order lift (q, qd) -> (qd, pi(q, qd)).
// Terminates early on convergence or when the policy leaves its domain, with
// the cause recorded on the trajectory.
Trajectory integrate(const PolicyFn& policy, const SimState& initial,
                     const IntegrateOptions& opts, const Instrumentation* instr = nullptr);

Trajectory integrate(RmpTree& tree, const SimState& initial, const IntegrateOptions& opts,
                     const Instrumentation* instr = nullptr);

// Lyapunov record along a stored trajectory: V, centered-difference Vdot and
// the damping rate -qd^T B qd (which Vdot should track).
struct LyapunovSeries {
    std::vector<double> t;
    std::vector<double> v;
    std::vector<double> vdot_numeric;
    std::vector<double> damping_rate;
};

LyapunovSeries lyapunovSeries(const Trajectory& traj, const GdsAggregate& aggregate);

// Scalar performance measures of one run.
struct RunMetrics {
    double time_to_goal = 0.0;        // first convergence time, or the horizon
    double path_length = 0.0;         // integral of |qd| dt
    double goal_distance = 0.0;       // min over t of task-point distance to goal
    double collision_intensity = 0.0; // fraction of samples with any distance <= 0
    bool collided = false;
};

RunMetrics metrics(const Trajectory& traj,
                   const std::function<VectorXd(const VectorXd&)>& task_point,
                   const VectorXd& goal);

}  // namespace rmpflow
