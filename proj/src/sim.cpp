#include "rmpflow/sim.hpp"

#include <cmath>
#include <limits>

namespace rmpflow {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void recordSample(Trajectory& traj, const SimState& s, const VectorXd& accel,
                  const Instrumentation* instr) {
    traj.states.push_back(s);
    traj.accel_norm.push_back(accel.norm());
    if (instr && instr->aggregate) {
        traj.lyapunov.push_back(lyapunov(*instr->aggregate, s.q, s.qd));
        traj.kinetic.push_back(kineticEnergy(*instr->aggregate, s.q, s.qd));
    } else {
        traj.lyapunov.push_back(kNan);
        traj.kinetic.push_back(kNan);
    }
    if (instr && !instr->obstacle_distances.empty()) {
        VectorXd d(instr->obstacle_distances.size());
        for (size_t i = 0; i < instr->obstacle_distances.size(); ++i)
            d(static_cast<Eigen::Index>(i)) = instr->obstacle_distances[i](s.q);
        traj.obstacle_dist.push_back(std::move(d));
    } else {
        traj.obstacle_dist.emplace_back();
    }
}

}  // namespace

Trajectory integrate(const PolicyFn& policy, const SimState& initial,
                     const IntegrateOptions& opts, const Instrumentation* instr) {
    if (opts.step <= 0.0 || opts.horizon < opts.step)
        throw std::invalid_argument("integrate: require step > 0 and horizon >= step");
    if (!allFinite(initial.q) || !allFinite(initial.qd))
        throw NumericalError("integrate: non-finite initial state");

    Trajectory traj;
    traj.step = opts.step;
    traj.horizon = opts.horizon;
    const double h = opts.step;
    const auto steps = static_cast<long>(std::llround(opts.horizon / h));
    const int dwell_samples = std::max(1, static_cast<int>(std::lround(opts.convergence_dwell / h)));

    SimState s = initial;
    int quiet = 0;
    traj.termination = "horizon";
    for (long i = 0; i <= steps; ++i) {
        VectorXd a0;
        try {
            a0 = policy(s.q, s.qd);
        } catch (const SingularDomainError& e) {
            traj.termination = std::string("domain_exit: ") + e.what();
            return traj;
        } catch (const std::exception& e) {
            traj.termination = std::string("error: ") + e.what();
            return traj;
        }
        if (!allFinite(a0) || !allFinite(s.q) || !allFinite(s.qd)) {
            traj.termination = "error: non-finite state";
            return traj;
        }
        recordSample(traj, s, a0, instr);

        if (s.qd.norm() < opts.convergence_vel && a0.norm() < opts.convergence_accel) {
            if (++quiet >= dwell_samples) {
                traj.termination = "converged";
                return traj;
            }
        } else {
            quiet = 0;
        }
        if (i == steps) break;

        try {
            const VectorXd k1q = s.qd, k1v = a0;
            const VectorXd k2q = s.qd + 0.5 * h * k1v;
            const VectorXd k2v = policy(s.q + 0.5 * h * k1q, k2q);
            const VectorXd k3q = s.qd + 0.5 * h * k2v;
            const VectorXd k3v = policy(s.q + 0.5 * h * k2q, k3q);
            const VectorXd k4q = s.qd + h * k3v;
            const VectorXd k4v = policy(s.q + h * k3q, k4q);
            s.q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            s.qd += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            s.t = initial.t + (i + 1) * h;
        } catch (const SingularDomainError& e) {
            traj.termination = std::string("domain_exit: ") + e.what();
            return traj;
        } catch (const std::exception& e) {
            traj.termination = std::string("error: ") + e.what();
            return traj;
        }
    }
    return traj;
}

Trajectory integrate(RmpTree& tree, const SimState& initial, const IntegrateOptions& opts,
                     const Instrumentation* instr) {
    PolicyFn policy = [&tree](const VectorXd& q, const VectorXd& qd) {
        return tree.evaluate(q, qd).accel;
    };
    return integrate(policy, initial, opts, instr);
}

LyapunovSeries lyapunovSeries(const Trajectory& traj, const GdsAggregate& aggregate) {
    LyapunovSeries series;
    const size_t n = traj.size();
    if (n < 3) return series;
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i)
        v[i] = lyapunov(aggregate, traj.states[i].q, traj.states[i].qd);
    for (size_t i = 1; i + 1 < n; ++i) {
        series.t.push_back(traj.states[i].t);
        series.v.push_back(v[i]);
        series.vdot_numeric.push_back((v[i + 1] - v[i - 1]) / (2.0 * traj.step));
        const VectorXd& qd = traj.states[i].qd;
        series.damping_rate.push_back(-qd.dot(aggregate.damping(traj.states[i].q, qd) * qd));
    }
    return series;
}

RunMetrics metrics(const Trajectory& traj,
                   const std::function<VectorXd(const VectorXd&)>& task_point,
                   const VectorXd& goal) {
    RunMetrics out;
    out.time_to_goal = traj.termination == "converged" ? traj.duration() : traj.horizon;
    out.goal_distance = std::numeric_limits<double>::infinity();
    int colliding = 0;
    for (size_t i = 0; i < traj.size(); ++i) {
        out.path_length += traj.states[i].qd.norm() * traj.step;
        if (task_point)
            out.goal_distance =
                std::min(out.goal_distance, (task_point(traj.states[i].q) - goal).norm());
        if (traj.obstacle_dist[i].size() > 0 && traj.obstacle_dist[i].minCoeff() <= 0.0)
            ++colliding;
    }
    if (!traj.states.empty())
        out.collision_intensity = static_cast<double>(colliding) / static_cast<double>(traj.size());
    out.collided = out.collision_intensity > 0.0;
    if (!task_point) out.goal_distance = 0.0;
    return out;
}

}  // namespace rmpflow
