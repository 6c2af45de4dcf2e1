#pragma once

#include <filesystem>
#include <map>

#include "rmpflow/scenario.hpp"
#include "rmpflow/sim.hpp"

namespace rmpflow {

// 1D barrier experiment: four variants of the same GDS behind x = 1/q.
struct OneDOutcome {
    // x-space series per variant, one per grid start. The reference variant is
    // integrated directly in x; tree variants are mapped images of q-runs.
    std::map<std::string, std::vector<Trajectory>> x_space;
    std::map<std::string, std::vector<Trajectory>> q_space;  // tree variants only
};
OneDOutcome runOneD(const ScenarioConfig& config, const std::filesystem::path& out);

// 2D obstacle/attractor panels.
struct TwoDOutcome {
    std::map<std::string, std::vector<Trajectory>> panels;  // keys a..e
    std::vector<LyapunovSeries> lyapunov;                   // panel f, aligned with panel e
};
TwoDOutcome runTwoD(const ScenarioConfig& config, const std::filesystem::path& out);

struct ArmTrial {
    std::string method;
    std::string env;
    int trial = 0;
    Eigen::Vector2d target = Eigen::Vector2d::Zero();
    RunMetrics metrics;
    std::string termination;
};
struct ArmOutcome {
    std::vector<ArmTrial> trials;
};
ArmOutcome runArm(const ScenarioConfig& config, const std::filesystem::path& out);

struct InvarianceOutcome {
    double sup_deviation = 0.0;
    size_t compared_samples = 0;
    std::string termination_base;
    std::string termination_reparam;
};
InvarianceOutcome runInvariance(const ScenarioConfig& config, const std::filesystem::path& out);

struct DynCheckChainReport {
    std::string name;
    int samples = 0;
    double max_forward_rel_err = 0.0;
    double max_roundtrip_err = 0.0;
    double max_pendulum_err = 0.0;  // 1-dof chains only
};
struct DynCheckOutcome {
    std::vector<DynCheckChainReport> chains;
};
DynCheckOutcome runDynCheck(const ScenarioConfig& config, const std::filesystem::path& out);

// Shared fixture assembly, exposed for tests and the CLI tree printer.
RmpTree buildArmTree(const ArmConfig& arm, const ArmEnvironment& env,
                     const Eigen::Vector2d& target, const ArmMethod& method,
                     const RootDampingConfig& damping);
std::vector<Eigen::Vector2d> armTargets(const ArmConfig& arm, std::uint64_t seed);
RmpTree buildScenarioTree(const ScenarioConfig& config);

// Image of a run under a task map (value and Jacobian-propagated velocity).
Trajectory mapTrajectory(const Trajectory& traj, const TaskMap& map);

}  // namespace rmpflow
