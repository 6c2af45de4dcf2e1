#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmpflow/leaves.hpp"
#include "rmpflow/rigid_dyn.hpp"
#include "rmpflow/tree.hpp"

namespace rmpflow {

using nlohmann::json;

enum class ScenarioKind { OneD, TwoD, Arm, DynCheck, Invariance };

std::string toString(ScenarioKind kind);
ScenarioKind scenarioKindFromString(const std::string& s);

struct IntegratorConfig {
    double step = 1e-3;
    double horizon = 5.0;
};

struct RootDampingConfig {
    bool enabled = true;
    double gain = 1e-3;
};

struct MapDecl {
    std::string name;
    json params;
};

struct PolicyDecl {
    std::string name;
    json params;
};

// One tree node: an edge map from its parent, optionally carrying a leaf
// policy with its curvature/jdot toggles.
struct NodeDecl {
    std::string name;
    std::string parent;
    MapDecl map;
    std::optional<PolicyDecl> policy;
    bool curvature = true;
    bool jdot = true;
};

struct TreeDecl {
    int config_dim = 0;
    std::vector<NodeDecl> nodes;
};

struct StartState {
    VectorXd q;
    VectorXd qd;
};

struct OneDConfig {
    double x_goal = 0.5;
    std::vector<double> grid_q;
    std::vector<double> grid_qd;
    std::vector<std::string> variants;  // reference | full | no_jdot | no_jdot_damped
};

struct TwoDConfig {
    TreeDecl tree;
    std::vector<StartState> starts;
    std::vector<std::string> panels;  // subset of a..f
};

struct ObstacleConfig {
    Eigen::Vector2d center;
    double radius = 0.0;
};

struct ArmEnvironment {
    std::string name;
    std::vector<ObstacleConfig> obstacles;
};

struct ArmMethod {
    std::string kind;     // rmpflow | pf_basic | pf_nonlinear
    std::string scaling;  // empty | low | med | high
    std::string label() const { return scaling.empty() ? kind : kind + "_" + scaling; }
};

struct ArmConfig {
    std::vector<double> link_lengths;
    int control_points_per_link = 2;
    VectorXd joint_lower;
    VectorXd joint_upper;
    VectorXd q_start;
    leaves::CollisionParams collision;  // bounded weight form
    leaves::AttractorParams attractor;
    leaves::JointLimitParams joint_limit;
    double joint_limit_slope = 1.0;
    leaves::PostureParams posture;
    // scaling name -> (obstacle metric multiplier, c-space metric multiplier)
    std::map<std::string, std::pair<double, double>> scalings;
    std::vector<ArmEnvironment> environments;
    int target_count = 10;
    double target_radius_min = 0.5;
    double target_radius_max = 0.9;
    double target_angle_min = -1.0;
    double target_angle_max = 1.0;
    std::vector<ArmMethod> methods;
};

struct ReparamConfig {
    std::string kind = "sine";  // identity | linear | sine
    double amplitude = 0.3;     // sine
    MatrixXd matrix;            // linear
};

struct InvarianceConfig {
    TreeDecl tree;
    ReparamConfig reparam;
    StartState initial;
};

struct ChainConfig {
    std::string name;
    ChainModel model;
};

struct DynCheckConfig {
    std::vector<ChainConfig> chains;
    int samples = 100;
    double q_range = 3.14;
    double qd_range = 2.0;
    double tau_range = 1.0;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::TwoD;
    std::uint64_t seed = 0;
    IntegratorConfig integrator;
    RootDampingConfig root_damping;
    std::optional<std::string> output_dir;
    std::optional<OneDConfig> oned;
    std::optional<TwoDConfig> twod;
    std::optional<ArmConfig> arm;
    std::optional<InvarianceConfig> invariance;
    std::optional<DynCheckConfig> dyncheck;
};

// Strict parse: unknown keys are rejected with their full key path.
ScenarioConfig parseScenario(const json& doc);
ScenarioConfig loadScenario(const std::filesystem::path& path);
json serializeScenario(const ScenarioConfig& config);

// Config-addressable constructors (name + parameter record).
TaskMap buildTaskMap(const std::string& name, const json& params);
LeafPolicy buildLeafPolicy(const std::string& name, const json& params, int node_dim,
                           bool curvature, bool jdot);

// Tree from its declaration, with the root damping injector appended when
// enabled. Throws ConfigError on unresolvable parents or dimension clashes.
RmpTree buildTree(const TreeDecl& decl, const RootDampingConfig& damping);

}  // namespace rmpflow
