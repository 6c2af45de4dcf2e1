#include "rmpflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rmpflow/io.hpp"

namespace rmpflow {

std::string toString(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::OneD: return "oned";
        case ScenarioKind::TwoD: return "twod";
        case ScenarioKind::Arm: return "arm";
        case ScenarioKind::DynCheck: return "dyncheck";
        case ScenarioKind::Invariance: return "invariance";
    }
    return "?";
}

ScenarioKind scenarioKindFromString(const std::string& s) {
    if (s == "oned") return ScenarioKind::OneD;
    if (s == "twod") return ScenarioKind::TwoD;
    if (s == "arm") return ScenarioKind::Arm;
    if (s == "dyncheck") return ScenarioKind::DynCheck;
    if (s == "invariance") return ScenarioKind::Invariance;
    throw ConfigError("unknown scenario kind '" + s + "'");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void checkKeys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            fail(path + "." + key, "unknown key");
    }
}

const json& member(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
    return j.at(key);
}

double getNum(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double getNumOr(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return getNum(j, path, key);
}

int getIntOr(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool getBoolOr(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string getStr(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

VectorXd toVector(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(path, "expected an array of numbers");
        out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
}

VectorXd getVec(const json& j, const std::string& path, const char* key) {
    return toVector(member(j, path, key), path + "." + key);
}

MatrixXd toMatrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected an array of rows");
    MatrixXd out;
    for (size_t r = 0; r < v.size(); ++r) {
        const VectorXd row = toVector(v[r], path + "[" + std::to_string(r) + "]");
        if (r == 0) out.resize(v.size(), row.size());
        if (row.size() != out.cols()) fail(path, "ragged matrix rows");
        out.row(static_cast<Eigen::Index>(r)) = row;
    }
    return out;
}

json fromVector(const VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json fromMatrix(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(fromVector(m.row(r)));
    return rows;
}

}  // namespace

TaskMap buildTaskMap(const std::string& name, const json& params) {
    const std::string path = "map '" + name + "'";
    if (name == "identity") {
        checkKeys(params, path, {"dim"});
        return maps::identity(getIntOr(params, path, "dim", 1));
    }
    if (name == "linear") {
        checkKeys(params, path, {"matrix"});
        return maps::linear(toMatrix(member(params, path, "matrix"), path + ".matrix"));
    }
    if (name == "reciprocal") {
        checkKeys(params, path, {});
        return maps::reciprocal();
    }
    if (name == "distance_to_point") {
        checkKeys(params, path, {"center", "radius"});
        return maps::distanceToPoint(getVec(params, path, "center"), getNum(params, path, "radius"));
    }
    if (name == "offset") {
        checkKeys(params, path, {"goal"});
        return maps::offset(getVec(params, path, "goal"));
    }
    if (name == "planar_arm_fk") {
        checkKeys(params, path, {"link_lengths", "point_offset", "link_index"});
        const VectorXd lengths = getVec(params, path, "link_lengths");
        return maps::planarArmFk(std::vector<double>(lengths.begin(), lengths.end()),
                                 getNum(params, path, "point_offset"),
                                 getIntOr(params, path, "link_index", 0));
    }
    if (name == "joint_limit") {
        checkKeys(params, path, {"lower", "upper", "slope"});
        return maps::jointLimit(getVec(params, path, "lower"), getVec(params, path, "upper"),
                                getNumOr(params, path, "slope", 1.0));
    }
    throw ConfigError("unknown map '" + name + "'");
}

namespace {

leaves::CollisionParams parseCollisionParams(const json& params, const std::string& path) {
    checkKeys(params, path,
              {"weight", "w_max", "sigma", "epsilon", "alpha", "b", "weight_scaled_damping"});
    leaves::CollisionParams p;
    const std::string weight =
        params.contains("weight") ? getStr(params, path, "weight") : "paper";
    if (weight == "paper")
        p.weight = leaves::ObstacleWeight::Paper;
    else if (weight == "bounded")
        p.weight = leaves::ObstacleWeight::Bounded;
    else
        fail(path + ".weight", "expected 'paper' or 'bounded'");
    p.w_max = getNumOr(params, path, "w_max", 1.0);
    p.sigma = getNumOr(params, path, "sigma", 1.0);
    p.epsilon = getNumOr(params, path, "epsilon", 1e-6);
    p.alpha = getNumOr(params, path, "alpha", 1e-3);
    p.damping = getNumOr(params, path, "b", 1.0);
    p.weight_scaled_damping = getBoolOr(params, path, "weight_scaled_damping", false);
    return p;
}

leaves::AttractorParams parseAttractorParams(const json& params, const std::string& path) {
    checkKeys(params, path, {"w_min", "w_max", "sigma", "eta", "gain", "huber_scale"});
    leaves::AttractorParams p;
    p.w_min = getNumOr(params, path, "w_min", 1.0);
    p.w_max = getNumOr(params, path, "w_max", 10.0);
    p.sigma = getNumOr(params, path, "sigma", 1.0);
    p.damping = getNumOr(params, path, "eta", 1.0);
    p.gain = getNumOr(params, path, "gain", 1.0);
    p.huber_scale = getNumOr(params, path, "huber_scale", 0.05);
    return p;
}

leaves::PfParams parsePfParams(const json& params, const std::string& path) {
    checkKeys(params, path,
              {"center", "radius", "w_max", "sigma", "alpha", "b", "barrier_w_max",
               "weight_scaled_damping"});
    leaves::PfParams p;
    p.obstacle_center = getVec(params, path, "center");
    p.obstacle_radius = getNum(params, path, "radius");
    p.w_max = getNumOr(params, path, "w_max", 1.0);
    p.sigma = getNumOr(params, path, "sigma", 1.0);
    p.alpha = getNumOr(params, path, "alpha", 1e-3);
    p.damping = getNumOr(params, path, "b", 1.0);
    p.barrier_w_max = getNumOr(params, path, "barrier_w_max", 0.0);
    p.weight_scaled_damping = getBoolOr(params, path, "weight_scaled_damping", false);
    return p;
}

}  // namespace

LeafPolicy buildLeafPolicy(const std::string& name, const json& params, int node_dim,
                           bool curvature, bool jdot) {
    const std::string path = "policy '" + name + "'";
    CurvatureToggles toggles;
    toggles.inertia_correction = curvature;
    toggles.curvature_force = curvature;
    toggles.jdot_pullback = jdot;

    if (name == "collision_1d") {
        if (node_dim != 1) fail(path, "collision_1d requires a 1D node");
        return LeafPolicy::fromGds(leaves::collisionLeaf1d(parseCollisionParams(params, path)),
                                   toggles);
    }
    if (name == "attractor") {
        return LeafPolicy::fromGds(leaves::attractorLeaf(node_dim, parseAttractorParams(params, path)),
                                   toggles);
    }
    if (name == "joint_limit") {
        checkKeys(params, path, {"u0", "gamma_p", "gamma_d", "sigma"});
        leaves::JointLimitParams p;
        p.gamma_p = getNumOr(params, path, "gamma_p", 1.0);
        p.gamma_d = getNumOr(params, path, "gamma_d", 1.0);
        p.sigma = getNumOr(params, path, "sigma", 1.0);
        VectorXd u0 = params.contains("u0") ? getVec(params, path, "u0")
                                            : VectorXd(VectorXd::Zero(node_dim));
        if (u0.size() != node_dim) fail(path + ".u0", "dimension mismatch with node");
        return LeafPolicy::fromGds(leaves::jointLimitLeaf(u0, p), toggles);
    }
    if (name == "posture") {
        checkKeys(params, path, {"q0", "gamma_p", "gamma_d", "weight"});
        leaves::PostureParams p;
        p.q0 = getVec(params, path, "q0");
        if (p.q0.size() != node_dim) fail(path + ".q0", "dimension mismatch with node");
        p.gamma_p = getNumOr(params, path, "gamma_p", 1.0);
        p.gamma_d = getNumOr(params, path, "gamma_d", 1.0);
        p.weight = getNumOr(params, path, "weight", 1.0);
        return leaves::postureDamperLeaf(p);
    }
    if (name == "pf_basic") return leaves::pfBasicLeaf(parsePfParams(params, path));
    if (name == "pf_nonlinear") return leaves::pfNonlinearLeaf(parsePfParams(params, path));
    if (name == "root_damping") {
        checkKeys(params, path, {"gain"});
        return LeafPolicy::fromGds(
            leaves::rootDampingLeaf(node_dim, getNumOr(params, path, "gain", 1e-3)), toggles);
    }
    throw ConfigError("unknown policy '" + name + "'");
}

RmpTree buildTree(const TreeDecl& decl, const RootDampingConfig& damping) {
    if (decl.config_dim <= 0) throw ConfigError("tree.config_dim must be positive");
    RmpTree tree(decl.config_dim);
    std::map<std::string, RmpNode*> by_name{{"root", &tree.root()}};
    for (const NodeDecl& node : decl.nodes) {
        if (by_name.count(node.name)) throw ConfigError("duplicate node name '" + node.name + "'");
        auto parent = by_name.find(node.parent);
        if (parent == by_name.end())
            throw ConfigError("node '" + node.name + "': parent '" + node.parent +
                              "' not declared before it");
        TaskMap map = buildTaskMap(node.map.name, node.map.params);
        try {
            if (node.policy) {
                LeafPolicy policy = buildLeafPolicy(node.policy->name, node.policy->params,
                                                    map.dimOut(), node.curvature, node.jdot);
                by_name[node.name] =
                    &tree.addLeaf(*parent->second, node.name, std::move(map), std::move(policy));
            } else {
                by_name[node.name] = &tree.addChild(*parent->second, node.name, std::move(map));
            }
        } catch (const DimensionError& e) {
            throw ConfigError("node '" + node.name + "': " + e.what());
        } catch (const std::logic_error& e) {
            throw ConfigError("node '" + node.name + "': " + e.what());
        }
    }
    if (damping.enabled)
        tree.addLeaf(tree.root(), "root_damping", maps::identity(decl.config_dim),
                     LeafPolicy::fromGds(leaves::rootDampingLeaf(decl.config_dim, damping.gain)));
    return tree;
}

namespace {

MapDecl parseMapDecl(const json& j, const std::string& path) {
    checkKeys(j, path, {"name", "params"});
    MapDecl decl;
    decl.name = getStr(j, path, "name");
    decl.params = j.contains("params") ? j.at("params") : json::object();
    return decl;
}

TreeDecl parseTreeDecl(const json& j, const std::string& path) {
    checkKeys(j, path, {"config_dim", "nodes"});
    TreeDecl decl;
    decl.config_dim = getIntOr(j, path, "config_dim", 0);
    const json& nodes = member(j, path, "nodes");
    if (!nodes.is_array()) fail(path + ".nodes", "expected an array");
    for (size_t i = 0; i < nodes.size(); ++i) {
        const std::string npath = path + ".nodes[" + std::to_string(i) + "]";
        checkKeys(nodes[i], npath, {"name", "parent", "map", "policy", "curvature", "jdot"});
        NodeDecl node;
        node.name = getStr(nodes[i], npath, "name");
        node.parent = getStr(nodes[i], npath, "parent");
        node.map = parseMapDecl(member(nodes[i], npath, "map"), npath + ".map");
        if (nodes[i].contains("policy")) {
            const json& pj = nodes[i].at("policy");
            checkKeys(pj, npath + ".policy", {"name", "params"});
            PolicyDecl policy;
            policy.name = getStr(pj, npath + ".policy", "name");
            policy.params = pj.contains("params") ? pj.at("params") : json::object();
            node.policy = std::move(policy);
        }
        node.curvature = getBoolOr(nodes[i], npath, "curvature", true);
        node.jdot = getBoolOr(nodes[i], npath, "jdot", true);
        decl.nodes.push_back(std::move(node));
    }
    return decl;
}

json serializeTreeDecl(const TreeDecl& decl) {
    json nodes = json::array();
    for (const NodeDecl& node : decl.nodes) {
        json nj{{"name", node.name},
                {"parent", node.parent},
                {"map", {{"name", node.map.name}, {"params", node.map.params}}},
                {"curvature", node.curvature},
                {"jdot", node.jdot}};
        if (node.policy)
            nj["policy"] = {{"name", node.policy->name}, {"params", node.policy->params}};
        nodes.push_back(std::move(nj));
    }
    return json{{"config_dim", decl.config_dim}, {"nodes", std::move(nodes)}};
}

StartState parseStartState(const json& j, const std::string& path) {
    checkKeys(j, path, {"q", "qd"});
    StartState s;
    s.q = getVec(j, path, "q");
    s.qd = getVec(j, path, "qd");
    if (s.q.size() != s.qd.size()) fail(path, "q and qd must have equal length");
    return s;
}

json serializeStartState(const StartState& s) {
    return json{{"q", fromVector(s.q)}, {"qd", fromVector(s.qd)}};
}

OneDConfig parseOneD(const json& j, const std::string& path) {
    checkKeys(j, path, {"x_goal", "grid_q", "grid_qd", "variants"});
    OneDConfig cfg;
    cfg.x_goal = getNum(j, path, "x_goal");
    if (cfg.x_goal <= 0.0) fail(path + ".x_goal", "must be positive");
    for (const auto& v : member(j, path, "grid_q")) cfg.grid_q.push_back(v.get<double>());
    for (const auto& v : member(j, path, "grid_qd")) cfg.grid_qd.push_back(v.get<double>());
    const std::set<std::string> known{"reference", "full", "no_jdot", "no_jdot_damped"};
    for (const auto& v : member(j, path, "variants")) {
        const std::string name = v.get<std::string>();
        if (!known.count(name)) fail(path + ".variants", "unknown variant '" + name + "'");
        cfg.variants.push_back(name);
    }
    return cfg;
}

json serializeOneD(const OneDConfig& cfg) {
    return json{{"x_goal", cfg.x_goal},
                {"grid_q", cfg.grid_q},
                {"grid_qd", cfg.grid_qd},
                {"variants", cfg.variants}};
}

TwoDConfig parseTwoD(const json& j, const std::string& path) {
    checkKeys(j, path, {"tree", "starts", "panels"});
    TwoDConfig cfg;
    cfg.tree = parseTreeDecl(member(j, path, "tree"), path + ".tree");
    const json& starts = member(j, path, "starts");
    for (size_t i = 0; i < starts.size(); ++i)
        cfg.starts.push_back(parseStartState(starts[i], path + ".starts[" + std::to_string(i) + "]"));
    const std::set<std::string> known{"a", "b", "c", "d", "e", "f"};
    for (const auto& v : member(j, path, "panels")) {
        const std::string name = v.get<std::string>();
        if (!known.count(name)) fail(path + ".panels", "unknown panel '" + name + "'");
        cfg.panels.push_back(name);
    }
    return cfg;
}

json serializeTwoD(const TwoDConfig& cfg) {
    json starts = json::array();
    for (const StartState& s : cfg.starts) starts.push_back(serializeStartState(s));
    return json{{"tree", serializeTreeDecl(cfg.tree)},
                {"starts", std::move(starts)},
                {"panels", cfg.panels}};
}

ArmConfig parseArm(const json& j, const std::string& path) {
    checkKeys(j, path,
              {"link_lengths", "control_points_per_link", "joint_limits", "q_start", "collision",
               "attractor", "joint_limit", "posture", "scalings", "environments", "targets",
               "methods"});
    ArmConfig cfg;
    const VectorXd lengths = getVec(j, path, "link_lengths");
    cfg.link_lengths.assign(lengths.begin(), lengths.end());
    cfg.control_points_per_link = getIntOr(j, path, "control_points_per_link", 2);
    const json& limits = member(j, path, "joint_limits");
    checkKeys(limits, path + ".joint_limits", {"lower", "upper"});
    cfg.joint_lower = getVec(limits, path + ".joint_limits", "lower");
    cfg.joint_upper = getVec(limits, path + ".joint_limits", "upper");
    cfg.q_start = getVec(j, path, "q_start");

    cfg.collision = parseCollisionParams(member(j, path, "collision"), path + ".collision");
    cfg.attractor = parseAttractorParams(member(j, path, "attractor"), path + ".attractor");

    const json& jl = member(j, path, "joint_limit");
    checkKeys(jl, path + ".joint_limit", {"gamma_p", "gamma_d", "sigma", "slope"});
    cfg.joint_limit.gamma_p = getNumOr(jl, path + ".joint_limit", "gamma_p", 1.0);
    cfg.joint_limit.gamma_d = getNumOr(jl, path + ".joint_limit", "gamma_d", 1.0);
    cfg.joint_limit.sigma = getNumOr(jl, path + ".joint_limit", "sigma", 1.0);
    cfg.joint_limit_slope = getNumOr(jl, path + ".joint_limit", "slope", 1.0);

    const json& posture = member(j, path, "posture");
    checkKeys(posture, path + ".posture", {"q0", "gamma_p", "gamma_d", "weight"});
    cfg.posture.q0 = posture.contains("q0") ? getVec(posture, path + ".posture", "q0")
                                            : cfg.q_start;
    cfg.posture.gamma_p = getNumOr(posture, path + ".posture", "gamma_p", 1.0);
    cfg.posture.gamma_d = getNumOr(posture, path + ".posture", "gamma_d", 1.0);
    cfg.posture.weight = getNumOr(posture, path + ".posture", "weight", 1.0);

    const json& scalings = member(j, path, "scalings");
    for (const auto& [name, pair] : scalings.items()) {
        const VectorXd v = toVector(pair, path + ".scalings." + name);
        if (v.size() != 2) fail(path + ".scalings." + name, "expected [obstacle, cspace]");
        cfg.scalings[name] = {v(0), v(1)};
    }

    const json& envs = member(j, path, "environments");
    for (size_t e = 0; e < envs.size(); ++e) {
        const std::string epath = path + ".environments[" + std::to_string(e) + "]";
        checkKeys(envs[e], epath, {"name", "obstacles"});
        ArmEnvironment env;
        env.name = getStr(envs[e], epath, "name");
        const json& obstacles = member(envs[e], epath, "obstacles");
        for (size_t o = 0; o < obstacles.size(); ++o) {
            const std::string opath = epath + ".obstacles[" + std::to_string(o) + "]";
            checkKeys(obstacles[o], opath, {"center", "radius"});
            ObstacleConfig obs;
            const VectorXd c = getVec(obstacles[o], opath, "center");
            if (c.size() != 2) fail(opath + ".center", "expected a 2D point");
            obs.center = c;
            obs.radius = getNum(obstacles[o], opath, "radius");
            env.obstacles.push_back(obs);
        }
        cfg.environments.push_back(std::move(env));
    }

    const json& targets = member(j, path, "targets");
    checkKeys(targets, path + ".targets", {"count", "radius_range", "angle_range"});
    cfg.target_count = getIntOr(targets, path + ".targets", "count", 10);
    const VectorXd rr = getVec(targets, path + ".targets", "radius_range");
    const VectorXd ar = getVec(targets, path + ".targets", "angle_range");
    if (rr.size() != 2 || ar.size() != 2) fail(path + ".targets", "ranges must be [lo, hi]");
    cfg.target_radius_min = rr(0);
    cfg.target_radius_max = rr(1);
    cfg.target_angle_min = ar(0);
    cfg.target_angle_max = ar(1);

    for (const auto& v : member(j, path, "methods")) {
        const std::string label = v.get<std::string>();
        ArmMethod method;
        if (label == "rmpflow") {
            method.kind = "rmpflow";
        } else {
            for (const char* kind : {"pf_basic", "pf_nonlinear"}) {
                const std::string prefix = std::string(kind) + "_";
                if (label.rfind(prefix, 0) == 0) {
                    method.kind = kind;
                    method.scaling = label.substr(prefix.size());
                }
            }
            if (method.kind.empty()) fail(path + ".methods", "unknown method '" + label + "'");
            if (!cfg.scalings.count(method.scaling))
                fail(path + ".methods", "method '" + label + "' has no scaling entry");
        }
        cfg.methods.push_back(std::move(method));
    }
    return cfg;
}

json serializeArm(const ArmConfig& cfg) {
    json scalings = json::object();
    for (const auto& [name, pair] : cfg.scalings)
        scalings[name] = json::array({pair.first, pair.second});
    json envs = json::array();
    for (const ArmEnvironment& env : cfg.environments) {
        json obstacles = json::array();
        for (const ObstacleConfig& o : env.obstacles)
            obstacles.push_back({{"center", fromVector(o.center)}, {"radius", o.radius}});
        envs.push_back({{"name", env.name}, {"obstacles", std::move(obstacles)}});
    }
    json methods = json::array();
    for (const ArmMethod& m : cfg.methods) methods.push_back(m.label());

    const leaves::CollisionParams& c = cfg.collision;
    const leaves::AttractorParams& a = cfg.attractor;
    return json{
        {"link_lengths", cfg.link_lengths},
        {"control_points_per_link", cfg.control_points_per_link},
        {"joint_limits",
         {{"lower", fromVector(cfg.joint_lower)}, {"upper", fromVector(cfg.joint_upper)}}},
        {"q_start", fromVector(cfg.q_start)},
        {"collision",
         {{"weight", c.weight == leaves::ObstacleWeight::Paper ? "paper" : "bounded"},
          {"w_max", c.w_max},
          {"sigma", c.sigma},
          {"epsilon", c.epsilon},
          {"alpha", c.alpha},
          {"b", c.damping},
          {"weight_scaled_damping", c.weight_scaled_damping}}},
        {"attractor",
         {{"w_min", a.w_min},
          {"w_max", a.w_max},
          {"sigma", a.sigma},
          {"eta", a.damping},
          {"gain", a.gain},
          {"huber_scale", a.huber_scale}}},
        {"joint_limit",
         {{"gamma_p", cfg.joint_limit.gamma_p},
          {"gamma_d", cfg.joint_limit.gamma_d},
          {"sigma", cfg.joint_limit.sigma},
          {"slope", cfg.joint_limit_slope}}},
        {"posture",
         {{"q0", fromVector(cfg.posture.q0)},
          {"gamma_p", cfg.posture.gamma_p},
          {"gamma_d", cfg.posture.gamma_d},
          {"weight", cfg.posture.weight}}},
        {"scalings", std::move(scalings)},
        {"environments", std::move(envs)},
        {"targets",
         {{"count", cfg.target_count},
          {"radius_range", json::array({cfg.target_radius_min, cfg.target_radius_max})},
          {"angle_range", json::array({cfg.target_angle_min, cfg.target_angle_max})}}},
        {"methods", std::move(methods)}};
}

InvarianceConfig parseInvariance(const json& j, const std::string& path) {
    checkKeys(j, path, {"tree", "reparam", "initial"});
    InvarianceConfig cfg;
    cfg.tree = parseTreeDecl(member(j, path, "tree"), path + ".tree");
    const json& rep = member(j, path, "reparam");
    checkKeys(rep, path + ".reparam", {"kind", "amplitude", "matrix"});
    cfg.reparam.kind = getStr(rep, path + ".reparam", "kind");
    if (cfg.reparam.kind != "identity" && cfg.reparam.kind != "linear" &&
        cfg.reparam.kind != "sine")
        fail(path + ".reparam.kind", "expected identity, linear or sine");
    cfg.reparam.amplitude = getNumOr(rep, path + ".reparam", "amplitude", 0.3);
    if (cfg.reparam.kind == "sine" && std::abs(cfg.reparam.amplitude) >= 1.0)
        fail(path + ".reparam.amplitude", "sine reparameterization needs |amplitude| < 1");
    if (rep.contains("matrix"))
        cfg.reparam.matrix = toMatrix(rep.at("matrix"), path + ".reparam.matrix");
    else if (cfg.reparam.kind == "linear")
        fail(path + ".reparam", "linear reparameterization needs a matrix");
    if (cfg.reparam.kind == "linear" &&
        std::abs(cfg.reparam.matrix.determinant()) < kSingularEps)
        fail(path + ".reparam.matrix", "matrix is not invertible");
    cfg.initial = parseStartState(member(j, path, "initial"), path + ".initial");
    return cfg;
}

json serializeInvariance(const InvarianceConfig& cfg) {
    json rep{{"kind", cfg.reparam.kind}, {"amplitude", cfg.reparam.amplitude}};
    if (cfg.reparam.matrix.size() > 0) rep["matrix"] = fromMatrix(cfg.reparam.matrix);
    return json{{"tree", serializeTreeDecl(cfg.tree)},
                {"reparam", std::move(rep)},
                {"initial", serializeStartState(cfg.initial)}};
}

DynCheckConfig parseDynCheck(const json& j, const std::string& path) {
    checkKeys(j, path, {"chains", "samples", "q_range", "qd_range", "tau_range"});
    DynCheckConfig cfg;
    const json& chains = member(j, path, "chains");
    for (size_t c = 0; c < chains.size(); ++c) {
        const std::string cpath = path + ".chains[" + std::to_string(c) + "]";
        checkKeys(chains[c], cpath, {"name", "links", "gravity"});
        ChainConfig chain;
        chain.name = getStr(chains[c], cpath, "name");
        const json& links = member(chains[c], cpath, "links");
        for (size_t l = 0; l < links.size(); ++l) {
            const std::string lpath = cpath + ".links[" + std::to_string(l) + "]";
            checkKeys(links[l], lpath, {"length", "mass", "mass_offset"});
            ChainLink link;
            link.length = getNum(links[l], lpath, "length");
            link.mass = getNum(links[l], lpath, "mass");
            link.mass_offset = getNumOr(links[l], lpath, "mass_offset", 1.0);
            chain.model.links.push_back(link);
        }
        if (chains[c].contains("gravity")) {
            const VectorXd g = getVec(chains[c], cpath, "gravity");
            if (g.size() != 2) fail(cpath + ".gravity", "expected a 2D vector");
            chain.model.gravity = g;
        }
        chain.model.validate();
        cfg.chains.push_back(std::move(chain));
    }
    cfg.samples = getIntOr(j, path, "samples", 100);
    cfg.q_range = getNumOr(j, path, "q_range", 3.14);
    cfg.qd_range = getNumOr(j, path, "qd_range", 2.0);
    cfg.tau_range = getNumOr(j, path, "tau_range", 1.0);
    return cfg;
}

json serializeDynCheck(const DynCheckConfig& cfg) {
    json chains = json::array();
    for (const ChainConfig& chain : cfg.chains) {
        json links = json::array();
        for (const ChainLink& l : chain.model.links)
            links.push_back(
                {{"length", l.length}, {"mass", l.mass}, {"mass_offset", l.mass_offset}});
        chains.push_back({{"name", chain.name},
                          {"links", std::move(links)},
                          {"gravity", fromVector(chain.model.gravity)}});
    }
    return json{{"chains", std::move(chains)},
                {"samples", cfg.samples},
                {"q_range", cfg.q_range},
                {"qd_range", cfg.qd_range},
                {"tau_range", cfg.tau_range}};
}

}  // namespace

ScenarioConfig parseScenario(const json& doc) {
    const std::string path = "$";
    checkKeys(doc, path,
              {"scenario", "seed", "integrator", "root_damping", "output_dir", "oned", "twod",
               "arm", "invariance", "dyncheck"});
    ScenarioConfig cfg;
    cfg.kind = scenarioKindFromString(getStr(doc, path, "scenario"));
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
            fail(path + ".seed", "expected an integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("integrator")) {
        const json& ij = doc.at("integrator");
        checkKeys(ij, path + ".integrator", {"step", "horizon"});
        cfg.integrator.step = getNumOr(ij, path + ".integrator", "step", 1e-3);
        cfg.integrator.horizon = getNumOr(ij, path + ".integrator", "horizon", 5.0);
        if (cfg.integrator.step <= 0.0) fail(path + ".integrator.step", "must be positive");
        if (cfg.integrator.horizon < cfg.integrator.step)
            fail(path + ".integrator.horizon", "must be at least one step");
    }
    if (doc.contains("root_damping")) {
        const json& rj = doc.at("root_damping");
        checkKeys(rj, path + ".root_damping", {"enabled", "gain"});
        cfg.root_damping.enabled = getBoolOr(rj, path + ".root_damping", "enabled", true);
        cfg.root_damping.gain = getNumOr(rj, path + ".root_damping", "gain", 1e-3);
    }
    if (doc.contains("output_dir")) cfg.output_dir = getStr(doc, path, "output_dir");

    const std::string body = toString(cfg.kind);
    for (const char* key : {"oned", "twod", "arm", "invariance", "dyncheck"})
        if (doc.contains(key) && body != key)
            fail(path + "." + key, "does not match scenario kind '" + body + "'");
    if (!doc.contains(body)) fail(path, "missing scenario body '" + body + "'");

    switch (cfg.kind) {
        case ScenarioKind::OneD: cfg.oned = parseOneD(doc.at(body), path + "." + body); break;
        case ScenarioKind::TwoD: cfg.twod = parseTwoD(doc.at(body), path + "." + body); break;
        case ScenarioKind::Arm: cfg.arm = parseArm(doc.at(body), path + "." + body); break;
        case ScenarioKind::Invariance:
            cfg.invariance = parseInvariance(doc.at(body), path + "." + body);
            break;
        case ScenarioKind::DynCheck:
            cfg.dyncheck = parseDynCheck(doc.at(body), path + "." + body);
            break;
    }
    return cfg;
}

ScenarioConfig loadScenario(const std::filesystem::path& path) {
    return parseScenario(readJson(path));
}

json serializeScenario(const ScenarioConfig& cfg) {
    json doc{{"scenario", toString(cfg.kind)},
             {"seed", cfg.seed},
             {"integrator", {{"step", cfg.integrator.step}, {"horizon", cfg.integrator.horizon}}},
             {"root_damping",
              {{"enabled", cfg.root_damping.enabled}, {"gain", cfg.root_damping.gain}}}};
    if (cfg.output_dir) doc["output_dir"] = *cfg.output_dir;
    switch (cfg.kind) {
        case ScenarioKind::OneD: doc["oned"] = serializeOneD(*cfg.oned); break;
        case ScenarioKind::TwoD: doc["twod"] = serializeTwoD(*cfg.twod); break;
        case ScenarioKind::Arm: doc["arm"] = serializeArm(*cfg.arm); break;
        case ScenarioKind::Invariance:
            doc["invariance"] = serializeInvariance(*cfg.invariance);
            break;
        case ScenarioKind::DynCheck: doc["dyncheck"] = serializeDynCheck(*cfg.dyncheck); break;
    }
    return doc;
}

}  // namespace rmpflow
