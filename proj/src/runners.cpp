#include "rmpflow/runners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "rmpflow/io.hpp"
#include "rmpflow/rng.hpp"

namespace rmpflow {

namespace fs = std::filesystem;

namespace {

VectorXd jsonVector(const json& arr) {
    VectorXd out(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) out(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return out;
}

}  // namespace

Trajectory mapTrajectory(const Trajectory& traj, const TaskMap& map) {
    Trajectory out;
    out.step = traj.step;
    out.horizon = traj.horizon;
    out.termination = traj.termination;
    for (size_t i = 0; i < traj.size(); ++i) {
        const SimState& s = traj.states[i];
        SimState m;
        m.t = s.t;
        m.q = map.value(s.q);
        m.qd = map.jacobian(s.q) * s.qd;
        out.states.push_back(std::move(m));
        out.lyapunov.push_back(traj.lyapunov[i]);
        out.kinetic.push_back(traj.kinetic[i]);
        out.accel_norm.push_back(traj.accel_norm[i]);
        out.obstacle_dist.push_back(traj.obstacle_dist[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// 1D barrier experiment
// ---------------------------------------------------------------------------

namespace {

GdsSpec oneDLeafSpec(double x_goal, bool nonlinear_damping) {
    GdsSpec spec;
    spec.dim = 1;
    spec.metric = [](const VectorXd&, const VectorXd&) { return MatrixXd::Constant(1, 1, 1.0); };
    spec.metric_dx = [](const VectorXd&, const VectorXd&, int) { return MatrixXd::Zero(1, 1); };
    spec.metric_dxd = [](const VectorXd&, const VectorXd&, int) { return MatrixXd::Zero(1, 1); };
    if (nonlinear_damping)
        spec.damping = [](const VectorXd& x, const VectorXd& xd) {
            return MatrixXd::Constant(1, 1, 1.0 + xd(0) * xd(0) / x(0));
        };
    else
        spec.damping = [](const VectorXd& x, const VectorXd&) {
            return MatrixXd::Constant(1, 1, 1.0 + 1.0 / x(0));
        };
    spec.potential = [x_goal](const VectorXd& x) {
        return 0.5 * (x(0) - x_goal) * (x(0) - x_goal);
    };
    spec.potential_grad = [x_goal](const VectorXd& x) {
        return VectorXd::Constant(1, x(0) - x_goal);
    };
    return spec;
}

RmpTree oneDTree(double x_goal, const std::string& variant) {
    RmpTree tree(1);
    CurvatureToggles toggles;
    toggles.jdot_pullback = (variant == "full");
    const bool nonlinear = (variant == "no_jdot_damped");
    tree.addLeaf(tree.root(), "barrier", maps::reciprocal(),
                 LeafPolicy::fromGds(oneDLeafSpec(x_goal, nonlinear), toggles));
    return tree;
}

void writePhasePortrait(const fs::path& path, const std::vector<std::string>& header,
                        const std::vector<double>& grid_a, const std::vector<double>& grid_b,
                        const PolicyFn& policy) {
    CsvWriter csv(path, header);
    VectorXd q(1), qd(1);
    for (double a : grid_a)
        for (double b : grid_b) {
            q(0) = a;
            qd(0) = b;
            double acc = std::nan("");
            try {
                acc = policy(q, qd)(0);
            } catch (const std::exception&) {
            }
            csv.row(std::vector<double>{a, b, acc});
        }
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i)
        out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    return out;
}

}  // namespace

OneDOutcome runOneD(const ScenarioConfig& config, const fs::path& out) {
    const OneDConfig& cfg = *config.oned;
    OneDOutcome outcome;
    const TaskMap barrier_map = maps::reciprocal();
    IntegrateOptions opts;
    opts.step = config.integrator.step;
    opts.horizon = config.integrator.horizon;

    const auto qlo = std::minmax_element(cfg.grid_q.begin(), cfg.grid_q.end());
    const auto qdlo = std::minmax_element(cfg.grid_qd.begin(), cfg.grid_qd.end());
    const std::vector<double> phase_q = linspace(*qlo.first, *qlo.second, 21);
    const std::vector<double> phase_qd = linspace(*qdlo.first, *qdlo.second, 21);

    for (const std::string& variant : cfg.variants) {
        const fs::path dir = out / variant;
        int k = 0;
        if (variant == "reference") {
            const GdsSpec spec = oneDLeafSpec(cfg.x_goal, false);
            PolicyFn policy = [spec](const VectorXd& x, const VectorXd& xd) {
                return gdsAccel(spec, x, xd);
            };
            for (double q0 : cfg.grid_q)
                for (double qd0 : cfg.grid_qd) {
                    // Matching start in x-space: x = 1/q, xd = -qd/q^2.
                    SimState init;
                    init.q = VectorXd::Constant(1, 1.0 / q0);
                    init.qd = VectorXd::Constant(1, -qd0 / (q0 * q0));
                    Trajectory traj = integrate(policy, init, opts);
                    writeTrajectoryCsv(dir / ("traj_x_" + std::to_string(k) + ".csv"), traj);
                    outcome.x_space[variant].push_back(std::move(traj));
                    ++k;
                }
            writePhasePortrait(dir / "phase.csv", {"x", "xd", "xdd"},
                               linspace(1.0 / *qlo.second, 1.0 / *qlo.first, 21),
                               phase_qd, policy);
            continue;
        }
        RmpTree tree = oneDTree(cfg.x_goal, variant);
        const GdsAggregate agg = tree.rootAggregate();
        Instrumentation instr;
        instr.aggregate = &agg;
        PolicyFn policy = [&tree](const VectorXd& q, const VectorXd& qd) {
            return tree.evaluate(q, qd).accel;
        };
        for (double q0 : cfg.grid_q)
            for (double qd0 : cfg.grid_qd) {
                SimState init;
                init.q = VectorXd::Constant(1, q0);
                init.qd = VectorXd::Constant(1, qd0);
                Trajectory traj = integrate(policy, init, opts, &instr);
                writeTrajectoryCsv(dir / ("traj_q_" + std::to_string(k) + ".csv"), traj);
                Trajectory image = mapTrajectory(traj, barrier_map);
                writeTrajectoryCsv(dir / ("traj_x_" + std::to_string(k) + ".csv"), image);
                outcome.q_space[variant].push_back(std::move(traj));
                outcome.x_space[variant].push_back(std::move(image));
                ++k;
            }
        writePhasePortrait(dir / "phase.csv", {"q", "qd", "qdd"}, phase_q, phase_qd, policy);
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// 2D panels
// ---------------------------------------------------------------------------

namespace {

const NodeDecl* findPolicyNode(const TreeDecl& decl, const std::string& policy_name) {
    for (const NodeDecl& node : decl.nodes)
        if (node.policy && node.policy->name == policy_name) return &node;
    return nullptr;
}

// Nodes on the path root -> `name`, in declaration order.
TreeDecl pathOnlyDecl(const TreeDecl& decl, const std::string& name) {
    std::set<std::string> keep;
    std::string cursor = name;
    while (cursor != "root") {
        keep.insert(cursor);
        bool found = false;
        for (const NodeDecl& node : decl.nodes)
            if (node.name == cursor) {
                cursor = node.parent;
                found = true;
                break;
            }
        if (!found) throw ConfigError("tree node '" + cursor + "' has no declaration");
    }
    TreeDecl out;
    out.config_dim = decl.config_dim;
    for (const NodeDecl& node : decl.nodes)
        if (keep.count(node.name)) out.nodes.push_back(node);
    return out;
}

std::vector<std::function<double(const VectorXd&)>> declObstacleDistances(const TreeDecl& decl) {
    std::vector<std::function<double(const VectorXd&)>> out;
    for (const NodeDecl& node : decl.nodes)
        if (node.map.name == "distance_to_point") {
            const VectorXd center = jsonVector(node.map.params.at("center"));
            const double radius = node.map.params.at("radius").get<double>();
            out.push_back([center, radius](const VectorXd& q) {
                return (q - center).norm() - radius;
            });
        }
    return out;
}

}  // namespace

TwoDOutcome runTwoD(const ScenarioConfig& config, const fs::path& out) {
    const TwoDConfig& cfg = *config.twod;
    TwoDOutcome outcome;

    const NodeDecl* collision = findPolicyNode(cfg.tree, "collision_1d");
    if (!collision) throw ConfigError("twod: tree declares no collision_1d leaf");
    const NodeDecl* attractor = findPolicyNode(cfg.tree, "attractor");

    IntegrateOptions opts;
    opts.step = config.integrator.step;
    opts.horizon = config.integrator.horizon;

    // Panel overrides: (curvature+jdot, alpha, keep attractor).
    struct Panel {
        bool curvature;
        double alpha;
        bool combined;
    };
    const std::map<std::string, Panel> panel_defs{
        {"a", {false, 0.0, false}}, {"b", {true, 0.0, false}},  {"c", {false, 1.0, false}},
        {"d", {true, 1.0, false}}, {"e", {true, -1.0, true}},  // -1: keep configured alpha
    };

    const auto obstacle_fns = declObstacleDistances(cfg.tree);
    const bool want_lyapunov = std::count(cfg.panels.begin(), cfg.panels.end(), "f") > 0;

    std::optional<VectorXd> goal;
    if (attractor && attractor->map.name == "offset")
        goal = jsonVector(attractor->map.params.at("goal"));

    for (const std::string& panel : cfg.panels) {
        if (panel == "f") continue;  // derived from panel e below
        const Panel& def = panel_defs.at(panel);

        TreeDecl decl = def.combined ? cfg.tree : pathOnlyDecl(cfg.tree, collision->name);
        for (NodeDecl& node : decl.nodes)
            if (node.policy && node.policy->name == "collision_1d") {
                node.curvature = def.curvature;
                node.jdot = def.curvature;
                if (def.alpha >= 0.0) {
                    node.policy->params["alpha"] = def.alpha;
                    node.policy->params["b"] = 0.0;
                }
            }
        RootDampingConfig damping = config.root_damping;
        if (!def.combined) damping.enabled = false;

        RmpTree tree = buildTree(decl, damping);
        const GdsAggregate agg = tree.rootAggregate();
        Instrumentation instr;
        instr.aggregate = &agg;
        instr.obstacle_distances = obstacle_fns;

        const fs::path dir = out / ("panel_" + panel);
        for (size_t k = 0; k < cfg.starts.size(); ++k) {
            Trajectory traj = integrate(tree, SimState{0.0, cfg.starts[k].q, cfg.starts[k].qd},
                                        opts, &instr);
            writeTrajectoryCsv(dir / ("traj_" + std::to_string(k) + ".csv"), traj);
            if (def.combined) {
                if (goal) {
                    const RunMetrics m = metrics(
                        traj, [](const VectorXd& q) { return q; }, *goal);
                    writeJson(dir / ("metrics_" + std::to_string(k) + ".json"),
                              runMetricsJson(m));
                }
                if (want_lyapunov) {
                    LyapunovSeries series = lyapunovSeries(traj, agg);
                    CsvWriter csv(out / "panel_f" / ("lyap_" + std::to_string(k) + ".csv"),
                                  {"t", "V", "Vdot_numeric", "damping_rate"});
                    for (size_t i = 0; i < series.t.size(); ++i)
                        csv.row(std::vector<double>{series.t[i], series.v[i],
                                                    series.vdot_numeric[i],
                                                    series.damping_rate[i]});
                    outcome.lyapunov.push_back(std::move(series));
                }
            }
            outcome.panels[panel].push_back(std::move(traj));
        }
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Arm benchmark
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kTargetStream = 0x74617267ULL;  // stream tag for target draws

std::vector<std::pair<int, double>> controlPointSpecs(const ArmConfig& arm) {
    std::vector<std::pair<int, double>> specs;  // (link index, offset)
    const int n = static_cast<int>(arm.link_lengths.size());
    for (int i = 0; i < n; ++i)
        for (int k = 1; k <= arm.control_points_per_link; ++k)
            specs.emplace_back(i, static_cast<double>(k) / arm.control_points_per_link);
    return specs;
}

}  // namespace

std::vector<Eigen::Vector2d> armTargets(const ArmConfig& arm, std::uint64_t seed) {
    std::vector<Eigen::Vector2d> targets;
    constexpr double clearance = 0.12;
    for (int trial = 0; trial < arm.target_count; ++trial) {
        CounterRng rng(seed, {kTargetStream, static_cast<std::uint64_t>(trial)});
        for (int attempt = 0;; ++attempt) {
            if (attempt > 1000)
                throw ConfigError("armTargets: cannot place target " + std::to_string(trial) +
                                  " outside all obstacles");
            const double r = rng.uniform(arm.target_radius_min, arm.target_radius_max);
            const double th = rng.uniform(arm.target_angle_min, arm.target_angle_max);
            const Eigen::Vector2d p(r * std::cos(th), r * std::sin(th));
            bool clear = true;
            for (const ArmEnvironment& env : arm.environments)
                for (const ObstacleConfig& obs : env.obstacles)
                    if ((p - obs.center).norm() < obs.radius + clearance) clear = false;
            if (clear) {
                targets.push_back(p);
                break;
            }
        }
    }
    return targets;
}

RmpTree buildArmTree(const ArmConfig& arm, const ArmEnvironment& env,
                     const Eigen::Vector2d& target, const ArmMethod& method,
                     const RootDampingConfig& damping) {
    const int n = static_cast<int>(arm.link_lengths.size());
    const bool rmp = method.kind == "rmpflow";
    // Scaling entries are the absolute obstacle-metric and C-space-metric
    // scalars of the PF variants; potentials and dampers stay at baseline.
    const double obstacle_metric = rmp ? 0.0 : arm.scalings.at(method.scaling).first;
    const double cspace_metric = rmp ? arm.posture.weight : arm.scalings.at(method.scaling).second;

    CurvatureToggles pf_toggles;
    pf_toggles.inertia_correction = false;
    pf_toggles.curvature_force = false;
    pf_toggles.jdot_pullback = false;
    const CurvatureToggles toggles = rmp ? CurvatureToggles{} : pf_toggles;

    RmpTree tree(n);
    const auto specs = controlPointSpecs(arm);
    RmpNode* ee_node = nullptr;
    for (size_t c = 0; c < specs.size(); ++c) {
        const auto [link, offset] = specs[c];
        RmpNode& cp = tree.addChild(tree.root(), "cp" + std::to_string(c),
                                    maps::planarArmFk(arm.link_lengths, offset, link));
        if (link == n - 1 && offset == 1.0) ee_node = &cp;
        for (size_t o = 0; o < env.obstacles.size(); ++o) {
            const ObstacleConfig& obs = env.obstacles[o];
            const std::string name = "cp" + std::to_string(c) + "_obs" + std::to_string(o);
            if (rmp) {
                tree.addLeaf(cp, name, maps::distanceToPoint(obs.center, obs.radius),
                             LeafPolicy::fromGds(leaves::collisionLeaf1d(arm.collision), toggles));
            } else {
                leaves::PfParams pf;
                pf.obstacle_center = obs.center;
                pf.obstacle_radius = obs.radius;
                pf.w_max = obstacle_metric;
                pf.sigma = arm.collision.sigma;
                pf.alpha = arm.collision.alpha;
                pf.damping = arm.collision.damping;
                pf.barrier_w_max = arm.collision.w_max;
                pf.weight_scaled_damping = arm.collision.weight_scaled_damping;
                tree.addLeaf(cp, name, maps::identity(2),
                             method.kind == "pf_basic" ? leaves::pfBasicLeaf(pf)
                                                       : leaves::pfNonlinearLeaf(pf));
            }
        }
    }
    if (!ee_node) throw ConfigError("buildArmTree: no end-effector control point");

    leaves::AttractorParams attractor = arm.attractor;
    if (method.kind == "pf_basic") attractor.w_min = attractor.w_max;  // constant isotropic metric
    tree.addLeaf(*ee_node, "attract", maps::offset(target),
                 LeafPolicy::fromGds(leaves::attractorLeaf(2, attractor), toggles));

    const TaskMap jl_map = maps::jointLimit(arm.joint_lower, arm.joint_upper, arm.joint_limit_slope);
    const VectorXd u0 = jl_map.value(arm.posture.q0);
    tree.addLeaf(tree.root(), "joint_limit", jl_map,
                 LeafPolicy::fromGds(leaves::jointLimitLeaf(u0, arm.joint_limit), toggles));

    leaves::PostureParams posture = arm.posture;
    posture.weight = cspace_metric;
    tree.addLeaf(tree.root(), "posture", maps::identity(n), leaves::postureDamperLeaf(posture));

    if (damping.enabled)
        tree.addLeaf(tree.root(), "root_damping", maps::identity(n),
                     LeafPolicy::fromGds(leaves::rootDampingLeaf(n, damping.gain)));
    return tree;
}

ArmOutcome runArm(const ScenarioConfig& config, const fs::path& out) {
    const ArmConfig& arm = *config.arm;
    ArmOutcome outcome;
    const int n = static_cast<int>(arm.link_lengths.size());
    if (arm.q_start.size() != n) throw ConfigError("arm: q_start dimension mismatch");

    const std::vector<Eigen::Vector2d> targets = armTargets(arm, config.seed);
    const TaskMap ee_map = maps::planarArmFk(arm.link_lengths, 1.0, n - 1);
    auto ee_point = [&ee_map](const VectorXd& q) { return ee_map.value(q); };

    // Control-point maps for collision accounting (value-only use).
    std::vector<TaskMap> cp_maps;
    for (const auto& [link, offset] : controlPointSpecs(arm))
        cp_maps.push_back(maps::planarArmFk(arm.link_lengths, offset, link));

    IntegrateOptions opts;
    opts.step = config.integrator.step;
    opts.horizon = config.integrator.horizon;

    CsvWriter trials_csv(out / "trials.csv",
                         {"method", "env", "trial", "target_x", "target_y", "time_to_goal",
                          "path_length", "goal_distance", "collision_intensity", "collided",
                          "termination"});
    json trials_json = json::array();

    for (const ArmMethod& method : arm.methods) {
        for (const ArmEnvironment& env : arm.environments) {
            Instrumentation instr;
            for (const ObstacleConfig& obs : env.obstacles)
                instr.obstacle_distances.push_back([&cp_maps, obs](const VectorXd& q) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const TaskMap& map : cp_maps)
                        best = std::min(best,
                                        (map.value(q) - VectorXd(obs.center)).norm() - obs.radius);
                    return best;
                });
            for (int trial = 0; trial < arm.target_count; ++trial) {
                ArmTrial row;
                row.method = method.label();
                row.env = env.name;
                row.trial = trial;
                row.target = targets[trial];
                try {
                    RmpTree tree =
                        buildArmTree(arm, env, targets[trial], method, config.root_damping);
                    Trajectory traj = integrate(
                        tree, SimState{0.0, arm.q_start, VectorXd::Zero(n)}, opts, &instr);
                    row.termination = traj.termination;
                    row.metrics = metrics(traj, ee_point, targets[trial]);
                } catch (const std::exception& e) {
                    row.termination = std::string("failed: ") + e.what();
                }
                trials_csv.row(std::vector<std::string>{
                    row.method, row.env, std::to_string(row.trial),
                    CsvWriter::format(row.target.x()), CsvWriter::format(row.target.y()),
                    CsvWriter::format(row.metrics.time_to_goal),
                    CsvWriter::format(row.metrics.path_length),
                    CsvWriter::format(row.metrics.goal_distance),
                    CsvWriter::format(row.metrics.collision_intensity),
                    row.metrics.collided ? "true" : "false", row.termination});
                json tj = runMetricsJson(row.metrics);
                tj["method"] = row.method;
                tj["env"] = row.env;
                tj["trial"] = row.trial;
                tj["target"] = {row.target.x(), row.target.y()};
                tj["termination"] = row.termination;
                trials_json.push_back(std::move(tj));
                outcome.trials.push_back(std::move(row));
            }
        }
    }

    // Aggregate table: the five measures, mean and spread per method.
    CsvWriter agg_csv(out / "aggregate.csv",
                      {"method", "time_mean", "time_std", "length_mean", "length_std",
                       "goal_distance_mean", "goal_distance_std", "collision_intensity_mean",
                       "collision_intensity_std", "collision_failure"});
    for (const ArmMethod& method : arm.methods) {
        std::vector<double> time, length, dist, intensity;
        int collided = 0, total = 0;
        for (const ArmTrial& row : outcome.trials) {
            if (row.method != method.label()) continue;
            ++total;
            time.push_back(row.metrics.time_to_goal);
            length.push_back(row.metrics.path_length);
            dist.push_back(row.metrics.goal_distance);
            if (row.metrics.collided) {
                ++collided;
                intensity.push_back(row.metrics.collision_intensity);
            }
        }
        auto mean = [](const std::vector<double>& v) {
            return v.empty() ? 0.0
                             : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        };
        auto stddev = [&mean](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            const double m = mean(v);
            double acc = 0.0;
            for (double x : v) acc += (x - m) * (x - m);
            return std::sqrt(acc / (v.size() - 1));
        };
        agg_csv.row(std::vector<std::string>{
            method.label(), CsvWriter::format(mean(time)), CsvWriter::format(stddev(time)),
            CsvWriter::format(mean(length)), CsvWriter::format(stddev(length)),
            CsvWriter::format(mean(dist)), CsvWriter::format(stddev(dist)),
            CsvWriter::format(mean(intensity)), CsvWriter::format(stddev(intensity)),
            CsvWriter::format(total ? static_cast<double>(collided) / total : 0.0)});
    }

    json doc{{"trials", std::move(trials_json)}};
    writeJson(out / "metrics.json", doc);
#ifdef RMPFLOW_SCHEMA_DIR
    const fs::path schema_path = fs::path(RMPFLOW_SCHEMA_DIR) / "metrics.schema.json";
    if (fs::exists(schema_path)) validateAgainstSchema(doc, readJson(schema_path));
#endif
    return outcome;
}

// ---------------------------------------------------------------------------
// Coordinate invariance
// ---------------------------------------------------------------------------

namespace {

struct Reparam {
    TaskMap forward;  // q -> q'
    TaskMap inverse;  // q' -> q
};

Reparam makeReparam(const ReparamConfig& cfg, int dim) {
    if (cfg.kind == "identity") return {maps::identity(dim), maps::identity(dim)};
    if (cfg.kind == "linear")
        return {maps::linear(cfg.matrix), maps::linear(cfg.matrix.inverse())};
    const double a = cfg.amplitude;
    maps::Diffeo1d h;
    h.h = [a](double q) { return q + a * std::sin(q); };
    h.dh = [a](double q) { return 1.0 + a * std::cos(q); };
    h.d2h = [a](double q) { return -a * std::sin(q); };
    return {maps::componentwise(h, dim), maps::componentwiseInverse(h, dim)};
}

// The declared tree rebuilt over reparameterized coordinates: everything
// hangs under one extra node mapping q' back to q.
RmpTree buildReparamTree(const TreeDecl& decl, const RootDampingConfig& damping,
                         const TaskMap& inverse) {
    RmpTree tree(decl.config_dim);
    RmpNode& base = tree.addChild(tree.root(), "base", inverse);
    std::map<std::string, RmpNode*> by_name{{"root", &base}};
    for (const NodeDecl& node : decl.nodes) {
        RmpNode* parent = by_name.at(node.parent);
        TaskMap map = buildTaskMap(node.map.name, node.map.params);
        if (node.policy) {
            LeafPolicy policy = buildLeafPolicy(node.policy->name, node.policy->params,
                                                map.dimOut(), node.curvature, node.jdot);
            by_name[node.name] = &tree.addLeaf(*parent, node.name, std::move(map), std::move(policy));
        } else {
            by_name[node.name] = &tree.addChild(*parent, node.name, std::move(map));
        }
    }
    if (damping.enabled)
        tree.addLeaf(base, "root_damping", maps::identity(decl.config_dim),
                     LeafPolicy::fromGds(leaves::rootDampingLeaf(decl.config_dim, damping.gain)));
    return tree;
}

}  // namespace

InvarianceOutcome runInvariance(const ScenarioConfig& config, const fs::path& out) {
    const InvarianceConfig& cfg = *config.invariance;
    const int dim = cfg.tree.config_dim;
    const Reparam reparam = makeReparam(cfg.reparam, dim);

    RmpTree tree_a = buildTree(cfg.tree, config.root_damping);
    RmpTree tree_b = buildReparamTree(cfg.tree, config.root_damping, reparam.inverse);

    IntegrateOptions opts;
    opts.step = config.integrator.step;
    opts.horizon = config.integrator.horizon;

    const SimState init_a{0.0, cfg.initial.q, cfg.initial.qd};
    const SimState init_b{0.0, reparam.forward.value(cfg.initial.q),
                          reparam.forward.jacobian(cfg.initial.q) * cfg.initial.qd};

    Trajectory traj_a = integrate(tree_a, init_a, opts);
    Trajectory traj_b = integrate(tree_b, init_b, opts);
    writeTrajectoryCsv(out / "traj_base.csv", traj_a);
    writeTrajectoryCsv(out / "traj_reparam.csv", traj_b);

    const auto leaves_a = tree_a.leafMaps();
    const auto leaves_b = tree_b.leafMaps();
    if (leaves_a.size() != leaves_b.size())
        throw NumericalError("runInvariance: leaf count mismatch between trees");

    InvarianceOutcome outcome;
    outcome.termination_base = traj_a.termination;
    outcome.termination_reparam = traj_b.termination;
    outcome.compared_samples = std::min(traj_a.size(), traj_b.size());
    for (size_t s = 0; s < outcome.compared_samples; ++s) {
        for (size_t l = 0; l < leaves_a.size(); ++l) {
            const VectorXd ya = leaves_a[l].first.value(traj_a.states[s].q);
            const VectorXd yb = leaves_b[l].first.value(traj_b.states[s].q);
            outcome.sup_deviation =
                std::max(outcome.sup_deviation, (ya - yb).lpNorm<Eigen::Infinity>());
        }
    }
    writeJson(out / "invariance.json",
              json{{"sup_deviation", outcome.sup_deviation},
                   {"compared_samples", outcome.compared_samples},
                   {"termination_base", outcome.termination_base},
                   {"termination_reparam", outcome.termination_reparam},
                   {"reparam", cfg.reparam.kind}});
    return outcome;
}

// ---------------------------------------------------------------------------
// Rigid-dynamics check
// ---------------------------------------------------------------------------

DynCheckOutcome runDynCheck(const ScenarioConfig& config, const fs::path& out) {
    const DynCheckConfig& cfg = *config.dyncheck;
    DynCheckOutcome outcome;
    json report = json::array();
    for (size_t c = 0; c < cfg.chains.size(); ++c) {
        const ChainConfig& chain = cfg.chains[c];
        const int n = chain.model.dof();
        DynCheckChainReport rep;
        rep.name = chain.name;
        rep.samples = cfg.samples;
        CounterRng rng(config.seed, {0x647963ULL, static_cast<std::uint64_t>(c)});
        for (int s = 0; s < cfg.samples; ++s) {
            VectorXd q(n), qd(n), tau(n), qdd(n);
            for (int i = 0; i < n; ++i) {
                q(i) = rng.uniform(-cfg.q_range, cfg.q_range);
                qd(i) = rng.uniform(-cfg.qd_range, cfg.qd_range);
                tau(i) = rng.uniform(-cfg.tau_range, cfg.tau_range);
                qdd(i) = rng.uniform(-cfg.tau_range, cfg.tau_range);
            }
            const VectorXd fd_tree = forwardDynamicsRmp(chain.model, q, qd, tau);
            const VectorXd fd_ref = lagrangianForwardDynamics(chain.model, q, qd, tau);
            rep.max_forward_rel_err = std::max(
                rep.max_forward_rel_err, (fd_tree - fd_ref).norm() / (1.0 + fd_ref.norm()));

            const VectorXd tau_rt = inverseDynamicsRmp(chain.model, q, qd, qdd);
            const VectorXd qdd_rt = forwardDynamicsRmp(chain.model, q, qd, tau_rt);
            rep.max_roundtrip_err =
                std::max(rep.max_roundtrip_err, (qdd_rt - qdd).lpNorm<Eigen::Infinity>());

            if (n == 1) {
                const double g = chain.model.gravity.norm();
                const double l =
                    chain.model.links[0].mass_offset * chain.model.links[0].length;
                // q measured from the downward vertical at gravity (0, -g).
                const VectorXd qdd_pend = forwardDynamicsRmp(
                    chain.model, VectorXd::Constant(1, q(0) - M_PI / 2.0), VectorXd::Zero(1),
                    VectorXd::Zero(1));
                const double expected = -(g / l) * std::sin(q(0));
                rep.max_pendulum_err =
                    std::max(rep.max_pendulum_err, std::abs(qdd_pend(0) - expected));
            }
        }
        report.push_back(json{{"name", rep.name},
                              {"samples", rep.samples},
                              {"max_forward_rel_err", rep.max_forward_rel_err},
                              {"max_roundtrip_err", rep.max_roundtrip_err},
                              {"max_pendulum_err", rep.max_pendulum_err}});
        outcome.chains.push_back(std::move(rep));
    }
    writeJson(out / "dyncheck.json", json{{"chains", std::move(report)}});
    return outcome;
}

RmpTree buildScenarioTree(const ScenarioConfig& config) {
    switch (config.kind) {
        case ScenarioKind::OneD: return oneDTree(config.oned->x_goal, "full");
        case ScenarioKind::TwoD: return buildTree(config.twod->tree, config.root_damping);
        case ScenarioKind::Invariance:
            return buildTree(config.invariance->tree, config.root_damping);
        case ScenarioKind::Arm: {
            const ArmConfig& arm = *config.arm;
            if (arm.environments.empty() || arm.methods.empty())
                throw ConfigError("arm: needs at least one environment and method");
            const auto targets = armTargets(arm, config.seed);
            return buildArmTree(arm, arm.environments.front(), targets.front(),
                                arm.methods.front(), config.root_damping);
        }
        case ScenarioKind::DynCheck:
            if (config.dyncheck->chains.empty()) throw ConfigError("dyncheck: no chains");
            return buildChainTree(config.dyncheck->chains.front().model);
    }
    throw ConfigError("unknown scenario kind");
}

}  // namespace rmpflow
