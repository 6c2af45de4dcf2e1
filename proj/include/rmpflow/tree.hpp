#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmpflow/core.hpp"
#include "rmpflow/gds.hpp"
#include "rmpflow/rmp.hpp"
#include "rmpflow/task_map.hpp"

namespace rmpflow {

// State propagation along an edge: y = psi(x), yd = J(x) xd.
State pushforward(const State& parent, const TaskMap& edge);

struct RmpChild {
    NaturalRmp rmp;
    TaskMap edge;
};

// Force/metric aggregation toward the parent (children combined in listed
// order): f = sum J_i^T (f_i - M_i Jdot_i xd), M = sum J_i^T M_i J_i.
NaturalRmp pullback(const std::vector<RmpChild>& children, const State& parent);

// Least-squares form of the same aggregation: converts children to canonical
// form a_i = M_i^+ f_i and minimizes sum |J_i a + Jdot_i xd - a_i|^2_{M_i}.
CanonicalRmp pullbackCanonical(const std::vector<RmpChild>& children, const State& parent);

// Leaf policy: either a GDS or a raw natural-RMP function of the leaf state.
class LeafPolicy {
public:
    static LeafPolicy fromGds(GdsSpec spec, CurvatureToggles toggles = {});
    static LeafPolicy fromRaw(std::function<NaturalRmp(const VectorXd&, const VectorXd&)> fn,
                              bool jdot_pullback = true);

    NaturalRmp evaluate(const VectorXd& x, const VectorXd& xd) const;
    const CurvatureToggles& toggles() const { return toggles_; }
    bool isGds() const { return gds_.has_value(); }
    const GdsSpec& gds() const { return *gds_; }

private:
    LeafPolicy() = default;
    std::optional<GdsSpec> gds_;
    std::function<NaturalRmp(const VectorXd&, const VectorXd&)> raw_;
    CurvatureToggles toggles_;
};

class RmpTree;

class RmpNode {
public:
    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    bool isRoot() const { return !edge_.has_value(); }
    bool isLeaf() const { return policy_.has_value(); }
    const State& state() const { return state_; }
    const std::vector<std::unique_ptr<RmpNode>>& children() const { return children_; }
    const TaskMap& edge() const { return *edge_; }
    const LeafPolicy& policy() const { return *policy_; }

private:
    friend class RmpTree;
    RmpNode(std::string name, int dim) : name_(std::move(name)), dim_(dim) {}
    std::unique_ptr<RmpNode> clone() const;

    std::string name_;
    int dim_;
    std::optional<TaskMap> edge_;  // absent at the root
    std::optional<LeafPolicy> policy_;
    std::vector<std::unique_ptr<RmpNode>> children_;

    // Per-evaluation caches, refreshed by the forward pass.
    State state_;
    MatrixXd edge_jac_;
    VectorXd edge_jdotv_;
    NaturalRmp acc_full_;   // contributions whose path keeps Jdot corrections
    NaturalRmp acc_plain_;  // contributions with the Jdot term dropped
};

struct TreeEval {
    VectorXd accel;    // resolved root policy pi(q, qd)
    MatrixXd inertia;  // root M_r
    VectorXd force;    // root f_r (natural form, kept for inverse dynamics)
};

// Rooted tree of coordinate spaces joined by task maps, with policies at the
// leaves. Evaluation is deterministic: children combine in declaration order.
// Trees are cheap to clone; concurrent runs use independent clones.
class RmpTree {
public:
    explicit RmpTree(int config_dim, std::string root_name = "root");
    RmpTree(const RmpTree& other);
    RmpTree& operator=(const RmpTree& other);
    RmpTree(RmpTree&&) = default;
    RmpTree& operator=(RmpTree&&) = default;

    int configDim() const { return config_dim_; }
    RmpNode& root() { return *root_; }
    const RmpNode& root() const { return *root_; }

    // Internal node on a new subspace reached through `edge`.
    RmpNode& addChild(RmpNode& parent, const std::string& name, TaskMap edge);
    // Leaf node carrying a policy.
    RmpNode& addLeaf(RmpNode& parent, const std::string& name, TaskMap edge, LeafPolicy policy);

    // Forward pass (state propagation), backward pass (pullback in
    // declaration order), then one resolve at the root.
    TreeEval evaluate(const VectorXd& q, const VectorXd& qd);

    // Star-shaped restructuring over composed edge maps.
    RmpTree flattened() const;

    // Theorem-1 sums (G, B, Phi) over all GDS leaves through composed maps.
    GdsAggregate rootAggregate() const;

    // Composed map and policy of every leaf, in declaration order.
    std::vector<std::pair<TaskMap, const LeafPolicy*>> leafMaps() const;

    void print(std::ostream& os) const;

private:
    void forwardPass(RmpNode& node, const State& state);
    void backwardPass(RmpNode& node);

    int config_dim_;
    std::unique_ptr<RmpNode> root_;
};

}  // namespace rmpflow
