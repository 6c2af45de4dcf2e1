#include "rmpflow/tree.hpp"

#include <ostream>

namespace rmpflow {

State pushforward(const State& parent, const TaskMap& edge) {
    if (parent.x.size() != edge.dimIn())
        throw DimensionError("pushforward: state dim " + std::to_string(parent.x.size()) +
                             " does not match edge input dim " + std::to_string(edge.dimIn()));
    return {edge.value(parent.x), edge.jacobian(parent.x) * parent.xd};
}

NaturalRmp pullback(const std::vector<RmpChild>& children, const State& parent) {
    const int m = static_cast<int>(parent.x.size());
    NaturalRmp out = NaturalRmp::zero(m);
    for (size_t i = 0; i < children.size(); ++i) {
        const RmpChild& c = children[i];
        if (c.edge.dimIn() != m)
            throw DimensionError("pullback: child " + std::to_string(i) + " edge input dim " +
                                 std::to_string(c.edge.dimIn()) + " mismatches parent dim " +
                                 std::to_string(m));
        if (c.rmp.dim() != c.edge.dimOut())
            throw DimensionError("pullback: child " + std::to_string(i) + " RMP dim " +
                                 std::to_string(c.rmp.dim()) + " mismatches edge output dim " +
                                 std::to_string(c.edge.dimOut()));
        const MatrixXd j = c.edge.jacobian(parent.x);
        const VectorXd jdotv = c.edge.jdotTimesV(parent.x, parent.xd);
        out.f += j.transpose() * (c.rmp.f - c.rmp.m * jdotv);
        out.m += j.transpose() * c.rmp.m * j;
    }
    return out;
}

CanonicalRmp pullbackCanonical(const std::vector<RmpChild>& children, const State& parent) {
    const int m = static_cast<int>(parent.x.size());
    MatrixXd inertia = MatrixXd::Zero(m, m);
    VectorXd rhs = VectorXd::Zero(m);
    for (size_t i = 0; i < children.size(); ++i) {
        const RmpChild& c = children[i];
        if (c.edge.dimIn() != m || c.rmp.dim() != c.edge.dimOut())
            throw DimensionError("pullbackCanonical: child " + std::to_string(i) +
                                 " dimension mismatch");
        const MatrixXd j = c.edge.jacobian(parent.x);
        const VectorXd jdotv = c.edge.jdotTimesV(parent.x, parent.xd);
        const VectorXd a_i = pinvSolve(c.rmp.m, c.rmp.f);
        inertia += j.transpose() * c.rmp.m * j;
        rhs += j.transpose() * c.rmp.m * (a_i - jdotv);
    }
    return {pinvSolve(inertia, rhs), inertia};
}

LeafPolicy LeafPolicy::fromGds(GdsSpec spec, CurvatureToggles toggles) {
    LeafPolicy p;
    p.gds_ = std::move(spec);
    p.toggles_ = toggles;
    return p;
}

LeafPolicy LeafPolicy::fromRaw(std::function<NaturalRmp(const VectorXd&, const VectorXd&)> fn,
                               bool jdot_pullback) {
    LeafPolicy p;
    p.raw_ = std::move(fn);
    p.toggles_.jdot_pullback = jdot_pullback;
    return p;
}

NaturalRmp LeafPolicy::evaluate(const VectorXd& x, const VectorXd& xd) const {
    if (gds_) return gdsNaturalRmp(*gds_, x, xd, toggles_);
    return raw_(x, xd);
}

std::unique_ptr<RmpNode> RmpNode::clone() const {
    auto copy = std::unique_ptr<RmpNode>(new RmpNode(name_, dim_));
    copy->edge_ = edge_;
    copy->policy_ = policy_;
    for (const auto& child : children_) copy->children_.push_back(child->clone());
    return copy;
}

RmpTree::RmpTree(int config_dim, std::string root_name) : config_dim_(config_dim) {
    if (config_dim <= 0) throw DimensionError("RmpTree: config_dim must be positive");
    root_ = std::unique_ptr<RmpNode>(new RmpNode(std::move(root_name), config_dim));
}

RmpTree::RmpTree(const RmpTree& other) : config_dim_(other.config_dim_) {
    root_ = other.root_->clone();
}

RmpTree& RmpTree::operator=(const RmpTree& other) {
    if (this != &other) {
        config_dim_ = other.config_dim_;
        root_ = other.root_->clone();
    }
    return *this;
}

RmpNode& RmpTree::addChild(RmpNode& parent, const std::string& name, TaskMap edge) {
    if (parent.isLeaf())
        throw std::logic_error("RmpTree: cannot add a child under leaf '" + parent.name_ + "'");
    if (edge.dimIn() != parent.dim_)
        throw DimensionError("RmpTree: edge into '" + name + "' expects dim " +
                             std::to_string(edge.dimIn()) + " but parent '" + parent.name_ +
                             "' has dim " + std::to_string(parent.dim_));
    auto node = std::unique_ptr<RmpNode>(new RmpNode(name, edge.dimOut()));
    node->edge_ = std::move(edge);
    parent.children_.push_back(std::move(node));
    return *parent.children_.back();
}

RmpNode& RmpTree::addLeaf(RmpNode& parent, const std::string& name, TaskMap edge,
                          LeafPolicy policy) {
    RmpNode& node = addChild(parent, name, std::move(edge));
    node.policy_ = std::move(policy);
    return node;
}

void RmpTree::forwardPass(RmpNode& node, const State& state) {
    node.state_ = state;
    for (auto& child : node.children_) {
        try {
            child->edge_jac_ = child->edge_->jacobian(state.x);
            child->edge_jdotv_ = child->edge_->jdotTimesV(state.x, state.xd);
            forwardPass(*child, State(child->edge_->value(state.x), child->edge_jac_ * state.xd));
        } catch (const SingularDomainError& e) {
            throw SingularDomainError("at node '" + child->name_ + "': " + e.what());
        }
    }
}

void RmpTree::backwardPass(RmpNode& node) {
    if (node.isLeaf()) {
        NaturalRmp rmp;
        try {
            rmp = node.policy_->evaluate(node.state_.x, node.state_.xd);
        } catch (const SingularDomainError& e) {
            throw SingularDomainError("at leaf '" + node.name_ + "': " + e.what());
        }
        if (node.policy_->toggles().jdot_pullback) {
            node.acc_full_ = std::move(rmp);
            node.acc_plain_ = NaturalRmp::zero(node.dim_);
        } else {
            node.acc_plain_ = std::move(rmp);
            node.acc_full_ = NaturalRmp::zero(node.dim_);
        }
        return;
    }
    node.acc_full_ = NaturalRmp::zero(node.dim_);
    node.acc_plain_ = NaturalRmp::zero(node.dim_);
    for (auto& child : node.children_) {
        backwardPass(*child);
        const MatrixXd& j = child->edge_jac_;
        node.acc_full_.f +=
            j.transpose() * (child->acc_full_.f - child->acc_full_.m * child->edge_jdotv_);
        node.acc_full_.m += j.transpose() * child->acc_full_.m * j;
        node.acc_plain_.f += j.transpose() * child->acc_plain_.f;
        node.acc_plain_.m += j.transpose() * child->acc_plain_.m * j;
    }
}

TreeEval RmpTree::evaluate(const VectorXd& q, const VectorXd& qd) {
    if (q.size() != config_dim_ || qd.size() != config_dim_)
        throw DimensionError("RmpTree::evaluate: state dim mismatches config_dim " +
                             std::to_string(config_dim_));
    forwardPass(*root_, State(q, qd));
    backwardPass(*root_);
    NaturalRmp natural{root_->acc_full_.f + root_->acc_plain_.f,
                       root_->acc_full_.m + root_->acc_plain_.m};
    if (natural.m.norm() == 0.0)
        throw NumericalError("RmpTree::evaluate: degenerate root (no leaf active)");
    CanonicalRmp canonical = resolve(natural);
    return {std::move(canonical.a), std::move(canonical.m), std::move(natural.f)};
}

namespace {

void collectLeaves(const RmpNode& node, const TaskMap* prefix,
                   std::vector<std::pair<TaskMap, const LeafPolicy*>>& out) {
    for (const auto& child : node.children()) {
        TaskMap composed = prefix ? compose(child->edge(), *prefix) : child->edge();
        if (child->isLeaf())
            out.emplace_back(std::move(composed), &child->policy());
        else
            collectLeaves(*child, &composed, out);
    }
}

}  // namespace

std::vector<std::pair<TaskMap, const LeafPolicy*>> RmpTree::leafMaps() const {
    std::vector<std::pair<TaskMap, const LeafPolicy*>> out;
    collectLeaves(*root_, nullptr, out);
    return out;
}

RmpTree RmpTree::flattened() const {
    RmpTree star(config_dim_, root_->name());
    for (auto& [map, policy] : leafMaps()) star.addLeaf(star.root(), "leaf", map, *policy);
    return star;
}

GdsAggregate RmpTree::rootAggregate() const {
    auto leaves = std::make_shared<std::vector<std::pair<TaskMap, GdsSpec>>>();
    for (const auto& [map, policy] : leafMaps())
        if (policy->isGds()) leaves->emplace_back(map, policy->gds());
    const int dim = config_dim_;

    GdsAggregate agg;
    agg.metric = [leaves, dim](const VectorXd& q, const VectorXd& qd) {
        MatrixXd g = MatrixXd::Zero(dim, dim);
        for (const auto& [map, spec] : *leaves) {
            const MatrixXd j = map.jacobian(q);
            g += j.transpose() * spec.metric(map.value(q), j * qd) * j;
        }
        return g;
    };
    agg.damping = [leaves, dim](const VectorXd& q, const VectorXd& qd) {
        MatrixXd b = MatrixXd::Zero(dim, dim);
        for (const auto& [map, spec] : *leaves) {
            const MatrixXd j = map.jacobian(q);
            b += j.transpose() * spec.damping(map.value(q), j * qd) * j;
        }
        return b;
    };
    agg.potential = [leaves](const VectorXd& q) {
        double phi = 0.0;
        for (const auto& [map, spec] : *leaves) phi += spec.potential(map.value(q));
        return phi;
    };
    return agg;
}

namespace {

void printNode(std::ostream& os, const RmpNode& node, const std::string& indent) {
    os << indent << node.name() << " (dim " << node.dim() << ")";
    if (node.isLeaf()) os << " [leaf]";
    os << "\n";
    for (const auto& child : node.children()) printNode(os, *child, indent + "  ");
}

}  // namespace

void RmpTree::print(std::ostream& os) const { printNode(os, *root_, ""); }

}  // namespace rmpflow
