#include "rmpflow/rigid_dyn.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "rmpflow/numdiff.hpp"

namespace rmpflow {

void ChainModel::validate() const {
    if (links.empty()) throw std::invalid_argument("ChainModel: needs at least one link");
    for (const ChainLink& l : links) {
        if (l.length <= 0.0) throw std::invalid_argument("ChainModel: lengths must be positive");
        if (l.mass <= 0.0) throw std::invalid_argument("ChainModel: masses must be positive");
        if (l.mass_offset < 0.0 || l.mass_offset > 1.0)
            throw std::invalid_argument("ChainModel: mass_offset must be in [0,1]");
    }
}

namespace {

// Frame-node state of link i (1-based): (theta_i, tip_x, tip_y, q_{i+1..n}).
// dim = 3 + (n - i).

TaskMap rootToFirstFrame(const ChainModel& chain) {
    const int n = chain.dof();
    const double l = chain.links[0].length;
    const int out = 3 + (n - 1);
    auto value = [l, n, out](const VectorXd& q) {
        VectorXd y(out);
        y(0) = q(0);
        y(1) = l * std::cos(q(0));
        y(2) = l * std::sin(q(0));
        y.tail(n - 1) = q.tail(n - 1);
        return y;
    };
    auto jac = [l, n, out](const VectorXd& q) {
        MatrixXd j = MatrixXd::Zero(out, n);
        j(0, 0) = 1.0;
        j(1, 0) = -l * std::sin(q(0));
        j(2, 0) = l * std::cos(q(0));
        for (int k = 1; k < n; ++k) j(2 + k, k) = 1.0;
        return j;
    };
    auto jdot = [l, out](const VectorXd& q, const VectorXd& qd) {
        VectorXd v = VectorXd::Zero(out);
        const double w2 = qd(0) * qd(0);
        v(1) = -l * std::cos(q(0)) * w2;
        v(2) = -l * std::sin(q(0)) * w2;
        return v;
    };
    return TaskMap(n, out, value, jac, jdot);
}

// Parent (theta', x', y', q_i, rest) -> (theta'+q_i, x'+l cos, y'+l sin, rest).
TaskMap frameToFrame(double l, int remaining_joints) {
    const int in = 3 + remaining_joints;         // includes q_i
    const int out = 3 + (remaining_joints - 1);  // q_i consumed
    auto value = [l, in, out](const VectorXd& p) {
        VectorXd y(out);
        const double th = p(0) + p(3);
        y(0) = th;
        y(1) = p(1) + l * std::cos(th);
        y(2) = p(2) + l * std::sin(th);
        y.tail(in - 4) = p.tail(in - 4);
        return y;
    };
    auto jac = [l, in, out](const VectorXd& p) {
        MatrixXd j = MatrixXd::Zero(out, in);
        const double th = p(0) + p(3);
        j(0, 0) = 1.0;
        j(0, 3) = 1.0;
        j(1, 0) = -l * std::sin(th);
        j(1, 1) = 1.0;
        j(1, 3) = -l * std::sin(th);
        j(2, 0) = l * std::cos(th);
        j(2, 2) = 1.0;
        j(2, 3) = l * std::cos(th);
        for (int k = 4; k < in; ++k) j(k - 1, k) = 1.0;
        return j;
    };
    auto jdot = [l, out](const VectorXd& p, const VectorXd& pd) {
        VectorXd v = VectorXd::Zero(out);
        const double th = p(0) + p(3);
        const double w = pd(0) + pd(3);
        v(1) = -l * std::cos(th) * w * w;
        v(2) = -l * std::sin(th) * w * w;
        return v;
    };
    return TaskMap(in, out, value, jac, jdot);
}

// Frame node -> 2D mass point at fraction rho along its link.
TaskMap frameToMassPoint(double l, double rho, int node_dim) {
    const double back = (1.0 - rho) * l;  // distance from the tip back to the mass
    auto value = [back](const VectorXd& p) {
        Eigen::Vector2d y(p(1) - back * std::cos(p(0)), p(2) - back * std::sin(p(0)));
        return VectorXd(y);
    };
    auto jac = [back, node_dim](const VectorXd& p) {
        MatrixXd j = MatrixXd::Zero(2, node_dim);
        j(0, 0) = back * std::sin(p(0));
        j(0, 1) = 1.0;
        j(1, 0) = -back * std::cos(p(0));
        j(1, 2) = 1.0;
        return j;
    };
    auto jdot = [back](const VectorXd& p, const VectorXd& pd) {
        const double w2 = pd(0) * pd(0);
        return VectorXd(Eigen::Vector2d(back * std::cos(p(0)) * w2, back * std::sin(p(0)) * w2));
    };
    return TaskMap(node_dim, 2, value, jac, jdot);
}

GdsSpec massPointGds(double mass, const Eigen::Vector2d& gravity) {
    GdsSpec spec;
    spec.dim = 2;
    spec.metric = [mass](const VectorXd&, const VectorXd&) {
        return MatrixXd(mass * MatrixXd::Identity(2, 2));
    };
    spec.metric_dx = [](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(2, 2));
    };
    spec.metric_dxd = [](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(2, 2));
    };
    spec.damping = [](const VectorXd&, const VectorXd&) {
        return MatrixXd(MatrixXd::Zero(2, 2));
    };
    const Eigen::Vector2d g = gravity;
    spec.potential = [mass, g](const VectorXd& x) { return -mass * g.dot(x.head<2>()); };
    spec.potential_grad = [mass, g](const VectorXd&) { return VectorXd(-mass * g); };
    spec.potential_lower_bound = -std::numeric_limits<double>::infinity();
    return spec;
}

}  // namespace

RmpTree buildChainTree(const ChainModel& chain) {
    chain.validate();
    const int n = chain.dof();
    RmpTree tree(n);
    RmpNode* frame = &tree.addChild(tree.root(), "link1", rootToFirstFrame(chain));
    for (int i = 0; i < n; ++i) {
        if (i > 0)
            frame = &tree.addChild(*frame, "link" + std::to_string(i + 1),
                                   frameToFrame(chain.links[i].length, n - i));
        const int node_dim = 3 + (n - i - 1);
        tree.addLeaf(*frame, "mass" + std::to_string(i + 1),
                     frameToMassPoint(chain.links[i].length, chain.links[i].mass_offset, node_dim),
                     LeafPolicy::fromGds(massPointGds(chain.links[i].mass, chain.gravity)));
    }
    return tree;
}

std::vector<Eigen::Vector2d> massPointPositions(const ChainModel& chain, const VectorXd& q) {
    std::vector<Eigen::Vector2d> pts;
    double theta = 0.0;
    Eigen::Vector2d tip = Eigen::Vector2d::Zero();
    for (int i = 0; i < chain.dof(); ++i) {
        theta += q(i);
        const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
        pts.push_back(tip + chain.links[i].mass_offset * chain.links[i].length * dir);
        tip += chain.links[i].length * dir;
    }
    return pts;
}

NaturalRmp chainRootRmp(const ChainModel& chain, const VectorXd& q, const VectorXd& qd) {
    RmpTree tree = buildChainTree(chain);
    const TreeEval eval = tree.evaluate(q, qd);
    return {eval.force, eval.inertia};
}

VectorXd forwardDynamicsRmp(const ChainModel& chain, const VectorXd& q, const VectorXd& qd,
                            const VectorXd& tau) {
    const NaturalRmp root = chainRootRmp(chain, q, qd);
    Eigen::JacobiSVD<MatrixXd> svd(root.m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kPinvCutoff);
    if (svd.rank() < q.size())
        throw NumericalError("forwardDynamicsRmp: degenerate mass matrix at this configuration");
    return svd.solve(root.f + tau);
}

VectorXd inverseDynamicsRmp(const ChainModel& chain, const VectorXd& q, const VectorXd& qd,
                            const VectorXd& qdd_desired) {
    const NaturalRmp root = chainRootRmp(chain, q, qd);
    return root.m * qdd_desired - root.f;
}

namespace {

// Analytic Jacobian of mass point i wrt q (direct differentiation of the
// explicit FK sum; no tree machinery involved).
MatrixXd massPointJacobian(const ChainModel& chain, const VectorXd& q, int point) {
    const int n = chain.dof();
    MatrixXd j = MatrixXd::Zero(2, n);
    double theta = 0.0;
    std::vector<double> angles(point + 1);
    for (int i = 0; i <= point; ++i) {
        theta += q(i);
        angles[i] = theta;
    }
    for (int col = 0; col <= point; ++col) {
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int i = col; i <= point; ++i) {
            const double seg =
                (i == point ? chain.links[i].mass_offset : 1.0) * chain.links[i].length;
            acc += seg * Eigen::Vector2d(-std::sin(angles[i]), std::cos(angles[i]));
        }
        j.col(col) = acc;
    }
    return j;
}

}  // namespace

MatrixXd lagrangianMassMatrix(const ChainModel& chain, const VectorXd& q) {
    const int n = chain.dof();
    MatrixXd m = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const MatrixXd j = massPointJacobian(chain, q, i);
        m += chain.links[i].mass * j.transpose() * j;
    }
    return m;
}

VectorXd lagrangianBias(const ChainModel& chain, const VectorXd& q, const VectorXd& qd) {
    const int n = chain.dof();
    auto mass_of_q = [&](const VectorXd& p) { return lagrangianMassMatrix(chain, p); };

    // xi = Mdot qd - 1/2 grad_q(qd^T M qd), from Richardson-extrapolated dM/dq_k.
    MatrixXd mdot = MatrixXd::Zero(n, n);
    VectorXd quad_grad(n);
    for (int k = 0; k < n; ++k) {
        const MatrixXd dk = numdiff::matrixPartialRichardson(mass_of_q, q, k);
        mdot += qd(k) * dk;
        quad_grad(k) = qd.dot(dk * qd);
    }
    VectorXd bias = mdot * qd - 0.5 * quad_grad;

    // Gravity: grad of U(q) = -sum_i m_i g . p_i(q).
    for (int i = 0; i < n; ++i)
        bias -= chain.links[i].mass * massPointJacobian(chain, q, i).transpose() * chain.gravity;
    return bias;
}

VectorXd lagrangianForwardDynamics(const ChainModel& chain, const VectorXd& q, const VectorXd& qd,
                                   const VectorXd& tau) {
    return lagrangianMassMatrix(chain, q).ldlt().solve(tau - lagrangianBias(chain, q, qd));
}

}  // namespace rmpflow
