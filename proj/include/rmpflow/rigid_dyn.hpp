#pragma once

#include <vector>

#include "rmpflow/tree.hpp"

namespace rmpflow {

// Planar revolute chain with one point mass per link.
struct ChainLink {
    double length = 1.0;       // m
    double mass = 1.0;         // kg
    double mass_offset = 1.0;  // fraction along the link where the mass sits
};

struct ChainModel {
    std::vector<ChainLink> links;
    Eigen::Vector2d gravity{0.0, -9.81};  // m/s^2

    int dof() const { return static_cast<int>(links.size()); }
    void validate() const;
};

// Chain as an RMP-tree: each node carries one link frame (accumulated angle,
// link tip, remaining joints), each leaf a constant-inertia system G = m*I on
// the mass point with the gravity potential.
RmpTree buildChainTree(const ChainModel& chain);

// Mass point positions in the plane (direct forward kinematics).
std::vector<Eigen::Vector2d> massPointPositions(const ChainModel& chain, const VectorXd& q);

// q_dd = M_r^+ (f_r + tau) from the root natural RMP of the chain tree.
VectorXd forwardDynamicsRmp(const ChainModel& chain, const VectorXd& q, const VectorXd& qd,
                            const VectorXd& tau);

// tau = M_r qdd_desired - f_r.
VectorXd inverseDynamicsRmp(const ChainModel& chain, const VectorXd& q, const VectorXd& qd,
                            const VectorXd& qdd_desired);

// Root natural RMP of the chain, exposed for inspection and dumps.
NaturalRmp chainRootRmp(const ChainModel& chain, const VectorXd& q, const VectorXd& qd);

// Reference route, independent of the tree passes: mass matrix and bias
// assembled directly from the Lagrangian with analytic Jacobians and
// Richardson-extrapolated metric derivatives.
MatrixXd lagrangianMassMatrix(const ChainModel& chain, const VectorXd& q);
VectorXd lagrangianBias(const ChainModel& chain, const VectorXd& q, const VectorXd& qd);
VectorXd lagrangianForwardDynamics(const ChainModel& chain, const VectorXd& q, const VectorXd& qd,
                                   const VectorXd& tau);

}  // namespace rmpflow
