#pragma once

#include "rmpflow/gds.hpp"
#include "rmpflow/tree.hpp"

namespace rmpflow {
namespace leaves {

// Obstacle-proximity weight used on scalar distance spaces. Two forms:
//  - paper:   w(x) = 1/x^4 on x > 0 (unbounded at contact)
//  - bounded: w(x) = w_max / (1 + x/sigma)^4 for x > 0, clamped to w_max at
//             and below contact so penetrating states stay evaluable.
enum class ObstacleWeight { Paper, Bounded };

double obstacleWeight(ObstacleWeight kind, double x, double w_max, double sigma);
double obstacleWeightDeriv(ObstacleWeight kind, double x, double w_max, double sigma);

struct CollisionParams {
    ObstacleWeight weight = ObstacleWeight::Paper;
    double w_max = 1.0;   // bounded form only
    double sigma = 1.0;   // bounded form only
    double epsilon = 1e-6;  // metric floor in u(xd)
    double alpha = 1e-3;    // barrier potential gain
    double damping = 1.0;   // b
    bool weight_scaled_damping = false;  // B = b*w(x) instead of constant b
};

// Barrier policy on the 1D distance space: metric g = w(x) u(xd) with
// u(xd) = eps + min(0, xd) xd, potential Phi = 1/2 alpha w(x)^2. The paper
// weight form rejects x <= 0; the bounded form evaluates everywhere.
GdsSpec collisionLeaf1d(const CollisionParams& params);

struct AttractorParams {
    double w_min = 1.0;
    double w_max = 10.0;
    double sigma = 1.0;      // length scale of the weight bump
    double damping = 1.0;    // eta
    double gain = 1.0;       // potential scale
    double huber_scale = 0.05;  // smoothing corner of the |y| potential
};

// Goal attractor on the offset space y = x - x_goal: metric w_a(y) I, damping
// eta w_a(y) I, pseudo-Huber potential gain*(sqrt(|y|^2+c^2)-c).
GdsSpec attractorLeaf(int dim, const AttractorParams& params);

double attractorWeight(const AttractorParams& params, const VectorXd& y);

struct JointLimitParams {
    double gamma_p = 1.0;
    double gamma_d = 1.0;
    double sigma = 1.0;
};

// Policy on the unbounded u-space of the joint-limit map, pulling toward a
// nominal u0 with priority growing with |u - u0|.
GdsSpec jointLimitLeaf(const VectorXd& u0, const JointLimitParams& params);

struct PostureParams {
    VectorXd q0;
    double gamma_p = 1.0;
    double gamma_d = 1.0;
    double weight = 1.0;  // constant metric scalar m_c
};

// C-space postural controller f = gamma_p (q0 - q) - gamma_d qd, M = m_c I.
LeafPolicy postureDamperLeaf(const PostureParams& params);

struct PfParams {
    VectorXd obstacle_center;  // in the control-point space
    double obstacle_radius = 0.0;
    double w_max = 1.0;   // isotropic metric scalar (constant for basic, cap for nonlinear)
    double sigma = 1.0;   // weight length scale
    double alpha = 1e-3;  // barrier potential gain
    double damping = 1.0;
    double barrier_w_max = 0.0;  // weight profile entering the potential/damper;
                                 // 0 means reuse w_max
    bool weight_scaled_damping = false;
};

// Potential-field baselines on the 2D control-point space: the same barrier
// potential and damper as the distance-space leaf, pushed along the distance
// gradient, but with an isotropic metric and no curvature or Jdot terms.
// PF-basic votes with constant weight w_max everywhere; PF-nonlinear scales
// the weight with obstacle proximity.
LeafPolicy pfBasicLeaf(const PfParams& params);
LeafPolicy pfNonlinearLeaf(const PfParams& params);

// Root-space damping injector: GDS with zero metric and B = gain*I, keeping
// the fused damping strictly positive definite.
GdsSpec rootDampingLeaf(int dim, double gain);

}  // namespace leaves
}  // namespace rmpflow
