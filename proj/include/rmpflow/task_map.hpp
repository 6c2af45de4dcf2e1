#pragma once

#include <functional>
#include <vector>

#include "rmpflow/core.hpp"

namespace rmpflow {

// Differentiable map between coordinate spaces. Exposes the value y = psi(x),
// the Jacobian J = d(psi)/dx and the curvature product Jdot*xd (time
// derivative of J along the motion xd, applied to xd). Immutable after
// construction; evaluation is a pure function of (x, xd).
class TaskMap {
public:
    using ValueFn = std::function<VectorXd(const VectorXd&)>;
    using JacobianFn = std::function<MatrixXd(const VectorXd&)>;
    using JdotVFn = std::function<VectorXd(const VectorXd&, const VectorXd&)>;

    TaskMap() = default;
    TaskMap(int dim_in, int dim_out, ValueFn value, JacobianFn jacobian, JdotVFn jdot_times_v);

    // Finite-difference fallbacks (central differences, step 1e-6*(1+|x|)).
    static TaskMap fromValue(int dim_in, int dim_out, ValueFn value);
    static TaskMap fromValueJacobian(int dim_in, int dim_out, ValueFn value, JacobianFn jacobian);

    int dimIn() const { return dim_in_; }
    int dimOut() const { return dim_out_; }
    bool valid() const { return static_cast<bool>(value_); }

    VectorXd value(const VectorXd& x) const;
    MatrixXd jacobian(const VectorXd& x) const;
    VectorXd jdotTimesV(const VectorXd& x, const VectorXd& xd) const;

private:
    void checkInput(const VectorXd& x) const;

    int dim_in_ = 0;
    int dim_out_ = 0;
    ValueFn value_;
    JacobianFn jacobian_;
    JdotVFn jdot_times_v_;
};

// psi_outer o psi_inner with chain-rule Jacobian and curvature product.
TaskMap compose(const TaskMap& outer, const TaskMap& inner);

namespace maps {

TaskMap identity(int dim);
TaskMap linear(const MatrixXd& a);

// 1D barrier map x = 1/q. Singular near q = 0.
TaskMap reciprocal();

// Signed distance |q - center| - radius (negative inside the obstacle).
// Singular at the center itself.
TaskMap distanceToPoint(const VectorXd& center, double radius);

// Joint angles -> 2D position of the point at fraction point_offset along
// link link_index of a planar revolute chain rooted at the origin.
TaskMap planarArmFk(const std::vector<double>& link_lengths, double point_offset, int link_index);

// y = q - goal.
TaskMap offset(const VectorXd& goal);

// Per-dimension scaled logit u_i = slope*log((q_i-l_i)/(u_i-q_i)); unbounded
// as q approaches a limit. Singular at or outside the limits.
TaskMap jointLimit(const VectorXd& lower, const VectorXd& upper, double slope = 1.0);

// Componentwise diffeomorphism q' = h(q) given h, h', h''; the inverse map is
// solved by Newton iteration. Used by the coordinate-invariance scenario.
struct Diffeo1d {
    std::function<double(double)> h;
    std::function<double(double)> dh;   // must be bounded away from 0
    std::function<double(double)> d2h;
};
TaskMap componentwise(const Diffeo1d& f, int dim);
TaskMap componentwiseInverse(const Diffeo1d& f, int dim);

}  // namespace maps
}  // namespace rmpflow
