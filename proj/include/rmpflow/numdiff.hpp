#pragma once

#include <functional>

#include "rmpflow/core.hpp"

namespace rmpflow {
namespace numdiff {

// Scale-aware central-difference step: h = base * (1 + |anchor|).
inline double step(const VectorXd& anchor, double base = 1e-6) {
    return base * (1.0 + anchor.norm());
}

// Central-difference Jacobian of f at x.
MatrixXd jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                  double base_step = 1e-6);

// Central-difference gradient of a scalar function at x.
VectorXd gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                  double base_step = 1e-6);

// J-dot times v along a velocity: ( J(x + h*xd) - J(x - h*xd) ) / (2h) * xd.
// Differentiates the Jacobian along the direction of motion, which is exactly
// the dJ/dt * xd needed by pullback.
VectorXd jdotTimesV(const std::function<MatrixXd(const VectorXd&)>& jac, const VectorXd& x,
                    const VectorXd& xd, double base_step = 1e-6);

// Partial derivative of a matrix function wrt component k of its argument.
MatrixXd matrixPartial(const std::function<MatrixXd(const VectorXd&)>& m, const VectorXd& at,
                       int k, double base_step = 1e-6);

// Richardson-extrapolated variant (4th order); used by test oracles that need
// derivative accuracy beyond plain central differences.
MatrixXd matrixPartialRichardson(const std::function<MatrixXd(const VectorXd&)>& m,
                                 const VectorXd& at, int k, double base_step = 1e-5);

}  // namespace numdiff
}  // namespace rmpflow
