#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rmpflow/core.hpp"
#include "rmpflow/rmp.hpp"
#include "rmpflow/task_map.hpp"

namespace rmpflow {

// Optional declared factorization G = R(x) + L(x)^T D(x, yd) L(x) with
// diagonal D, used by the stability checks. yd = L*xd.
struct MetricFactorization {
    int rows = 0;  // rows of L
    std::function<MatrixXd(const VectorXd&)> r;
    std::function<MatrixXd(const VectorXd&)> l;
    // d_i(x, yd_i) and its partial derivative in yd_i.
    std::function<double(const VectorXd&, double, int)> d;
    std::function<double(const VectorXd&, double, int)> d_dyd;
};

// Geometric dynamical system on an m-dimensional space: metric G(x, xd),
// damping B(x, xd), lower-bounded potential Phi(x). Analytic derivative
// callbacks are preferred; central differences with step 1e-6*(1+|.|) fill in
// whatever is missing.
struct GdsSpec {
    int dim = 0;

    std::function<MatrixXd(const VectorXd&, const VectorXd&)> metric;
    std::function<MatrixXd(const VectorXd&, const VectorXd&)> damping;
    std::function<double(const VectorXd&)> potential;
    std::function<VectorXd(const VectorXd&)> potential_grad;

    // dG/dx_k and dG/dxd_k at (x, xd) for column index k.
    std::function<MatrixXd(const VectorXd&, const VectorXd&, int)> metric_dx;
    std::function<MatrixXd(const VectorXd&, const VectorXd&, int)> metric_dxd;

    std::optional<MetricFactorization> factorization;
    double potential_lower_bound = 0.0;

    // Zero-potential, zero-damping system with the given metric callbacks.
    static GdsSpec unforced(int dim,
                            std::function<MatrixXd(const VectorXd&, const VectorXd&)> metric);
};

// Curvature quantities of a GDS at one state.
struct CurvatureTerms {
    MatrixXd inertia_correction;  // Xi_G: velocity-curvature correction to the metric
    VectorXd curvature_force;     // xi_G: fictitious force from the non-constant metric
    MatrixXd inertia;             // G + Xi_G
};

// Per-leaf ablation switches. The first two zero the curvature quantities in
// the emitted RMP; the third drops the Jdot*xd correction on this leaf's
// pullback path to the root.
struct CurvatureToggles {
    bool inertia_correction = true;
    bool curvature_force = true;
    bool jdot_pullback = true;
};

// Xi_G = 1/2 sum_i xd_i dG_col_i/dxd, xi_G = Gdot_x xd - 1/2 grad_x(xd^T G xd),
// inertia = G + Xi_G.
CurvatureTerms curvature(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd);

// Leaf emission: f = -xi_G - grad Phi - B xd, M = G + Xi_G (subject to toggles).
NaturalRmp gdsNaturalRmp(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd,
                         const CurvatureToggles& toggles = {});

// Acceleration of the plain GDS at a state (trivial structure).
VectorXd gdsAccel(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd);

// A GDS whose metric factors through an inner map: the system on x-space with
// metric J^T H J, damping J^T B_y J and potential Phi_y o psi, where the outer
// quantities live on y = psi(x).
struct StructuredGds {
    TaskMap inner_map;
    GdsSpec outer;
};

// Direct evaluation of the structured dynamics:
//   a = [J^T(H+Xi_H)J]^+ ( -J^T(xi_H + (H+Xi_H) Jdot xd) - J^T grad Phi - J^T B J xd ).
// The monolithic route used to cross-check tree evaluation.
VectorXd structuredGdsAccel(const StructuredGds& s, const VectorXd& x, const VectorXd& xd);

// Fused variant: several structures sharing the same base space, combined by
// summing their pulled-back inertias and forces before one resolve.
VectorXd structuredGdsAccel(const std::vector<StructuredGds>& parts, const VectorXd& x,
                            const VectorXd& xd);

// Coriolis force C(x, xd) xd from Christoffel symbols of the first kind of a
// velocity-free metric. Equals xi_G for such metrics.
VectorXd coriolisForce(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd);

struct StabilityCheckReport {
    bool passed = true;
    int samples_checked = 0;
    std::vector<std::string> violations;
};

// Verifies the declared factorization conditions (R psd, d_i >= 0,
// yd_i * d(d_i)/dyd_i >= 0) and that Xi_G has min eigenvalue >= -1e-9 at every
// sample. Violations are reported, not thrown.
StabilityCheckReport theorem2Check(const GdsSpec& spec, const std::vector<State>& samples);

double kineticEnergy(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd);

// Root-level (G, B, Phi) of a fused system, assembled by the tree module.
struct GdsAggregate {
    std::function<MatrixXd(const VectorXd&, const VectorXd&)> metric;
    std::function<MatrixXd(const VectorXd&, const VectorXd&)> damping;
    std::function<double(const VectorXd&)> potential;
};

double kineticEnergy(const GdsAggregate& agg, const VectorXd& q, const VectorXd& qd);

// Lyapunov candidate V = 1/2 qd^T G qd + Phi.
double lyapunov(const GdsAggregate& agg, const VectorXd& q, const VectorXd& qd);

}  // namespace rmpflow
