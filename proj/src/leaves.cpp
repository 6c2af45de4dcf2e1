#include "rmpflow/leaves.hpp"

#include <cmath>
#include <stdexcept>

namespace rmpflow {
namespace leaves {

namespace {

// u(xd) = eps + min(0, xd) xd and its derivative; d/dxd at 0 is defined as 0.
double velocityGate(double eps, double xd) { return eps + (xd < 0.0 ? xd * xd : 0.0); }
double velocityGateDeriv(double xd) { return xd < 0.0 ? 2.0 * xd : 0.0; }

void requireNonneg(double v, const char* name) {
    if (v < 0.0) throw std::invalid_argument(std::string(name) + " must be nonnegative");
}

}  // namespace

double obstacleWeight(ObstacleWeight kind, double x, double w_max, double sigma) {
    if (kind == ObstacleWeight::Paper) {
        if (x <= 0.0) throw SingularDomainError("collision leaf evaluated at distance <= 0");
        return 1.0 / (x * x * x * x);
    }
    // Linear continuation past contact keeps the barrier pushing outward at
    // finite strength while penetrating states stay evaluable.
    if (x <= 0.0) return w_max * (1.0 - 4.0 * x / sigma);
    const double t = 1.0 + x / sigma;
    return w_max / (t * t * t * t);
}

double obstacleWeightDeriv(ObstacleWeight kind, double x, double w_max, double sigma) {
    if (kind == ObstacleWeight::Paper) {
        if (x <= 0.0) throw SingularDomainError("collision leaf evaluated at distance <= 0");
        return -4.0 / (x * x * x * x * x);
    }
    if (x <= 0.0) return -4.0 * w_max / sigma;
    const double t = 1.0 + x / sigma;
    return -4.0 * w_max / (sigma * t * t * t * t * t);
}

GdsSpec collisionLeaf1d(const CollisionParams& params) {
    requireNonneg(params.epsilon, "epsilon");
    requireNonneg(params.alpha, "alpha");
    requireNonneg(params.damping, "damping");

    const auto p = params;
    auto w = [p](double x) { return obstacleWeight(p.weight, x, p.w_max, p.sigma); };
    auto dw = [p](double x) { return obstacleWeightDeriv(p.weight, x, p.w_max, p.sigma); };

    GdsSpec spec;
    spec.dim = 1;
    spec.metric = [p, w](const VectorXd& x, const VectorXd& xd) {
        return MatrixXd::Constant(1, 1, w(x(0)) * velocityGate(p.epsilon, xd(0)));
    };
    spec.metric_dx = [p, dw](const VectorXd& x, const VectorXd& xd, int) {
        return MatrixXd::Constant(1, 1, dw(x(0)) * velocityGate(p.epsilon, xd(0)));
    };
    spec.metric_dxd = [w](const VectorXd& x, const VectorXd& xd, int) {
        return MatrixXd::Constant(1, 1, w(x(0)) * velocityGateDeriv(xd(0)));
    };
    spec.damping = [p, w](const VectorXd& x, const VectorXd&) {
        const double b = p.weight_scaled_damping ? p.damping * w(x(0)) : p.damping;
        return MatrixXd::Constant(1, 1, b);
    };
    spec.potential = [p, w](const VectorXd& x) {
        const double wx = w(x(0));
        return 0.5 * p.alpha * wx * wx;
    };
    spec.potential_grad = [p, w, dw](const VectorXd& x) {
        return VectorXd::Constant(1, p.alpha * w(x(0)) * dw(x(0)));
    };

    MetricFactorization fac;
    fac.rows = 1;
    fac.r = [](const VectorXd&) { return MatrixXd::Zero(1, 1); };
    fac.l = [](const VectorXd&) { return MatrixXd::Identity(1, 1); };
    fac.d = [p, w](const VectorXd& x, double yd, int) {
        return w(x(0)) * velocityGate(p.epsilon, yd);
    };
    fac.d_dyd = [w](const VectorXd& x, double yd, int) {
        return w(x(0)) * velocityGateDeriv(yd);
    };
    spec.factorization = fac;
    return spec;
}

double attractorWeight(const AttractorParams& params, const VectorXd& y) {
    return params.w_min +
           (params.w_max - params.w_min) * std::exp(-y.squaredNorm() / (params.sigma * params.sigma));
}

GdsSpec attractorLeaf(int dim, const AttractorParams& params) {
    if (params.w_min > params.w_max)
        throw std::invalid_argument("attractor: w_min must not exceed w_max");
    requireNonneg(params.w_min, "w_min");
    requireNonneg(params.damping, "damping");
    requireNonneg(params.gain, "gain");
    const auto p = params;

    GdsSpec spec;
    spec.dim = dim;
    spec.metric = [p, dim](const VectorXd& y, const VectorXd&) {
        return MatrixXd(attractorWeight(p, y) * MatrixXd::Identity(dim, dim));
    };
    spec.metric_dx = [p, dim](const VectorXd& y, const VectorXd&, int k) {
        const double bump = (p.w_max - p.w_min) * std::exp(-y.squaredNorm() / (p.sigma * p.sigma));
        const double dw = bump * (-2.0 * y(k) / (p.sigma * p.sigma));
        return MatrixXd(dw * MatrixXd::Identity(dim, dim));
    };
    spec.metric_dxd = [dim](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.damping = [p, dim](const VectorXd& y, const VectorXd&) {
        return MatrixXd(p.damping * attractorWeight(p, y) * MatrixXd::Identity(dim, dim));
    };
    spec.potential = [p](const VectorXd& y) {
        const double c = p.huber_scale;
        return p.gain * (std::sqrt(y.squaredNorm() + c * c) - c);
    };
    spec.potential_grad = [p](const VectorXd& y) {
        const double c = p.huber_scale;
        return VectorXd(p.gain * y / std::sqrt(y.squaredNorm() + c * c));
    };

    MetricFactorization fac;
    fac.rows = 0;
    fac.r = [p, dim](const VectorXd& y) {
        return MatrixXd(attractorWeight(p, y) * MatrixXd::Identity(dim, dim));
    };
    fac.l = [dim](const VectorXd&) { return MatrixXd(MatrixXd::Zero(0, dim)); };
    spec.factorization = fac;
    return spec;
}

GdsSpec jointLimitLeaf(const VectorXd& u0, const JointLimitParams& params) {
    requireNonneg(params.gamma_p, "gamma_p");
    requireNonneg(params.gamma_d, "gamma_d");
    const int dim = static_cast<int>(u0.size());
    const auto p = params;

    GdsSpec spec;
    spec.dim = dim;
    spec.metric = [p, u0, dim](const VectorXd& u, const VectorXd&) {
        const double w = 1.0 + (u - u0).squaredNorm() / (p.sigma * p.sigma);
        return MatrixXd(w * MatrixXd::Identity(dim, dim));
    };
    spec.metric_dx = [p, u0, dim](const VectorXd& u, const VectorXd&, int k) {
        const double dw = 2.0 * (u(k) - u0(k)) / (p.sigma * p.sigma);
        return MatrixXd(dw * MatrixXd::Identity(dim, dim));
    };
    spec.metric_dxd = [dim](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.damping = [p, dim](const VectorXd&, const VectorXd&) {
        return MatrixXd(p.gamma_d * MatrixXd::Identity(dim, dim));
    };
    spec.potential = [p, u0](const VectorXd& u) {
        return 0.5 * p.gamma_p * (u - u0).squaredNorm();
    };
    spec.potential_grad = [p, u0](const VectorXd& u) { return VectorXd(p.gamma_p * (u - u0)); };

    MetricFactorization fac;
    fac.rows = 0;
    fac.r = [p, u0, dim](const VectorXd& u) {
        const double w = 1.0 + (u - u0).squaredNorm() / (p.sigma * p.sigma);
        return MatrixXd(w * MatrixXd::Identity(dim, dim));
    };
    fac.l = [dim](const VectorXd&) { return MatrixXd(MatrixXd::Zero(0, dim)); };
    spec.factorization = fac;
    return spec;
}

LeafPolicy postureDamperLeaf(const PostureParams& params) {
    requireNonneg(params.gamma_p, "gamma_p");
    requireNonneg(params.gamma_d, "gamma_d");
    const auto p = params;
    const int dim = static_cast<int>(p.q0.size());
    return LeafPolicy::fromRaw([p, dim](const VectorXd& q, const VectorXd& qd) {
        NaturalRmp rmp;
        rmp.f = p.gamma_p * (p.q0 - q) - p.gamma_d * qd;
        rmp.m = p.weight * MatrixXd::Identity(dim, dim);
        return rmp;
    });
}

namespace {

LeafPolicy pfLeaf(const PfParams& params, bool nonlinear) {
    const auto p = params;
    const int dim = static_cast<int>(p.obstacle_center.size());
    const double barrier_cap = p.barrier_w_max > 0.0 ? p.barrier_w_max : p.w_max;
    auto fn = [p, dim, nonlinear, barrier_cap](const VectorXd& x, const VectorXd& xd) {
        NaturalRmp rmp;
        const VectorXd delta = x - p.obstacle_center;
        const double dist = delta.norm();
        const double s = dist - p.obstacle_radius;
        const double metric = nonlinear
                                  ? obstacleWeight(ObstacleWeight::Bounded, s, p.w_max, p.sigma)
                                  : p.w_max;
        rmp.m = metric * MatrixXd::Identity(dim, dim);
        if (dist < kSingularEps) {
            rmp.f = VectorXd::Zero(dim);  // dead center: no preferred push direction
            return rmp;
        }
        const VectorXd grad_s = delta / dist;
        const double sd = grad_s.dot(xd);
        const double wb = obstacleWeight(ObstacleWeight::Bounded, s, barrier_cap, p.sigma);
        const double dphi =
            p.alpha * wb * obstacleWeightDeriv(ObstacleWeight::Bounded, s, barrier_cap, p.sigma);
        const double b_eff = p.weight_scaled_damping ? p.damping * wb : p.damping;
        rmp.f = grad_s * (-dphi - b_eff * sd);
        return rmp;
    };
    return LeafPolicy::fromRaw(std::move(fn), /*jdot_pullback=*/false);
}

}  // namespace

LeafPolicy pfBasicLeaf(const PfParams& params) { return pfLeaf(params, false); }

LeafPolicy pfNonlinearLeaf(const PfParams& params) { return pfLeaf(params, true); }

GdsSpec rootDampingLeaf(int dim, double gain) {
    requireNonneg(gain, "gain");
    GdsSpec spec;
    spec.dim = dim;
    spec.metric = [dim](const VectorXd&, const VectorXd&) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.metric_dx = [dim](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.metric_dxd = [dim](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.damping = [dim, gain](const VectorXd&, const VectorXd&) {
        return MatrixXd(gain * MatrixXd::Identity(dim, dim));
    };
    spec.potential = [](const VectorXd&) { return 0.0; };
    spec.potential_grad = [dim](const VectorXd&) { return VectorXd(VectorXd::Zero(dim)); };
    return spec;
}

}  // namespace leaves
}  // namespace rmpflow
