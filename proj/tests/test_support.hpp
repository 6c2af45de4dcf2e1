#pragma once

// Shared test oracles. These stay independent of the library's own
// finite-difference fallbacks: plain central differences written out here.

#include <functional>
#include <random>
#include <vector>

#include "rmpflow/gds.hpp"
#include "rmpflow/leaves.hpp"
#include "rmpflow/task_map.hpp"
#include "rmpflow/tree.hpp"

namespace testsupport {

using rmpflow::MatrixXd;
using rmpflow::VectorXd;

inline double relErr(const VectorXd& got, const VectorXd& want) {
    return (got - want).norm() / (1.0 + want.norm());
}

inline double relErr(const MatrixXd& got, const MatrixXd& want) {
    return (got - want).norm() / (1.0 + want.norm());
}

inline MatrixXd fdJacobianOracle(const std::function<VectorXd(const VectorXd&)>& f,
                                 const VectorXd& x, double h) {
    MatrixXd jac;
    VectorXd xp = x, xm = x;
    for (int k = 0; k < x.size(); ++k) {
        xp(k) += h;
        xm(k) -= h;
        const VectorXd col = (f(xp) - f(xm)) / (2.0 * h);
        if (jac.size() == 0) jac.resize(col.size(), x.size());
        jac.col(k) = col;
        xp(k) = x(k);
        xm(k) = x(k);
    }
    return jac;
}

// (J(x + h xd) - J(x - h xd)) / 2h * xd with h = 1e-6 (1 + |x|).
inline VectorXd fdJdotTimesVOracle(const rmpflow::TaskMap& map, const VectorXd& x,
                                   const VectorXd& xd) {
    const double h = 1e-6 * (1.0 + x.norm());
    return (map.jacobian(x + h * xd) - map.jacobian(x - h * xd)) / (2.0 * h) * xd;
}

// Full task-map derivative check at one state.
inline void requireMapDerivatives(const rmpflow::TaskMap& map, const VectorXd& x,
                                  const VectorXd& xd, double tol_jac = 1e-5,
                                  double tol_jdot = 1e-4) {
    const double h = 1e-6 * (1.0 + x.norm());
    const MatrixXd jac_fd =
        fdJacobianOracle([&](const VectorXd& p) { return map.value(p); }, x, h);
    REQUIRE(relErr(map.jacobian(x), jac_fd) < tol_jac);
    REQUIRE(relErr(map.jdotTimesV(x, xd), VectorXd(fdJdotTimesVOracle(map, x, xd))) < tol_jdot);
}

// Monolithic pullback route (Theorem-1 sums over composed leaf maps) used to
// cross-check the recursive tree evaluation.
inline VectorXd fusedLeafAccel(const rmpflow::RmpTree& tree, const VectorXd& q,
                               const VectorXd& qd) {
    std::vector<rmpflow::StructuredGds> parts;
    for (const auto& [map, policy] : tree.leafMaps()) {
        REQUIRE(policy->isGds());
        parts.push_back({map, policy->gds()});
    }
    return rmpflow::structuredGdsAccel(parts, q, qd);
}

inline VectorXd randomVector(std::mt19937_64& rng, int dim, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = dist(rng);
    return v;
}

// Velocity-gated 1D metric g = w(x) u(xd) with the smooth, everywhere-positive
// weight w(x) = 1 + 1/(1+x^2); same gate u = eps + min(0,xd)xd as the
// collision policy but with no domain restriction. Theorem-2 class.
inline rmpflow::GdsSpec gatedSpec1d(double eps = 1e-4) {
    using rmpflow::GdsSpec;
    auto w = [](double x) { return 1.0 + 1.0 / (1.0 + x * x); };
    auto dw = [](double x) {
        const double d = 1.0 + x * x;
        return -2.0 * x / (d * d);
    };
    auto u = [eps](double xd) { return eps + (xd < 0 ? xd * xd : 0.0); };
    auto du = [](double xd) { return xd < 0 ? 2.0 * xd : 0.0; };

    GdsSpec spec;
    spec.dim = 1;
    spec.metric = [w, u](const VectorXd& x, const VectorXd& xd) {
        return MatrixXd::Constant(1, 1, w(x(0)) * u(xd(0)));
    };
    spec.metric_dx = [dw, u](const VectorXd& x, const VectorXd& xd, int) {
        return MatrixXd::Constant(1, 1, dw(x(0)) * u(xd(0)));
    };
    spec.metric_dxd = [w, du](const VectorXd& x, const VectorXd& xd, int) {
        return MatrixXd::Constant(1, 1, w(x(0)) * du(xd(0)));
    };
    spec.damping = [](const VectorXd&, const VectorXd&) {
        return MatrixXd::Constant(1, 1, 0.5);
    };
    spec.potential = [](const VectorXd& x) { return 0.5 * x(0) * x(0); };
    spec.potential_grad = [](const VectorXd& x) { return VectorXd::Constant(1, x(0)); };

    rmpflow::MetricFactorization fac;
    fac.rows = 1;
    fac.r = [](const VectorXd&) { return MatrixXd::Zero(1, 1); };
    fac.l = [](const VectorXd&) { return MatrixXd::Identity(1, 1); };
    fac.d = [w, u](const VectorXd& x, double yd, int) { return w(x(0)) * u(yd); };
    fac.d_dyd = [w, du](const VectorXd& x, double yd, int) { return w(x(0)) * du(yd); };
    spec.factorization = fac;
    return spec;
}

// Random tree with depth <= 3 and <= 4 leaves over Theorem-2-class leaf
// metrics, valid on |q|, |qd| <= 2. One full-rank attractor leaf keeps the
// root inertia nonsingular.
inline rmpflow::RmpTree randomClosureTree(std::mt19937_64& rng, int config_dim) {
    using namespace rmpflow;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto safe_square_map = [&](int dim) -> TaskMap {
        const double pick = unit(rng);
        if (pick < 0.34) return maps::offset(randomVector(rng, dim, 0.5));
        if (pick < 0.67) {
            maps::Diffeo1d h;
            const double a = 0.2 + 0.2 * unit(rng);
            h.h = [a](double q) { return q + a * std::sin(q); };
            h.dh = [a](double q) { return 1.0 + a * std::cos(q); };
            h.d2h = [a](double q) { return -a * std::sin(q); };
            return maps::componentwise(h, dim);
        }
        MatrixXd m = MatrixXd::Identity(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) m(i, j) += 0.3 * (unit(rng) - 0.5);
        return maps::linear(m);
    };
    auto scalar_map = [&](int dim) -> TaskMap {
        // Distance to a far-away point: smooth on the sampling box.
        VectorXd center = randomVector(rng, dim, 1.0);
        center.array() += center.array().sign() * 4.0 + 0.5;
        return maps::distanceToPoint(center, 0.2);
    };
    auto random_leaf = [&](RmpTree& tree, RmpNode& parent, int dim, int index) {
        const double pick = unit(rng);
        const std::string name = "leaf" + std::to_string(index);
        if (pick < 0.4) {
            tree.addLeaf(parent, name, scalar_map(dim),
                         LeafPolicy::fromGds(gatedSpec1d(1e-3 + unit(rng) * 1e-2)));
        } else if (pick < 0.7) {
            leaves::AttractorParams params;
            params.sigma = 0.8;
            params.gain = 0.5 + unit(rng);
            tree.addLeaf(parent, name, safe_square_map(dim),
                         LeafPolicy::fromGds(leaves::attractorLeaf(dim, params)));
        } else {
            leaves::JointLimitParams params;
            params.sigma = 1.5;
            tree.addLeaf(parent, name, safe_square_map(dim),
                         LeafPolicy::fromGds(leaves::jointLimitLeaf(
                             randomVector(rng, dim, 0.5), params)));
        }
    };

    RmpTree tree(config_dim);
    // Anchor leaf: positive-definite metric straight off the root.
    tree.addLeaf(tree.root(), "anchor", maps::offset(randomVector(rng, config_dim, 0.5)),
                 LeafPolicy::fromGds(leaves::attractorLeaf(config_dim, {})));

    int leaves_left = 1 + static_cast<int>(unit(rng) * 3.0);  // 1..3 extra
    int index = 0;
    while (leaves_left > 0) {
        if (unit(rng) < 0.5) {
            random_leaf(tree, tree.root(), config_dim, index++);
            --leaves_left;
        } else {
            RmpNode& mid = tree.addChild(tree.root(), "mid" + std::to_string(index++),
                                         safe_square_map(config_dim));
            random_leaf(tree, mid, config_dim, index++);
            --leaves_left;
            if (leaves_left > 0 && unit(rng) < 0.5) {
                RmpNode& deep = tree.addChild(mid, "deep" + std::to_string(index++),
                                              safe_square_map(config_dim));
                random_leaf(tree, deep, config_dim, index++);
                --leaves_left;
            }
        }
    }
    return tree;
}

}  // namespace testsupport
