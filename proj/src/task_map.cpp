#include "rmpflow/task_map.hpp"

#include <cmath>
#include <utility>

#include "rmpflow/numdiff.hpp"

namespace rmpflow {

TaskMap::TaskMap(int dim_in, int dim_out, ValueFn value, JacobianFn jacobian,
                 JdotVFn jdot_times_v)
    : dim_in_(dim_in),
      dim_out_(dim_out),
      value_(std::move(value)),
      jacobian_(std::move(jacobian)),
      jdot_times_v_(std::move(jdot_times_v)) {
    if (dim_in <= 0 || dim_out <= 0)
        throw DimensionError("TaskMap dimensions must be positive");
}

TaskMap TaskMap::fromValue(int dim_in, int dim_out, ValueFn value) {
    auto jac = [value](const VectorXd& x) { return numdiff::jacobian(value, x); };
    return fromValueJacobian(dim_in, dim_out, value, jac);
}

TaskMap TaskMap::fromValueJacobian(int dim_in, int dim_out, ValueFn value, JacobianFn jacobian) {
    auto jdot = [jacobian](const VectorXd& x, const VectorXd& xd) {
        return numdiff::jdotTimesV(jacobian, x, xd);
    };
    return TaskMap(dim_in, dim_out, std::move(value), std::move(jacobian), std::move(jdot));
}

void TaskMap::checkInput(const VectorXd& x) const {
    if (x.size() != dim_in_)
        throw DimensionError("TaskMap input has dimension " + std::to_string(x.size()) +
                             ", expected " + std::to_string(dim_in_));
}

VectorXd TaskMap::value(const VectorXd& x) const {
    checkInput(x);
    return value_(x);
}

MatrixXd TaskMap::jacobian(const VectorXd& x) const {
    checkInput(x);
    return jacobian_(x);
}

VectorXd TaskMap::jdotTimesV(const VectorXd& x, const VectorXd& xd) const {
    checkInput(x);
    checkInput(xd);
    return jdot_times_v_(x, xd);
}

TaskMap compose(const TaskMap& outer, const TaskMap& inner) {
    if (outer.dimIn() != inner.dimOut())
        throw DimensionError("compose: outer expects dim " + std::to_string(outer.dimIn()) +
                             " but inner produces dim " + std::to_string(inner.dimOut()));
    auto value = [outer, inner](const VectorXd& x) { return outer.value(inner.value(x)); };
    auto jac = [outer, inner](const VectorXd& x) {
        return MatrixXd(outer.jacobian(inner.value(x)) * inner.jacobian(x));
    };
    // d/dt (Jo*Ji) xd = Jo*(Jidot xd) + (Jodot yd) with yd = Ji xd.
    auto jdot = [outer, inner](const VectorXd& x, const VectorXd& xd) {
        const VectorXd y = inner.value(x);
        const VectorXd yd = inner.jacobian(x) * xd;
        return VectorXd(outer.jacobian(y) * inner.jdotTimesV(x, xd) + outer.jdotTimesV(y, yd));
    };
    return TaskMap(inner.dimIn(), outer.dimOut(), value, jac, jdot);
}

namespace maps {

TaskMap identity(int dim) {
    return TaskMap(
        dim, dim, [](const VectorXd& x) { return x; },
        [dim](const VectorXd&) { return MatrixXd(MatrixXd::Identity(dim, dim)); },
        [dim](const VectorXd&, const VectorXd&) { return VectorXd(VectorXd::Zero(dim)); });
}

TaskMap linear(const MatrixXd& a) {
    const int m = static_cast<int>(a.rows());
    return TaskMap(
        static_cast<int>(a.cols()), m, [a](const VectorXd& x) { return VectorXd(a * x); },
        [a](const VectorXd&) { return a; },
        [m](const VectorXd&, const VectorXd&) { return VectorXd(VectorXd::Zero(m)); });
}

TaskMap reciprocal() {
    auto guard = [](const VectorXd& q) {
        if (std::abs(q(0)) < kSingularEps)
            throw SingularDomainError("reciprocal map evaluated at q ~ 0");
    };
    return TaskMap(
        1, 1,
        [guard](const VectorXd& q) {
            guard(q);
            return VectorXd::Constant(1, 1.0 / q(0));
        },
        [guard](const VectorXd& q) {
            guard(q);
            return MatrixXd::Constant(1, 1, -1.0 / (q(0) * q(0)));
        },
        [guard](const VectorXd& q, const VectorXd& qd) {
            guard(q);
            return VectorXd::Constant(1, 2.0 * qd(0) * qd(0) / (q(0) * q(0) * q(0)));
        });
}

TaskMap distanceToPoint(const VectorXd& center, double radius) {
    if (radius < 0.0) throw std::invalid_argument("distanceToPoint: negative radius");
    const int n = static_cast<int>(center.size());
    auto delta = [center](const VectorXd& q) {
        const VectorXd d = q - center;
        if (d.norm() < kSingularEps)
            throw SingularDomainError("distance map evaluated at the obstacle center");
        return d;
    };
    return TaskMap(
        n, 1,
        [delta, radius](const VectorXd& q) {
            return VectorXd::Constant(1, delta(q).norm() - radius);
        },
        [delta](const VectorXd& q) {
            const VectorXd d = delta(q);
            return MatrixXd(d.transpose() / d.norm());
        },
        [delta](const VectorXd& q, const VectorXd& qd) {
            const VectorXd d = delta(q);
            const double dist = d.norm();
            const double radial = d.dot(qd) / dist;
            return VectorXd::Constant(1, (qd.squaredNorm() - radial * radial) / dist);
        });
}

TaskMap planarArmFk(const std::vector<double>& link_lengths, double point_offset,
                    int link_index) {
    const int n = static_cast<int>(link_lengths.size());
    if (link_index < 0 || link_index >= n)
        throw std::invalid_argument("planarArmFk: link_index out of range");
    if (point_offset < 0.0 || point_offset > 1.0)
        throw std::invalid_argument("planarArmFk: point_offset must be in [0,1]");
    for (double l : link_lengths)
        if (l <= 0.0) throw std::invalid_argument("planarArmFk: link lengths must be positive");

    // Effective length of link i contributing to the point position.
    std::vector<double> seg(link_lengths.begin(), link_lengths.begin() + link_index + 1);
    seg[link_index] *= point_offset;
    const int m = link_index + 1;

    auto angles = [m](const VectorXd& q) {
        VectorXd th(m);
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            acc += q(i);
            th(i) = acc;
        }
        return th;
    };
    auto value = [seg, angles, m](const VectorXd& q) {
        const VectorXd th = angles(q);
        VectorXd p = VectorXd::Zero(2);
        for (int i = 0; i < m; ++i) p += seg[i] * Eigen::Vector2d(std::cos(th(i)), std::sin(th(i)));
        return p;
    };
    auto jac = [seg, angles, m, n](const VectorXd& q) {
        const VectorXd th = angles(q);
        MatrixXd j = MatrixXd::Zero(2, n);
        // Column j collects the tangent contributions of all segments >= j.
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int i = m - 1; i >= 0; --i) {
            acc += seg[i] * Eigen::Vector2d(-std::sin(th(i)), std::cos(th(i)));
            j.col(i) = acc;
        }
        return j;
    };
    auto jdot = [seg, angles, m](const VectorXd& q, const VectorXd& qd) {
        const VectorXd th = angles(q);
        VectorXd out = VectorXd::Zero(2);
        double thd = 0.0;
        for (int i = 0; i < m; ++i) {
            thd += qd(i);
            out -= seg[i] * thd * thd * Eigen::Vector2d(std::cos(th(i)), std::sin(th(i)));
        }
        return out;
    };
    return TaskMap(n, 2, value, jac, jdot);
}

TaskMap offset(const VectorXd& goal) {
    const int n = static_cast<int>(goal.size());
    return TaskMap(
        n, n, [goal](const VectorXd& q) { return VectorXd(q - goal); },
        [n](const VectorXd&) { return MatrixXd(MatrixXd::Identity(n, n)); },
        [n](const VectorXd&, const VectorXd&) { return VectorXd(VectorXd::Zero(n)); });
}

TaskMap jointLimit(const VectorXd& lower, const VectorXd& upper, double slope) {
    const int n = static_cast<int>(lower.size());
    if (upper.size() != n) throw DimensionError("jointLimit: lower/upper dimension mismatch");
    if (((upper - lower).array() <= 0.0).any())
        throw std::invalid_argument("jointLimit: lower must be strictly below upper");
    if (slope <= 0.0) throw std::invalid_argument("jointLimit: slope must be positive");

    auto guard = [lower, upper](const VectorXd& q) {
        if (((q - lower).array() <= 0.0).any() || ((upper - q).array() <= 0.0).any())
            throw SingularDomainError("joint-limit map evaluated at or outside the limits");
    };
    return TaskMap(
        n, n,
        [guard, lower, upper, slope](const VectorXd& q) {
            guard(q);
            return VectorXd(slope *
                            ((q - lower).array() / (upper - q).array()).log().matrix());
        },
        [guard, lower, upper, slope](const VectorXd& q) {
            guard(q);
            const VectorXd diag =
                slope * (1.0 / (q - lower).array() + 1.0 / (upper - q).array()).matrix();
            return MatrixXd(diag.asDiagonal());
        },
        [guard, lower, upper, slope](const VectorXd& q, const VectorXd& qd) {
            guard(q);
            const auto a = (q - lower).array();
            const auto b = (upper - q).array();
            return VectorXd(slope * ((1.0 / (b * b) - 1.0 / (a * a)) * qd.array().square()));
        });
}

TaskMap componentwise(const Diffeo1d& f, int dim) {
    return TaskMap(
        dim, dim,
        [f](const VectorXd& q) { return VectorXd(q.unaryExpr(f.h)); },
        [f](const VectorXd& q) { return MatrixXd(q.unaryExpr(f.dh).asDiagonal()); },
        [f](const VectorXd& q, const VectorXd& qd) {
            return VectorXd(q.unaryExpr(f.d2h).array() * qd.array().square());
        });
}

namespace {

double newtonInvert(const maps::Diffeo1d& f, double target) {
    double y = target;  // good initial guess for near-identity h
    for (int it = 0; it < 64; ++it) {
        const double r = f.h(y) - target;
        if (std::abs(r) < 1e-15 * (1.0 + std::abs(target))) return y;
        y -= r / f.dh(y);
    }
    if (std::abs(f.h(y) - target) > 1e-10 * (1.0 + std::abs(target)))
        throw NumericalError("componentwiseInverse: Newton iteration did not converge");
    return y;
}

}  // namespace

TaskMap componentwiseInverse(const Diffeo1d& f, int dim) {
    auto inv = [f](const VectorXd& qp) {
        VectorXd q(qp.size());
        for (int i = 0; i < qp.size(); ++i) q(i) = newtonInvert(f, qp(i));
        return q;
    };
    // J_inv = diag(1/h'(q)); d/dt J_inv = diag(-h''(q) qdot_i / h'(q)^2) with
    // qdot = J_inv qp_dot.
    auto jac = [f, inv](const VectorXd& qp) {
        const VectorXd q = inv(qp);
        return MatrixXd(q.unaryExpr([&](double v) { return 1.0 / f.dh(v); }).asDiagonal());
    };
    auto jdot = [f, inv](const VectorXd& qp, const VectorXd& qpd) {
        const VectorXd q = inv(qp);
        VectorXd out(qp.size());
        for (int i = 0; i < qp.size(); ++i) {
            const double dh = f.dh(q(i));
            const double qd = qpd(i) / dh;
            out(i) = -f.d2h(q(i)) * qd * qpd(i) / (dh * dh);
        }
        return out;
    };
    return TaskMap(dim, dim, inv, jac, jdot);
}

}  // namespace maps
}  // namespace rmpflow
