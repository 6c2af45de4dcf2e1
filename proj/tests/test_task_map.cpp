#include <doctest.h>

#include <cmath>

#include "rmpflow/task_map.hpp"
#include "test_support.hpp"

using namespace rmpflow;
using testsupport::fdJdotTimesVOracle;
using testsupport::randomVector;
using testsupport::relErr;
using testsupport::requireMapDerivatives;

namespace {

VectorXd vec1(double a) { return VectorXd::Constant(1, a); }
VectorXd vec2(double a, double b) { return Eigen::Vector2d(a, b); }

}  // namespace

TEST_CASE("identity composition acts as identity") {
    const TaskMap map = compose(maps::identity(2), maps::identity(2));
    const VectorXd x = vec2(1, 2), xd = vec2(3, 4);
    CHECK(map.value(x).isApprox(x));
    CHECK(map.jacobian(x).isApprox(MatrixXd::Identity(2, 2)));
    CHECK(map.jdotTimesV(x, xd).norm() == 0.0);
}

TEST_CASE("linear composition multiplies jacobians") {
    MatrixXd a(2, 3), b(3, 2);
    a << 1, 2, 0, -1, 0, 3;
    b << 2, 1, 0, 1, 1, -1;
    const TaskMap map = compose(maps::linear(a), maps::linear(b));
    CHECK(map.jacobian(vec2(0.3, -2)).isApprox(MatrixXd(a * b)));
}

TEST_CASE("reciprocal composed with a linear map") {
    const TaskMap doubled = maps::linear(MatrixXd::Constant(1, 1, 2.0));
    const TaskMap map = compose(maps::reciprocal(), doubled);
    const VectorXd q = vec1(1), qd = vec1(1);
    CHECK(map.value(q)(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(map.jacobian(q)(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
    // Frozen from the finite-difference oracle on the composite map:
    // J = -0.5/q^2, so dJ/dt * qd = qd^2/q^3 = 1 here.
    const VectorXd oracle = fdJdotTimesVOracle(map, q, qd);
    CHECK(oracle(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(map.jdotTimesV(q, qd)(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("compose rejects mismatched dimensions naming both") {
    try {
        compose(maps::identity(3), maps::identity(2));
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string what = e.what();
        CHECK(what.find('3') != std::string::npos);
        CHECK(what.find('2') != std::string::npos);
    }
}

TEST_CASE("reciprocal map values and derivatives") {
    const TaskMap map = maps::reciprocal();
    CHECK(map.value(vec1(2))(0) == doctest::Approx(0.5));
    CHECK(map.jacobian(vec1(2))(0, 0) == doctest::Approx(-0.25));
    CHECK(map.jdotTimesV(vec1(2), vec1(1))(0) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(map.value(vec1(1))(0) == doctest::Approx(1.0));
    CHECK(map.jacobian(vec1(1))(0, 0) == doctest::Approx(-1.0));
    CHECK(map.jdotTimesV(vec1(1), vec1(0)).norm() == 0.0);
    CHECK(map.value(vec1(-1))(0) == doctest::Approx(-1.0));
    CHECK(map.jacobian(vec1(-1))(0, 0) == doctest::Approx(-1.0));
    CHECK(map.jdotTimesV(vec1(-1), vec1(1))(0) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK_THROWS_AS(map.value(vec1(1e-13)), SingularDomainError);
}

TEST_CASE("distance map values and derivatives") {
    const TaskMap map = maps::distanceToPoint(vec2(0, 0), 1.0);
    const VectorXd q = vec2(2, 0);
    CHECK(map.value(q)(0) == doctest::Approx(1.0));
    CHECK(map.jacobian(q).isApprox(MatrixXd(Eigen::RowVector2d(1, 0))));
    CHECK(map.jdotTimesV(q, vec2(0, 1))(0) == doctest::Approx(0.5).epsilon(1e-9));
    // Purely radial motion does not rotate the jacobian.
    CHECK(map.jdotTimesV(q, vec2(1, 0))(0) == doctest::Approx(0.0));

    const TaskMap shifted = maps::distanceToPoint(vec2(1, 1), 0.5);
    CHECK(shifted.value(vec2(1, 3))(0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(shifted.value(vec2(1, 1)), SingularDomainError);
}

TEST_CASE("planar arm forward kinematics") {
    const TaskMap ee = maps::planarArmFk({1.0, 1.0}, 1.0, 1);
    CHECK(ee.value(vec2(0, 0)).isApprox(vec2(2, 0)));
    CHECK(ee.value(vec2(M_PI / 2, 0)).isApprox(vec2(0, 2), 1e-12));
    CHECK(ee.value(vec2(M_PI / 2, -M_PI / 2)).isApprox(vec2(1, 1), 1e-12));
    requireMapDerivatives(ee, vec2(M_PI / 2, -M_PI / 2), vec2(0.7, -0.4));
    CHECK_THROWS_AS(maps::planarArmFk({1.0}, 0.5, 3), std::invalid_argument);
}

TEST_CASE("offset map") {
    const TaskMap map = maps::offset(vec2(1, 1));
    CHECK(map.value(vec2(1, 1)).norm() == 0.0);
    CHECK(maps::offset(vec2(0, 0)).value(vec2(3, -2)).isApprox(vec2(3, -2)));
    CHECK(maps::offset(vec2(2, -1)).jdotTimesV(vec2(0, 0), vec2(5, 7)).norm() == 0.0);
}

TEST_CASE("joint limit map") {
    const TaskMap map = maps::jointLimit(vec1(-1), vec1(1));
    CHECK(map.value(vec1(0))(0) == doctest::Approx(0.0));
    CHECK(map.value(vec1(1 - 1e-5))(0) > 10.0);
    requireMapDerivatives(map, vec1(0.5), vec1(0.3));
    CHECK_THROWS_AS(map.value(vec1(1.0)), SingularDomainError);
    CHECK_THROWS_AS(map.value(vec1(1.5)), SingularDomainError);
    CHECK_THROWS_AS(maps::jointLimit(vec1(1), vec1(-1)), std::invalid_argument);
}

TEST_CASE("componentwise diffeo and its newton inverse") {
    maps::Diffeo1d h;
    h.h = [](double q) { return q + 0.3 * std::sin(q); };
    h.dh = [](double q) { return 1.0 + 0.3 * std::cos(q); };
    h.d2h = [](double q) { return -0.3 * std::sin(q); };
    const TaskMap fwd = maps::componentwise(h, 2);
    const TaskMap inv = maps::componentwiseInverse(h, 2);
    const VectorXd q = vec2(0.8, -1.7);
    CHECK(inv.value(fwd.value(q)).isApprox(q, 1e-12));
    requireMapDerivatives(fwd, q, vec2(0.5, 0.2));
    requireMapDerivatives(inv, fwd.value(q), vec2(0.5, 0.2));
}

TEST_CASE("library maps pass derivative checks on random interior states") {
    std::mt19937_64 rng(2024);
    MatrixXd a(2, 3);
    a << 0.5, -1.0, 2.0, 1.5, 0.25, -0.75;
    struct Entry {
        TaskMap map;
        std::function<VectorXd()> sample;
    };
    std::vector<Entry> entries;
    entries.push_back({maps::identity(3), [&] { return randomVector(rng, 3, 2.0); }});
    entries.push_back({maps::linear(a), [&] { return randomVector(rng, 3, 2.0); }});
    entries.push_back({maps::reciprocal(), [&] {
                           VectorXd q = randomVector(rng, 1, 2.5);
                           if (std::abs(q(0)) < 0.2) q(0) = q(0) < 0 ? -0.2 : 0.2;
                           return q;
                       }});
    entries.push_back({maps::distanceToPoint(vec2(0.5, -0.5), 1.0), [&] {
                           VectorXd q = randomVector(rng, 2, 3.0);
                           while ((q - vec2(0.5, -0.5)).norm() < 0.3) q = randomVector(rng, 2, 3.0);
                           return q;
                       }});
    entries.push_back(
        {maps::planarArmFk({0.4, 0.32, 0.25}, 0.5, 2), [&] { return randomVector(rng, 3, M_PI); }});
    entries.push_back({maps::offset(vec2(1, -2)), [&] { return randomVector(rng, 2, 3.0); }});
    entries.push_back({maps::jointLimit(vec2(-2, -1.5), vec2(2, 1.5), 0.8), [&] {
                           VectorXd q = randomVector(rng, 2, 1.0);
                           q(0) *= 1.6;
                           return q;
                       }});

    for (const Entry& entry : entries)
        for (int s = 0; s < 100; ++s) {
            const VectorXd x = entry.sample();
            const VectorXd xd = randomVector(rng, entry.map.dimIn(), 1.5);
            requireMapDerivatives(entry.map, x, xd);
        }
}

TEST_CASE("jdot product is quadratic in velocity for position-only maps") {
    std::mt19937_64 rng(7);
    const TaskMap map = maps::planarArmFk({1.0, 0.7}, 1.0, 1);
    for (int s = 0; s < 20; ++s) {
        const VectorXd x = randomVector(rng, 2, M_PI);
        const VectorXd xd = randomVector(rng, 2, 1.0);
        const double c = 1.0 + s * 0.25;
        CHECK(relErr(map.jdotTimesV(x, c * xd), VectorXd(c * c * map.jdotTimesV(x, xd))) < 1e-10);
    }
}

TEST_CASE("composition is associative up to floating point") {
    std::mt19937_64 rng(11);
    const TaskMap f = maps::planarArmFk({0.8, 0.6}, 1.0, 1);  // R^2 -> R^2
    const TaskMap g = maps::offset(vec2(0.2, -0.1));
    const TaskMap k = maps::distanceToPoint(vec2(0.4, 0.4), 0.25);
    const TaskMap left = compose(compose(k, g), f);
    const TaskMap right = compose(k, compose(g, f));
    for (int s = 0; s < 50; ++s) {
        const VectorXd x = randomVector(rng, 2, 1.5);
        const VectorXd xd = randomVector(rng, 2, 1.0);
        if ((g.value(f.value(x)) - vec2(0.4, 0.4)).norm() < 0.3) continue;
        CHECK(relErr(left.value(x), right.value(x)) < 1e-12);
        CHECK(relErr(left.jacobian(x), right.jacobian(x)) < 1e-12);
        CHECK(relErr(left.jdotTimesV(x, xd), right.jdotTimesV(x, xd)) < 1e-12);
    }
}

TEST_CASE("finite-difference fallback constructor") {
    const TaskMap map = TaskMap::fromValue(2, 1, [](const VectorXd& x) {
        return VectorXd::Constant(1, std::sin(x(0)) * x(1));
    });
    const VectorXd x = vec2(0.4, 1.2), xd = vec2(-0.3, 0.8);
    const MatrixXd expected = (MatrixXd(1, 2) << 1.2 * std::cos(0.4), std::sin(0.4)).finished();
    CHECK(relErr(map.jacobian(x), expected) < 1e-8);
    CHECK(map.jdotTimesV(x, xd).allFinite());
}
