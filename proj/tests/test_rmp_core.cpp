#include <doctest.h>

#include <cmath>
#include <cstring>

#include "rmpflow/leaves.hpp"
#include "rmpflow/tree.hpp"
#include "test_support.hpp"

using namespace rmpflow;
using testsupport::randomVector;
using testsupport::relErr;

namespace {

VectorXd vec1(double a) { return VectorXd::Constant(1, a); }
VectorXd vec2(double a, double b) { return Eigen::Vector2d(a, b); }

// G = I, B = 0, Phi = 1/2 |x|^2 with analytic callbacks.
GdsSpec simpleGds(int dim) {
    GdsSpec spec;
    spec.dim = dim;
    spec.metric = [dim](const VectorXd&, const VectorXd&) {
        return MatrixXd(MatrixXd::Identity(dim, dim));
    };
    spec.metric_dx = [dim](const VectorXd&, const VectorXd&, int) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.metric_dxd = spec.metric_dx;
    spec.damping = [dim](const VectorXd&, const VectorXd&) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.potential = [](const VectorXd& x) { return 0.5 * x.squaredNorm(); };
    spec.potential_grad = [](const VectorXd& x) { return x; };
    return spec;
}

NaturalRmp scalarRmp(double f, double m) {
    return {VectorXd::Constant(1, f), MatrixXd::Constant(1, 1, m)};
}

}  // namespace

TEST_CASE("resolve on identity and diagonal inertias") {
    const CanonicalRmp a = resolve({vec2(3, -1), MatrixXd::Identity(2, 2)});
    CHECK(a.a.isApprox(vec2(3, -1)));

    MatrixXd deg = MatrixXd::Zero(2, 2);
    deg(0, 0) = 2.0;
    const CanonicalRmp b = resolve({vec2(4, 0), deg});
    CHECK(b.a.isApprox(vec2(2, 0)));
}

TEST_CASE("resolve matches a direct solver on random SPD systems") {
    std::mt19937_64 rng(5);
    for (int s = 0; s < 50; ++s) {
        const MatrixXd r = MatrixXd::NullaryExpr(
            3, 3, [&](Eigen::Index, Eigen::Index) { return randomVector(rng, 1, 1.0)(0); });
        const MatrixXd m = r * r.transpose() + 0.1 * MatrixXd::Identity(3, 3);
        const VectorXd f = randomVector(rng, 3, 2.0);
        const CanonicalRmp out = resolve({f, m});
        CHECK((m * out.a - f).norm() < 1e-10 * f.norm());
        // Against an independent LDLT route.
        CHECK(relErr(out.a, VectorXd(m.ldlt().solve(f))) < 1e-10);
    }
}

TEST_CASE("resolve of naturalized canonical form is idempotent") {
    std::mt19937_64 rng(6);
    for (int s = 0; s < 20; ++s) {
        const MatrixXd r = MatrixXd::NullaryExpr(
            2, 2, [&](Eigen::Index, Eigen::Index) { return randomVector(rng, 1, 1.0)(0); });
        const CanonicalRmp rmp{randomVector(rng, 2, 2.0),
                               MatrixXd(r * r.transpose() + 0.2 * MatrixXd::Identity(2, 2))};
        CHECK((resolve(naturalize(rmp)).a - rmp.a).norm() < 1e-10);
    }
}

TEST_CASE("resolve rejects non-finite input") {
    NaturalRmp bad{vec1(std::nan("")), MatrixXd::Identity(1, 1)};
    CHECK_THROWS_AS(resolve(bad), NumericalError);
}

TEST_CASE("pushforward propagates value and tangent") {
    const State s = pushforward(State(vec2(1, 2), vec2(3, 4)), maps::identity(2));
    CHECK(s.x.isApprox(vec2(1, 2)));
    CHECK(s.xd.isApprox(vec2(3, 4)));

    const State r = pushforward(State(vec1(2), vec1(1)), maps::reciprocal());
    CHECK(r.x(0) == doctest::Approx(0.5));
    CHECK(r.xd(0) == doctest::Approx(-0.25));

    MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    const State w = pushforward(State(vec2(1, 2), vec2(3, 4)), maps::linear(swap));
    CHECK(w.x.isApprox(vec2(2, 1)));
    CHECK(w.xd.isApprox(vec2(4, 3)));
}

TEST_CASE("pullback identity and additivity") {
    const State parent(vec1(0.7), vec1(-0.2));
    const NaturalRmp single =
        pullback({{scalarRmp(1.5, 2.0), maps::identity(1)}}, parent);
    CHECK(single.f(0) == doctest::Approx(1.5));
    CHECK(single.m(0, 0) == doctest::Approx(2.0));

    const NaturalRmp sum = pullback(
        {{scalarRmp(1, 1), maps::identity(1)}, {scalarRmp(2, 3), maps::identity(1)}}, parent);
    CHECK(sum.f(0) == doctest::Approx(3.0));
    CHECK(sum.m(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("pullback through the reciprocal edge applies the jdot correction") {
    // J = -1, Jdot qd = 2 at (q, qd) = (1, 1): f = (-1)(1 - 1*2) = 1, M = 1.
    const NaturalRmp out =
        pullback({{scalarRmp(1, 1), maps::reciprocal()}}, State(vec1(1), vec1(1)));
    CHECK(out.f(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.m(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("pullback names the offending child on dimension mismatch") {
    try {
        pullback({{scalarRmp(1, 1), maps::identity(1)},
                  {{vec2(1, 1), MatrixXd::Identity(2, 2)}, maps::identity(1)}},
                 State(vec1(0), vec1(0)));
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        CHECK(std::string(e.what()).find("child 1") != std::string::npos);
    }
}

TEST_CASE("least-squares pullback equals the natural route") {
    const State parent(vec1(0.3), vec1(0.1));
    // Inertia-weighted mean of (a1=0, m1=1), (a2=3, m2=2) is 2.
    const CanonicalRmp mean = pullbackCanonical(
        {{scalarRmp(0, 1), maps::identity(1)}, {scalarRmp(6, 2), maps::identity(1)}}, parent);
    CHECK(mean.a(0) == doctest::Approx(2.0));

    const CanonicalRmp single =
        pullbackCanonical({{naturalize({vec2(0.5, -1), MatrixXd::Identity(2, 2)}),
                            maps::identity(2)}},
                          State(vec2(0, 0), vec2(0, 0)));
    CHECK(single.a.isApprox(vec2(0.5, -1)));

    std::mt19937_64 rng(9);
    for (int s = 0; s < 50; ++s) {
        std::vector<RmpChild> children;
        for (int c = 0; c < 2; ++c) {
            const MatrixXd r = MatrixXd::NullaryExpr(
                2, 2, [&](Eigen::Index, Eigen::Index) { return randomVector(rng, 1, 1.0)(0); });
            const MatrixXd m = r * r.transpose() + 0.3 * MatrixXd::Identity(2, 2);
            children.push_back({{randomVector(rng, 2, 1.5), m},
                                maps::planarArmFk({0.8, 0.5}, 0.5 + 0.5 * c, 1)});
        }
        const State parent2(randomVector(rng, 2, 1.5), randomVector(rng, 2, 1.0));
        const CanonicalRmp via_ls = pullbackCanonical(children, parent2);
        const CanonicalRmp via_natural = resolve(pullback(children, parent2));
        CHECK(relErr(via_ls.a, via_natural.a) < 1e-10);
    }
}

TEST_CASE("pullback is linear over concatenated child lists") {
    std::mt19937_64 rng(13);
    const State parent(randomVector(rng, 2, 1.0), randomVector(rng, 2, 1.0));
    std::vector<RmpChild> all;
    for (int c = 0; c < 4; ++c)
        all.push_back({{randomVector(rng, 2, 1.0), MatrixXd::Identity(2, 2) * (c + 1)},
                       maps::offset(vec2(0.1 * c, -0.2))});
    const NaturalRmp whole = pullback(all, parent);
    const NaturalRmp front = pullback({all[0], all[1]}, parent);
    const NaturalRmp back = pullback({all[2], all[3]}, parent);
    CHECK(relErr(whole.f, VectorXd(front.f + back.f)) < 1e-12);
    CHECK(relErr(whole.m, MatrixXd(front.m + back.m)) < 1e-12);
}

TEST_CASE("evaluate on a single GDS leaf is the plain gradient flow") {
    RmpTree tree(2);
    tree.addLeaf(tree.root(), "spring", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    const TreeEval eval = tree.evaluate(vec2(1, 0), vec2(0, 0));
    CHECK(eval.accel.isApprox(vec2(-1, 0)));
}

TEST_CASE("duplicated leaves resolve to the same acceleration") {
    RmpTree one(2), two(2);
    one.addLeaf(one.root(), "l", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    two.addLeaf(two.root(), "l1", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    two.addLeaf(two.root(), "l2", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    const VectorXd q = vec2(0.4, -1.2), qd = vec2(0.3, 0.7);
    CHECK(relErr(one.evaluate(q, qd).accel, two.evaluate(q, qd).accel) < 1e-12);
}

TEST_CASE("deep chain agrees with the flattened star") {
    RmpTree chain(2);
    RmpNode& mid = chain.addChild(chain.root(), "shifted", maps::offset(vec2(0.3, -0.4)));
    chain.addLeaf(mid, "dist", maps::distanceToPoint(vec2(0, 0), 0.2),
                  LeafPolicy::fromGds(simpleGds(1)));
    chain.addLeaf(chain.root(), "spring", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));

    RmpTree star = chain.flattened();
    CHECK(star.root().children().size() == 2);
    for (const auto& child : star.root().children()) CHECK(child->isLeaf());

    std::mt19937_64 rng(21);
    for (int s = 0; s < 30; ++s) {
        const VectorXd q = randomVector(rng, 2, 1.5);
        if ((q + vec2(0.3, -0.4)).norm() < 0.4) continue;
        const VectorXd qd = randomVector(rng, 2, 1.0);
        CHECK(relErr(chain.evaluate(q, qd).accel, star.evaluate(q, qd).accel) < 1e-10);
    }
}

TEST_CASE("flattening a star keeps its topology") {
    RmpTree star(2);
    star.addLeaf(star.root(), "a", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    star.addLeaf(star.root(), "b", maps::offset(vec2(1, 1)), LeafPolicy::fromGds(simpleGds(2)));
    RmpTree flat = star.flattened();
    CHECK(flat.root().children().size() == 2);
    const VectorXd q = vec2(0.2, 0.9), qd = vec2(-1, 0.5);
    CHECK(relErr(star.evaluate(q, qd).accel, flat.evaluate(q, qd).accel) < 1e-12);
}

TEST_CASE("kinematic arm tree flattens to the same policy") {
    RmpTree tree(3);
    const std::vector<double> lengths{0.4, 0.32, 0.25};
    for (int link = 0; link < 3; ++link) {
        RmpNode& cp =
            tree.addChild(tree.root(), "cp" + std::to_string(link),
                          maps::planarArmFk(lengths, 1.0, link));
        tree.addLeaf(cp, "dist" + std::to_string(link),
                     maps::distanceToPoint(vec2(0.5, 0.4), 0.1), LeafPolicy::fromGds(simpleGds(1)));
    }
    leaves::AttractorParams attractor;
    RmpTree flat = tree.flattened();
    std::mt19937_64 rng(33);
    for (int s = 0; s < 20; ++s) {
        const VectorXd q = randomVector(rng, 3, 1.2);
        const VectorXd qd = randomVector(rng, 3, 1.0);
        CHECK(relErr(tree.evaluate(q, qd).accel, flat.evaluate(q, qd).accel) < 1e-10);
    }
}

TEST_CASE("evaluate is bitwise deterministic") {
    RmpTree tree(2);
    tree.addLeaf(tree.root(), "spring", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    tree.addLeaf(tree.root(), "dist", maps::distanceToPoint(vec2(2, 2), 0.5),
                 LeafPolicy::fromGds(simpleGds(1)));
    const VectorXd q = vec2(0.123456789, -0.987654321), qd = vec2(0.5, -0.25);
    const TreeEval a = tree.evaluate(q, qd);
    const TreeEval b = tree.evaluate(q, qd);
    CHECK(std::memcmp(a.accel.data(), b.accel.data(), sizeof(double) * 2) == 0);
    CHECK(std::memcmp(a.inertia.data(), b.inertia.data(), sizeof(double) * 4) == 0);
}

TEST_CASE("child declaration order only reassociates floating point") {
    RmpTree ab(2), ba(2);
    auto dist = [] { return maps::distanceToPoint(vec2(1.5, 0), 0.3); };
    ab.addLeaf(ab.root(), "a", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    ab.addLeaf(ab.root(), "b", dist(), LeafPolicy::fromGds(simpleGds(1)));
    ba.addLeaf(ba.root(), "b", dist(), LeafPolicy::fromGds(simpleGds(1)));
    ba.addLeaf(ba.root(), "a", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    const VectorXd q = vec2(0.3, 0.8), qd = vec2(-0.6, 0.1);
    CHECK(relErr(ab.evaluate(q, qd).accel, ba.evaluate(q, qd).accel) < 1e-12);
}

TEST_CASE("root force stays in the span of the root inertia") {
    std::mt19937_64 rng(55);
    for (int s = 0; s < 40; ++s) {
        RmpTree tree(2);
        leaves::CollisionParams collision;
        collision.epsilon = 1e-6;
        tree.addLeaf(tree.root(), "avoid", maps::distanceToPoint(vec2(0, 0), 0.5),
                     LeafPolicy::fromGds(leaves::collisionLeaf1d(collision)));
        tree.addLeaf(tree.root(), "attract", maps::offset(vec2(2, 1)),
                     LeafPolicy::fromGds(leaves::attractorLeaf(2, {})));
        VectorXd q = randomVector(rng, 2, 2.5);
        while (q.norm() < 0.8) q = randomVector(rng, 2, 2.5);
        const VectorXd qd = randomVector(rng, 2, 1.5);
        const TreeEval eval = tree.evaluate(q, qd);
        CHECK((eval.inertia * eval.accel - eval.force).norm() < 1e-8 * (1.0 + eval.force.norm()));
    }
}

TEST_CASE("degenerate root is rejected") {
    RmpTree tree(2);
    // A leaf emitting zero metric everywhere: no direction is active.
    tree.addLeaf(tree.root(), "damper", maps::identity(2),
                 LeafPolicy::fromGds(leaves::rootDampingLeaf(2, 0.5)));
    CHECK_THROWS_AS(tree.evaluate(vec2(1, 1), vec2(0.5, 0)), NumericalError);
}

TEST_CASE("domain errors carry the node name") {
    RmpTree tree(1);
    tree.addLeaf(tree.root(), "barrier_leaf", maps::reciprocal(),
                 LeafPolicy::fromGds(simpleGds(1)));
    try {
        tree.evaluate(vec1(1e-14), vec1(0));
        FAIL("expected SingularDomainError");
    } catch (const SingularDomainError& e) {
        CHECK(std::string(e.what()).find("barrier_leaf") != std::string::npos);
    }
}

TEST_CASE("tree builder enforces structural invariants") {
    RmpTree tree(2);
    RmpNode& leaf =
        tree.addLeaf(tree.root(), "leaf", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    CHECK_THROWS_AS(tree.addChild(leaf, "child", maps::identity(2)), std::logic_error);
    CHECK_THROWS_AS(tree.addChild(tree.root(), "bad", maps::identity(3)), DimensionError);
    CHECK(tree.root().isRoot());
    CHECK(!tree.root().isLeaf());
    CHECK(leaf.isLeaf());
}

TEST_CASE("clones evaluate independently") {
    RmpTree tree(2);
    tree.addLeaf(tree.root(), "spring", maps::identity(2), LeafPolicy::fromGds(simpleGds(2)));
    RmpTree copy(tree);
    const VectorXd q = vec2(0.5, 0.5), qd = vec2(0, 0);
    const VectorXd a1 = tree.evaluate(q, qd).accel;
    const VectorXd a2 = copy.evaluate(vec2(-1, 2), vec2(1, 1)).accel;
    CHECK(relErr(tree.evaluate(q, qd).accel, a1) < 1e-15);
    CHECK(a2.allFinite());
}
