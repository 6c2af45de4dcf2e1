#pragma once

#include "rmpflow/core.hpp"

namespace rmpflow {

// Force-form motion-policy descriptor [f, M] on an m-dimensional space.
struct NaturalRmp {
    VectorXd f;
    MatrixXd m;

    Eigen::Index dim() const { return f.size(); }
    static NaturalRmp zero(int dim) { return {VectorXd::Zero(dim), MatrixXd::Zero(dim, dim)}; }
};

// Acceleration-form descriptor (a, M).
struct CanonicalRmp {
    VectorXd a;
    MatrixXd m;

    Eigen::Index dim() const { return a.size(); }
};

// Minimum-norm least-squares solve a = M^+ f; singular values below
// 1e-10 * sigma_max are treated as zero.
VectorXd pinvSolve(const MatrixXd& m, const VectorXd& f);

// Natural -> canonical via the Moore-Penrose pseudo-inverse. Degenerate M is
// allowed; non-finite entries are rejected.
CanonicalRmp resolve(const NaturalRmp& rmp);

inline NaturalRmp naturalize(const CanonicalRmp& rmp) { return {rmp.m * rmp.a, rmp.m}; }

}  // namespace rmpflow
