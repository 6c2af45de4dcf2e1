#include "rmpflow/rmp.hpp"

#include <Eigen/SVD>

namespace rmpflow {

VectorXd pinvSolve(const MatrixXd& m, const VectorXd& f) {
    Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kPinvCutoff);
    return svd.solve(f);
}

CanonicalRmp resolve(const NaturalRmp& rmp) {
    if (!allFinite(rmp.f) || !allFinite(rmp.m))
        throw NumericalError("resolve: non-finite entries in natural RMP");
    if (rmp.m.rows() != rmp.m.cols() || rmp.m.rows() != rmp.f.size())
        throw DimensionError("resolve: inconsistent [f, M] dimensions");
    return {pinvSolve(rmp.m, rmp.f), rmp.m};
}

}  // namespace rmpflow
