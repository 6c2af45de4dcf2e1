#include "rmpflow/numdiff.hpp"

namespace rmpflow {
namespace numdiff {

MatrixXd jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                  double base_step) {
    const double h = step(x, base_step);
    VectorXd xp = x, xm = x;
    MatrixXd jac;
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

VectorXd gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                  double base_step) {
    const double h = step(x, base_step);
    VectorXd g(x.size());
    VectorXd xp = x, xm = x;
    for (int k = 0; k < x.size(); ++k) {
        xp(k) += h;
        xm(k) -= h;
        g(k) = (f(xp) - f(xm)) / (2.0 * h);
        xp(k) = x(k);
        xm(k) = x(k);
    }
    return g;
}

VectorXd jdotTimesV(const std::function<MatrixXd(const VectorXd&)>& jac, const VectorXd& x,
                    const VectorXd& xd, double base_step) {
    const double h = step(x, base_step);
    const MatrixXd dj = (jac(x + h * xd) - jac(x - h * xd)) / (2.0 * h);
    return dj * xd;
}

MatrixXd matrixPartial(const std::function<MatrixXd(const VectorXd&)>& m, const VectorXd& at,
                       int k, double base_step) {
    const double h = step(at, base_step);
    VectorXd p = at, q = at;
    p(k) += h;
    q(k) -= h;
    return (m(p) - m(q)) / (2.0 * h);
}

MatrixXd matrixPartialRichardson(const std::function<MatrixXd(const VectorXd&)>& m,
                                 const VectorXd& at, int k, double base_step) {
    auto central = [&](double h) {
        VectorXd p = at, q = at;
        p(k) += h;
        q(k) -= h;
        return MatrixXd(((m(p) - m(q)) / (2.0 * h)));
    };
    const double h = step(at, base_step);
    const MatrixXd d1 = central(h);
    const MatrixXd d2 = central(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace numdiff
}  // namespace rmpflow
