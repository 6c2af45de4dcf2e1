#include "rmpflow/gds.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "rmpflow/numdiff.hpp"

namespace rmpflow {

namespace {

MatrixXd metricPartialX(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd, int k) {
    if (spec.metric_dx) return spec.metric_dx(x, xd, k);
    auto g_of_x = [&](const VectorXd& p) { return spec.metric(p, xd); };
    return numdiff::matrixPartial(g_of_x, x, k);
}

MatrixXd metricPartialXd(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd, int k) {
    if (spec.metric_dxd) return spec.metric_dxd(x, xd, k);
    auto g_of_xd = [&](const VectorXd& v) { return spec.metric(x, v); };
    return numdiff::matrixPartial(g_of_xd, xd, k);
}

VectorXd potentialGrad(const GdsSpec& spec, const VectorXd& x) {
    if (spec.potential_grad) return spec.potential_grad(x);
    if (!spec.potential) return VectorXd::Zero(x.size());
    return numdiff::gradient(spec.potential, x);
}

}  // namespace

GdsSpec GdsSpec::unforced(int dim,
                          std::function<MatrixXd(const VectorXd&, const VectorXd&)> metric) {
    GdsSpec spec;
    spec.dim = dim;
    spec.metric = std::move(metric);
    spec.damping = [dim](const VectorXd&, const VectorXd&) {
        return MatrixXd(MatrixXd::Zero(dim, dim));
    };
    spec.potential = [](const VectorXd&) { return 0.0; };
    spec.potential_grad = [dim](const VectorXd&) { return VectorXd(VectorXd::Zero(dim)); };
    return spec;
}

CurvatureTerms curvature(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd) {
    const int m = spec.dim;
    const MatrixXd g = spec.metric(x, xd);

    CurvatureTerms out;
    out.inertia_correction = MatrixXd::Zero(m, m);
    // Column k of Xi_G is 1/2 (dG/dxd_k) xd.
    for (int k = 0; k < m; ++k) {
        const MatrixXd dk = metricPartialXd(spec, x, xd, k);
        if (!allFinite(dk))
            throw NumericalError("curvature: non-finite velocity derivative of metric, column " +
                                 std::to_string(k));
        out.inertia_correction.col(k) = 0.5 * dk * xd;
    }

    // Gdot_x = sum_k xd_k dG/dx_k; grad_x(xd^T G xd)_k = xd^T (dG/dx_k) xd.
    MatrixXd gdot_x = MatrixXd::Zero(m, m);
    VectorXd quad_grad(m);
    for (int k = 0; k < m; ++k) {
        const MatrixXd ak = metricPartialX(spec, x, xd, k);
        if (!allFinite(ak))
            throw NumericalError("curvature: non-finite position derivative of metric, column " +
                                 std::to_string(k));
        gdot_x += xd(k) * ak;
        quad_grad(k) = xd.dot(ak * xd);
    }
    out.curvature_force = gdot_x * xd - 0.5 * quad_grad;
    out.inertia = g + out.inertia_correction;
    return out;
}

NaturalRmp gdsNaturalRmp(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd,
                         const CurvatureToggles& toggles) {
    const CurvatureTerms terms = curvature(spec, x, xd);
    VectorXd f = -potentialGrad(spec, x) - spec.damping(x, xd) * xd;
    if (toggles.curvature_force) f -= terms.curvature_force;
    MatrixXd m = spec.metric(x, xd);
    if (toggles.inertia_correction) m += terms.inertia_correction;
    return {std::move(f), std::move(m)};
}

VectorXd gdsAccel(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd) {
    const NaturalRmp rmp = gdsNaturalRmp(spec, x, xd);
    return pinvSolve(rmp.m, rmp.f);
}

namespace {

// Pulled-back force and inertia of one structure at (x, xd).
void accumulateStructure(const StructuredGds& s, const VectorXd& x, const VectorXd& xd,
                         VectorXd& force, MatrixXd& inertia) {
    const VectorXd y = s.inner_map.value(x);
    const MatrixXd j = s.inner_map.jacobian(x);
    const VectorXd yd = j * xd;
    const VectorXd jdotv = s.inner_map.jdotTimesV(x, xd);

    const CurvatureTerms terms = curvature(s.outer, y, yd);
    const VectorXd eta = j.transpose() * (terms.curvature_force + terms.inertia * jdotv);
    const VectorXd grad_phi = j.transpose() * (s.outer.potential_grad
                                                   ? s.outer.potential_grad(y)
                                                   : numdiff::gradient(s.outer.potential, y));
    const VectorXd damp = j.transpose() * (s.outer.damping(y, yd) * yd);

    force += -eta - grad_phi - damp;
    inertia += j.transpose() * terms.inertia * j;
}

}  // namespace

VectorXd structuredGdsAccel(const StructuredGds& s, const VectorXd& x, const VectorXd& xd) {
    return structuredGdsAccel(std::vector<StructuredGds>{s}, x, xd);
}

VectorXd structuredGdsAccel(const std::vector<StructuredGds>& parts, const VectorXd& x,
                            const VectorXd& xd) {
    const int m = static_cast<int>(x.size());
    VectorXd force = VectorXd::Zero(m);
    MatrixXd inertia = MatrixXd::Zero(m, m);
    for (const StructuredGds& s : parts) accumulateStructure(s, x, xd, force, inertia);
    if (inertia.norm() == 0.0)
        throw NumericalError("structuredGdsAccel: degenerate inertia (no active structure)");
    return pinvSolve(inertia, force);
}

VectorXd coriolisForce(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd) {
    const int m = spec.dim;
    // dG/dx_k for all k; the metric is treated as velocity-free.
    std::vector<MatrixXd> dg(m);
    for (int k = 0; k < m; ++k) {
        dg[k] = metricPartialX(spec, x, xd, k);
        if (!allFinite(dg[k]))
            throw NumericalError("coriolisForce: non-finite metric derivative, column " +
                                 std::to_string(k));
    }
    MatrixXd c = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double cij = 0.0;
            for (int k = 0; k < m; ++k) {
                const double gamma =
                    0.5 * (dg[k](i, j) + dg[j](i, k) - dg[i](j, k));
                cij += xd(k) * gamma;
            }
            c(i, j) = cij;
        }
    return c * xd;
}

StabilityCheckReport theorem2Check(const GdsSpec& spec, const std::vector<State>& samples) {
    StabilityCheckReport report;
    constexpr double tol = 1e-9;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
    for (size_t si = 0; si < samples.size(); ++si) {
        const State& s = samples[si];
        const std::string tag = "sample " + std::to_string(si);

        if (spec.factorization) {
            const MetricFactorization& fac = *spec.factorization;
            eig.compute(MatrixXd(0.5 * (fac.r(s.x) + fac.r(s.x).transpose())));
            if (eig.eigenvalues().minCoeff() < -tol)
                report.violations.push_back(tag + ": R(x) not positive semidefinite");
            const VectorXd yd = fac.l(s.x) * s.xd;
            for (int i = 0; i < fac.rows; ++i) {
                const double di = fac.d(s.x, yd(i), i);
                if (di < -tol)
                    report.violations.push_back(tag + ": d_" + std::to_string(i) + " = " +
                                                std::to_string(di) + " < 0");
                const double slope = yd(i) * fac.d_dyd(s.x, yd(i), i);
                if (slope < -tol)
                    report.violations.push_back(tag + ": yd_i * d(d_" + std::to_string(i) +
                                                ")/dyd = " + std::to_string(slope) + " < 0");
            }
        }

        const CurvatureTerms terms = curvature(spec, s.x, s.xd);
        const MatrixXd sym =
            0.5 * (terms.inertia_correction + terms.inertia_correction.transpose());
        eig.compute(sym);
        const double scale = std::max(1.0, terms.inertia_correction.norm());
        if (eig.eigenvalues().minCoeff() < -tol * scale)
            report.violations.push_back(tag + ": Xi_G has negative eigenvalue " +
                                        std::to_string(eig.eigenvalues().minCoeff()));
    }
    report.samples_checked = static_cast<int>(samples.size());
    report.passed = report.violations.empty();
    return report;
}

double kineticEnergy(const GdsSpec& spec, const VectorXd& x, const VectorXd& xd) {
    return 0.5 * xd.dot(spec.metric(x, xd) * xd);
}

double kineticEnergy(const GdsAggregate& agg, const VectorXd& q, const VectorXd& qd) {
    return 0.5 * qd.dot(agg.metric(q, qd) * qd);
}

double lyapunov(const GdsAggregate& agg, const VectorXd& q, const VectorXd& qd) {
    return kineticEnergy(agg, q, qd) + agg.potential(q);
}

}  // namespace rmpflow
