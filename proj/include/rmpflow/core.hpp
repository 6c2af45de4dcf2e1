#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rmpflow {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Position/velocity pair on some coordinate space.
struct State {
    VectorXd x;
    VectorXd xd;

    State() = default;
    State(VectorXd x_in, VectorXd xd_in) : x(std::move(x_in)), xd(std::move(xd_in)) {}

    Eigen::Index dim() const { return x.size(); }
};

// Evaluation left the valid domain of a map or policy (e.g. 1/q at q ~ 0).
class SingularDomainError : public std::runtime_error {
public:
    explicit SingularDomainError(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible vector/matrix dimensions between maps, policies or states.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values or irrecoverably degenerate linear algebra.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario configuration rejected at parse or validation time.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline bool allFinite(const VectorXd& v) { return v.allFinite(); }
inline bool allFinite(const MatrixXd& m) { return m.allFinite(); }

// Absolute threshold below which a coordinate counts as sitting on a map
// singularity. Below meaningful double precision at the scales used here.
inline constexpr double kSingularEps = 1e-12;

// Relative singular-value cutoff for every Moore-Penrose resolve.
inline constexpr double kPinvCutoff = 1e-10;

}  // namespace rmpflow
