#ifndef REACH_TYPES_HPP_
#define REACH_TYPES_HPP_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace reach {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Solver could not certify a status (never mis-classified silently).
struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

/// A bounded, nonempty set was required (e.g. interval enclosure of an
/// empty or unbounded polytope).
struct EmptySetError : std::runtime_error {
  explicit EmptySetError(const std::string& what) : std::runtime_error(what) {}
};

struct UnboundedSetError : std::runtime_error {
  explicit UnboundedSetError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DimensionMismatch(what);
}

} // namespace reach

#endif // REACH_TYPES_HPP_
