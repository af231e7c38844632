#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geq {

/// Hard cap on every chart and matrix dimension.
inline constexpr int kMaxDim = 8;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxDim, kMaxDim>;
using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor,
                           kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Point = Vec;
using Complex = std::complex<double>;

enum class ErrorCode {
  InvalidInput,
  DimensionTooLarge,
  NoConvergence,
  SpectraOverlap,
  DomainViolation,
  SymmetryViolation,
  ResidueTooLarge,
  GroupsNotDisjoint,
  NotConjugationClosed,
  SyntaxError,
  UnknownSymbol,
  IndexOutOfRange,
  DomainError,
  DegenerateMetric,
  AdmissibilityViolation,
  ConjugationViolation,
  ZeroChiAtZero,
  NonSymmetricResult,
  SingularL,
  ZeroInImage,
  EigenvalueCollision,
  NonPositiveWeight,
  NotAdapted,
  StepFailure,
  LeftChart,
  ZeroVelocity,
};

const char* to_string(ErrorCode code);

/// The single exception type of the library. Carries a machine-readable code
/// and, where one exists, the sample point at which the failure was detected.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<Point> where = std::nullopt)
      : std::runtime_error(message), code_(code), where_(std::move(where)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<Point>& where() const noexcept { return where_; }

 private:
  ErrorCode code_;
  std::optional<Point> where_;
};

inline void require_dim(int n, const char* what) {
  if (n < 1 || n > kMaxDim) {
    throw Error(ErrorCode::DimensionTooLarge,
                std::string(what) + ": dimension " + std::to_string(n) + " outside [1, 8]");
  }
}

inline Mat identity(int n) { return Mat::Identity(n, n); }

}  // namespace geq
