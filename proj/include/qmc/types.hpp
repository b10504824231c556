#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qmc {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Default tolerances used throughout. All relative tolerances are scaled
// by the largest eigenvalue (or singular value) of the operator at hand.
inline constexpr double kHermTol = 1e-9;
inline constexpr double kRankTol = 1e-10;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered list of local Hilbert-space dimensions with unique labels.
/// Composite indices are row-major with the LAST label varying fastest.
struct SubsystemShape {
  std::vector<int> dims;
  std::vector<std::string> labels;

  SubsystemShape() = default;
  SubsystemShape(std::vector<int> d, std::vector<std::string> l);

  int total_dim() const;
  int index_of(const std::string& label) const;  // throws on unknown label
  bool has_label(const std::string& label) const;

  /// Shape restricted to the given labels, preserving original order.
  SubsystemShape subshape(const std::vector<std::string>& keep) const;
};

/// Hermitian, PSD, unit-trace matrix with an attached subsystem shape.
struct DensityOperator {
  Mat matrix;
  SubsystemShape shape;
  double herm_tol = kHermTol;

  DensityOperator() = default;
  /// Validates Hermiticity, positivity and unit trace; throws ValidationError.
  DensityOperator(Mat m, SubsystemShape s, double tol = kHermTol);

  int dim() const { return static_cast<int>(matrix.rows()); }

  /// Single-subsystem state with no particular label.
  static DensityOperator unlabeled(Mat m, double tol = kHermTol);
};

}  // namespace qmc
