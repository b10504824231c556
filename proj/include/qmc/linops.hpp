#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qmc/types.hpp"

namespace qmc {

struct HermitianEigenSystem {
  RVec eigenvalues;  // ascending
  Mat eigenvectors;  // unitary, columns
};

enum class SpectralMap { Sqrt, Log2, PinvSqrt };

/// Kronecker product, a-index major / b-index minor.
Mat tensor(const Mat& a, const Mat& b);

/// Trace out the subsystems named in `traced`; remaining labels keep their
/// original order. Total trace is preserved.
Mat partial_trace(const Mat& m, const SubsystemShape& shape,
                  const std::vector<std::string>& traced);

/// Reorder subsystems to `new_order` (a permutation of shape.labels).
Mat permute_subsystems(const Mat& m, const SubsystemShape& shape,
                       const std::vector<std::string>& new_order);

/// Symmetrizes (M+M†)/2 before solving.
HermitianEigenSystem hermitian_eig(const Mat& m);

/// Apply f to the spectrum of a Hermitian PSD matrix. Eigenvalues below
/// rank_tol·λ_max map to 0 for PinvSqrt and Log2. Throws ValidationError on
/// eigenvalues below −rank_tol·λ_max.
Mat spectral_function(const Mat& m, SpectralMap f, double rank_tol = kRankTol);

/// (1/2)·Σ|eig(a−b)|.
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const Mat& a, const Mat& b);

/// Projector onto the span of eigenvectors with eigenvalue > rank_tol·λ_max.
Mat support_projector(const Mat& m, double rank_tol = kRankTol);

/// Isometry (d × rank) whose columns span the support of a Hermitian PSD m.
Mat support_isometry(const Mat& m, double rank_tol = kRankTol);

}  // namespace qmc
