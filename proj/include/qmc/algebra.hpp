#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qmc/channels.hpp"
#include "qmc/types.hpp"

namespace qmc {

/// Finite-dimensional *-subalgebra of d×d matrices, given by a basis that is
/// orthonormal under the Hilbert–Schmidt inner product.
struct OperatorAlgebra {
  int ambient_dim = 0;
  std::vector<Mat> basis;

  int dim() const { return static_cast<int>(basis.size()); }

  /// Orthogonal projection of x onto the span of the basis.
  Mat project(const Mat& x) const;

  /// Max residual over: adjoint closure, product closure, identity
  /// containment. Used by decompose_algebra's precondition check.
  double closure_residual() const;
};

/// Decomposition of the ambient space as ⊕_j H_L_j ⊗ H_R_j. Conjugating an
/// algebra element by basis_unitary† yields ⊕_j (x_j ⊗ I_{dR_j}).
struct BlockStructure {
  std::vector<std::pair<int, int>> blocks;  // (dL_j, dR_j)
  Mat basis_unitary;                        // columns are the adapted basis

  int block_offset(int j) const;  // start index of block j in rotated space
};

/// Block structure plus the ω_j defining the projection
/// ξ ↦ ⊕_j Tr_{R_j}(Π_j ξ Π_j) ⊗ ω_j.
struct ConditionalExpectation {
  BlockStructure structure;
  std::vector<DensityOperator> omega;

  Mat apply(const Mat& xi) const;
};

/// Orthonormal basis of {X : [X,G] = [X,G†] = 0 for all generators G},
/// from the nullspace of the stacked commutator superoperator.
OperatorAlgebra commutant(const std::vector<Mat>& generators);

/// {X : F*(X) = X}, computed as the commutant of F's Kraus operators.
/// Requires a full-rank invariant state; throws ValidationError otherwise.
OperatorAlgebra fixed_point_algebra(const QuantumChannel& f);

/// Cesàro-limit channel P = lim (1/N) Σ F^n, built from the spectral
/// projector onto the eigenvalue-1 eigenspace of F's superoperator.
QuantumChannel ergodic_projection(const QuantumChannel& f);

/// Wedderburn form: unitary W with W†AW = ⊕_j B(dL_j) ⊗ I(dR_j). Blocks
/// sorted by (dL, dR, canonical projector comparison). The seed drives the
/// generic-element sampling; resamples up to 8 times on genericity failure.
BlockStructure decompose_algebra(const OperatorAlgebra& a, std::uint64_t seed);

/// Block structure of A plus the ω_j extracted from the ergodic projection
/// of F. Requires A = fixed_point_algebra(F); verified on a spanning set.
ConditionalExpectation conditional_expectation(const OperatorAlgebra& a,
                                               const QuantumChannel& f,
                                               std::uint64_t seed);

// Row-major vectorization helpers shared with the structure pipeline.
Vec vec_rm(const Mat& m);
Mat unvec_rm(const Vec& v, int rows, int cols);

/// Orthonormal basis (columns) of the nullspace of m, singular values
/// below rel_tol·σ_max counted as zero.
Mat nullspace(const Mat& m, double rel_tol = kRankTol);

}  // namespace qmc
