#pragma once

#include <vector>

#include "qmc/types.hpp"

namespace qmc {

/// CPTP map in Kraus form. Each Kraus operator is out_dim × in_dim.
struct QuantumChannel {
  std::vector<Mat> kraus;
  SubsystemShape in_shape;
  SubsystemShape out_shape;

  int in_dim() const { return in_shape.total_dim(); }
  int out_dim() const { return out_shape.total_dim(); }

  /// Σ K_i ρ K_i†.
  Mat apply(const Mat& rho) const;
  DensityOperator apply(const DensityOperator& rho) const;

  /// Adjoint (Heisenberg) action Σ K_i† X K_i; unital on the identity.
  Mat adjoint_apply(const Mat& x) const;

  /// Validates CPTP within tol; throws ValidationError.
  static QuantumChannel make(std::vector<Mat> kraus, SubsystemShape in,
                             SubsystemShape out, double tol = 1e-9);
  /// No CPTP validation; for internal constructions known to be valid.
  static QuantumChannel unchecked(std::vector<Mat> kraus, SubsystemShape in,
                                  SubsystemShape out);

  static QuantumChannel identity(const SubsystemShape& shape);
  static QuantumChannel depolarizing(const SubsystemShape& shape);
  /// Tr over the subsystems named in `traced`.
  static QuantumChannel partial_trace_channel(
      const SubsystemShape& shape, const std::vector<std::string>& traced);
  /// Pinching in the computational basis.
  static QuantumChannel dephasing(const SubsystemShape& shape);
};

struct ChoiMatrix {
  Mat matrix;  // (in·out) × (in·out), input index major
  int in_dim = 0;
  int out_dim = 0;
};

struct CptpDiagnostics {
  bool ok = false;
  double tp_residual = 0.0;   // max |Σ K†K − I|
  double min_choi_eig = 0.0;  // most negative Choi eigenvalue
};

struct StinespringDilation {
  int env_dim = 0;
  DensityOperator env_state;
  Mat unitary;  // on system ⊗ environment, environment index fastest
};

CptpDiagnostics is_cptp(const QuantumChannel& t, double tol = 1e-9);

ChoiMatrix choi_matrix(const QuantumChannel& t);

/// Kraus set from the Choi eigendecomposition; deterministic ordering by
/// descending eigenvalue, eigenvalues below 1e-12·λ_max dropped.
std::vector<Mat> kraus_from_choi(const ChoiMatrix& c);

/// Matrix of the map on row-major vectorized operators:
/// vec(T(ρ)) = S·vec(ρ), S = Σ K_i ⊗ conj(K_i). The adjoint map is S†.
Mat superoperator(const QuantumChannel& t);

/// Choi matrix of an arbitrary linear map given as a superoperator.
ChoiMatrix choi_from_superoperator(const Mat& s, int in_dim, int out_dim);

/// Transpose channel σ^{1/2} T*((Tσ)^{-1/2}·(Tσ)^{-1/2}) σ^{1/2},
/// completed on ker(Tσ) so the result is globally CPTP.
QuantumChannel petz_transpose_channel(const QuantumChannel& t,
                                      const DensityOperator& sigma,
                                      double rank_tol = kRankTol);

/// S ∘ T, Kraus {S_j T_i} pruned of near-zero operators.
QuantumChannel compose(const QuantumChannel& s, const QuantumChannel& t);

enum class TensorSide { Left, Right };

/// id ⊗ T (Left: identity factor first) or T ⊗ id (Right).
QuantumChannel tensor_with_identity(const QuantumChannel& t,
                                    const SubsystemShape& id_shape,
                                    TensorSide side);

/// Isometry V = Σ K_i ⊗ |i⟩ completed to a unitary; env state |0⟩⟨0|.
/// Requires in_dim == out_dim.
StinespringDilation stinespring(const QuantumChannel& t);

}  // namespace qmc
