#pragma once

#include <cstdint>
#include <vector>

#include "qmc/algebra.hpp"
#include "qmc/channels.hpp"
#include "qmc/types.hpp"

namespace qmc {

/// Precondition failure: the state is not a quantum Markov chain at the
/// requested tolerance.
struct NotMarkovError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A block that should factor as a product failed the product check;
/// indicates a mis-set tolerance or a numerically borderline input.
struct FactorizationResidualError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The channel does not preserve one of the supplied states.
struct PreservationViolatedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Density operator on exactly three subsystems, by convention (A, B, C).
struct TripartiteState {
  DensityOperator state;

  /// Validates the three-label invariant.
  static TripartiteState make(DensityOperator rho);

  int dim_a() const { return state.shape.dims[0]; }
  int dim_b() const { return state.shape.dims[1]; }
  int dim_c() const { return state.shape.dims[2]; }
};

/// Verdict of the Markov test: both diagnostics are always reported.
struct MarkovVerdict {
  double cmi = 0.0;       // I(A:C|B) in bits
  double residual = 0.0;  // trace distance to the recovered state
  bool pass = false;
};

/// One direct summand q_j · ρ_{AL_j} ⊗ ρ_{RC_j} of the decomposition.
struct MarkovBlock {
  double q = 0.0;
  int dim_left = 1;
  int dim_right = 1;
  DensityOperator rho_al;  // on A ⊗ L_j
  DensityOperator rho_rc;  // on R_j ⊗ C
};

/// ρ_ABC = Σ_j q_j ρ_{AL_j} ⊗ ρ_{RC_j} in the B basis given by b_basis:
/// column block j of b_basis spans H_{L_j} ⊗ H_{R_j} (right index fastest).
struct MarkovDecomposition {
  Mat b_basis;  // dB × dB unitary
  std::vector<MarkovBlock> blocks;
  SubsystemShape shape;  // shape of the source state
  double tol = 1e-9;     // tolerance recorded at construction
};

struct SeparableTerm {
  double weight = 0.0;
  DensityOperator rho_a;
  DensityOperator rho_c;
};

/// Per-state block weights and left factors relative to a common block
/// structure with state-independent right factors ω_j.
struct KoashiImotoDecomposition {
  BlockStructure structure;           // on the states' space
  std::vector<DensityOperator> omega; // ω_j, one per block
  // per_state[k][j] = (q_{j|k}, ρ_{j|k} on the dL_j factor)
  std::vector<std::vector<std::pair<double, DensityOperator>>> per_state;
};

/// R̂ = transpose channel of Tr_C for ρ_BC: a channel B → B⊗C with
/// R̂(ρ_B) = ρ_BC.
QuantumChannel petz_recovery_channel(const DensityOperator& rho_bc);

/// trace_distance(ρ_ABC, (id_A ⊗ R̂)(ρ_AB)), with B compressed to the
/// support of ρ_B first.
double recovery_residual(const TripartiteState& rho);

/// pass ⇔ cmi < tol AND residual < √tol·10.
MarkovVerdict is_markov(const TripartiteState& rho, double tol = 1e-9);

/// Full structure pipeline; requires is_markov to pass at tol.
/// Throws NotMarkovError or FactorizationResidualError.
MarkovDecomposition decompose(const TripartiteState& rho, double tol = 1e-9,
                              std::uint64_t seed = 0);

/// Assemble Σ_j q_j ρ_{AL_j} ⊗ ρ_{RC_j} back into a tripartite state.
TripartiteState reconstruct(const MarkovDecomposition& d);

/// Terms (q_j, Tr_L ρ_{AL_j}, Tr_R ρ_{RC_j}); their mixture of products
/// equals ρ_AC.
std::vector<SeparableTerm> separable_decomposition(
    const MarkovDecomposition& d);

/// ρ_ABC = Σ_i w_i ρ_A_i ⊗ |i⟩⟨i|_B ⊗ ρ_C_i with dB = number of terms.
TripartiteState separable_extension(const std::vector<SeparableTerm>& terms);

/// Decomposition of states jointly preserved by F, relative to the
/// fixed-point algebra of F restricted to the states' joint support.
KoashiImotoDecomposition koashi_imoto(const std::vector<DensityOperator>& states,
                                      const QuantumChannel& f,
                                      std::uint64_t seed = 0);

}  // namespace qmc
