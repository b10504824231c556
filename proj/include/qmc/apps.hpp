#pragma once

#include <optional>
#include <vector>

#include "qmc/channels.hpp"
#include "qmc/entropy.hpp"
#include "qmc/types.hpp"

namespace qmc {

/// Canonical purification |Φ⟩ = Σ_i √λ_i |i⟩_A |v_i⟩_B (eigenvalues
/// descending, dA = rank). Amplitudes are stored A-major, B fastest.
struct Purification {
  Vec vector;
  int dim_a = 0;
  DensityOperator source;
};

struct QecVerdict {
  double gap = 0.0;  // S(σ) − I_c(σ, φ), nonnegative up to tolerance
  bool recoverable = false;
  std::optional<QuantumChannel> recovery;
};

struct HolevoVerdict {
  double chi_before = 0.0;
  double chi_after = 0.0;
  bool saturated = false;
  bool commuting = false;  // pairwise ‖[ρ_x, ρ_x′]‖_F < tol on the inputs
};

/// Conditionals of a classical Markov chain, defined where P_B(b) > 0;
/// rows indexed by b.
struct ClassicalFactorization {
  std::vector<double> p_b;
  std::vector<std::vector<double>> p_a_given_b;
  std::vector<std::vector<double>> p_c_given_b;
};

struct ClassicalMarkovVerdict {
  double cmi = 0.0;
  bool pass = false;
  std::optional<ClassicalFactorization> factorization;
};

Purification purify(const DensityOperator& sigma);

/// S(φσ) − S((id_A ⊗ φ)Φ_σ).
double coherent_information(const DensityOperator& sigma,
                            const QuantumChannel& phi);

/// Reversibility of φ on supp(σ): recoverable ⇔ the coherent-information
/// gap closes AND the transpose-channel recovery restores the purification.
QecVerdict qec_check(const DensityOperator& sigma, const QuantumChannel& phi,
                     double tol = 1e-9);

/// Data-processing saturation of the Holevo quantity under φ.
HolevoVerdict holevo_equality_check(const Ensemble& e,
                                    const QuantumChannel& phi,
                                    double tol = 1e-9);

/// Diagonal embedding ρ_P = Σ_x P(x)|x⟩⟨x| with the given product shape.
DensityOperator embed_distribution(const Distribution& p,
                                   const SubsystemShape& shape);

/// Classical I(A:C|B) = Σ_b P_B(b) I(A:C|B=b) for a joint distribution
/// over na×nb×nc outcomes (c index fastest). On pass, emits the chain
/// factorization P_B, P_{A|B}, P_{C|B}.
ClassicalMarkovVerdict classical_markov_check(const std::vector<double>& p,
                                              int na, int nb, int nc,
                                              double tol = 1e-9);

}  // namespace qmc
