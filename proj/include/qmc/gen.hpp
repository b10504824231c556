#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qmc/channels.hpp"
#include "qmc/types.hpp"

namespace qmc {

using Rng = std::mt19937_64;

/// Matrix with i.i.d. standard complex normal entries.
Mat ginibre(int rows, int cols, Rng& rng);

/// ρ = GG†/Tr(GG†).
DensityOperator ginibre_state(const SubsystemShape& shape, Rng& rng);

/// Haar-distributed unitary (QR of a Ginibre matrix, phases fixed).
Mat haar_unitary(int d, Rng& rng);

/// Haar isometry of shape (rows × cols), rows ≥ cols.
Mat haar_isometry(int rows, int cols, Rng& rng);

/// Random CPTP map with the given number of Kraus operators, sampled from
/// a Haar isometry into out ⊗ env.
QuantumChannel random_channel(const SubsystemShape& in,
                              const SubsystemShape& out, int kraus_count,
                              Rng& rng);

/// Random probability vector (normalized uniforms).
std::vector<double> random_distribution(int n, Rng& rng);

struct PlantedBlock {
  int dim_left = 1;
  int dim_right = 1;
};

/// ⊕_j q_j ρ_{AbL_j} ⊗ ρ_{bR_jC} with a Haar-random basis on B hiding the
/// block structure. Labels (A,B,C). dB = Σ dL_j·dR_j.
DensityOperator planted_markov_state(int dim_a, int dim_c,
                                     const std::vector<PlantedBlock>& blocks,
                                     const std::vector<double>& q, Rng& rng);

/// (|0..0⟩+|1..1⟩)/√2 on three qubits, labels (A,B,C).
DensityOperator ghz_state();

/// Random classical Markov chain P(a)P(b|a)P(c|b) as a flat joint
/// distribution over a×b×c outcomes, c index fastest.
std::vector<double> random_classical_chain(int na, int nb, int nc, Rng& rng);

/// Random joint distribution over a×b×c outcomes.
std::vector<double> random_tripartite_distribution(int na, int nb, int nc,
                                                   Rng& rng);

}  // namespace qmc
