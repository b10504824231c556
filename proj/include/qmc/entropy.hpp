#pragma once

#include <string>
#include <vector>

#include "qmc/types.hpp"

namespace qmc {

/// Finite or +∞ result of a relative-entropy computation. Accessing the
/// value of an infinite result throws; callers must branch on is_finite().
class ExtendedReal {
 public:
  ExtendedReal() : finite_(true), value_(0.0) {}
  explicit ExtendedReal(double v) : finite_(true), value_(v) {}
  static ExtendedReal infinity() {
    ExtendedReal e;
    e.finite_ = false;
    return e;
  }
  bool is_finite() const { return finite_; }
  double value() const {
    if (!finite_) throw ValidationError("ExtendedReal: value of +inf");
    return value_;
  }

 private:
  bool finite_;
  double value_;
};

struct Distribution {
  std::vector<double> probs;
  std::vector<std::string> support_labels;  // optional, may be empty

  /// Throws ValidationError on negative entries or sum far from 1.
  static Distribution make(std::vector<double> p,
                           std::vector<std::string> labels = {});
};

struct Ensemble {
  Distribution probs;
  std::vector<DensityOperator> states;

  static Ensemble make(Distribution p, std::vector<DensityOperator> s);
};

/// −Σ p log₂ p with 0·log 0 := 0.
double shannon_entropy(const Distribution& p);

/// −Tr ρ log₂ ρ from the spectrum, eigenvalues clipped to [0,1].
double von_neumann_entropy(const DensityOperator& rho);
double von_neumann_entropy(const Mat& rho);

/// Umegaki divergence Tr ρ(log₂ρ − log₂σ); +∞ when supp(ρ) ⊄ supp(σ).
ExtendedReal relative_entropy(const DensityOperator& rho,
                              const DensityOperator& sigma,
                              double rank_tol = kRankTol);

/// S(ρ_X)+S(ρ_Y)−S(ρ_XY) for the bipartition (side_a | rest).
double mutual_information(const DensityOperator& rho,
                          const std::vector<std::string>& side_a);

/// S(AB)+S(BC)−S(ABC)−S(B) for a three-label state ordered (A,B,C).
double conditional_mutual_information(const DensityOperator& rho);

/// S(Σ p_x ρ_x) − Σ p_x S(ρ_x).
double holevo_chi(const Ensemble& e);

}  // namespace qmc
