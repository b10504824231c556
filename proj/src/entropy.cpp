#include "qmc/entropy.hpp"

#include <cmath>
#include <numeric>

#include "qmc/linops.hpp"

namespace qmc {

Distribution Distribution::make(std::vector<double> p,
                                std::vector<std::string> labels) {
  for (double x : p)
    if (x < 0.0 || !std::isfinite(x))
      throw ValidationError("Distribution: invalid probability");
  double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("Distribution: does not sum to 1");
  if (!labels.empty() && labels.size() != p.size())
    throw ValidationError("Distribution: label count mismatch");
  return Distribution{std::move(p), std::move(labels)};
}

Ensemble Ensemble::make(Distribution p, std::vector<DensityOperator> s) {
  if (p.probs.size() != s.size())
    throw ValidationError("Ensemble: length mismatch");
  if (s.empty()) throw ValidationError("Ensemble: empty");
  for (const auto& st : s)
    if (st.dim() != s.front().dim())
      throw ValidationError("Ensemble: states of unequal dimension");
  return Ensemble{std::move(p), std::move(s)};
}

namespace {

double entropy_of_spectrum(const RVec& lambda) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    double p = std::min(std::max(lambda[i], 0.0), 1.0);
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double shannon_entropy(const Distribution& p) {
  double h = 0.0;
  for (double x : p.probs)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

double von_neumann_entropy(const Mat& rho) {
  return entropy_of_spectrum(hermitian_eig(rho).eigenvalues);
}

double von_neumann_entropy(const DensityOperator& rho) {
  return von_neumann_entropy(rho.matrix);
}

ExtendedReal relative_entropy(const DensityOperator& rho,
                              const DensityOperator& sigma, double rank_tol) {
  if (rho.dim() != sigma.dim())
    throw ShapeError("relative_entropy: dimension mismatch");
  auto er = hermitian_eig(rho.matrix);
  auto es = hermitian_eig(sigma.matrix);
  double rcut = rank_tol * std::max(er.eigenvalues.maxCoeff(), 0.0);
  double scut = rank_tol * std::max(es.eigenvalues.maxCoeff(), 0.0);

  // Support test: each significant eigenvector of ρ must lie in supp(σ).
  Mat ker_sigma = Mat::Identity(sigma.dim(), sigma.dim());
  for (Eigen::Index j = 0; j < es.eigenvalues.size(); ++j)
    if (es.eigenvalues[j] > scut)
      ker_sigma -= es.eigenvectors.col(j) * es.eigenvectors.col(j).adjoint();
  for (Eigen::Index i = 0; i < er.eigenvalues.size(); ++i) {
    if (er.eigenvalues[i] <= rcut) continue;
    double leak = (ker_sigma * er.eigenvectors.col(i)).norm();
    if (leak * leak * er.eigenvalues[i] > rank_tol)
      return ExtendedReal::infinity();
  }

  // Tr ρ log₂ρ − Σ_{ij} λ_i |⟨u_i|v_j⟩|² log₂ μ_j
  double result = -entropy_of_spectrum(er.eigenvalues);
  for (Eigen::Index i = 0; i < er.eigenvalues.size(); ++i) {
    double lam = std::min(std::max(er.eigenvalues[i], 0.0), 1.0);
    if (lam <= 0.0) continue;
    for (Eigen::Index j = 0; j < es.eigenvalues.size(); ++j) {
      if (es.eigenvalues[j] <= scut) continue;
      double mu = std::min(es.eigenvalues[j], 1.0);
      double overlap =
          std::norm(er.eigenvectors.col(i).dot(es.eigenvectors.col(j)));
      result -= lam * overlap * std::log2(mu);
    }
  }
  return ExtendedReal(result);
}

double mutual_information(const DensityOperator& rho,
                          const std::vector<std::string>& side_a) {
  if (side_a.empty() || side_a.size() >= rho.shape.labels.size())
    throw ShapeError("mutual_information: invalid bipartition");
  std::vector<std::string> side_b;
  for (const auto& l : rho.shape.labels)
    if (std::find(side_a.begin(), side_a.end(), l) == side_a.end())
      side_b.push_back(l);
  for (const auto& l : side_a) rho.shape.index_of(l);
  Mat rho_a = partial_trace(rho.matrix, rho.shape, side_b);
  Mat rho_b = partial_trace(rho.matrix, rho.shape, side_a);
  return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) -
         von_neumann_entropy(rho.matrix);
}

double conditional_mutual_information(const DensityOperator& rho) {
  if (rho.shape.labels.size() != 3)
    throw ShapeError("conditional_mutual_information: need three labels");
  const auto& l = rho.shape.labels;
  Mat rho_ab = partial_trace(rho.matrix, rho.shape, {l[2]});
  Mat rho_bc = partial_trace(rho.matrix, rho.shape, {l[0]});
  Mat rho_b = partial_trace(rho.matrix, rho.shape, {l[0], l[2]});
  return von_neumann_entropy(rho_ab) + von_neumann_entropy(rho_bc) -
         von_neumann_entropy(rho.matrix) - von_neumann_entropy(rho_b);
}

double holevo_chi(const Ensemble& e) {
  Mat avg = Mat::Zero(e.states.front().dim(), e.states.front().dim());
  double mix = 0.0;
  for (size_t i = 0; i < e.states.size(); ++i) {
    avg += e.probs.probs[i] * e.states[i].matrix;
    mix += e.probs.probs[i] * von_neumann_entropy(e.states[i]);
  }
  return von_neumann_entropy(avg) - mix;
}

}  // namespace qmc
