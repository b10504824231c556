#include "qmc/apps.hpp"

#include <algorithm>
#include <cmath>

#include "qmc/linops.hpp"

namespace qmc {

Purification purify(const DensityOperator& sigma) {
  auto es = hermitian_eig(sigma.matrix);
  int d = sigma.dim();
  double cut = kRankTol * std::max(es.eigenvalues.maxCoeff(), 0.0);
  // Descending order makes the output canonical.
  std::vector<int> keep;
  for (int i = d - 1; i >= 0; --i)
    if (es.eigenvalues[i] > cut) keep.push_back(i);
  int r = static_cast<int>(keep.size());

  Purification out;
  out.dim_a = r;
  out.source = sigma;
  out.vector = Vec::Zero(r * d);
  for (int a = 0; a < r; ++a) {
    double amp = std::sqrt(std::min(std::max(es.eigenvalues[keep[a]], 0.0), 1.0));
    out.vector.segment(a * d, d) = amp * es.eigenvectors.col(keep[a]);
  }
  out.vector /= out.vector.norm();
  return out;
}

double coherent_information(const DensityOperator& sigma,
                            const QuantumChannel& phi) {
  if (phi.in_dim() != sigma.dim())
    throw ShapeError("coherent_information: channel/state dimension mismatch");
  auto p = purify(sigma);
  Mat phi_state = Mat(p.vector * p.vector.adjoint());
  auto ext = tensor_with_identity(phi, SubsystemShape({p.dim_a}, {"Ref"}),
                                  TensorSide::Left);
  Mat joint = ext.apply(phi_state);
  return von_neumann_entropy(Mat(phi.apply(sigma.matrix))) -
         von_neumann_entropy(joint);
}

QecVerdict qec_check(const DensityOperator& sigma, const QuantumChannel& phi,
                     double tol) {
  QecVerdict v;
  v.gap = von_neumann_entropy(sigma) - coherent_information(sigma, phi);
  if (v.gap >= tol) return v;

  auto recovery = petz_transpose_channel(phi, sigma);
  // Verify on the purification: (id ⊗ recovery∘φ) must fix |Φ_σ⟩⟨Φ_σ|.
  auto p = purify(sigma);
  Mat phi_state = Mat(p.vector * p.vector.adjoint());
  auto ext = tensor_with_identity(compose(recovery, phi),
                                  SubsystemShape({p.dim_a}, {"Ref"}),
                                  TensorSide::Left);
  double residual = trace_distance(ext.apply(phi_state), phi_state);
  v.recoverable = residual < std::sqrt(tol) * 10.0;
  v.recovery = std::move(recovery);
  return v;
}

HolevoVerdict holevo_equality_check(const Ensemble& e,
                                    const QuantumChannel& phi, double tol) {
  HolevoVerdict v;
  v.chi_before = holevo_chi(e);

  std::vector<DensityOperator> mapped;
  for (const auto& s : e.states)
    mapped.push_back(DensityOperator(phi.apply(s.matrix), phi.out_shape, 1e-8));
  v.chi_after = holevo_chi(Ensemble::make(e.probs, std::move(mapped)));

  v.saturated = std::abs(v.chi_before - v.chi_after) < tol;
  v.commuting = true;
  for (size_t x = 0; x < e.states.size() && v.commuting; ++x)
    for (size_t y = x + 1; y < e.states.size(); ++y) {
      const Mat& a = e.states[x].matrix;
      const Mat& b = e.states[y].matrix;
      if ((a * b - b * a).norm() >= tol) {
        v.commuting = false;
        break;
      }
    }
  return v;
}

DensityOperator embed_distribution(const Distribution& p,
                                   const SubsystemShape& shape) {
  int d = shape.total_dim();
  if (static_cast<int>(p.probs.size()) != d)
    throw ShapeError("embed_distribution: size does not match shape");
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = p.probs[i];
  return DensityOperator(m, shape);
}

namespace {

double h2sum(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s -= x * std::log2(x);
  return s;
}

}  // namespace

ClassicalMarkovVerdict classical_markov_check(const std::vector<double>& p,
                                              int na, int nb, int nc,
                                              double tol) {
  if (static_cast<int>(p.size()) != na * nb * nc)
    throw ShapeError("classical_markov_check: size mismatch");
  auto joint = Distribution::make(p);  // validates normalization

  ClassicalMarkovVerdict v;
  for (int b = 0; b < nb; ++b) {
    double pb = 0.0;
    for (int a = 0; a < na; ++a)
      for (int c = 0; c < nc; ++c) pb += p[(a * nb + b) * nc + c];
    if (pb <= 0.0) continue;
    std::vector<double> pa(na, 0.0), pc(nc, 0.0), pac;
    for (int a = 0; a < na; ++a)
      for (int c = 0; c < nc; ++c) {
        double x = p[(a * nb + b) * nc + c] / pb;
        pa[a] += x;
        pc[c] += x;
        pac.push_back(x);
      }
    v.cmi += pb * (h2sum(pa) + h2sum(pc) - h2sum(pac));
  }
  v.pass = v.cmi < tol;
  if (v.pass) {
    ClassicalFactorization f;
    for (int b = 0; b < nb; ++b) {
      double pb = 0.0;
      for (int a = 0; a < na; ++a)
        for (int c = 0; c < nc; ++c) pb += p[(a * nb + b) * nc + c];
      f.p_b.push_back(pb);
      std::vector<double> pa(na, 0.0), pc(nc, 0.0);
      if (pb > 0.0) {
        for (int a = 0; a < na; ++a)
          for (int c = 0; c < nc; ++c) {
            pa[a] += p[(a * nb + b) * nc + c] / pb;
            pc[c] += p[(a * nb + b) * nc + c] / pb;
          }
      }
      f.p_a_given_b.push_back(std::move(pa));
      f.p_c_given_b.push_back(std::move(pc));
    }
    v.factorization = std::move(f);
  }
  return v;
}

}  // namespace qmc
