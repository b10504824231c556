#include "qmc/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "qmc/linops.hpp"

namespace qmc {

Vec vec_rm(const Mat& m) {
  Vec v(m.rows() * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[i * m.cols() + j] = m(i, j);
  return v;
}

Mat unvec_rm(const Vec& v, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
  return m;
}

Mat nullspace(const Mat& m, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  // Absolute floor of 1: callers feed O(1)-scaled constraint matrices, and
  // a purely relative cut would count roundoff noise as rank when the whole
  // matrix is numerically zero.
  double cut = rel_tol * std::max(smax, 1.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

Mat OperatorAlgebra::project(const Mat& x) const {
  Mat out = Mat::Zero(ambient_dim, ambient_dim);
  for (const auto& b : basis) out += (b.adjoint() * x).trace() * b;
  return out;
}

double OperatorAlgebra::closure_residual() const {
  double res = 0.0;
  Mat eye = Mat::Identity(ambient_dim, ambient_dim);
  res = std::max(res, (eye - project(eye)).cwiseAbs().maxCoeff());
  for (const auto& x : basis) {
    Mat xa = x.adjoint();
    res = std::max(res, (xa - project(xa)).cwiseAbs().maxCoeff());
    for (const auto& y : basis) {
      Mat xy = x * y;
      res = std::max(res, (xy - project(xy)).cwiseAbs().maxCoeff());
    }
  }
  return res;
}

int BlockStructure::block_offset(int j) const {
  int off = 0;
  for (int i = 0; i < j; ++i) off += blocks[i].first * blocks[i].second;
  return off;
}

OperatorAlgebra commutant(const std::vector<Mat>& generators) {
  if (generators.empty()) throw ValidationError("commutant: no generators");
  int d = static_cast<int>(generators.front().rows());
  for (const auto& g : generators)
    if (g.rows() != d || g.cols() != d)
      throw ShapeError("commutant: generator dimension mismatch");

  // [X,G] = 0 as (I⊗Gᵀ − G⊗I)·vec(X) = 0, stacked over G and G†.
  Mat eye = Mat::Identity(d, d);
  Mat constraints(2 * generators.size() * d * d, d * d);
  Eigen::Index row = 0;
  for (const auto& g : generators) {
    // The commutant is scale invariant; normalize so the nullspace cut sees
    // O(1) constraints regardless of generator magnitude.
    double nrm = g.norm();
    Mat gn = nrm > 1e-14 ? Mat(g / nrm) : Mat(Mat::Zero(d, d));
    for (const Mat& gg : {gn, Mat(gn.adjoint())}) {
      constraints.middleRows(row, d * d) =
          tensor(eye, gg.transpose()) - tensor(gg, eye);
      row += d * d;
    }
  }
  Mat null = nullspace(constraints);
  OperatorAlgebra a;
  a.ambient_dim = d;
  for (Eigen::Index c = 0; c < null.cols(); ++c)
    a.basis.push_back(unvec_rm(null.col(c), d, d));
  return a;
}

namespace {

// Spectral projector of the superoperator onto its eigenvalue-1 eigenspace:
// the projector onto ker(S−I) along range(S−I). For a CPTP map with a
// faithful invariant state the eigenvalue 1 is semisimple, so the two
// subspaces are complementary.
Mat ergodic_superoperator(const Mat& s) {
  int n = static_cast<int>(s.rows());
  Mat d = s - Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-9 * std::max(smax, 1.0)) ++rank;
  int k = n - rank;
  if (k == 0)
    throw ValidationError("ergodic_projection: no fixed points found");
  Mat m(n, n);
  m.leftCols(k) = svd.matrixV().rightCols(k);
  m.rightCols(rank) = svd.matrixU().leftCols(rank);
  Mat inv = m.partialPivLu().solve(Mat::Identity(n, n));
  Mat p = m.leftCols(k) * inv.topRows(k);
  if ((p * p - p).cwiseAbs().maxCoeff() > 1e-8)
    throw ValidationError(
        "ergodic_projection: eigenvalue-1 eigenspace not semisimple");
  return p;
}

}  // namespace

QuantumChannel ergodic_projection(const QuantumChannel& f) {
  if (f.in_dim() != f.out_dim())
    throw ShapeError("ergodic_projection: requires in_dim == out_dim");
  Mat p = ergodic_superoperator(superoperator(f));
  auto choi = choi_from_superoperator(p, f.in_dim(), f.out_dim());
  auto kraus = kraus_from_choi(choi);
  return QuantumChannel::unchecked(std::move(kraus), f.in_shape, f.out_shape);
}

OperatorAlgebra fixed_point_algebra(const QuantumChannel& f) {
  if (f.in_dim() != f.out_dim())
    throw ShapeError("fixed_point_algebra: requires in_dim == out_dim");
  int d = f.in_dim();
  Mat p = ergodic_superoperator(superoperator(f));
  // P(I/d) is full rank exactly when a faithful invariant state exists.
  Mat chi = unvec_rm(p * vec_rm(Mat::Identity(d, d) / double(d)), d, d);
  auto es = hermitian_eig(chi);
  if (es.eigenvalues.minCoeff() <= kRankTol * es.eigenvalues.maxCoeff())
    throw ValidationError(
        "fixed_point_algebra: no full-rank invariant state; restrict to the "
        "support first");
  return commutant(f.kraus);
}

namespace {

// Orthonormalize the HS-span of a list of matrices.
std::vector<Mat> orthonormal_span(const std::vector<Mat>& mats, int d) {
  Mat cols(d * d, mats.size());
  for (size_t i = 0; i < mats.size(); ++i) cols.col(i) = vec_rm(mats[i]);
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  std::vector<Mat> out;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * smax)
      out.push_back(unvec_rm(svd.matrixU().col(i), d, d));
  return out;
}

// Cluster sorted-ascending values by relative gap. The scale is the value
// magnitude, not the spread, so a constant spectrum stays a single cluster.
std::vector<std::pair<int, int>> cluster(const RVec& vals, double rel_gap) {
  double scale = std::max(std::abs(vals[0]), std::abs(vals[vals.size() - 1]));
  double gap = rel_gap * std::max(scale, 1e-9);
  std::vector<std::pair<int, int>> out;
  int start = 0;
  for (Eigen::Index i = 1; i <= vals.size(); ++i) {
    if (i == vals.size() || vals[i] - vals[i - 1] > gap) {
      out.push_back({start, static_cast<int>(i) - start});
      start = static_cast<int>(i);
    }
  }
  return out;
}

Mat random_span_element(const std::vector<Mat>& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g = Mat::Zero(basis.front().rows(), basis.front().cols());
  for (const auto& b : basis) g += Cplx(n(rng), n(rng)) * b;
  return g;
}

struct RawBlock {
  Mat adapted;  // ambient_dim × (dL·dR), columns of the adapted basis
  int dim_left = 0;
  int dim_right = 0;
  Mat projector;  // Π_j in the ambient basis, for canonical ordering
};

constexpr double kClusterGap = 1e-7;
constexpr double kStructureTol = 1e-8;

std::optional<std::vector<RawBlock>> try_decompose(const OperatorAlgebra& a,
                                                   const std::vector<Mat>& center,
                                                   std::mt19937_64& rng) {
  int d = a.ambient_dim;

  // Minimal central projections from a generic Hermitian central element.
  Mat g = random_span_element(center, rng);
  Mat h = 0.5 * (g + g.adjoint());
  auto es = hermitian_eig(h);
  auto central_clusters = cluster(es.eigenvalues, kClusterGap);

  std::vector<RawBlock> blocks;
  for (auto [start, count] : central_clusters) {
    Mat q = es.eigenvectors.middleCols(start, count);  // d × n_j isometry

    // Restrict the algebra to the block; its span is B(dL)⊗I(dR).
    std::vector<Mat> restricted;
    for (const auto& x : a.basis) restricted.push_back(q.adjoint() * x * q);
    auto block_basis = orthonormal_span(restricted, count);
    int m = static_cast<int>(block_basis.size());
    int dl = static_cast<int>(std::lround(std::sqrt(double(m))));
    if (dl * dl != m || count % dl != 0) return std::nullopt;
    int dr = count / dl;

    Mat adapted(d, count);
    if (dl == 1) {
      adapted = q;  // block algebra is scalar, any orthonormal basis works
    } else {
      // Eigenspaces of a generic Hermitian block element carry the left
      // index; each should have dimension dR.
      Mat hb_raw = random_span_element(block_basis, rng);
      Mat hb = 0.5 * (hb_raw + hb_raw.adjoint());
      auto esb = hermitian_eig(hb);
      auto eig_clusters = cluster(esb.eigenvalues, kClusterGap);
      if (static_cast<int>(eig_clusters.size()) != dl) return std::nullopt;
      for (auto [s2, c2] : eig_clusters)
        if (c2 != dr) return std::nullopt;

      // Align the right-factor bases of all eigenspaces against the first
      // one using a generic transition element of the algebra.
      Mat x = random_span_element(block_basis, rng);
      Mat b0 = esb.eigenvectors.middleCols(eig_clusters[0].first, dr);
      adapted.leftCols(dr) = q * b0;
      for (int l = 1; l < dl; ++l) {
        Mat bl = esb.eigenvectors.middleCols(eig_clusters[l].first, dr);
        Mat trans = bl.adjoint() * x * b0;  // ∝ unitary for a true algebra
        Eigen::JacobiSVD<Mat> svd(trans,
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        if (sv[sv.size() - 1] < 1e-8 * sv[0]) return std::nullopt;
        Mat w = svd.matrixU() * svd.matrixV().adjoint();
        adapted.middleCols(l * dr, dr) = q * (bl * w);
      }
    }
    RawBlock blk;
    blk.adapted = std::move(adapted);
    blk.dim_left = dl;
    blk.dim_right = dr;
    blk.projector = q * q.adjoint();
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

// Residual of W†AW against the ⊕_j (x_j ⊗ I) form.
double structure_residual(const OperatorAlgebra& a, const BlockStructure& bs) {
  double res = 0.0;
  const Mat& w = bs.basis_unitary;
  res = std::max(res, (w.adjoint() * w -
                       Mat::Identity(w.cols(), w.cols()))
                          .cwiseAbs()
                          .maxCoeff());
  for (const auto& xmat : a.basis) {
    Mat y = w.adjoint() * xmat * w;
    // Off-block coupling must vanish.
    Mat masked = y;
    for (size_t j = 0; j < bs.blocks.size(); ++j) {
      auto [dl, dr] = bs.blocks[j];
      int off = bs.block_offset(static_cast<int>(j));
      masked.block(off, off, dl * dr, dl * dr).setZero();
    }
    res = std::max(res, masked.cwiseAbs().maxCoeff());
    for (size_t j = 0; j < bs.blocks.size(); ++j) {
      auto [dl, dr] = bs.blocks[j];
      int off = bs.block_offset(static_cast<int>(j));
      int n = dl * dr;
      // Within the block, compare against (Tr_R-average ⊗ I).
      Mat blkm = y.block(off, off, n, n);
      Mat left(dl, dl);
      for (int p = 0; p < dl; ++p)
        for (int q2 = 0; q2 < dl; ++q2) {
          Cplx acc = 0;
          for (int s = 0; s < dr; ++s) acc += blkm(p * dr + s, q2 * dr + s);
          left(p, q2) = acc / double(dr);
        }
      Mat model = Mat::Zero(n, n);
      for (int p = 0; p < dl; ++p)
        for (int q2 = 0; q2 < dl; ++q2)
          for (int s = 0; s < dr; ++s)
            model(p * dr + s, q2 * dr + s) = left(p, q2);
      res = std::max(res, (blkm - model).cwiseAbs().maxCoeff());
    }
  }
  return res;
}

}  // namespace

BlockStructure decompose_algebra(const OperatorAlgebra& a,
                                 std::uint64_t seed) {
  if (a.basis.empty())
    throw ValidationError("decompose_algebra: empty algebra");
  if (a.closure_residual() > kStructureTol)
    throw ValidationError("decompose_algebra: closure invariants violated");
  int d = a.ambient_dim;

  // Center Z = A ∩ A′: nullspace of the commutator constraints with A's
  // basis stacked with the projector onto A's orthogonal complement.
  Mat eye = Mat::Identity(d, d);
  Mat constraints(a.dim() * d * d + d * d, d * d);
  Eigen::Index row = 0;
  for (const auto& g : a.basis) {
    constraints.middleRows(row, d * d) =
        tensor(eye, g.transpose()) - tensor(g, eye);
    row += d * d;
  }
  Mat span_proj = Mat::Zero(d * d, d * d);
  for (const auto& b : a.basis) {
    Vec vb = vec_rm(b);
    span_proj += vb * vb.adjoint();
  }
  constraints.middleRows(row, d * d) =
      Mat::Identity(d * d, d * d) - span_proj;
  Mat null = nullspace(constraints);
  std::vector<Mat> center;
  for (Eigen::Index c = 0; c < null.cols(); ++c)
    center.push_back(unvec_rm(null.col(c), d, d));
  if (center.empty())
    throw ValidationError("decompose_algebra: empty center");

  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng(seed + attempt);
    auto raw = try_decompose(a, center, rng);
    if (!raw) continue;

    // Canonical block order: (dL, dR), ties by the ambient projector.
    std::sort(raw->begin(), raw->end(),
              [](const RawBlock& x, const RawBlock& y) {
                if (x.dim_left != y.dim_left) return x.dim_left < y.dim_left;
                if (x.dim_right != y.dim_right)
                  return x.dim_right < y.dim_right;
                for (Eigen::Index i = 0; i < x.projector.size(); ++i) {
                  double xr = x.projector.reshaped()[i].real();
                  double yr = y.projector.reshaped()[i].real();
                  if (xr != yr) return xr < yr;
                }
                return false;
              });

    BlockStructure bs;
    bs.basis_unitary = Mat(d, d);
    int col = 0;
    for (const auto& blk : *raw) {
      bs.blocks.push_back({blk.dim_left, blk.dim_right});
      bs.basis_unitary.middleCols(col, blk.adapted.cols()) = blk.adapted;
      col += static_cast<int>(blk.adapted.cols());
    }
    if (col != d) continue;
    if (structure_residual(a, bs) < kStructureTol) return bs;
  }
  throw ValidationError(
      "decompose_algebra: failed to find the block structure after 8 "
      "attempts");
}

Mat ConditionalExpectation::apply(const Mat& xi) const {
  const Mat& w = structure.basis_unitary;
  Mat y = w.adjoint() * xi * w;
  Mat out = Mat::Zero(y.rows(), y.cols());
  for (size_t j = 0; j < structure.blocks.size(); ++j) {
    auto [dl, dr] = structure.blocks[j];
    int off = structure.block_offset(static_cast<int>(j));
    Mat left(dl, dl);
    for (int p = 0; p < dl; ++p)
      for (int q = 0; q < dl; ++q) {
        Cplx acc = 0;
        for (int s = 0; s < dr; ++s)
          acc += y(off + p * dr + s, off + q * dr + s);
        left(p, q) = acc;
      }
    out.block(off, off, dl * dr, dl * dr) =
        tensor(left, omega[j].matrix);
  }
  return w * out * w.adjoint();
}

ConditionalExpectation conditional_expectation(const OperatorAlgebra& a,
                                               const QuantumChannel& f,
                                               std::uint64_t seed) {
  auto bs = decompose_algebra(a, seed);
  int d = a.ambient_dim;
  Mat p = ergodic_superoperator(superoperator(f));
  const Mat& w = bs.basis_unitary;

  ConditionalExpectation ce;
  ce.structure = bs;
  for (size_t j = 0; j < bs.blocks.size(); ++j) {
    auto [dl, dr] = bs.blocks[j];
    int off = bs.block_offset(static_cast<int>(j));
    int n = dl * dr;
    // ω_j from the ergodic projection of the normalized block projector.
    Mat tau = Mat::Zero(d, d);
    for (int i = 0; i < n; ++i)
      tau += w.col(off + i) * w.col(off + i).adjoint();
    tau /= double(n);
    Mat ptau = unvec_rm(p * vec_rm(tau), d, d);
    Mat y = w.adjoint() * ptau * w;
    Mat omega = Mat::Zero(dr, dr);
    for (int s = 0; s < dr; ++s)
      for (int t = 0; t < dr; ++t) {
        Cplx acc = 0;
        for (int a2 = 0; a2 < dl; ++a2)
          acc += y(off + a2 * dr + s, off + a2 * dr + t);
        omega(s, t) = acc;
      }
    omega /= omega.trace().real();
    omega = 0.5 * (omega + omega.adjoint());
    ce.omega.push_back(DensityOperator(
        std::move(omega), SubsystemShape({dr}, {"R"}), 1e-8));
  }

  // Verify that the block form reproduces the ergodic projection on a
  // spanning set of matrix units.
  double res = 0.0;
  for (int i = 0; i < d && res < 1.0; ++i)
    for (int j2 = 0; j2 < d; ++j2) {
      Mat e = Mat::Zero(d, d);
      e(i, j2) = 1.0;
      Mat via_p = unvec_rm(p * vec_rm(e), d, d);
      res = std::max(res, (via_p - ce.apply(e)).cwiseAbs().maxCoeff());
    }
  if (res > kStructureTol)
    throw ValidationError(
        "conditional_expectation: block form does not reproduce the ergodic "
        "projection (is A the fixed-point algebra of F?), residual " +
        std::to_string(res));
  return ce;
}

}  // namespace qmc
