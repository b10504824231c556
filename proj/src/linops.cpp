#include "qmc/linops.hpp"

#include <algorithm>
#include <cmath>

namespace qmc {

Mat tensor(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

// Strides for row-major composite indexing, last subsystem fastest.
std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * dims[i + 1];
  return s;
}

}  // namespace

Mat partial_trace(const Mat& m, const SubsystemShape& shape,
                  const std::vector<std::string>& traced) {
  if (m.rows() != m.cols() || shape.total_dim() != m.rows())
    throw ShapeError("partial_trace: shape inconsistent with matrix");
  for (const auto& t : traced) shape.index_of(t);  // validate labels

  std::vector<int> kept_idx, traced_idx;
  for (size_t i = 0; i < shape.labels.size(); ++i) {
    if (std::find(traced.begin(), traced.end(), shape.labels[i]) !=
        traced.end())
      traced_idx.push_back(static_cast<int>(i));
    else
      kept_idx.push_back(static_cast<int>(i));
  }

  auto stride = strides_of(shape.dims);
  int kept_dim = 1, traced_dim = 1;
  std::vector<int> kept_dims, traced_dims;
  for (int i : kept_idx) {
    kept_dims.push_back(shape.dims[i]);
    kept_dim *= shape.dims[i];
  }
  for (int i : traced_idx) {
    traced_dims.push_back(shape.dims[i]);
    traced_dim *= shape.dims[i];
  }

  // Offset of a flattened sub-index within the full composite index.
  auto expand = [&](int flat, const std::vector<int>& sub_dims,
                    const std::vector<int>& sub_idx) {
    int off = 0;
    for (int i = static_cast<int>(sub_dims.size()) - 1; i >= 0; --i) {
      off += (flat % sub_dims[i]) * stride[sub_idx[i]];
      flat /= sub_dims[i];
    }
    return off;
  };

  Mat out = Mat::Zero(kept_dim, kept_dim);
  for (int r = 0; r < kept_dim; ++r) {
    int roff = expand(r, kept_dims, kept_idx);
    for (int c = 0; c < kept_dim; ++c) {
      int coff = expand(c, kept_dims, kept_idx);
      Cplx acc = 0;
      for (int t = 0; t < traced_dim; ++t) {
        int toff = expand(t, traced_dims, traced_idx);
        acc += m(roff + toff, coff + toff);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Mat permute_subsystems(const Mat& m, const SubsystemShape& shape,
                       const std::vector<std::string>& new_order) {
  if (m.rows() != m.cols() || shape.total_dim() != m.rows())
    throw ShapeError("permute_subsystems: shape inconsistent with matrix");
  if (new_order.size() != shape.labels.size())
    throw ShapeError("permute_subsystems: not a permutation");
  std::vector<int> perm;  // perm[k] = old position of new k-th subsystem
  for (const auto& l : new_order) perm.push_back(shape.index_of(l));
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i))
      throw ShapeError("permute_subsystems: not a permutation");

  auto old_stride = strides_of(shape.dims);
  std::vector<int> new_dims;
  for (int p : perm) new_dims.push_back(shape.dims[p]);

  int d = shape.total_dim();
  // map[i_new] = i_old
  std::vector<int> map(d);
  for (int i = 0; i < d; ++i) {
    int flat = i, off = 0;
    for (int k = static_cast<int>(new_dims.size()) - 1; k >= 0; --k) {
      off += (flat % new_dims[k]) * old_stride[perm[k]];
      flat /= new_dims[k];
    }
    map[i] = off;
  }
  Mat out(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out(r, c) = m(map[r], map[c]);
  return out;
}

HermitianEigenSystem hermitian_eig(const Mat& m) {
  if (m.rows() != m.cols()) throw ShapeError("hermitian_eig: not square");
  Mat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw ValidationError("hermitian_eig: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Mat spectral_function(const Mat& m, SpectralMap f, double rank_tol) {
  auto es = hermitian_eig(m);
  double lmax = es.eigenvalues.size() ? es.eigenvalues.maxCoeff() : 0.0;
  double cut = rank_tol * std::max(lmax, 0.0);
  RVec mapped(es.eigenvalues.size());
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    double lam = es.eigenvalues[i];
    if (lam < -cut)
      throw ValidationError("spectral_function: negative eigenvalue " +
                            std::to_string(lam));
    if (lam <= cut) {
      // PinvSqrt and Log2 treat the kernel as absent; Sqrt of ~0 is 0.
      mapped[i] = 0.0;
      continue;
    }
    switch (f) {
      case SpectralMap::Sqrt:
        mapped[i] = std::sqrt(lam);
        break;
      case SpectralMap::Log2:
        mapped[i] = std::log2(lam);
        break;
      case SpectralMap::PinvSqrt:
        mapped[i] = 1.0 / std::sqrt(lam);
        break;
    }
  }
  return es.eigenvectors * mapped.asDiagonal() * es.eigenvectors.adjoint();
}

double trace_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("trace_distance: dimension mismatch");
  auto es = hermitian_eig(a - b);
  return 0.5 * es.eigenvalues.cwiseAbs().sum();
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  return trace_distance(a.matrix, b.matrix);
}

Mat support_projector(const Mat& m, double rank_tol) {
  Mat v = support_isometry(m, rank_tol);
  return v * v.adjoint();
}

Mat support_isometry(const Mat& m, double rank_tol) {
  auto es = hermitian_eig(m);
  double lmax = es.eigenvalues.size() ? es.eigenvalues.maxCoeff() : 0.0;
  double cut = rank_tol * std::max(lmax, 0.0);
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues[i] > cut) keep.push_back(static_cast<int>(i));
  Mat v(m.rows(), keep.size());
  for (size_t k = 0; k < keep.size(); ++k)
    v.col(k) = es.eigenvectors.col(keep[k]);
  return v;
}

}  // namespace qmc
