#include "qmc/channels.hpp"

#include <algorithm>
#include <cmath>

#include "qmc/linops.hpp"

namespace qmc {

namespace {

Mat kraus_sum(const std::vector<Mat>& kraus, int in_dim) {
  Mat s = Mat::Zero(in_dim, in_dim);
  for (const auto& k : kraus) s += k.adjoint() * k;
  return s;
}

void check_kraus_dims(const std::vector<Mat>& kraus, int in_dim, int out_dim) {
  if (kraus.empty()) throw ValidationError("QuantumChannel: no Kraus operators");
  for (const auto& k : kraus)
    if (k.rows() != out_dim || k.cols() != in_dim)
      throw ShapeError("QuantumChannel: Kraus operator dimension mismatch");
}

std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * dims[i + 1];
  return s;
}

}  // namespace

QuantumChannel QuantumChannel::unchecked(std::vector<Mat> kraus,
                                         SubsystemShape in,
                                         SubsystemShape out) {
  check_kraus_dims(kraus, in.total_dim(), out.total_dim());
  return QuantumChannel{std::move(kraus), std::move(in), std::move(out)};
}

QuantumChannel QuantumChannel::make(std::vector<Mat> kraus, SubsystemShape in,
                                    SubsystemShape out, double tol) {
  auto ch = unchecked(std::move(kraus), std::move(in), std::move(out));
  auto diag = is_cptp(ch, tol);
  if (!diag.ok)
    throw ValidationError("QuantumChannel: not CPTP (tp residual " +
                          std::to_string(diag.tp_residual) + ", min Choi eig " +
                          std::to_string(diag.min_choi_eig) + ")");
  return ch;
}

QuantumChannel QuantumChannel::identity(const SubsystemShape& shape) {
  int d = shape.total_dim();
  return unchecked({Mat::Identity(d, d)}, shape, shape);
}

QuantumChannel QuantumChannel::depolarizing(const SubsystemShape& shape) {
  int d = shape.total_dim();
  std::vector<Mat> ks;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat k = Mat::Zero(d, d);
      k(i, j) = 1.0 / std::sqrt(static_cast<double>(d));
      ks.push_back(std::move(k));
    }
  return unchecked(std::move(ks), shape, shape);
}

QuantumChannel QuantumChannel::dephasing(const SubsystemShape& shape) {
  int d = shape.total_dim();
  std::vector<Mat> ks;
  for (int i = 0; i < d; ++i) {
    Mat k = Mat::Zero(d, d);
    k(i, i) = 1.0;
    ks.push_back(std::move(k));
  }
  return unchecked(std::move(ks), shape, shape);
}

QuantumChannel QuantumChannel::partial_trace_channel(
    const SubsystemShape& shape, const std::vector<std::string>& traced) {
  for (const auto& t : traced) shape.index_of(t);
  std::vector<int> kept_idx, traced_idx;
  std::vector<std::string> kept_labels;
  for (size_t i = 0; i < shape.labels.size(); ++i) {
    if (std::find(traced.begin(), traced.end(), shape.labels[i]) !=
        traced.end())
      traced_idx.push_back(static_cast<int>(i));
    else {
      kept_idx.push_back(static_cast<int>(i));
      kept_labels.push_back(shape.labels[i]);
    }
  }
  auto stride = strides_of(shape.dims);
  auto expand = [&](int flat, const std::vector<int>& sub_idx) {
    int off = 0;
    for (int i = static_cast<int>(sub_idx.size()) - 1; i >= 0; --i) {
      off += (flat % shape.dims[sub_idx[i]]) * stride[sub_idx[i]];
      flat /= shape.dims[sub_idx[i]];
    }
    return off;
  };
  int kept_dim = 1, traced_dim = 1;
  for (int i : kept_idx) kept_dim *= shape.dims[i];
  for (int i : traced_idx) traced_dim *= shape.dims[i];

  std::vector<Mat> ks;
  for (int t = 0; t < traced_dim; ++t) {
    Mat k = Mat::Zero(kept_dim, shape.total_dim());
    int toff = expand(t, traced_idx);
    for (int r = 0; r < kept_dim; ++r) k(r, expand(r, kept_idx) + toff) = 1.0;
    ks.push_back(std::move(k));
  }
  return unchecked(std::move(ks), shape, shape.subshape(kept_labels));
}

Mat QuantumChannel::apply(const Mat& rho) const {
  if (rho.rows() != in_dim() || rho.cols() != in_dim())
    throw ShapeError("apply: state dimension mismatch");
  Mat out = Mat::Zero(out_dim(), out_dim());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

DensityOperator QuantumChannel::apply(const DensityOperator& rho) const {
  return DensityOperator(apply(rho.matrix), out_shape,
                         std::max(rho.herm_tol, 1e-9));
}

Mat QuantumChannel::adjoint_apply(const Mat& x) const {
  if (x.rows() != out_dim() || x.cols() != out_dim())
    throw ShapeError("adjoint_apply: operator dimension mismatch");
  Mat out = Mat::Zero(in_dim(), in_dim());
  for (const auto& k : kraus) out += k.adjoint() * x * k;
  return out;
}

CptpDiagnostics is_cptp(const QuantumChannel& t, double tol) {
  CptpDiagnostics d;
  Mat s = kraus_sum(t.kraus, t.in_dim());
  d.tp_residual = (s - Mat::Identity(t.in_dim(), t.in_dim()))
                      .cwiseAbs()
                      .maxCoeff();
  auto es = hermitian_eig(choi_matrix(t).matrix);
  d.min_choi_eig = es.eigenvalues.minCoeff();
  d.ok = d.tp_residual <= tol && d.min_choi_eig >= -tol;
  return d;
}

ChoiMatrix choi_matrix(const QuantumChannel& t) {
  int din = t.in_dim(), dout = t.out_dim();
  Mat c = Mat::Zero(din * dout, din * dout);
  // C[(i,a),(j,b)] = Σ_k K_k(a,i) conj(K_k(b,j)), output index fastest.
  for (const auto& k : t.kraus) {
    Vec w(din * dout);
    for (int i = 0; i < din; ++i)
      for (int a = 0; a < dout; ++a) w[i * dout + a] = k(a, i);
    c += w * w.adjoint();
  }
  return ChoiMatrix{std::move(c), din, dout};
}

std::vector<Mat> kraus_from_choi(const ChoiMatrix& c) {
  auto es = hermitian_eig(c.matrix);
  double lmax = std::max(es.eigenvalues.maxCoeff(), 0.0);
  struct Pair {
    double lambda;
    Mat k;
  };
  std::vector<Pair> pairs;
  for (Eigen::Index n = 0; n < es.eigenvalues.size(); ++n) {
    double lam = es.eigenvalues[n];
    if (lam <= 1e-12 * lmax) continue;
    Mat k(c.out_dim, c.in_dim);
    for (int i = 0; i < c.in_dim; ++i)
      for (int a = 0; a < c.out_dim; ++a)
        k(a, i) = std::sqrt(lam) * es.eigenvectors(i * c.out_dim + a, n);
    pairs.push_back({lam, std::move(k)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (std::abs(x.lambda - y.lambda) > 1e-14) return x.lambda > y.lambda;
    for (Eigen::Index i = 0; i < x.k.size(); ++i) {
      double a = x.k.reshaped()[i].real(), b = y.k.reshaped()[i].real();
      if (a != b) return a < b;
    }
    return false;
  });
  std::vector<Mat> out;
  for (auto& p : pairs) out.push_back(std::move(p.k));
  return out;
}

Mat superoperator(const QuantumChannel& t) {
  Mat s = Mat::Zero(t.out_dim() * t.out_dim(), t.in_dim() * t.in_dim());
  for (const auto& k : t.kraus) s += tensor(k, k.conjugate());
  return s;
}

ChoiMatrix choi_from_superoperator(const Mat& s, int in_dim, int out_dim) {
  if (s.rows() != out_dim * out_dim || s.cols() != in_dim * in_dim)
    throw ShapeError("choi_from_superoperator: dimension mismatch");
  Mat c(in_dim * out_dim, in_dim * out_dim);
  for (int i = 0; i < in_dim; ++i)
    for (int j = 0; j < in_dim; ++j)
      for (int a = 0; a < out_dim; ++a)
        for (int b = 0; b < out_dim; ++b)
          c(i * out_dim + a, j * out_dim + b) =
              s(a * out_dim + b, i * in_dim + j);
  return ChoiMatrix{std::move(c), in_dim, out_dim};
}

QuantumChannel petz_transpose_channel(const QuantumChannel& t,
                                      const DensityOperator& sigma,
                                      double rank_tol) {
  if (sigma.dim() != t.in_dim())
    throw ShapeError("petz_transpose_channel: sigma dimension mismatch");
  Mat sqrt_sigma = spectral_function(sigma.matrix, SpectralMap::Sqrt, rank_tol);
  Mat t_sigma = t.apply(sigma.matrix);
  Mat isqrt = spectral_function(t_sigma, SpectralMap::PinvSqrt, rank_tol);

  std::vector<Mat> ks;
  for (const auto& k : t.kraus) {
    Mat m = sqrt_sigma * k.adjoint() * isqrt;
    if (m.norm() > 1e-12) ks.push_back(std::move(m));
  }

  // Completion on ker(Tσ): send it to σ's dominant eigenvector so the
  // channel is trace preserving on the whole output space of T.
  auto es_t = hermitian_eig(t_sigma);
  auto es_s = hermitian_eig(sigma.matrix);
  Vec dominant = es_s.eigenvectors.col(es_s.eigenvectors.cols() - 1);
  double cut = rank_tol * std::max(es_t.eigenvalues.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < es_t.eigenvalues.size(); ++i) {
    if (es_t.eigenvalues[i] > cut) continue;
    Mat k = dominant * es_t.eigenvectors.col(i).adjoint();
    ks.push_back(std::move(k));
  }
  return QuantumChannel::unchecked(std::move(ks), t.out_shape, t.in_shape);
}

QuantumChannel compose(const QuantumChannel& s, const QuantumChannel& t) {
  if (s.in_dim() != t.out_dim())
    throw ShapeError("compose: inner dimension mismatch");
  std::vector<Mat> ks;
  for (const auto& sj : s.kraus)
    for (const auto& ti : t.kraus) {
      Mat m = sj * ti;
      if (m.norm() >= 1e-12) ks.push_back(std::move(m));
    }
  if (ks.empty())
    ks.push_back(Mat::Zero(s.out_dim(), t.in_dim()));
  return QuantumChannel::unchecked(std::move(ks), t.in_shape, s.out_shape);
}

namespace {

SubsystemShape concat(const SubsystemShape& a, const SubsystemShape& b) {
  std::vector<int> d = a.dims;
  d.insert(d.end(), b.dims.begin(), b.dims.end());
  std::vector<std::string> l = a.labels;
  l.insert(l.end(), b.labels.begin(), b.labels.end());
  return SubsystemShape(std::move(d), std::move(l));
}

}  // namespace

QuantumChannel tensor_with_identity(const QuantumChannel& t,
                                    const SubsystemShape& id_shape,
                                    TensorSide side) {
  int di = id_shape.total_dim();
  Mat eye = Mat::Identity(di, di);
  std::vector<Mat> ks;
  for (const auto& k : t.kraus)
    ks.push_back(side == TensorSide::Left ? tensor(eye, k) : tensor(k, eye));
  SubsystemShape in = side == TensorSide::Left ? concat(id_shape, t.in_shape)
                                               : concat(t.in_shape, id_shape);
  SubsystemShape out = side == TensorSide::Left ? concat(id_shape, t.out_shape)
                                                : concat(t.out_shape, id_shape);
  return QuantumChannel::unchecked(std::move(ks), std::move(in),
                                   std::move(out));
}

StinespringDilation stinespring(const QuantumChannel& t) {
  if (t.in_dim() != t.out_dim())
    throw ShapeError("stinespring: requires in_dim == out_dim");
  int d = t.in_dim();
  int r = static_cast<int>(t.kraus.size());

  // Isometry V = Σ_i K_i ⊗ |i⟩, environment index fastest.
  Mat v(d * r, d);
  for (int psi = 0; psi < d; ++psi)
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < r; ++i) v(a * r + i, psi) = t.kraus[i](a, psi);

  // Orthonormal complement of col(V) via Householder QR.
  Eigen::HouseholderQR<Mat> qr(v);
  Mat q = qr.householderQ();
  Mat complement = q.rightCols(d * r - d);

  Mat u(d * r, d * r);
  int next = 0;
  for (int col = 0; col < d * r; ++col) {
    if (col % r == 0)
      u.col(col) = v.col(col / r);
    else
      u.col(col) = complement.col(next++);
  }

  StinespringDilation dil;
  dil.env_dim = r;
  Mat eps = Mat::Zero(r, r);
  eps(0, 0) = 1.0;
  dil.env_state = DensityOperator(eps, SubsystemShape({r}, {"E"}));
  dil.unitary = std::move(u);
  return dil;
}

}  // namespace qmc
