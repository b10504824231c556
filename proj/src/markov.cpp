#include "qmc/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmc/entropy.hpp"
#include "qmc/linops.hpp"

namespace qmc {

namespace {

constexpr double kDegenerateWeight = 1e-12;

// Eigenbasis of a Hermitian PSD matrix split into support and kernel
// columns (eigenvalue cut at kRankTol·λ_max).
struct SupportSplit {
  Mat support;  // d × r
  Mat kernel;   // d × (d − r)
};

SupportSplit support_split(const Mat& m) {
  auto es = hermitian_eig(m);
  double cut = kRankTol * std::max(es.eigenvalues.maxCoeff(), 0.0);
  int d = static_cast<int>(m.rows());
  int r = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues[i] > cut) ++r;
  SupportSplit s;
  // Eigenvalues ascend, so the support is the trailing column block.
  s.support = es.eigenvectors.rightCols(r);
  s.kernel = es.eigenvectors.leftCols(d - r);
  return s;
}

Mat hermitized(const Mat& m) { return 0.5 * (m + m.adjoint()); }

// Submatrix of y (on X ⊗ B with B minor) keeping B indices [off, off+n).
Mat left_block_slice(const Mat& y, int dx, int db, int off, int n) {
  Mat out(dx * n, dx * n);
  for (int a = 0; a < dx; ++a)
    for (int i = 0; i < n; ++i)
      for (int a2 = 0; a2 < dx; ++a2)
        for (int i2 = 0; i2 < n; ++i2)
          out(a * n + i, a2 * n + i2) = y(a * db + off + i, a2 * db + off + i2);
  return out;
}

// Submatrix of y (on B ⊗ X with X minor) keeping B indices [off, off+n).
Mat right_block_slice(const Mat& y, int db, int dx, int off, int n) {
  Mat out(n * dx, n * dx);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < dx; ++c)
      for (int i2 = 0; i2 < n; ++i2)
        for (int c2 = 0; c2 < dx; ++c2)
          out(i * dx + c, i2 * dx + c2) =
              y((off + i) * dx + c, (off + i2) * dx + c2);
  return out;
}

DensityOperator maximally_mixed(const SubsystemShape& shape) {
  int d = shape.total_dim();
  return DensityOperator(Mat::Identity(d, d) / double(d), shape);
}

}  // namespace

TripartiteState TripartiteState::make(DensityOperator rho) {
  if (rho.shape.labels.size() != 3)
    throw ShapeError("TripartiteState: exactly three labels required");
  return TripartiteState{std::move(rho)};
}

QuantumChannel petz_recovery_channel(const DensityOperator& rho_bc) {
  if (rho_bc.shape.labels.size() != 2)
    throw ShapeError("petz_recovery_channel: exactly two labels required");
  auto tr_c = QuantumChannel::partial_trace_channel(
      rho_bc.shape, {rho_bc.shape.labels[1]});
  return petz_transpose_channel(tr_c, rho_bc);
}

namespace {

// B compressed to supp(ρ_B); everything downstream of the Petz machinery
// works on the compressed copy.
struct CompressedTripartite {
  Mat matrix;            // on A ⊗ B_c ⊗ C
  SubsystemShape shape;  // dims (dA, r, dC), original labels
  SupportSplit b_split;  // on the original B
};

CompressedTripartite compress_b(const TripartiteState& rho) {
  const auto& shape = rho.state.shape;
  const auto& la = shape.labels[0];
  const auto& lc = shape.labels[2];
  Mat rho_b = partial_trace(rho.state.matrix, shape, {la, lc});
  CompressedTripartite out;
  out.b_split = support_split(rho_b);
  int r = static_cast<int>(out.b_split.support.cols());
  Mat embed = tensor(tensor(Mat::Identity(rho.dim_a(), rho.dim_a()),
                            out.b_split.support),
                     Mat::Identity(rho.dim_c(), rho.dim_c()));
  out.matrix = hermitized(embed.adjoint() * rho.state.matrix * embed);
  out.shape = SubsystemShape({rho.dim_a(), r, rho.dim_c()}, shape.labels);
  return out;
}

}  // namespace

double recovery_residual(const TripartiteState& rho) {
  auto c = compress_b(rho);
  const auto& la = c.shape.labels[0];
  const auto& lc = c.shape.labels[2];
  Mat rho_bc = partial_trace(c.matrix, c.shape, {la});
  auto rhat = petz_recovery_channel(
      DensityOperator(rho_bc, c.shape.subshape({c.shape.labels[1], lc}),
                      1e-8));
  auto ext = tensor_with_identity(rhat, c.shape.subshape({la}),
                                  TensorSide::Left);
  return trace_distance(c.matrix,
                        ext.apply(partial_trace(c.matrix, c.shape, {lc})));
}

MarkovVerdict is_markov(const TripartiteState& rho, double tol) {
  MarkovVerdict v;
  v.cmi = conditional_mutual_information(rho.state);
  v.residual = recovery_residual(rho);
  v.pass = v.cmi < tol && v.residual < std::sqrt(tol) * 10.0;
  return v;
}

MarkovDecomposition decompose(const TripartiteState& rho, double tol,
                              std::uint64_t seed) {
  auto verdict = is_markov(rho, tol);
  if (!verdict.pass)
    throw NotMarkovError("decompose: not a Markov state (cmi=" +
                         std::to_string(verdict.cmi) + ", residual=" +
                         std::to_string(verdict.residual) + ")");

  auto c = compress_b(rho);
  int da = c.shape.dims[0], r = c.shape.dims[1], dc = c.shape.dims[2];
  int db = rho.dim_b();
  const auto& la = c.shape.labels[0];
  const auto& lb = c.shape.labels[1];
  const auto& lc = c.shape.labels[2];

  // Fixed points of φ = Tr_C ∘ R̂ carry the block structure of B.
  auto bc_shape = c.shape.subshape({lb, lc});
  Mat rho_bc = hermitized(partial_trace(c.matrix, c.shape, {la}));
  auto rhat = petz_recovery_channel(DensityOperator(rho_bc, bc_shape, 1e-8));
  auto phi = compose(QuantumChannel::partial_trace_channel(bc_shape, {lc}),
                     rhat);
  auto alg = fixed_point_algebra(phi);
  auto ce = conditional_expectation(alg, phi, seed);
  const Mat& w = ce.structure.basis_unitary;

  Mat rho_ab = hermitized(partial_trace(c.matrix, c.shape, {lc}));
  Mat y_ab = tensor(Mat::Identity(da, da), w).adjoint() * rho_ab *
             tensor(Mat::Identity(da, da), w);
  Mat y_bc = tensor(w, Mat::Identity(dc, dc)).adjoint() * rho_bc *
             tensor(w, Mat::Identity(dc, dc));
  Mat rho_b = partial_trace(rho_bc, bc_shape, {lc});
  Mat y_b = w.adjoint() * rho_b * w;

  MarkovDecomposition out;
  out.shape = rho.state.shape;
  out.tol = tol;
  std::vector<Mat> column_groups;

  for (size_t j = 0; j < ce.structure.blocks.size(); ++j) {
    auto [dl, dr] = ce.structure.blocks[j];
    int off = ce.structure.block_offset(static_cast<int>(j));
    int n = dl * dr;
    MarkovBlock blk;
    blk.dim_left = dl;
    blk.dim_right = dr;
    blk.q = std::max(y_b.block(off, off, n, n).trace().real(), 0.0);

    SubsystemShape al_shape({da, dl}, {la, "bL"});
    SubsystemShape rc_shape({dr, dc}, {"bR", lc});
    if (blk.q < kDegenerateWeight) {
      blk.q = 0.0;
      blk.rho_al = maximally_mixed(al_shape);
      blk.rho_rc = maximally_mixed(rc_shape);
    } else {
      // ρ_AB block must factor as ρ_{AL} ⊗ ω_j over the split (A⊗L | R).
      Mat tau_ab =
          hermitized(left_block_slice(y_ab, da, r, off, n)) / blk.q;
      SubsystemShape alr({da, dl, dr}, {la, "bL", "bR"});
      Mat rho_al = hermitized(partial_trace(tau_ab, alr, {"bR"}));
      Mat omega = hermitized(partial_trace(tau_ab, alr, {la, "bL"}));
      double res_ab = trace_distance(tau_ab, tensor(rho_al, omega));

      // ρ_BC block must factor as σ_L ⊗ ρ_{RC} over the split (L | R⊗C).
      Mat tau_bc =
          hermitized(right_block_slice(y_bc, r, dc, off, n)) / blk.q;
      SubsystemShape lrc({dl, dr, dc}, {"bL", "bR", lc});
      Mat sigma_l = hermitized(partial_trace(tau_bc, lrc, {"bR", lc}));
      Mat rho_rc = hermitized(partial_trace(tau_bc, lrc, {"bL"}));
      double res_bc = trace_distance(tau_bc, tensor(sigma_l, rho_rc));

      // The left marginals seen from the two sides must agree.
      SubsystemShape al2({da, dl}, {la, "bL"});
      double res_x =
          trace_distance(sigma_l, partial_trace(rho_al, al2, {la}));
      double res = std::max({res_ab, res_bc, res_x});
      if (res > 10.0 * tol)
        throw FactorizationResidualError(
            "decompose: block failed the product check, residual " +
            std::to_string(res));
      blk.rho_al = DensityOperator(rho_al, al_shape, 1e-7);
      blk.rho_rc = DensityOperator(rho_rc, rc_shape, 1e-7);
    }
    out.blocks.push_back(std::move(blk));
    column_groups.push_back(c.b_split.support * w.middleCols(off, n));
  }

  // Kernel of ρ_B re-enters as a zero-weight block so the B dimensions
  // add back up to dB.
  if (r < db) {
    MarkovBlock blk;
    blk.q = 0.0;
    blk.dim_left = db - r;
    blk.dim_right = 1;
    blk.rho_al = maximally_mixed(SubsystemShape({da, db - r}, {la, "bL"}));
    blk.rho_rc = maximally_mixed(SubsystemShape({1, dc}, {"bR", lc}));
    out.blocks.push_back(std::move(blk));
    column_groups.push_back(c.b_split.kernel);
  }

  // Canonical order: (dL, dR, q descending, entrywise factor comparison).
  std::vector<size_t> order(out.blocks.size());
  std::iota(order.begin(), order.end(), 0);
  auto key_less = [&](size_t x, size_t y) {
    const auto& bx = out.blocks[x];
    const auto& by = out.blocks[y];
    if (bx.dim_left != by.dim_left) return bx.dim_left < by.dim_left;
    if (bx.dim_right != by.dim_right) return bx.dim_right < by.dim_right;
    if (bx.q != by.q) return bx.q > by.q;
    for (Eigen::Index i = 0; i < bx.rho_al.matrix.size(); ++i) {
      double xr = bx.rho_al.matrix.reshaped()[i].real();
      double yr = by.rho_al.matrix.reshaped()[i].real();
      if (xr != yr) return xr < yr;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), key_less);

  MarkovDecomposition sorted;
  sorted.shape = out.shape;
  sorted.tol = out.tol;
  sorted.b_basis = Mat(db, db);
  int col = 0;
  for (size_t idx : order) {
    sorted.blocks.push_back(std::move(out.blocks[idx]));
    int n = static_cast<int>(column_groups[idx].cols());
    sorted.b_basis.middleCols(col, n) = column_groups[idx];
    col += n;
  }
  return sorted;
}

TripartiteState reconstruct(const MarkovDecomposition& d) {
  int da = d.shape.dims[0], db = d.shape.dims[1], dc = d.shape.dims[2];
  int total = 0;
  for (const auto& b : d.blocks) total += b.dim_left * b.dim_right;
  if (total != db || d.b_basis.rows() != db || d.b_basis.cols() != db)
    throw ShapeError("reconstruct: block dimensions do not add up to dB");

  Mat rot = Mat::Zero(da * db * dc, da * db * dc);
  int off = 0;
  for (const auto& b : d.blocks) {
    int dl = b.dim_left, dr = b.dim_right;
    for (int a = 0; a < da; ++a)
      for (int a2 = 0; a2 < da; ++a2)
        for (int l = 0; l < dl; ++l)
          for (int l2 = 0; l2 < dl; ++l2)
            for (int s = 0; s < dr; ++s)
              for (int s2 = 0; s2 < dr; ++s2)
                for (int cc = 0; cc < dc; ++cc)
                  for (int cc2 = 0; cc2 < dc; ++cc2) {
                    int bi = off + l * dr + s;
                    int bi2 = off + l2 * dr + s2;
                    rot((a * db + bi) * dc + cc, (a2 * db + bi2) * dc + cc2) +=
                        b.q * b.rho_al.matrix(a * dl + l, a2 * dl + l2) *
                        b.rho_rc.matrix(s * dc + cc, s2 * dc + cc2);
                  }
    off += dl * dr;
  }
  Mat u = tensor(tensor(Mat::Identity(da, da), d.b_basis),
                 Mat::Identity(dc, dc));
  return TripartiteState::make(
      DensityOperator(hermitized(u * rot * u.adjoint()), d.shape, 1e-7));
}

std::vector<SeparableTerm> separable_decomposition(
    const MarkovDecomposition& d) {
  std::vector<SeparableTerm> out;
  for (const auto& b : d.blocks) {
    if (b.q < kDegenerateWeight) continue;
    SeparableTerm t;
    t.weight = b.q;
    t.rho_a = DensityOperator(
        partial_trace(b.rho_al.matrix, b.rho_al.shape, {"bL"}),
        b.rho_al.shape.subshape({d.shape.labels[0]}), 1e-7);
    t.rho_c = DensityOperator(
        partial_trace(b.rho_rc.matrix, b.rho_rc.shape, {"bR"}),
        b.rho_rc.shape.subshape({d.shape.labels[2]}), 1e-7);
    out.push_back(std::move(t));
  }
  return out;
}

TripartiteState separable_extension(const std::vector<SeparableTerm>& terms) {
  if (terms.empty())
    throw ValidationError("separable_extension: no terms");
  int da = terms.front().rho_a.dim();
  int dc = terms.front().rho_c.dim();
  double wsum = 0.0;
  for (const auto& t : terms) {
    if (t.rho_a.dim() != da || t.rho_c.dim() != dc)
      throw ShapeError("separable_extension: mismatched factor dimensions");
    if (t.weight < -1e-12)
      throw ValidationError("separable_extension: negative weight");
    wsum += t.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-10)
    throw ValidationError("separable_extension: weights do not sum to 1");

  int db = static_cast<int>(terms.size());
  Mat m = Mat::Zero(da * db * dc, da * db * dc);
  for (int i = 0; i < db; ++i) {
    const auto& t = terms[i];
    for (int a = 0; a < da; ++a)
      for (int a2 = 0; a2 < da; ++a2)
        for (int cc = 0; cc < dc; ++cc)
          for (int cc2 = 0; cc2 < dc; ++cc2)
            m((a * db + i) * dc + cc, (a2 * db + i) * dc + cc2) =
                t.weight * t.rho_a.matrix(a, a2) * t.rho_c.matrix(cc, cc2);
  }
  return TripartiteState::make(DensityOperator(
      m, SubsystemShape({da, db, dc}, {"A", "B", "C"}), 1e-9));
}

KoashiImotoDecomposition koashi_imoto(
    const std::vector<DensityOperator>& states, const QuantumChannel& f,
    std::uint64_t seed) {
  if (states.empty())
    throw ValidationError("koashi_imoto: no states");
  int d = states.front().dim();
  if (f.in_dim() != d || f.out_dim() != d)
    throw ShapeError("koashi_imoto: channel dimension mismatch");
  for (const auto& s : states) {
    if (s.dim() != d)
      throw ShapeError("koashi_imoto: state dimension mismatch");
    double moved = trace_distance(f.apply(s.matrix), s.matrix);
    if (moved > 1e-9)
      throw PreservationViolatedError(
          "koashi_imoto: channel moves a state by " + std::to_string(moved));
  }

  // Restrict to the joint support of the family.
  Mat avg = Mat::Zero(d, d);
  for (const auto& s : states) avg += s.matrix / double(states.size());
  auto split = support_split(avg);
  const Mat& v = split.support;
  int r = static_cast<int>(v.cols());
  SubsystemShape rshape({r}, {"S"});
  std::vector<Mat> kraus_c;
  for (const auto& k : f.kraus) kraus_c.push_back(v.adjoint() * k * v);
  auto fc = QuantumChannel::unchecked(std::move(kraus_c), rshape, rshape);

  auto alg = fixed_point_algebra(fc);
  auto ce = conditional_expectation(alg, fc, seed);
  const Mat& w = ce.structure.basis_unitary;

  KoashiImotoDecomposition out;
  out.omega = ce.omega;
  for (const auto& s : states) {
    Mat y = hermitized(w.adjoint() * (v.adjoint() * s.matrix * v) * w);
    std::vector<std::pair<double, DensityOperator>> row;
    double residual = 0.0;
    Mat model = Mat::Zero(r, r);
    for (size_t j = 0; j < ce.structure.blocks.size(); ++j) {
      auto [dl, dr] = ce.structure.blocks[j];
      int off = ce.structure.block_offset(static_cast<int>(j));
      int n = dl * dr;
      Mat blk = y.block(off, off, n, n);
      double q = std::max(blk.trace().real(), 0.0);
      SubsystemShape lshape({dl}, {"L"});
      if (q < kDegenerateWeight) {
        row.push_back({0.0, maximally_mixed(lshape)});
        continue;
      }
      SubsystemShape lr({dl, dr}, {"L", "R"});
      Mat left = hermitized(partial_trace(blk, lr, {"R"})) / q;
      model.block(off, off, n, n) = q * tensor(left, ce.omega[j].matrix);
      row.push_back({q, DensityOperator(left, lshape, 1e-7)});
    }
    residual = (y - model).cwiseAbs().maxCoeff();
    if (residual > 1e-8)
      throw FactorizationResidualError(
          "koashi_imoto: reassembly residual " + std::to_string(residual));
    out.per_state.push_back(std::move(row));
  }

  // Re-embed the structure in the original space; the kernel of the joint
  // support returns as a zero-weight scalar-right block.
  out.structure.blocks = ce.structure.blocks;
  out.structure.basis_unitary = Mat(d, d);
  out.structure.basis_unitary.leftCols(r) = v * w;
  if (r < d) {
    out.structure.basis_unitary.rightCols(d - r) = split.kernel;
    out.structure.blocks.push_back({d - r, 1});
    out.omega.push_back(maximally_mixed(SubsystemShape({1}, {"R"})));
    SubsystemShape lshape({d - r}, {"L"});
    for (auto& row : out.per_state)
      row.push_back({0.0, maximally_mixed(lshape)});
  }
  return out;
}

}  // namespace qmc
