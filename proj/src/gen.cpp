#include "qmc/gen.hpp"

#include <cmath>
#include <numeric>

#include "qmc/linops.hpp"

namespace qmc {

Mat ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Cplx(n(rng), n(rng));
  return g;
}

DensityOperator ginibre_state(const SubsystemShape& shape, Rng& rng) {
  int d = shape.total_dim();
  Mat g = ginibre(d, d, rng);
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityOperator(std::move(rho), shape);
}

Mat haar_unitary(int d, Rng& rng) { return haar_isometry(d, d, rng); }

Mat haar_isometry(int rows, int cols, Rng& rng) {
  if (rows < cols)
    throw ShapeError("haar_isometry: rows must be >= cols");
  Mat g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = Mat(qr.householderQ()).leftCols(cols);
  Mat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j) {
    Cplx rjj = r(j, j);
    if (std::abs(rjj) > 0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

QuantumChannel random_channel(const SubsystemShape& in,
                              const SubsystemShape& out, int kraus_count,
                              Rng& rng) {
  int din = in.total_dim(), dout = out.total_dim();
  if (dout * kraus_count < din)
    throw ShapeError(
        "random_channel: kraus_count * out_dim must be >= in_dim for a "
        "trace-preserving map");
  Mat v = haar_isometry(dout * kraus_count, din, rng);
  std::vector<Mat> ks;
  for (int i = 0; i < kraus_count; ++i)
    ks.push_back(v.middleRows(i * dout, dout));
  return QuantumChannel::unchecked(std::move(ks), in, out);
}

std::vector<double> random_distribution(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& x : p) {
    x = u(rng) + 1e-12;
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

DensityOperator planted_markov_state(int dim_a, int dim_c,
                                     const std::vector<PlantedBlock>& blocks,
                                     const std::vector<double>& q, Rng& rng) {
  if (blocks.size() != q.size())
    throw ValidationError("planted_markov_state: block/weight count mismatch");
  int db = 0;
  for (const auto& b : blocks) db += b.dim_left * b.dim_right;
  int total = dim_a * db * dim_c;

  // Assemble ⊕_j q_j ρ_{AbL_j} ⊗ ρ_{bR_jC} in the aligned basis,
  // index order (A, bL_j, bR_j, C) with C fastest.
  Mat rho = Mat::Zero(total, total);
  int offset = 0;
  for (size_t j = 0; j < blocks.size(); ++j) {
    int dl = blocks[j].dim_left, dr = blocks[j].dim_right;
    SubsystemShape sl({dim_a, dl}, {"A", "L"});
    SubsystemShape sr({dr, dim_c}, {"R", "C"});
    Mat left = ginibre_state(sl, rng).matrix;
    Mat right = ginibre_state(sr, rng).matrix;
    Mat block = q[j] * tensor(left, right);  // index (A, bL, bR, C)
    // Scatter into the full matrix: B index = offset + bL·dr + bR.
    for (int a1 = 0; a1 < dim_a; ++a1)
      for (int b1 = 0; b1 < dl * dr; ++b1)
        for (int c1 = 0; c1 < dim_c; ++c1)
          for (int a2 = 0; a2 < dim_a; ++a2)
            for (int b2 = 0; b2 < dl * dr; ++b2)
              for (int c2 = 0; c2 < dim_c; ++c2)
                rho((a1 * db + offset + b1) * dim_c + c1,
                    (a2 * db + offset + b2) * dim_c + c2) +=
                    block((a1 * dl * dr + b1) * dim_c + c1,
                          (a2 * dl * dr + b2) * dim_c + c2);
    offset += dl * dr;
  }

  // Hide the block structure behind a random basis on B.
  Mat w = haar_unitary(db, rng);
  Mat rot = tensor(tensor(Mat::Identity(dim_a, dim_a), w),
                   Mat::Identity(dim_c, dim_c));
  rho = rot * rho * rot.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  return DensityOperator(std::move(rho),
                         SubsystemShape({dim_a, db, dim_c}, {"A", "B", "C"}));
}

DensityOperator ghz_state() {
  Vec psi = Vec::Zero(8);
  psi[0] = psi[7] = 1.0 / std::sqrt(2.0);
  Mat rho = psi * psi.adjoint();
  return DensityOperator(std::move(rho),
                         SubsystemShape({2, 2, 2}, {"A", "B", "C"}));
}

std::vector<double> random_classical_chain(int na, int nb, int nc, Rng& rng) {
  auto pa = random_distribution(na, rng);
  std::vector<std::vector<double>> pba(na), pcb(nb);
  for (int a = 0; a < na; ++a) pba[a] = random_distribution(nb, rng);
  for (int b = 0; b < nb; ++b) pcb[b] = random_distribution(nc, rng);
  std::vector<double> joint(na * nb * nc);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      for (int c = 0; c < nc; ++c)
        joint[(a * nb + b) * nc + c] = pa[a] * pba[a][b] * pcb[b][c];
  return joint;
}

std::vector<double> random_tripartite_distribution(int na, int nb, int nc,
                                                   Rng& rng) {
  return random_distribution(na * nb * nc, rng);
}

}  // namespace qmc
