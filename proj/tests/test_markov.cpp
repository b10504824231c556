#include "qmc/markov.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qmc/entropy.hpp"
#include "qmc/gen.hpp"
#include "qmc/linops.hpp"
#include "test_util.hpp"

using namespace qmc;
using qmc::test::max_abs_diff;

namespace {

DensityOperator product_tripartite(Rng& rng, int da, int db, int dc) {
  auto a = ginibre_state(SubsystemShape({da}, {"A"}), rng);
  auto b = ginibre_state(SubsystemShape({db}, {"B"}), rng);
  auto c = ginibre_state(SubsystemShape({dc}, {"C"}), rng);
  Mat m = tensor(tensor(a.matrix, b.matrix), c.matrix);
  return DensityOperator(m, SubsystemShape({da, db, dc}, {"A", "B", "C"}));
}

// Diagonal embedding of a joint distribution over a×b×c outcomes.
DensityOperator embed_classical(const std::vector<double>& p, int na, int nb,
                                int nc) {
  Mat m = Mat::Zero(na * nb * nc, na * nb * nc);
  for (int i = 0; i < na * nb * nc; ++i) m(i, i) = p[i];
  return DensityOperator(m, SubsystemShape({na, nb, nc}, {"A", "B", "C"}));
}

}  // namespace

TEST_CASE("recovery channel on a product state appends the C factor") {
  Rng rng(3);
  auto b = ginibre_state(SubsystemShape({3}, {"B"}), rng);
  auto c = ginibre_state(SubsystemShape({2}, {"C"}), rng);
  DensityOperator bc(tensor(b.matrix, c.matrix),
                     SubsystemShape({3, 2}, {"B", "C"}));
  auto rhat = petz_recovery_channel(bc);
  // Closed form: R̂(α) = α ⊗ ρ_C for any input.
  for (int t = 0; t < 3; ++t) {
    auto alpha = ginibre_state(SubsystemShape({3}, {"B"}), rng);
    CHECK(max_abs_diff(rhat.apply(alpha.matrix),
                       tensor(alpha.matrix, c.matrix)) < 1e-10);
  }
}

TEST_CASE("recovery channel restores rho_BC from rho_B") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    auto bc = ginibre_state(SubsystemShape({3, 2}, {"B", "C"}), rng);
    auto rhat = petz_recovery_channel(bc);
    Mat rho_b = partial_trace(bc.matrix, bc.shape, {"C"});
    CHECK(trace_distance(rhat.apply(rho_b), bc.matrix) < 1e-9);
    CHECK(is_cptp(rhat, 1e-8).ok);
  }
}

TEST_CASE("recovery channel of a classical state is the conditional") {
  // Diagonal ρ_BC with joint P(b,c): R̂(|b><b|) = |b><b| ⊗ Σ_c P(c|b)|c><c|.
  Rng rng(9);
  int nb = 3, nc = 2;
  auto p = random_distribution(nb * nc, rng);
  Mat m = Mat::Zero(nb * nc, nb * nc);
  for (int i = 0; i < nb * nc; ++i) m(i, i) = p[i];
  DensityOperator bc(m, SubsystemShape({nb, nc}, {"B", "C"}));
  auto rhat = petz_recovery_channel(bc);
  for (int b = 0; b < nb; ++b) {
    double pb = 0;
    for (int c = 0; c < nc; ++c) pb += p[b * nc + c];
    Mat eb = Mat::Zero(nb, nb);
    eb(b, b) = 1.0;
    Mat got = rhat.apply(eb);
    Mat want = Mat::Zero(nb * nc, nb * nc);
    for (int c = 0; c < nc; ++c)
      want(b * nc + c, b * nc + c) = p[b * nc + c] / pb;
    CHECK(max_abs_diff(got, want) < 1e-9);
  }
}

TEST_CASE("recovery residual separates Markov from non-Markov states") {
  Rng rng(13);
  auto prod = TripartiteState::make(product_tripartite(rng, 2, 3, 2));
  CHECK(recovery_residual(prod) < 1e-10);

  auto planted = TripartiteState::make(
      planted_markov_state(2, 2, {{1, 2}, {2, 1}}, {0.4, 0.6}, rng));
  CHECK(recovery_residual(planted) < 1e-9);

  auto ghz = TripartiteState::make(ghz_state());
  CHECK(recovery_residual(ghz) > 0.1);
}

TEST_CASE("is_markov verdicts") {
  Rng rng(17);
  auto chain = random_classical_chain(2, 3, 2, rng);
  auto cls = TripartiteState::make(embed_classical(chain, 2, 3, 2));
  auto v = is_markov(cls);
  CHECK(v.pass);
  CHECK(v.cmi < 1e-10);

  auto ghz = TripartiteState::make(ghz_state());
  auto g = is_markov(ghz);
  CHECK(!g.pass);
  CHECK(g.cmi == doctest::Approx(1.0).epsilon(1e-9));

  auto planted = TripartiteState::make(
      planted_markov_state(2, 2, {{1, 2}, {2, 1}}, {0.4, 0.6}, rng));
  CHECK(is_markov(planted).pass);
}

TEST_CASE("decompose recovers a planted two-block state") {
  Rng rng(21);
  std::vector<PlantedBlock> blocks = {{2, 1}, {1, 2}};
  std::vector<double> q = {0.3, 0.7};
  auto rho = TripartiteState::make(planted_markov_state(2, 2, blocks, q, rng));

  auto d = decompose(rho, 1e-9, 4);
  REQUIRE(d.blocks.size() == 2);
  // Canonical order puts (1,2) before (2,1).
  CHECK(d.blocks[0].dim_left == 1);
  CHECK(d.blocks[0].dim_right == 2);
  CHECK(d.blocks[0].q == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(d.blocks[1].dim_left == 2);
  CHECK(d.blocks[1].dim_right == 1);
  CHECK(d.blocks[1].q == doctest::Approx(0.3).epsilon(1e-8));

  auto back = reconstruct(d);
  CHECK(trace_distance(back.state, rho.state) < 1e-8);
}

TEST_CASE("decompose of a product state is a single full block") {
  Rng rng(25);
  auto rho = TripartiteState::make(product_tripartite(rng, 2, 3, 2));
  auto d = decompose(rho, 1e-9, 0);
  REQUIRE(d.blocks.size() == 1);
  CHECK(d.blocks[0].q == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d.blocks[0].dim_left * d.blocks[0].dim_right == 3);
  CHECK(trace_distance(reconstruct(d).state, rho.state) < 1e-8);
}

TEST_CASE("decompose handles a rank-deficient B marginal") {
  Rng rng(29);
  auto a = ginibre_state(SubsystemShape({2}, {"A"}), rng);
  auto c = ginibre_state(SubsystemShape({2}, {"C"}), rng);
  Mat pure = Mat::Zero(2, 2);
  pure(0, 0) = 1.0;  // |0><0| on B
  Mat m = tensor(tensor(a.matrix, pure), c.matrix);
  auto rho = TripartiteState::make(
      DensityOperator(m, SubsystemShape({2, 2, 2}, {"A", "B", "C"})));
  auto d = decompose(rho, 1e-9, 0);
  int total = 0;
  double qsum = 0;
  for (const auto& b : d.blocks) {
    total += b.dim_left * b.dim_right;
    qsum += b.q;
  }
  CHECK(total == 2);
  CHECK(qsum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(trace_distance(reconstruct(d).state, rho.state) < 1e-8);
}

TEST_CASE("decompose of a classical chain gives scalar blocks") {
  Rng rng(33);
  auto chain = random_classical_chain(2, 3, 2, rng);
  auto rho = TripartiteState::make(embed_classical(chain, 2, 3, 2));
  auto d = decompose(rho, 1e-9, 1);
  // P_B(b) from the joint.
  std::vector<double> pb(3, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 2; ++c) pb[b] += chain[(a * 3 + b) * 2 + c];

  std::vector<double> qs;
  for (const auto& b : d.blocks) {
    CHECK(b.dim_left == 1);
    CHECK(b.dim_right == 1);
    qs.push_back(b.q);
  }
  REQUIRE(qs.size() == 3);
  std::sort(qs.begin(), qs.end());
  std::sort(pb.begin(), pb.end());
  for (int i = 0; i < 3; ++i) CHECK(qs[i] == doctest::Approx(pb[i]).epsilon(1e-9));
  CHECK(trace_distance(reconstruct(d).state, rho.state) < 1e-8);
}

TEST_CASE("decompose rejects non-Markov states") {
  auto ghz = TripartiteState::make(ghz_state());
  CHECK_THROWS_AS(decompose(ghz, 1e-9, 0), NotMarkovError);
}

TEST_CASE("separable decomposition reproduces the AC marginal") {
  Rng rng(37);
  auto rho = TripartiteState::make(
      planted_markov_state(2, 2, {{2, 1}, {1, 2}}, {0.3, 0.7}, rng));
  auto d = decompose(rho, 1e-9, 2);
  auto terms = separable_decomposition(d);
  REQUIRE(terms.size() == 2);

  Mat mix = Mat::Zero(4, 4);
  for (const auto& t : terms)
    mix += t.weight * tensor(t.rho_a.matrix, t.rho_c.matrix);
  Mat rho_ac = partial_trace(rho.state.matrix, rho.state.shape, {"B"});
  CHECK(trace_distance(mix, rho_ac) < 1e-8);
}

TEST_CASE("separable extension is Markov and round-trips") {
  Rng rng(41);
  std::vector<SeparableTerm> terms;
  std::vector<double> w = {0.25, 0.35, 0.4};
  for (double wi : w) {
    SeparableTerm t;
    t.weight = wi;
    t.rho_a = ginibre_state(SubsystemShape({2}, {"A"}), rng);
    t.rho_c = ginibre_state(SubsystemShape({2}, {"C"}), rng);
    terms.push_back(std::move(t));
  }
  auto ext = separable_extension(terms);
  CHECK(conditional_mutual_information(ext.state) < 1e-10);
  CHECK(is_markov(ext, 1e-9).pass);

  // Round trip through decompose reproduces the AC marginal.
  auto d = decompose(ext, 1e-9, 3);
  auto back = separable_decomposition(d);
  Mat mix = Mat::Zero(4, 4);
  for (const auto& t : back)
    mix += t.weight * tensor(t.rho_a.matrix, t.rho_c.matrix);
  Mat want = Mat::Zero(4, 4);
  for (const auto& t : terms)
    want += t.weight * tensor(t.rho_a.matrix, t.rho_c.matrix);
  CHECK(trace_distance(mix, want) < 1e-8);
}

TEST_CASE("separable extension of one term is a product state") {
  Rng rng(45);
  SeparableTerm t;
  t.weight = 1.0;
  t.rho_a = ginibre_state(SubsystemShape({2}, {"A"}), rng);
  t.rho_c = ginibre_state(SubsystemShape({3}, {"C"}), rng);
  auto ext = separable_extension({t});
  CHECK(conditional_mutual_information(ext.state) < 1e-12);
  CHECK(max_abs_diff(ext.state.matrix,
                     tensor(tensor(t.rho_a.matrix, Mat::Identity(1, 1)),
                            t.rho_c.matrix)) < 1e-12);
}

TEST_CASE("koashi_imoto with the identity channel is a single block") {
  Rng rng(49);
  auto s = ginibre_state(SubsystemShape({3}, {"S"}), rng);
  auto f = QuantumChannel::identity(SubsystemShape({3}, {"S"}));
  auto ki = koashi_imoto({s}, f, 0);
  REQUIRE(ki.structure.blocks.size() == 1);
  CHECK(ki.structure.blocks[0] == std::pair<int, int>(3, 1));
  REQUIRE(ki.per_state.size() == 1);
  CHECK(ki.per_state[0][0].first == doctest::Approx(1.0).epsilon(1e-10));
  // The left factor is the state in the rotated basis.
  const Mat& w = ki.structure.basis_unitary;
  CHECK(max_abs_diff(ki.per_state[0][0].second.matrix,
                     w.adjoint() * s.matrix * w) < 1e-9);
}

TEST_CASE("koashi_imoto of commuting diagonal states under dephasing") {
  SubsystemShape sh({3}, {"S"});
  auto f = QuantumChannel::dephasing(sh);
  std::vector<std::vector<double>> diags = {{0.5, 0.3, 0.2},
                                            {0.1, 0.6, 0.3}};
  std::vector<DensityOperator> states;
  for (const auto& dgs : diags) {
    Mat m = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) m(i, i) = dgs[i];
    states.push_back(DensityOperator(m, sh));
  }
  auto ki = koashi_imoto(states, f, 0);
  REQUIRE(ki.structure.blocks.size() == 3);
  for (auto b : ki.structure.blocks) CHECK(b == std::pair<int, int>(1, 1));
  // Each block is a computational basis vector; q_{j|k} is that diagonal.
  const Mat& w = ki.structure.basis_unitary;
  for (int j = 0; j < 3; ++j) {
    int which = -1;
    for (int i = 0; i < 3; ++i)
      if (std::abs(w.col(j)[i]) > 0.9) which = i;
    REQUIRE(which >= 0);
    for (size_t k = 0; k < states.size(); ++k)
      CHECK(ki.per_state[k][j].first ==
            doctest::Approx(diags[k][which]).epsilon(1e-9));
  }
}

TEST_CASE("koashi_imoto recovers a planted block family") {
  // Space C⁴ = (C² ⊗ C¹) ⊕ (C¹ ⊗ C²): block1 carries state-dependent 2×2
  // factors, block2 a shared ω. F acts as identity on block1 and replaces
  // block2's right factor with ω; everything hidden by a Haar unitary.
  Rng rng(53);
  Mat g = ginibre(2, 2, rng);
  Mat om = g * g.adjoint();
  om /= om.trace().real();
  auto om_eigs = hermitian_eig(om);

  Mat v = haar_unitary(4, rng);
  std::vector<Mat> kraus;
  Mat pi1 = Mat::Zero(4, 4);
  pi1(0, 0) = pi1(1, 1) = 1.0;
  kraus.push_back(v * pi1 * v.adjoint());
  for (int i = 0; i < 2; ++i)
    for (int s = 0; s < 2; ++s) {
      Vec ui = Vec::Zero(4);
      ui.segment(2, 2) = om_eigs.eigenvectors.col(i);
      Mat k = std::sqrt(om_eigs.eigenvalues[i]) * ui *
              Vec::Unit(4, 2 + s).adjoint().eval();
      kraus.push_back(v * k * v.adjoint());
    }
  SubsystemShape sh({4}, {"S"});
  auto f = QuantumChannel::make(kraus, sh, sh);

  std::vector<std::vector<double>> qk = {{0.6, 0.4}, {0.2, 0.8}};
  std::vector<DensityOperator> states;
  std::vector<Mat> left_factors;
  for (const auto& qs : qk) {
    Mat gl = ginibre(2, 2, rng);
    Mat rho1 = gl * gl.adjoint();
    rho1 /= rho1.trace().real();
    left_factors.push_back(rho1);
    Mat m = Mat::Zero(4, 4);
    m.block(0, 0, 2, 2) = qs[0] * rho1;
    m.block(2, 2, 2, 2) = qs[1] * om;
    states.push_back(DensityOperator(v * m * v.adjoint(), sh));
  }

  auto ki = koashi_imoto(states, f, 7);
  REQUIRE(ki.structure.blocks.size() == 2);
  // Canonical order: (1,2) before (2,1).
  CHECK(ki.structure.blocks[0] == std::pair<int, int>(1, 2));
  CHECK(ki.structure.blocks[1] == std::pair<int, int>(2, 1));
  // ω of the (1,2) block matches the planted ω spectrally.
  auto rec = hermitian_eig(ki.omega[0].matrix);
  CHECK(std::abs(rec.eigenvalues[0] - om_eigs.eigenvalues[0]) < 1e-8);
  CHECK(std::abs(rec.eigenvalues[1] - om_eigs.eigenvalues[1]) < 1e-8);
  for (size_t k = 0; k < states.size(); ++k) {
    CHECK(ki.per_state[k][0].first ==
          doctest::Approx(qk[k][1]).epsilon(1e-8));
    CHECK(ki.per_state[k][1].first ==
          doctest::Approx(qk[k][0]).epsilon(1e-8));
    // Left factor of the (2,1) block matches spectrally.
    auto lf = hermitian_eig(ki.per_state[k][1].second.matrix);
    auto want = hermitian_eig(left_factors[k]);
    CHECK(std::abs(lf.eigenvalues[0] - want.eigenvalues[0]) < 1e-8);
    CHECK(std::abs(lf.eigenvalues[1] - want.eigenvalues[1]) < 1e-8);
  }
}

TEST_CASE("koashi_imoto rejects a channel that moves a state") {
  Rng rng(57);
  SubsystemShape sh({2}, {"S"});
  auto s = ginibre_state(sh, rng);
  auto f = QuantumChannel::depolarizing(sh);
  CHECK_THROWS_AS(koashi_imoto({s}, f, 0), PreservationViolatedError);
}
