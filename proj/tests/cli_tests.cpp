// End-to-end tests of the qmc binary. The build passes the binary location
// in via QMC_CLI_PATH; each test shells out and inspects exit codes and the
// JSON reports.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "qmc/entropy.hpp"
#include "qmc/gen.hpp"
#include "qmc/io.hpp"
#include "qmc/linops.hpp"

using namespace qmc;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(QMC_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "qmc_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  auto path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

std::string write_json(const std::string& name, const Json& j) {
  return write_file(name, j.dump());
}

}  // namespace

TEST_CASE("info reports GHZ conditional mutual information") {
  auto path = write_json("ghz.json", state_to_json(ghz_state()));
  auto r = run_cli("info " + path);
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(std::abs(j["results"]["cmi"].get<double>() - 1.0) < 1e-9);
  CHECK(j["tolerances"]["tol"].get<double>() == 1e-9);
}

TEST_CASE("info reports near-zero CMI for a product state") {
  Rng rng(3);
  Mat m = tensor(tensor(ginibre_state(SubsystemShape({2}, {"A"}), rng).matrix,
                        ginibre_state(SubsystemShape({2}, {"B"}), rng).matrix),
                 ginibre_state(SubsystemShape({2}, {"C"}), rng).matrix);
  DensityOperator rho(m, SubsystemShape({2, 2, 2}, {"A", "B", "C"}));
  auto path = write_json("prod.json", state_to_json(rho));
  auto r = run_cli("info " + path);
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(std::abs(j["results"]["cmi"].get<double>()) < 1e-10);
}

TEST_CASE("exit codes distinguish parse and validation failures") {
  auto bad = write_file("bad.json", "{not json");
  CHECK(run_cli("info " + bad).code == 2);
  // Well-formed file that is not a density operator (trace 2).
  auto invalid = write_file(
      "invalid.json",
      R"({"dims":[2],"labels":["A"],
          "matrix":[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]})");
  CHECK(run_cli("info " + invalid).code == 3);
}

TEST_CASE("gen is deterministic and decompose recovers planted blocks") {
  auto gen1 = run_cli("gen markov --dims 2,4,2 --blocks 2x1,1x2 "
                      "--q 0.3,0.7 --seed 7");
  auto gen2 = run_cli("gen markov --dims 2,4,2 --blocks 2x1,1x2 "
                      "--q 0.3,0.7 --seed 7");
  CHECK(gen1.code == 0);
  CHECK(gen1.out == gen2.out);  // byte-identical for a fixed seed

  auto path = write_file("planted.json", gen1.out);
  auto r = run_cli("decompose " + path);
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["results"]["markov"].get<bool>());
  REQUIRE(j["results"]["blocks"].size() == 2);
  // Canonical order: (1,2) with q=0.7 before (2,1) with q=0.3.
  CHECK(j["results"]["blocks"][0]["dim_left"] == 1);
  CHECK(j["results"]["blocks"][0]["dim_right"] == 2);
  CHECK(std::abs(j["results"]["blocks"][0]["q"].get<double>() - 0.7) < 1e-8);
  CHECK(j["results"]["blocks"][1]["dim_left"] == 2);
  CHECK(std::abs(j["results"]["blocks"][1]["q"].get<double>() - 0.3) < 1e-8);
}

TEST_CASE("decompose fails cleanly on GHZ") {
  auto path = write_json("ghz2.json", state_to_json(ghz_state()));
  auto r = run_cli("decompose " + path);
  CHECK(r.code == 1);
  auto j = Json::parse(r.out);
  CHECK(!j["results"]["markov"].get<bool>());
  CHECK(std::abs(j["results"]["cmi"].get<double>() - 1.0) < 1e-9);
}

TEST_CASE("decompose of a classical chain yields scalar blocks") {
  auto gen = run_cli("gen classical-chain --dims 2,3,2 --seed 5");
  REQUIRE(gen.code == 0);
  auto path = write_file("chain.json", gen.out);
  auto r = run_cli("decompose " + path);
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  for (const auto& b : j["results"]["blocks"]) {
    CHECK(b["dim_left"] == 1);
    CHECK(b["dim_right"] == 1);
  }
}

TEST_CASE("recover reports residuals on both sides of the divide") {
  auto gen = run_cli("gen markov --dims 2,4,2 --blocks 2x1,1x2 "
                     "--q 0.4,0.6 --seed 11");
  auto mk = write_file("mk.json", gen.out);
  auto r1 = run_cli("recover " + mk);
  CHECK(r1.code == 0);
  CHECK(Json::parse(r1.out)["results"]["residual"].get<double>() < 1e-8);

  auto ghz = write_json("ghz3.json", state_to_json(ghz_state()));
  auto r2 = run_cli("recover " + ghz);
  CHECK(r2.code == 0);
  CHECK(Json::parse(r2.out)["results"]["residual"].get<double>() > 0.1);
}

TEST_CASE("qec verdicts for unitary and depolarizing channels") {
  Rng rng(13);
  SubsystemShape sh({2}, {"B"});
  auto sigma = ginibre_state(sh, rng);
  auto sigma_path = write_json("sigma.json", state_to_json(sigma));

  Mat u = haar_unitary(2, rng);
  auto uni = QuantumChannel::unchecked({u}, sh, sh);
  auto uni_path = write_json("unitary.json", channel_to_json(uni));
  auto r1 = run_cli("qec " + sigma_path + " " + uni_path);
  CHECK(r1.code == 0);
  CHECK(Json::parse(r1.out)["results"]["recoverable"].get<bool>());

  auto dep = QuantumChannel::depolarizing(sh);
  auto dep_path = write_json("depol.json", channel_to_json(dep));
  auto r2 = run_cli("qec " + sigma_path + " " + dep_path);
  CHECK(r2.code == 1);
  auto j = Json::parse(r2.out);
  CHECK(!j["results"]["recoverable"].get<bool>());
  CHECK(std::abs(j["results"]["gap"].get<double>() -
                 2.0 * von_neumann_entropy(sigma)) < 1e-8);
}

TEST_CASE("holevo saturation for a commuting ensemble") {
  SubsystemShape sh({2}, {"B"});
  Mat m1 = Mat::Zero(2, 2), m2 = Mat::Zero(2, 2);
  m1(0, 0) = 0.7;
  m1(1, 1) = 0.3;
  m2(0, 0) = 0.2;
  m2(1, 1) = 0.8;
  auto e = Ensemble::make(Distribution::make({0.5, 0.5}),
                          {DensityOperator(m1, sh), DensityOperator(m2, sh)});
  auto e_path = write_json("ens.json", ensemble_to_json(e));
  auto d_path = write_json("dephase.json",
                           channel_to_json(QuantumChannel::dephasing(sh)));
  auto r = run_cli("holevo " + e_path + " " + d_path);
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["results"]["saturated"].get<bool>());
  CHECK(j["results"]["commuting"].get<bool>());

  // A generated non-commuting ensemble through the same measurement drops.
  auto gen = run_cli("gen cq-ensemble --count 2 --dim 2 --seed 17");
  auto g_path = write_file("ens2.json", gen.out);
  auto r2 = run_cli("holevo " + g_path + " " + d_path);
  CHECK(r2.code == 1);
  auto j2 = Json::parse(r2.out);
  CHECK(j2["results"]["chi_after"].get<double>() <=
        j2["results"]["chi_before"].get<double>() + 1e-9);
}

TEST_CASE("stdin, --pretty, --output and --jobs plumbing") {
  auto ghz_json = state_to_json(ghz_state()).dump();
  auto path = write_file("ghz4.json", ghz_json);
  auto r = run_cli("info - < " + path);
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["command"] == "info");

  auto pretty = run_cli("info --pretty " + path);
  CHECK(pretty.out.find('\n') != std::string::npos);
  CHECK(pretty.out.find("  \"command\"") != std::string::npos);

  auto out_path = (scratch_dir() / "report.json").string();
  auto r2 = run_cli("info --output " + out_path + " " + path);
  CHECK(r2.code == 0);
  std::ifstream in(out_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(Json::parse(text)["command"] == "info");

  // Two files, two report lines, order preserved, workers fanned out.
  auto prod = run_cli("gen ginibre --dims 2,2,2 --seed 1");
  auto p2 = write_file("gin.json", prod.out);
  auto multi = run_cli("info --jobs 2 " + path + " " + p2);
  CHECK(multi.code == 0);
  auto nl = multi.out.find('\n');
  REQUIRE(nl != std::string::npos);
  auto first = Json::parse(multi.out.substr(0, nl));
  auto second = Json::parse(multi.out.substr(nl + 1));
  CHECK(std::abs(first["results"]["cmi"].get<double>() - 1.0) < 1e-9);
  CHECK(second["results"].contains("cmi"));
}

TEST_CASE("dimension cap is enforced") {
  auto r = run_cli("gen ginibre --dims 17,16,16 --seed 0");
  CHECK(r.code == 3);
}
