// Command-line surface: state I/O, seeded generators, analysis commands,
// and machine-readable JSON reports.
//
// Exit codes: 0 success/pass, 1 analytic fail (not Markov / not saturated /
// not recoverable), 2 parse error, 3 validation error.

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmc/apps.hpp"
#include "qmc/entropy.hpp"
#include "qmc/gen.hpp"
#include "qmc/io.hpp"
#include "qmc/linops.hpp"
#include "qmc/markov.hpp"

namespace {

using namespace qmc;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kMaxTotalDim = 4096;

struct CommonFlags {
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string output;
  bool pretty = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_seed = true) {
  cmd->add_option("--tol", f.tol, "Numerical tolerance")
      ->capture_default_str();
  if (with_seed)
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", f.jobs, "Worker count for independent files")
      ->capture_default_str();
  cmd->add_option("--output", f.output, "Write output to PATH instead of stdout");
  cmd->add_flag("--pretty", f.pretty, "Indented human-readable JSON");
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

void check_dim_cap(int total) {
  if (total > kMaxTotalDim)
    throw ValidationError("total dimension " + std::to_string(total) +
                          " exceeds the cap of " +
                          std::to_string(kMaxTotalDim));
}

void emit(const Json& j, const CommonFlags& f) {
  std::string text = f.pretty ? j.dump(2) : j.dump();
  if (f.output.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(f.output, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + f.output);
    out << text << "\n";
  }
}

void emit_all(const std::vector<Json>& reports, const CommonFlags& f) {
  std::ostringstream ss;
  for (const auto& j : reports)
    ss << (f.pretty ? j.dump(2) : j.dump()) << "\n";
  if (f.output.empty()) {
    std::cout << ss.str();
  } else {
    std::ofstream out(f.output, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + f.output);
    out << ss.str();
  }
}

// Run fn on each file, optionally fanning independent files out across
// workers; reports keep input order and the exit code is the worst one.
template <typename Fn>
int run_on_files(const std::vector<std::string>& files, const CommonFlags& f,
                 Fn fn) {
  std::vector<std::string> inputs = files.empty()
                                        ? std::vector<std::string>{"-"}
                                        : files;
  std::vector<std::pair<int, Json>> results(inputs.size());
  if (f.jobs > 1 && inputs.size() > 1) {
    std::vector<std::future<std::pair<int, Json>>> futs;
    for (const auto& path : inputs) {
      std::string text = read_input(path);  // read serially; analyze in parallel
      futs.push_back(std::async(std::launch::async, fn, path, text));
    }
    for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < inputs.size(); ++i)
      results[i] = fn(inputs[i], read_input(inputs[i]));
  }
  std::vector<Json> reports;
  int code = kExitPass;
  for (auto& [c, j] : results) {
    code = std::max(code, c);
    reports.push_back(std::move(j));
  }
  emit_all(reports, f);
  return code;
}

Report base_report(const std::string& command, const std::string& input_text,
                   const CommonFlags& f, bool with_seed) {
  Report r;
  r.command = command;
  r.inputs = {digest(input_text)};
  r.tolerances["tol"] = f.tol;
  if (with_seed) r.seed = f.seed;
  return r;
}

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += ",";
    out += l;
  }
  return out;
}

std::pair<int, Json> do_info(const std::string& input_text,
                             const CommonFlags& f) {
  auto rho = state_from_json(parse_json(input_text), f.tol);
  check_dim_cap(rho.dim());
  Report r = base_report("info", input_text, f, false);

  // Entropies of every non-empty subsystem subset.
  int n = static_cast<int>(rho.shape.labels.size());
  Json entropies = Json::object();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<std::string> keep, drop;
    for (int i = 0; i < n; ++i)
      ((mask >> i) & 1 ? keep : drop).push_back(rho.shape.labels[i]);
    Mat marginal = drop.empty()
                       ? rho.matrix
                       : partial_trace(rho.matrix, rho.shape, drop);
    entropies[join_labels(keep)] = von_neumann_entropy(marginal);
  }
  r.results["entropy"] = std::move(entropies);

  if (n >= 2) {
    Json mi = Json::object();
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> rest;
      for (int k = 0; k < n; ++k)
        if (k != i) rest.push_back(rho.shape.labels[k]);
      mi[rho.shape.labels[i] + ":" + join_labels(rest)] =
          mutual_information(rho, {rho.shape.labels[i]});
    }
    r.results["mutual_information"] = std::move(mi);
  }
  if (n == 3) r.results["cmi"] = conditional_mutual_information(rho);
  return {kExitPass, r.to_json()};
}

std::pair<int, Json> do_recover(const std::string& input_text,
                                const CommonFlags& f) {
  auto rho = TripartiteState::make(state_from_json(parse_json(input_text),
                                                   f.tol));
  check_dim_cap(rho.state.dim());
  Report r = base_report("recover", input_text, f, false);
  r.results["residual"] = recovery_residual(rho);
  Mat rho_bc = partial_trace(rho.state.matrix, rho.state.shape,
                             {rho.state.shape.labels[0]});
  auto rhat = petz_recovery_channel(DensityOperator(
      rho_bc,
      rho.state.shape.subshape(
          {rho.state.shape.labels[1], rho.state.shape.labels[2]}),
      1e-8));
  r.results["recovery_kraus_rank"] = rhat.kraus.size();
  return {kExitPass, r.to_json()};
}

std::pair<int, Json> do_decompose(const std::string& input_text,
                                  const CommonFlags& f) {
  auto rho = TripartiteState::make(state_from_json(parse_json(input_text),
                                                   f.tol));
  check_dim_cap(rho.state.dim());
  Report r = base_report("decompose", input_text, f, true);
  auto verdict = is_markov(rho, f.tol);
  r.results["cmi"] = verdict.cmi;
  r.results["residual"] = verdict.residual;
  r.results["markov"] = verdict.pass;
  if (!verdict.pass) return {kExitFail, r.to_json()};

  auto d = decompose(rho, f.tol, f.seed);
  Json blocks = Json::array();
  for (const auto& b : d.blocks) {
    Json jb;
    jb["q"] = b.q;
    jb["dim_left"] = b.dim_left;
    jb["dim_right"] = b.dim_right;
    jb["rho_al"] = state_to_json(b.rho_al);
    jb["rho_rc"] = state_to_json(b.rho_rc);
    blocks.push_back(std::move(jb));
  }
  r.results["blocks"] = std::move(blocks);
  r.results["b_basis"] = matrix_to_json(d.b_basis);
  return {kExitPass, r.to_json()};
}

std::vector<int> parse_int_list(const std::string& text, char sep) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

struct GenParams {
  std::string kind;
  std::string dims = "2,2,2";
  std::string blocks = "1x2,2x1";
  std::string q = "0.5,0.5";
  int count = 2;
  int dim = 2;
};

int do_gen(const GenParams& g, const CommonFlags& f) {
  Rng rng(f.seed);
  Json out;
  if (g.kind == "ginibre") {
    auto dims = parse_int_list(g.dims, ',');
    std::vector<std::string> labels;
    for (size_t i = 0; i < dims.size(); ++i)
      labels.push_back(std::string(1, static_cast<char>('A' + i)));
    SubsystemShape shape(dims, labels);
    check_dim_cap(shape.total_dim());
    out = state_to_json(ginibre_state(shape, rng));
  } else if (g.kind == "markov") {
    auto dims = parse_int_list(g.dims, ',');
    if (dims.size() != 3)
      throw ValidationError("gen markov: --dims must be dA,dB,dC");
    std::vector<PlantedBlock> blocks;
    int db = 0;
    std::stringstream ss(g.blocks);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      auto lr = parse_int_list(tok, 'x');
      if (lr.size() != 2)
        throw ValidationError("gen markov: blocks must look like 2x1,1x2");
      blocks.push_back({lr[0], lr[1]});
      db += lr[0] * lr[1];
    }
    if (db != dims[1])
      throw ValidationError("gen markov: blocks do not add up to dB");
    check_dim_cap(dims[0] * dims[1] * dims[2]);
    auto q = parse_double_list(g.q);
    out = state_to_json(
        planted_markov_state(dims[0], dims[2], blocks, q, rng));
  } else if (g.kind == "classical-chain") {
    auto dims = parse_int_list(g.dims, ',');
    if (dims.size() != 3)
      throw ValidationError("gen classical-chain: --dims must be nA,nB,nC");
    check_dim_cap(dims[0] * dims[1] * dims[2]);
    auto p = random_classical_chain(dims[0], dims[1], dims[2], rng);
    out = state_to_json(embed_distribution(
        Distribution::make(p),
        SubsystemShape(dims, {"A", "B", "C"})));
  } else if (g.kind == "ghz") {
    out = state_to_json(ghz_state());
  } else if (g.kind == "cq-ensemble") {
    check_dim_cap(g.dim);
    auto probs = random_distribution(g.count, rng);
    std::vector<DensityOperator> states;
    for (int i = 0; i < g.count; ++i)
      states.push_back(
          ginibre_state(SubsystemShape({g.dim}, {"B"}), rng));
    out = ensemble_to_json(
        Ensemble::make(Distribution::make(probs), std::move(states)));
  } else {
    throw ValidationError("gen: unknown kind " + g.kind);
  }
  emit(out, f);
  return kExitPass;
}

int do_qec(const std::string& sigma_path, const std::string& channel_path,
           const CommonFlags& f) {
  std::string sigma_text = read_input(sigma_path);
  std::string channel_text = read_input(channel_path);
  auto sigma = state_from_json(parse_json(sigma_text), f.tol);
  auto phi = channel_from_json(parse_json(channel_text), std::max(f.tol, 1e-9));
  check_dim_cap(std::max(phi.in_dim(), phi.out_dim()));

  auto v = qec_check(sigma, phi, f.tol);
  Report r;
  r.command = "qec";
  r.inputs = {digest(sigma_text), digest(channel_text)};
  r.tolerances["tol"] = f.tol;
  r.results["gap"] = v.gap;
  r.results["recoverable"] = v.recoverable;
  if (v.recovery) r.results["recovery_kraus_rank"] = v.recovery->kraus.size();
  emit(r.to_json(), f);
  return v.recoverable ? kExitPass : kExitFail;
}

int do_holevo(const std::string& ensemble_path,
              const std::string& channel_path, const CommonFlags& f) {
  std::string ensemble_text = read_input(ensemble_path);
  std::string channel_text = read_input(channel_path);
  auto e = ensemble_from_json(parse_json(ensemble_text), f.tol);
  auto phi = channel_from_json(parse_json(channel_text), std::max(f.tol, 1e-9));
  check_dim_cap(std::max(phi.in_dim(), phi.out_dim()));

  auto v = holevo_equality_check(e, phi, f.tol);
  Report r;
  r.command = "holevo";
  r.inputs = {digest(ensemble_text), digest(channel_text)};
  r.tolerances["tol"] = f.tol;
  r.results["chi_before"] = v.chi_before;
  r.results["chi_after"] = v.chi_after;
  r.results["saturated"] = v.saturated;
  r.results["commuting"] = v.commuting;
  emit(r.to_json(), f);
  return v.saturated ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Markov structure toolkit"};
  app.require_subcommand(1);

  CommonFlags info_f, dec_f, rec_f, gen_f, qec_f, hol_f;
  std::vector<std::string> info_files, dec_files, rec_files;
  GenParams gen_p;
  std::string qec_sigma, qec_channel, hol_ensemble, hol_channel;

  auto* info = app.add_subcommand("info", "Entropy report for a state file");
  info->add_option("files", info_files, "State files ('-' for stdin)");
  add_common(info, info_f, false);

  auto* dec = app.add_subcommand("decompose",
                                 "Markov test and block decomposition");
  dec->add_option("files", dec_files, "Tripartite state files");
  add_common(dec, dec_f, true);

  auto* rec = app.add_subcommand("recover",
                                 "Recovery-map residual diagnostics");
  rec->add_option("files", rec_files, "Tripartite state files");
  add_common(rec, rec_f, false);

  auto* gen = app.add_subcommand("gen", "Seeded test-state generators");
  gen->add_option("kind", gen_p.kind,
                  "ginibre|markov|classical-chain|ghz|cq-ensemble")
      ->required();
  gen->add_option("--dims", gen_p.dims, "Comma-separated dimensions")
      ->capture_default_str();
  gen->add_option("--blocks", gen_p.blocks, "Block list, e.g. 2x1,1x2")
      ->capture_default_str();
  gen->add_option("--q", gen_p.q, "Block weights, e.g. 0.3,0.7")
      ->capture_default_str();
  gen->add_option("--count", gen_p.count, "Ensemble member count")
      ->capture_default_str();
  gen->add_option("--dim", gen_p.dim, "Ensemble state dimension")
      ->capture_default_str();
  add_common(gen, gen_f, true);

  auto* qec = app.add_subcommand("qec", "Reversibility check for a channel");
  qec->add_option("sigma", qec_sigma, "Code state file")->required();
  qec->add_option("channel", qec_channel, "Channel file")->required();
  add_common(qec, qec_f, false);

  auto* hol = app.add_subcommand("holevo",
                                 "Holevo-quantity saturation check");
  hol->add_option("ensemble", hol_ensemble, "Ensemble file")->required();
  hol->add_option("channel", hol_channel, "Channel file")->required();
  add_common(hol, hol_f, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (info->parsed())
      return run_on_files(info_files, info_f,
                          [&](const std::string&, const std::string& text) {
                            return do_info(text, info_f);
                          });
    if (dec->parsed())
      return run_on_files(dec_files, dec_f,
                          [&](const std::string&, const std::string& text) {
                            return do_decompose(text, dec_f);
                          });
    if (rec->parsed())
      return run_on_files(rec_files, rec_f,
                          [&](const std::string&, const std::string& text) {
                            return do_recover(text, rec_f);
                          });
    if (gen->parsed()) return do_gen(gen_p, gen_f);
    if (qec->parsed()) return do_qec(qec_sigma, qec_channel, qec_f);
    if (hol->parsed()) return do_holevo(hol_ensemble, hol_channel, hol_f);
  } catch (const qmc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const qmc::ShapeError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qmc::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitPass;
}
