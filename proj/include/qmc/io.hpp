#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmc/channels.hpp"
#include "qmc/entropy.hpp"
#include "qmc/types.hpp"

namespace qmc {

using Json = nlohmann::json;

/// Malformed input file (missing keys, wrong types, NaN/Inf, bad shapes of
/// the raw arrays). Distinct from ValidationError, which means the parsed
/// object failed its mathematical invariants.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kFormatVersion = "1.0";

/// Complex matrices interchange as nested arrays of [re, im] pairs in
/// row-major composite order (last label fastest). NaN/Inf are rejected.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

Json state_to_json(const DensityOperator& rho);
DensityOperator state_from_json(const Json& j, double tol = kHermTol);

Json channel_to_json(const QuantumChannel& t);
QuantumChannel channel_from_json(const Json& j, double tol = 1e-9);

Json ensemble_to_json(const Ensemble& e);
Ensemble ensemble_from_json(const Json& j, double tol = kHermTol);

/// Machine-readable command result; serialization is deterministic for
/// fixed inputs and echoes the tolerances used.
struct Report {
  std::string command;
  std::vector<std::string> inputs;  // digests of the raw input bytes
  Json results = Json::object();
  Json tolerances = Json::object();
  std::optional<std::uint64_t> seed;

  Json to_json() const;
};

/// FNV-1a 64-bit digest, hex encoded; used to fingerprint input files.
std::string digest(const std::string& bytes);

}  // namespace qmc
