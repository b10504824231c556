#include "qmc/io.hpp"

#include <cmath>
#include <cstdio>

namespace qmc {

namespace {

double finite_number(const Json& j, const char* what) {
  if (!j.is_number())
    throw ParseError(std::string("expected a number for ") + what);
  double v = j.get<double>();
  if (!std::isfinite(v))
    throw ParseError(std::string("non-finite value for ") + what);
  return v;
}

const Json& require(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("missing key: ") + key);
  return *it;
}

SubsystemShape shape_from_json(const Json& j, const char* dims_key,
                               const char* labels_key) {
  const Json& jd = require(j, dims_key);
  const Json& jl = require(j, labels_key);
  if (!jd.is_array() || !jl.is_array() || jd.size() != jl.size())
    throw ParseError("dims and labels must be arrays of equal length");
  std::vector<int> dims;
  std::vector<std::string> labels;
  for (const auto& d : jd) {
    if (!d.is_number_integer())
      throw ParseError("dims entries must be integers");
    dims.push_back(d.get<int>());
  }
  for (const auto& l : jl) {
    if (!l.is_string()) throw ParseError("labels entries must be strings");
    labels.push_back(l.get<std::string>());
  }
  try {
    return SubsystemShape(std::move(dims), std::move(labels));
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
}

Json shape_to_json(const SubsystemShape& s, Json& out, const char* dims_key,
                   const char* labels_key) {
  out[dims_key] = s.dims;
  out[labels_key] = s.labels;
  return out;
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  if (!m.allFinite()) throw ValidationError("matrix_to_json: non-finite entry");
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ParseError("matrix must be a non-empty array of rows");
  size_t cols = 0;
  for (const auto& row : j) {
    if (!row.is_array()) throw ParseError("matrix row must be an array");
    if (cols == 0) cols = row.size();
    if (row.size() != cols || cols == 0)
      throw ParseError("matrix rows must have equal, non-zero length");
  }
  Mat m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i)
    for (size_t k = 0; k < cols; ++k) {
      const Json& cell = j[i][k];
      if (!cell.is_array() || cell.size() != 2)
        throw ParseError("matrix entries must be [re, im] pairs");
      m(i, k) = Cplx(finite_number(cell[0], "matrix entry"),
                     finite_number(cell[1], "matrix entry"));
    }
  return m;
}

Json state_to_json(const DensityOperator& rho) {
  Json out;
  out["format_version"] = kFormatVersion;
  shape_to_json(rho.shape, out, "dims", "labels");
  out["matrix"] = matrix_to_json(rho.matrix);
  return out;
}

DensityOperator state_from_json(const Json& j, double tol) {
  if (!j.is_object()) throw ParseError("state file must be a JSON object");
  auto shape = shape_from_json(j, "dims", "labels");
  Mat m = matrix_from_json(require(j, "matrix"));
  if (m.rows() != shape.total_dim() || m.cols() != shape.total_dim())
    throw ParseError("matrix dimensions inconsistent with dims");
  return DensityOperator(std::move(m), std::move(shape), tol);
}

Json channel_to_json(const QuantumChannel& t) {
  Json out;
  out["format_version"] = kFormatVersion;
  shape_to_json(t.in_shape, out, "in_dims", "in_labels");
  shape_to_json(t.out_shape, out, "out_dims", "out_labels");
  Json kraus = Json::array();
  for (const auto& k : t.kraus) kraus.push_back(matrix_to_json(k));
  out["kraus"] = std::move(kraus);
  return out;
}

QuantumChannel channel_from_json(const Json& j, double tol) {
  if (!j.is_object()) throw ParseError("channel file must be a JSON object");
  auto in = shape_from_json(j, "in_dims", "in_labels");
  auto out = shape_from_json(j, "out_dims", "out_labels");
  const Json& jk = require(j, "kraus");
  if (!jk.is_array() || jk.empty())
    throw ParseError("kraus must be a non-empty array");
  std::vector<Mat> kraus;
  for (const auto& km : jk) {
    Mat k = matrix_from_json(km);
    if (k.rows() != out.total_dim() || k.cols() != in.total_dim())
      throw ParseError("kraus operator shape inconsistent with dims");
    kraus.push_back(std::move(k));
  }
  return QuantumChannel::make(std::move(kraus), std::move(in), std::move(out),
                              tol);
}

Json ensemble_to_json(const Ensemble& e) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["probs"] = e.probs.probs;
  Json states = Json::array();
  for (const auto& s : e.states) states.push_back(state_to_json(s));
  out["states"] = std::move(states);
  return out;
}

Ensemble ensemble_from_json(const Json& j, double tol) {
  if (!j.is_object()) throw ParseError("ensemble file must be a JSON object");
  const Json& jp = require(j, "probs");
  if (!jp.is_array()) throw ParseError("probs must be an array");
  std::vector<double> probs;
  for (const auto& x : jp) probs.push_back(finite_number(x, "probability"));
  const Json& js = require(j, "states");
  if (!js.is_array() || js.size() != probs.size())
    throw ParseError("states must be an array matching probs in length");
  std::vector<DensityOperator> states;
  for (const auto& s : js) states.push_back(state_from_json(s, tol));
  return Ensemble::make(Distribution::make(std::move(probs)),
                        std::move(states));
}

Json Report::to_json() const {
  Json out;
  out["command"] = command;
  out["inputs"] = inputs;
  out["results"] = results;
  out["tolerances"] = tolerances;
  if (seed) out["seed"] = *seed;
  return out;
}

std::string digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace qmc
