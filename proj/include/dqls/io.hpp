// Copyright 2026 The dqls Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON and CSV plumbing. Needs nlohmann/json (vendor/json.hpp) on the include path.

#include "dqls/regression.hpp"

#include <fstream>
#include <iomanip>
#include <json.hpp>

namespace dqls {

using json = nlohmann::json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline json matrix_rows(const RMat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_values(const RVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline RMat parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InputError(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw InputError(where + ": rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  RMat a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError(where + ": ragged row " + std::to_string(i));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InputError(where + ": non-numeric entry");
      a(i, c) = v.get<double>();
    }
  }
  return a;
}

inline RVec parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(where + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

struct InstanceFile {
  DistributedInstance instance;
  std::optional<PenaltySpec> penalty;
  std::optional<std::uint64_t> seed;
};

inline json penalty_json(const PenaltySpec& p) { return {{"lambda", p.lambda}, {"L", detail::matrix_rows(p.L)}}; }

inline json instance_json(const DistributedInstance& inst, const std::optional<PenaltySpec>& pen = std::nullopt,
                          std::optional<std::uint64_t> seed = std::nullopt) {
  json j;
  j["delta"] = inst.delta;
  json parties = json::array();
  for (auto& p : inst.parties) parties.push_back({{"A", detail::matrix_rows(p.A)}, {"b", detail::vector_values(p.b)}});
  j["parties"] = std::move(parties);
  if (pen) j["penalty"] = penalty_json(*pen);
  if (seed) j["seed"] = *seed;
  return j;
}

inline PenaltySpec parse_penalty(const json& j) {
  if (!j.is_object() || !j.contains("lambda") || !j.contains("L")) throw InputError("penalty: needs lambda and L");
  if (!j["lambda"].is_number()) throw InputError("penalty: lambda must be a number");
  return {j["lambda"].get<double>(), detail::parse_matrix(j["L"], "penalty.L")};
}

inline InstanceFile parse_instance(const json& j) {
  if (!j.is_object()) throw InputError("instance: expected a JSON object");
  if (!j.contains("delta") || !j["delta"].is_number()) throw InputError("instance: missing numeric delta");
  if (!j.contains("parties") || !j["parties"].is_array()) throw InputError("instance: missing parties array");
  std::vector<Party> parties;
  std::size_t i = 0;
  for (auto& p : j["parties"]) {
    const std::string where = "parties[" + std::to_string(i++) + "]";
    if (!p.is_object() || !p.contains("A") || !p.contains("b")) throw InputError(where + ": needs A and b");
    parties.push_back({detail::parse_matrix(p["A"], where + ".A"), detail::parse_vector(p["b"], where + ".b")});
  }
  InstanceFile f;
  f.instance = build_instance(std::move(parties), j["delta"].get<double>());
  if (j.contains("penalty")) {
    f.penalty = parse_penalty(j["penalty"]);
    f.penalty->validate(f.instance.n());
  }
  if (j.contains("seed")) f.seed = j["seed"].get<std::uint64_t>();
  return f;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline InstanceFile load_instance(const std::string& path) { return parse_instance(read_json_file(path)); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

inline json ledger_json(const LedgerReport& r) {
  json lines = json::object();
  for (auto& [k, v] : r.lines) lines[k] = {{"count", v.count}, {"qubits", v.qubits}};
  return {{"total", r.total}, {"lines", lines}, {"tags", r.tags}};
}

inline json result_json(const RegressionResult& r) {
  json j;
  j["direction"] = detail::vector_values(r.direction);
  j["fidelity"] = r.fidelity;
  j["gamma"] = r.gamma;
  j["p_succ"] = r.p_succ;
  j["qubits_total"] = r.qubits_total;
  j["kappa"] = r.kappa;
  j["mode"] = r.mode;
  j["wall_ms"] = r.wall_ms;
  j["feasible"] = r.feasible;
  j["reg"] = r.reg;
  j["eps"] = r.eps;
  j["lambda"] = r.lambda;
  j["p_succ_predicted"] = r.p_succ_predicted;
  j["truncated_mass"] = r.truncated_mass;
  j["alpha_eff"] = r.alpha_eff;
  j["delta_param"] = r.delta_param;
  j["amplification_rounds"] = r.stats.iterations;
  j["t_avg"] = r.stats.t_avg;
  j["t_max"] = r.stats.t_max;
  j["stage_probabilities"] = r.stats.p;
  j["stage_costs"] = r.stats.t;
  j["clock_residual"] = r.stats.residual;
  j["ledger"] = ledger_json(r.ledger);
  j["warnings"] = r.warnings;
  return j;
}

// CSV schema shared by solve and sweep.
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"run_id", "mode",   "r",          "m",          "n",
                                             "delta",  "eps",    "lambda",     "gamma",      "fidelity",
                                             "p_succ", "qubits_total", "qubits_gpe", "qubits_inv", "qubits_bprep",
                                             "t_avg",  "t_max",  "kappa",      "wall_ms"};
  return cols;
}

inline std::string csv_header() {
  std::string s;
  for (auto& c : csv_columns()) s += (s.empty() ? "" : ",") + c;
  return s;
}

struct RunRow {
  std::string run_id;
  std::size_t r = 0;
  Eigen::Index m = 0, n = 0;
  double delta = 0.0;
  RegressionResult res;
};

inline std::string csv_row(const RunRow& row) {
  std::ostringstream os;
  os << std::setprecision(12);
  const auto& r = row.res;
  os << row.run_id << ',' << r.mode << ',' << row.r << ',' << row.m << ',' << row.n << ',' << row.delta << ','
     << r.eps << ',' << r.lambda << ',' << r.gamma << ',' << r.fidelity << ',' << r.p_succ << ',' << r.qubits_total
     << ',' << r.qubits_gpe << ',' << r.qubits_inv << ',' << r.qubits_bprep << ',' << r.stats.t_avg << ','
     << r.stats.t_max << ',' << r.kappa << ',' << std::setprecision(6) << r.wall_ms;
  return os.str();
}

}  // namespace dqls
