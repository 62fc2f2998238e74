#pragma once

// Run configuration parsing for the CLI: JSON-syntax config files per the
// documented schema, with unknown keys rejected.

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mzwork/protocol.hpp"

namespace mzwork {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolDescriptor {
  std::string mode = "discrete";  // "discrete" | "continuous"
  double omega_over_Omega = 1.0;
  double tau = std::numbers::pi / 2.0;
  int steps = 7;  // discrete only
  int dimension = 2;
  // custom d-level schedule: list of (row-major real matrix, dt)
  std::vector<HamiltonianSchedule::Step> schedule;

  QubitRotationProtocol make(double omega_override = -1.0,
                             int steps_override = -1) const {
    const double wr = omega_override >= 0.0 ? omega_override : omega_over_Omega;
    if (mode == "continuous")
      return QubitRotationProtocol::continuous_rotation(wr, tau);
    return QubitRotationProtocol::discrete(
        wr, steps_override >= 1 ? steps_override : steps, tau);
  }
};

struct RunConfig {
  ProtocolDescriptor protocol;
  std::optional<double> beta;
  std::string preparation = "thermal";  // "pure" | "thermal"
  std::string scheme = "split";         // "split" | "full"
  int n = 0, m = 0;                     // pure-mode eigenstate indices
  std::vector<double> sweep_beta;
  std::vector<double> sweep_omega;
  std::vector<int> sweep_steps;
  bool sweep_beta_given = false;
  bool sweep_omega_given = false;
  bool sweep_steps_given = false;
  std::string output;
  std::string format = "csv";

  std::vector<double> beta_axis() const {
    if (!sweep_beta.empty()) return sweep_beta;
    if (beta) return {*beta};
    throw ConfigError("config needs beta or sweep.beta");
  }
  std::vector<double> omega_axis() const {
    if (!sweep_omega.empty()) return sweep_omega;
    return {protocol.omega_over_Omega};
  }
  std::vector<int> steps_axis() const {
    if (!sweep_steps.empty()) return sweep_steps;
    return {protocol.steps};
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
}

inline double finite_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(key + " must be finite");
  return v;
}

inline ProtocolDescriptor parse_protocol(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("protocol must be an object");
  reject_unknown_keys(
      j, {"mode", "omega_over_Omega", "tau", "steps", "dimension", "schedule"},
      "protocol");
  ProtocolDescriptor p;
  if (j.contains("mode")) {
    p.mode = j.at("mode").get<std::string>();
    if (p.mode != "discrete" && p.mode != "continuous")
      throw ConfigError("protocol.mode must be \"discrete\" or \"continuous\"");
  }
  if (j.contains("omega_over_Omega")) {
    p.omega_over_Omega = finite_number(j.at("omega_over_Omega"),
                                       "protocol.omega_over_Omega");
    if (p.omega_over_Omega <= 0.0)
      throw ConfigError("protocol.omega_over_Omega must be > 0");
  }
  if (j.contains("tau")) {
    p.tau = finite_number(j.at("tau"), "protocol.tau");
    if (p.tau <= 0.0) throw ConfigError("protocol.tau must be > 0");
  }
  if (j.contains("steps")) {
    if (p.mode == "continuous")
      throw ConfigError("protocol.steps is valid in discrete mode only");
    p.steps = j.at("steps").get<int>();
    if (p.steps < 1) throw ConfigError("protocol.steps must be >= 1");
  }
  if (j.contains("dimension")) {
    p.dimension = j.at("dimension").get<int>();
    if (p.dimension < 2 || p.dimension > 8)
      throw ConfigError("protocol.dimension must be in [2, 8]");
  }
  if (j.contains("schedule")) {
    for (const auto& st : j.at("schedule")) {
      reject_unknown_keys(st, {"matrix", "dt"}, "protocol.schedule entry");
      const auto& mj = st.at("matrix");
      const int d = p.dimension;
      if (int(mj.size()) != d * d)
        throw ConfigError("schedule matrix must have dimension^2 entries");
      ComplexMatrix h(d);
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
          h(i, k) = finite_number(mj.at(i * d + k), "schedule matrix entry");
      p.schedule.push_back(
          {h, finite_number(st.at("dt"), "schedule dt")});
    }
  }
  return p;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"protocol", "beta", "preparation", "scheme",
                               "n", "m", "sweep", "output", "format"},
                              "config");
  RunConfig c;
  if (j.contains("protocol")) c.protocol = detail::parse_protocol(j.at("protocol"));
  if (j.contains("beta")) {
    c.beta = detail::finite_number(j.at("beta"), "beta");
    if (*c.beta <= 0.0) throw ConfigError("beta must be > 0");
  }
  if (j.contains("preparation")) {
    c.preparation = j.at("preparation").get<std::string>();
    if (c.preparation != "pure" && c.preparation != "thermal")
      throw ConfigError("preparation must be \"pure\" or \"thermal\"");
  }
  if (j.contains("scheme")) {
    c.scheme = j.at("scheme").get<std::string>();
    if (c.scheme != "split" && c.scheme != "full")
      throw ConfigError("scheme must be \"split\" or \"full\"");
  }
  if (j.contains("n")) c.n = j.at("n").get<int>();
  if (j.contains("m")) c.m = j.at("m").get<int>();
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    detail::reject_unknown_keys(s, {"beta", "omega_over_Omega", "steps"},
                                "sweep");
    if (s.contains("beta")) {
      if (c.beta) throw ConfigError("beta and sweep.beta are exclusive");
      c.sweep_beta_given = true;
      for (const auto& b : s.at("beta")) {
        const double v = detail::finite_number(b, "sweep.beta entry");
        if (v <= 0.0) throw ConfigError("sweep.beta entries must be > 0");
        c.sweep_beta.push_back(v);
      }
    }
    if (s.contains("omega_over_Omega")) {
      c.sweep_omega_given = true;
      for (const auto& w : s.at("omega_over_Omega")) {
        const double v =
            detail::finite_number(w, "sweep.omega_over_Omega entry");
        if (v <= 0.0)
          throw ConfigError("sweep.omega_over_Omega entries must be > 0");
        c.sweep_omega.push_back(v);
      }
    }
    if (s.contains("steps")) {
      c.sweep_steps_given = true;
      for (const auto& nval : s.at("steps")) {
        const int v = nval.get<int>();
        if (v < 1) throw ConfigError("sweep.steps entries must be >= 1");
        c.sweep_steps.push_back(v);
      }
    }
  }
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (j.contains("format")) {
    c.format = j.at("format").get<std::string>();
    if (c.format != "csv" && c.format != "json")
      throw ConfigError("format must be \"csv\" or \"json\"");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
}

}  // namespace mzwork
