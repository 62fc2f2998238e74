// mzwork: command-line front end for the interferometric work-statistics
// simulator. Subcommands: workdist | bounds | convergence | verify.
//
// Output units: W (and the bounds) in hbar*omega, beta in 1/(hbar*Omega).
// All floats are printed with 17 significant digits (round-trip exact), and
// grid evaluation is gathered into index order before writing, so output is
// byte-identical across runs and worker counts.
//
// Exit codes: 0 success, 1 verification failure, 2 config error,
//             3 numeric failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mzwork/config.hpp"
#include "mzwork/interfero.hpp"
#include "mzwork/oracle.hpp"
#include "mzwork/protocol.hpp"
#include "mzwork/thermo.hpp"

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Dataset {
  std::string command;
  std::string units_comment;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // pre-formatted cells
};

std::string to_csv(const Dataset& d) {
  std::ostringstream out;
  out << "# mzwork " << d.command << ": " << d.units_comment << "\n";
  for (std::size_t i = 0; i < d.columns.size(); ++i)
    out << (i ? "," : "") << d.columns[i];
  out << "\n";
  for (const auto& row : d.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

// hand-rolled serialization keeps numeric cells bit-identical to the CSV path
std::string to_json(const Dataset& d) {
  std::ostringstream out;
  out << "{\"schema_version\":1,\"command\":\"" << d.command
      << "\",\"units\":\"" << d.units_comment << "\",\"columns\":[";
  for (std::size_t i = 0; i < d.columns.size(); ++i)
    out << (i ? "," : "") << '"' << d.columns[i] << '"';
  out << "],\"rows\":[";
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    out << (r ? "," : "") << '[';
    for (std::size_t i = 0; i < d.rows[r].size(); ++i) {
      const std::string& cell = d.rows[r][i];
      const bool numeric = !cell.empty() &&
                           cell.find_first_not_of("0123456789+-.e") ==
                               std::string::npos &&
                           cell != "inf";
      out << (i ? "," : "");
      if (numeric)
        out << cell;
      else
        out << '"' << cell << '"';
    }
    out << ']';
  }
  out << "]}\n";
  return out.str();
}

void write_dataset(const Dataset& d, const std::string& path,
                   const std::string& format) {
  const std::string text = format == "json" ? to_json(d) : to_csv(d);
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mzwork::ConfigError("cannot open output file: " + path);
  out << text;
}

// deterministic map over [0, n): workers pull indices from a shared counter
// and write into a pre-sized vector, preserving index order
template <typename F>
std::vector<std::vector<std::vector<std::string>>> parallel_map(
    std::size_t n, int threads, F&& job) {
  std::vector<std::vector<std::vector<std::string>>> results(n);
  std::vector<std::string> errors;
  std::mutex err_mutex;
  if (threads < 1) threads = 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = job(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        errors.emplace_back(e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    throw std::runtime_error(errors.front());
  }
  return results;
}

struct GridPoint {
  double beta;
  double omega_over_Omega;
  int steps;
};

std::vector<GridPoint> sorted_grid(const mzwork::RunConfig& cfg) {
  auto betas = cfg.beta_axis();
  auto omegas = cfg.omega_axis();
  auto steps = cfg.steps_axis();
  std::sort(betas.begin(), betas.end());
  std::sort(omegas.begin(), omegas.end());
  std::sort(steps.begin(), steps.end());
  std::vector<GridPoint> grid;
  for (double b : betas)
    for (double w : omegas)
      for (int n : steps) grid.push_back({b, w, n});
  return grid;
}

int cmd_workdist(const mzwork::RunConfig& cfg, const std::string& out,
                 const std::string& format, int threads) {
  const auto grid = sorted_grid(cfg);
  const bool continuous = cfg.protocol.mode == "continuous";
  auto results = parallel_map(grid.size(), threads, [&](std::size_t i) {
    const auto& g = grid[i];
    const auto p = continuous
                       ? mzwork::QubitRotationProtocol::continuous_rotation(
                             g.omega_over_Omega, cfg.protocol.tau)
                       : mzwork::QubitRotationProtocol::discrete(
                             g.omega_over_Omega, g.steps, cfg.protocol.tau);
    const auto h0 = mzwork::hamiltonian_at(p, 0.0);
    const auto ht = mzwork::hamiltonian_at(p, std::numbers::pi / 2.0);
    const auto u = continuous
                       ? mzwork::continuous_unitary(p, p.tau)
                       : mzwork::forward_unitary(mzwork::step_hamiltonians(p),
                                                 p.tau, 0.0);
    const auto wd = mzwork::work_distribution(u, h0, ht, g.beta);
    if (std::abs(wd.total() - 1.0) > 1e-10)
      throw std::runtime_error("work distribution not normalized");
    std::vector<std::vector<std::string>> rows;
    for (const auto& a : wd.support)
      rows.push_back({fmt17(g.beta), fmt17(g.omega_over_Omega),
                      std::to_string(continuous ? 0 : g.steps),
                      fmt17(a.w / p.omega), fmt17(a.p)});
    return rows;
  });
  Dataset d;
  d.command = "workdist";
  d.units_comment =
      "W in hbar*omega units, beta in 1/(hbar*Omega) units, steps=0 marks "
      "the continuous protocol";
  d.columns = {"beta", "omega_over_Omega", "steps", "W_over_hbar_omega",
               "probability"};
  for (auto& r : results)
    for (auto& row : r) d.rows.push_back(std::move(row));
  write_dataset(d, out, format);
  return 0;
}

int cmd_bounds(const mzwork::RunConfig& cfg, const std::string& out,
               const std::string& format, int threads) {
  auto betas = cfg.beta_axis();
  std::sort(betas.begin(), betas.end());
  auto results = parallel_map(betas.size(), threads, [&](std::size_t i) {
    const double beta = betas[i];
    const auto p = cfg.protocol.make();
    const auto h0 = mzwork::hamiltonian_at(p, 0.0);
    const auto ht = mzwork::hamiltonian_at(p, std::numbers::pi / 2.0);
    const auto u = p.continuous()
                       ? mzwork::continuous_unitary(p, p.tau)
                       : mzwork::forward_unitary(mzwork::step_hamiltonians(p),
                                                 p.tau, 0.0);
    const auto wd = mzwork::work_distribution(u, h0, ht, beta);
    const double wdiss = mzwork::dissipative_work(wd);
    const auto scheme = cfg.scheme == "full" ? mzwork::SchemeMode::FullForward
                                             : mzwork::SchemeMode::SplitHalf;
    const auto run = mzwork::run_thermal(p, scheme, beta);
    const auto det = mzwork::detector_states(p, beta, scheme);
    const auto rep = mzwork::complementarity_report(run, det);
    const auto b = mzwork::bounds_from_distinguishability(
        std::sqrt(std::max(0.0, rep.d_squared_marginal)), beta, ht, 2);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({fmt17(beta), fmt17(wdiss / p.omega),
                    b.b2_finite ? fmt17(b.b2 / p.omega) : std::string("inf"),
                    fmt17(b.blog / p.omega), fmt17(b.alpha),
                    fmt17(run.visibility)});
    return rows;
  });
  Dataset d;
  d.command = "bounds";
  d.units_comment =
      "W_diss/B2/Blog in hbar*omega units, beta in 1/(hbar*Omega) units; "
      "distinguishability taken between the system marginals";
  d.columns = {"beta", "W_diss", "B2", "Blog", "alpha", "V"};
  for (auto& r : results)
    for (auto& row : r) d.rows.push_back(std::move(row));
  write_dataset(d, out, format);
  return 0;
}

int cmd_convergence(const mzwork::RunConfig& cfg, const std::string& out,
                    const std::string& format, int threads) {
  if (cfg.protocol.mode == "continuous")
    throw mzwork::ConfigError(
        "convergence needs a discrete protocol plus the continuous reference");
  auto omegas = cfg.omega_axis();
  auto steps = cfg.steps_axis();
  std::sort(omegas.begin(), omegas.end());
  std::sort(steps.begin(), steps.end());
  const double beta = cfg.beta_axis().front();
  std::vector<GridPoint> grid;
  for (double w : omegas)
    for (int n : steps) grid.push_back({beta, w, n});
  auto results = parallel_map(grid.size(), threads, [&](std::size_t i) {
    const auto& g = grid[i];
    const auto pc = mzwork::QubitRotationProtocol::continuous_rotation(
        g.omega_over_Omega, cfg.protocol.tau);
    const auto h0 = mzwork::hamiltonian_at(pc, 0.0);
    const auto ht = mzwork::hamiltonian_at(pc, std::numbers::pi / 2.0);
    const double p_cont =
        mzwork::work_distribution(mzwork::continuous_unitary(pc, pc.tau), h0,
                                  ht, g.beta)
            .at(0.0);
    const auto pd = mzwork::QubitRotationProtocol::discrete(
        g.omega_over_Omega, g.steps, cfg.protocol.tau);
    const double p_n =
        mzwork::work_distribution(
            mzwork::forward_unitary(mzwork::step_hamiltonians(pd), pd.tau, 0.0),
            h0, ht, g.beta)
            .at(0.0);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({fmt17(g.beta), fmt17(g.omega_over_Omega),
                    std::to_string(g.steps), fmt17(std::abs(p_n - p_cont))});
    return rows;
  });
  Dataset d;
  d.command = "convergence";
  d.units_comment =
      "delta_P0 = |P_N(W=0) - P_cont(W=0)|, beta in 1/(hbar*Omega) units";
  d.columns = {"beta", "omega_over_Omega", "steps", "delta_P0"};
  for (auto& r : results)
    for (auto& row : r) d.rows.push_back(std::move(row));
  write_dataset(d, out, format);
  return 0;
}

int cmd_verify(const mzwork::RunConfig& cfg, const std::string& out,
               const std::string& format, bool inject_corruption) {
  mzwork::oracle::Grid grid;
  if (cfg.sweep_beta_given || cfg.beta) grid.betas = cfg.beta_axis();
  if (cfg.sweep_omega_given) grid.omegas = cfg.sweep_omega;
  if (cfg.sweep_steps_given) grid.ns = cfg.sweep_steps;
  if (grid.betas.empty() || grid.omegas.empty() || grid.ns.empty())
    throw mzwork::ConfigError("verification grid is empty");
  const auto reports = mzwork::oracle::verify_all(grid, inject_corruption);
  Dataset d;
  d.command = "verify";
  d.units_comment = "max absolute deviations over the verification grid";
  d.columns = {"check", "deviation", "threshold", "pass"};
  bool all_pass = true;
  for (const auto& r : reports) {
    d.rows.push_back({r.name, fmt17(r.deviation), fmt17(r.threshold),
                      r.pass ? "1" : "0"});
    all_pass = all_pass && r.pass;
  }
  write_dataset(d, out, format);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interferometric quantum work statistics simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, format;
  int threads = int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  bool inject_corruption = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", out_path, "output path (default: stdout)");
    sub->add_option("--format", format, "csv|json (default: from config)");
    sub->add_option("--threads", threads, "worker count");
  };
  auto* workdist = app.add_subcommand("workdist", "work distributions P(W)");
  auto* bounds = app.add_subcommand("bounds", "dissipation bounds vs beta");
  auto* convergence =
      app.add_subcommand("convergence", "discrete-to-continuous convergence");
  auto* verify = app.add_subcommand("verify", "run all identity audits");
  for (auto* sub : {workdist, bounds, convergence, verify}) add_common(sub);
  verify->add_flag("--inject-corruption", inject_corruption)
      ->group("");  // hidden test hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto cfg = mzwork::load_config(config_path);
    const std::string fmt = format.empty() ? cfg.format : format;
    if (fmt != "csv" && fmt != "json")
      throw mzwork::ConfigError("format must be \"csv\" or \"json\"");
    const std::string out = out_path.empty() ? cfg.output : out_path;
    if (*workdist) return cmd_workdist(cfg, out, fmt, threads);
    if (*bounds) return cmd_bounds(cfg, out, fmt, threads);
    if (*convergence) return cmd_convergence(cfg, out, fmt, threads);
    return cmd_verify(cfg, out, fmt, inject_corruption);
  } catch (const mzwork::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
