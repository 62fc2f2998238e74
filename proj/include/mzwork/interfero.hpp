#pragma once

// Mach-Zehnder scheme simulation: split-half and full-forward arm layouts,
// pure-eigenpair and thermal-purification preparations, visibilities, port
// probabilities, which-path detector states, complementarity and the
// dissipative-work bounds.

#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "mzwork/matcore.hpp"
#include "mzwork/protocol.hpp"
#include "mzwork/thermo.hpp"

namespace mzwork {

struct IndexOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OddSplitBoundary : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonStochasticVisibilities : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SchemeMode { SplitHalf, FullForward };

struct InterferometerRun {
  double visibility = 0.0;
  double p_plus = 0.5, p_minus = 0.5;          // at zero reference phase
  double p_plus_opt = 0.5, p_minus_opt = 0.5;  // at the fringe optimum
  double optimal_phase = 0.0;
  DensityOperator ancilla;  // 2x2 path state
  std::optional<DensityOperator> system_marginal;
};

namespace detail {

struct ArmOperators {
  ComplexMatrix arm0;    // applied along |0>_A
  ComplexMatrix arm1;    // applied along |1>_A (Theta^dag Utilde, as a
                         // linear matrix on real input amplitudes)
  double t_split = 0.0;  // interference time in the forward leg
};

// SplitHalf boundary convention for discrete schedules: step ceil(N/2).
// Both arms then jointly compose U(tau,0), which is what the visibility
// identity requires; for even N this is exactly tau/2.
inline ArmOperators make_arms(const QubitRotationProtocol& p,
                              SchemeMode scheme) {
  ArmOperators a;
  if (scheme == SchemeMode::FullForward) {
    a.t_split = p.tau;
    if (p.continuous()) {
      a.arm0 = continuous_unitary(p, p.tau);
    } else {
      a.arm0 = forward_unitary(step_hamiltonians(p), p.tau, 0.0);
    }
    a.arm1 = ComplexMatrix::identity(2);
    return a;
  }
  if (p.continuous()) {
    a.t_split = 0.5 * p.tau;
    a.arm0 = continuous_unitary(p, a.t_split);
    a.arm1 = reversed_continuous_unitary(p, p.tau - a.t_split).conjugate();
    return a;
  }
  const auto s = step_hamiltonians(p);
  const int kb = (p.steps + 1) / 2;
  a.t_split = s.boundaries()[kb];
  a.arm0 = forward_unitary(s, a.t_split, 0.0);
  a.arm1 = reversed_unitary(s, p.tau - a.t_split, 0.0).conjugate();
  return a;
}

// fringe scan: coarse 256-point sweep of the reference phase, then the
// analytic optimum phi* = -arg(rho_01)
inline void fill_run_from_offdiagonal(InterferometerRun& run, cplx off) {
  run.visibility = 2.0 * std::abs(off);  // (p_max - p_min)/(p_max + p_min)
  run.p_plus = 0.5 + off.real();
  run.p_minus = 0.5 - off.real();
  double best = 0.0, best_phi = 0.0;
  for (int j = 0; j < 256; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / 256.0;
    const double fringe = std::real(std::exp(cplx(0.0, phi)) * off);
    if (std::abs(fringe) > std::abs(best)) {
      best = fringe;
      best_phi = phi;
    }
  }
  if (std::abs(off) > 0.0) best_phi = -std::arg(off);
  run.optimal_phase = best_phi;
  run.p_plus_opt = 0.5 + std::abs(off);
  run.p_minus_opt = 0.5 - std::abs(off);
}

// Arm layout for a generic piecewise-constant schedule. SplitHalf places
// the boundary at step ceil(N/2); the remainder of the schedule is covered
// by the reversed arm, so both arms jointly compose U(T,0).
inline ArmOperators make_arms(const HamiltonianSchedule& s,
                              SchemeMode scheme) {
  ArmOperators a;
  const double T = s.total_duration();
  if (scheme == SchemeMode::FullForward) {
    a.t_split = T;
    a.arm0 = forward_unitary(s, T, 0.0);
    a.arm1 = ComplexMatrix::identity(s.dim());
    return a;
  }
  const int kb = (int(s.steps().size()) + 1) / 2;
  a.t_split = s.boundaries()[kb];
  a.arm0 = forward_unitary(s, a.t_split, 0.0);
  a.arm1 = reversed_unitary(s, T - a.t_split, 0.0).conjugate();
  return a;
}

inline InterferometerRun run_pure_arms(const ArmOperators& arms,
                                       const CVec& state_n,
                                       const CVec& state_m) {
  const int d = int(state_n.size());
  const CVec psi_n = matvec(arms.arm0, state_n);
  const CVec psi_m = matvec(arms.arm1, state_m);

  CVec joint(2 * d, 0.0);  // index a*d + s
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < d; ++s) {
    joint[s] = inv_sqrt2 * psi_n[s];
    joint[d + s] = inv_sqrt2 * psi_m[s];
  }
  const DensityOperator rho = pure_density(joint, Role::Joint);

  InterferometerRun run;
  run.ancilla = partial_trace(rho, Keep::First, 2, d);
  run.ancilla.role = Role::Auxiliary;
  run.system_marginal = partial_trace(rho, Keep::Second, 2, d);
  fill_run_from_offdiagonal(run, run.ancilla.matrix(0, 1));
  return run;
}

}  // namespace detail

// Pure-eigenpair preparation: |E_n^0> on arm 0, |E_m^tau> on arm 1. The
// joint path x system state is built explicitly and the path marginal read
// off by partial trace.
inline InterferometerRun run_pure(const QubitRotationProtocol& p,
                                  SchemeMode scheme, int n, int m) {
  const auto e0 = hermitian_eig(hamiltonian_at(p, 0.0));
  const auto et = hermitian_eig(hamiltonian_at(p, std::numbers::pi / 2.0));
  if (n < 0 || n >= 2 || m < 0 || m >= 2)
    throw IndexOutOfRange("eigenstate index out of range");
  return detail::run_pure_arms(detail::make_arms(p, scheme),
                               eigcolumn(e0, n), eigcolumn(et, m));
}

// Generic d-level variant for custom schedules; h0/htau fix the measured
// eigenbases at the protocol endpoints.
inline InterferometerRun run_pure(const HamiltonianSchedule& s,
                                  const ComplexMatrix& h0,
                                  const ComplexMatrix& htau,
                                  SchemeMode scheme, int n, int m) {
  const auto e0 = hermitian_eig(h0);
  const auto et = hermitian_eig(htau);
  if (n < 0 || n >= s.dim() || m < 0 || m >= s.dim())
    throw IndexOutOfRange("eigenstate index out of range");
  return detail::run_pure_arms(detail::make_arms(s, scheme),
                               eigcolumn(e0, n), eigcolumn(et, m));
}

namespace detail {

struct Purifications {
  CVec psi;        // forward leg, dim d*d (system x environment)
  CVec psi_tilde;  // reversed leg
  ThermalState th0, tht;
};

// Canonical purification: environment labels follow the energy eigenindex,
// |psi> = sum_n sqrt(p_n) |E_n^0>|n>_E, same labels on both legs. The final
// eigenvectors are phase-aligned against their index-matched initial
// partners (<E_m^tau|E_m^0> >= 0), mirroring a Bell-pair preparation and
// making the visibility basis-convention independent.
inline Purifications canonical_purifications(const QubitRotationProtocol& p,
                                             double beta) {
  Purifications pu;
  pu.th0 = thermal_state(hamiltonian_at(p, 0.0), beta);
  pu.tht = thermal_state(hamiltonian_at(p, std::numbers::pi / 2.0), beta);
  const int d = 2;
  pu.psi.assign(d * d, 0.0);
  pu.psi_tilde.assign(d * d, 0.0);
  for (int n = 0; n < d; ++n) {
    const CVec v0 = eigcolumn(pu.th0.eig, n);
    CVec vt = eigcolumn(pu.tht.eig, n);
    const cplx ov = vdot(vt, v0);
    if (std::abs(ov) > 1e-12) {
      const cplx ph = ov / std::abs(ov);
      for (auto& x : vt) x *= ph;
    }
    const double a0 = std::sqrt(pu.th0.probabilities[n]);
    const double at = std::sqrt(pu.tht.probabilities[n]);
    for (int s = 0; s < d; ++s) {
      pu.psi[s * d + n] += a0 * v0[s];
      pu.psi_tilde[s * d + n] += at * vt[s];
    }
  }
  return pu;
}

}  // namespace detail

// Thermal (limited-preparation) mode: both legs carry canonical
// purifications of the initial thermal states; the arm unitaries act on the
// system factor only.
inline InterferometerRun run_thermal(const QubitRotationProtocol& p,
                                     SchemeMode scheme, double beta) {
  const auto arms = detail::make_arms(p, scheme);
  const auto pu = detail::canonical_purifications(p, beta);
  const int d = 2, de = d * d;

  const ComplexMatrix id_e = ComplexMatrix::identity(d);
  const CVec branch0 = matvec(kron(arms.arm0, id_e), pu.psi);
  const CVec branch1 = matvec(kron(arms.arm1, id_e), pu.psi_tilde);

  CVec joint(2 * de, 0.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < de; ++s) {
    joint[s] = inv_sqrt2 * branch0[s];
    joint[de + s] = inv_sqrt2 * branch1[s];
  }
  const DensityOperator rho = pure_density(joint, Role::Joint);

  InterferometerRun run;
  run.ancilla = partial_trace(rho, Keep::First, 2, de);
  run.ancilla.role = Role::Auxiliary;
  const DensityOperator sys_env = partial_trace(rho, Keep::Second, 2, de);
  run.system_marginal = partial_trace(sys_env, Keep::First, d, d);
  detail::fill_run_from_offdiagonal(run, run.ancilla.matrix(0, 1));
  return run;
}

// The two pure which-path detector states on system x environment at the
// interference time.
inline std::pair<DensityOperator, DensityOperator> detector_states(
    const QubitRotationProtocol& p, double beta,
    SchemeMode scheme = SchemeMode::SplitHalf) {
  const auto arms = detail::make_arms(p, scheme);
  const auto pu = detail::canonical_purifications(p, beta);
  const ComplexMatrix id_e = ComplexMatrix::identity(2);
  const CVec plus = matvec(kron(arms.arm0, id_e), pu.psi);
  const CVec minus = matvec(kron(arms.arm1, id_e), pu.psi_tilde);
  return {pure_density(plus, Role::Joint), pure_density(minus, Role::Joint)};
}

struct ComplementarityReport {
  double v_squared = 0.0;
  double d_squared_joint = 0.0;     // saturates V^2 + D^2 = 1
  double d_squared_marginal = 0.0;  // never exceeds it (partial trace)
};

inline ComplementarityReport complementarity_report(
    const InterferometerRun& run,
    const std::pair<DensityOperator, DensityOperator>& detectors) {
  ComplementarityReport r;
  r.v_squared = run.visibility * run.visibility;
  const double dj = trace_distance(detectors.first, detectors.second);
  r.d_squared_joint = dj * dj;
  const int d = 2;
  const auto ma = partial_trace(detectors.first, Keep::First, d, d);
  const auto mb = partial_trace(detectors.second, Keep::First, d, d);
  const double dm = trace_distance(ma, mb);
  r.d_squared_marginal = dm * dm;
  return r;
}

struct DissipationBounds {
  double b2 = 0.0;    // k_B T 4 D^2 / alpha
  double blog = 0.0;  // k_B T [D log(d^2/alpha) + 1/e]
  double alpha = 0.0;
  bool b2_finite = true;
};

// Bounds from a distinguishability value D between the forward and
// time-reversed system states (absolute energy units, k_B T = 1/beta).
inline DissipationBounds bounds_from_distinguishability(
    double dist, double beta, const ComplexMatrix& htau, int d) {
  DissipationBounds b;
  const auto ts = thermal_state(htau, beta);
  b.alpha = ts.probabilities.back();  // e^{-beta (E_max - F)}
  // ln(d^2/alpha) = ln d^2 + beta (E_max - F): stays finite when alpha
  // underflows
  const double gap = ts.eig.eigenvalues.back() - ts.free_energy;
  b.blog =
      (dist * (std::log(double(d) * d) + beta * gap) + std::exp(-1.0)) / beta;
  if (b.alpha <= 1e-300) {
    b.b2 = std::numeric_limits<double>::infinity();
    b.b2_finite = false;
  } else {
    b.b2 = 4.0 * dist * dist / (b.alpha * beta);
  }
  return b;
}

// Visibility-only bounds, D^2 -> 1 - V^2 (pure detector states saturate the
// complementarity relation).
inline DissipationBounds dissipation_bounds(const InterferometerRun& run,
                                            double beta,
                                            const ComplexMatrix& htau,
                                            int d) {
  const double v2 = run.visibility * run.visibility;
  return bounds_from_distinguishability(std::sqrt(std::max(0.0, 1.0 - v2)),
                                        beta, htau, d);
}

// Full d x d visibility matrix, V_{m,n} indexed [m][n]
inline std::vector<std::vector<double>> visibility_matrix(
    const QubitRotationProtocol& p, SchemeMode scheme) {
  const int d = 2;
  std::vector<std::vector<double>> v(d, std::vector<double>(d));
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m)
      v[m][n] = run_pure(p, scheme, n, m).visibility;
  return v;
}

inline std::vector<std::vector<double>> visibility_matrix(
    const HamiltonianSchedule& s, const ComplexMatrix& h0,
    const ComplexMatrix& htau, SchemeMode scheme) {
  const int d = s.dim();
  std::vector<std::vector<double>> v(d, std::vector<double>(d));
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m)
      v[m][n] = run_pure(s, h0, htau, scheme, n, m).visibility;
  return v;
}

// P(W) = sum_{m,n} p_n V_{m,n}^2 delta(W - (E_m^tau - E_n^0))
inline WorkDistribution reconstruct_work_distribution(
    const std::vector<std::vector<double>>& vis, const ComplexMatrix& h0,
    const ComplexMatrix& htau, double beta) {
  const auto th0 = thermal_state(h0, beta);
  const auto tht = thermal_state(htau, beta);
  const int d = h0.dim();
  for (int n = 0; n < d; ++n) {
    double row = 0.0;
    for (int m = 0; m < d; ++m) row += vis[m][n] * vis[m][n];
    if (std::abs(row - 1.0) > 1e-8)
      throw NonStochasticVisibilities("visibility column sum differs from 1");
  }
  std::vector<WorkDistribution::Atom> atoms;
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m)
      atoms.push_back({tht.eig.eigenvalues[m] - th0.eig.eigenvalues[n],
                       th0.probabilities[n] * vis[m][n] * vis[m][n]});
  WorkDistribution wd;
  wd.delta_F = tht.free_energy - th0.free_energy;
  wd.support = detail::merge_atoms(std::move(atoms), 1e-9);
  return wd;
}

// beta <W_diss> = sum_n p_n ln p_n - sum_{m,n} p_n V_{m,n}^2 ln p~_m
inline double reconstruct_dissipation(
    const std::vector<std::vector<double>>& vis, const ComplexMatrix& h0,
    const ComplexMatrix& htau, double beta) {
  const auto th0 = thermal_state(h0, beta);
  const auto tht = thermal_state(htau, beta);
  const int d = h0.dim();
  double s = 0.0;
  for (int n = 0; n < d; ++n) {
    s += th0.probabilities[n] * std::log(th0.probabilities[n]);
    for (int m = 0; m < d; ++m)
      s -= th0.probabilities[n] * vis[m][n] * vis[m][n] *
           std::log(tht.probabilities[m]);
  }
  return s;
}

}  // namespace mzwork
