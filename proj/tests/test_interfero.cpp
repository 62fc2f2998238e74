#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "mzwork/interfero.hpp"
#include "test_util.hpp"

using namespace mzwork;

namespace {
constexpr double kPi = std::numbers::pi;

ComplexMatrix protocol_unitary(const QubitRotationProtocol& p) {
  if (p.continuous()) return continuous_unitary(p, p.tau);
  return forward_unitary(step_hamiltonians(p), p.tau, 0.0);
}
}  // namespace

TEST_CASE("run_pure: frozen system gives the bare basis overlap") {
  // omega -> 0 freezes the evolution; V = |<x+|z+>| = 1/sqrt(2)
  const auto p = QubitRotationProtocol::discrete(1e-9, 1);
  for (auto scheme : {SchemeMode::SplitHalf, SchemeMode::FullForward}) {
    const auto run = run_pure(p, scheme, 1, 1);
    CHECK(std::abs(run.visibility - std::sqrt(0.5)) < 1e-6);
  }
}

TEST_CASE("run_pure: adiabatic limit sends matched indices to V=1") {
  const auto p = QubitRotationProtocol::continuous_rotation(100.0);
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) {
      const double v = run_pure(p, SchemeMode::SplitHalf, n, m).visibility;
      if (n == m)
        CHECK(v >= 1.0 - 1e-3);
      else
        CHECK(v <= 1e-3);
    }
}

TEST_CASE("run_pure: odd-N split reproduces the TPM conditionals exactly") {
  const auto p = QubitRotationProtocol::discrete(1.5, 7);
  const auto cond = tpm_conditional(protocol_unitary(p),
                                    hamiltonian_at(p, 0.0),
                                    hamiltonian_at(p, kPi / 2.0));
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) {
      const auto run = run_pure(p, SchemeMode::SplitHalf, n, m);
      CHECK(std::abs(run.visibility * run.visibility - cond[m][n]) < 1e-12);
    }
}

TEST_CASE("run_pure: invariants of the interferometer run") {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> wdist(0.05, 5.0);
  std::uniform_int_distribution<int> ndist(1, 16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = QubitRotationProtocol::discrete(wdist(rng), ndist(rng));
    const auto run = run_pure(p, SchemeMode::SplitHalf, trial % 2, (trial / 2) % 2);
    CHECK(std::abs(run.p_plus + run.p_minus - 1.0) < 1e-12);
    CHECK(std::abs(run.p_plus_opt + run.p_minus_opt - 1.0) < 1e-12);
    // fringe contrast at the optimal reference phase equals V
    CHECK(std::abs((run.p_plus_opt - run.p_minus_opt) - run.visibility) < 1e-10);
    // ancilla off-diagonal carries V/2
    CHECK(std::abs(2.0 * std::abs(run.ancilla.matrix(0, 1)) - run.visibility) <
          1e-12);
    CHECK(std::abs(run.ancilla.matrix.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("run_pure: index range checked") {
  const auto p = QubitRotationProtocol::discrete(1.0, 7);
  CHECK_THROWS_AS(run_pure(p, SchemeMode::SplitHalf, 2, 0), IndexOutOfRange);
  CHECK_THROWS_AS(run_pure(p, SchemeMode::SplitHalf, 0, -1), IndexOutOfRange);
}

TEST_CASE("run_pure: generic schedules match the conditional probabilities") {
  std::mt19937 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 2;
    std::vector<HamiltonianSchedule::Step> steps;
    std::normal_distribution<double> g;
    const int n_steps = 1 + trial % 4;
    for (int k = 0; k < n_steps; ++k) {
      ComplexMatrix h(d);
      for (int i = 0; i < d; ++i) {
        h(i, i) = g(rng);
        for (int j = i + 1; j < d; ++j) h(i, j) = h(j, i) = g(rng);
      }
      steps.push_back({h, 0.2 + 0.1 * (k % 3)});
    }
    const HamiltonianSchedule s(steps);
    ComplexMatrix h0(d), ht(d);
    for (int i = 0; i < d; ++i) {
      h0(i, i) = g(rng);
      ht(i, i) = g(rng);
      for (int j = i + 1; j < d; ++j) {
        h0(i, j) = h0(j, i) = g(rng);
        ht(i, j) = ht(j, i) = g(rng);
      }
    }
    const auto cond = tpm_conditional(
        forward_unitary(s, s.total_duration(), 0.0), h0, ht);
    for (int n = 0; n < d; ++n)
      for (int m = 0; m < d; ++m)
        for (auto scheme : {SchemeMode::SplitHalf, SchemeMode::FullForward}) {
          const double v = run_pure(s, h0, ht, scheme, n, m).visibility;
          CHECK(std::abs(v * v - cond[m][n]) < 1e-12);
        }
  }
}

TEST_CASE("visibility_matrix: doubly stochastic squares") {
  const auto p = QubitRotationProtocol::discrete(1.5, 7);
  const auto v = visibility_matrix(p, SchemeMode::SplitHalf);
  for (int k = 0; k < 2; ++k) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < 2; ++j) {
      row += v[k][j] * v[k][j];
      col += v[j][k] * v[j][k];
    }
    CHECK(std::abs(row - 1.0) < 1e-10);
    CHECK(std::abs(col - 1.0) < 1e-10);
  }
}

TEST_CASE("run_thermal: frozen high-temperature limit gives 1/sqrt(2)") {
  const auto p = QubitRotationProtocol::discrete(1e-9, 1);
  const auto run = run_thermal(p, SchemeMode::SplitHalf, 1e-9);
  CHECK(std::abs(run.visibility - std::sqrt(0.5)) < 1e-6);
}

TEST_CASE("run_thermal: visibility equals the purification overlap formula") {
  for (double beta : {0.1, 1.2, 5.0})
    for (double wr : {0.5, 1.0, 1.5}) {
      const auto p = QubitRotationProtocol::discrete(wr, 7);
      const auto run = run_thermal(p, SchemeMode::SplitHalf, beta);
      // V = |sum_n sqrt(p_n ptilde_n) <E_n^tau|U|E_n^0>| with index-matched,
      // sign-aligned eigenbases
      const auto th0 = thermal_state(hamiltonian_at(p, 0.0), beta);
      const auto tht = thermal_state(hamiltonian_at(p, kPi / 2.0), beta);
      const auto u = protocol_unitary(p);
      cplx acc = 0.0;
      for (int n = 0; n < 2; ++n) {
        CVec vt = eigcolumn(tht.eig, n);
        const CVec v0 = eigcolumn(th0.eig, n);
        const cplx ov = vdot(vt, v0);
        const cplx ph = ov / std::abs(ov);
        for (auto& x : vt) x *= ph;
        acc += std::sqrt(th0.probabilities[n] * tht.probabilities[n]) *
               vdot(vt, matvec(u, v0));
      }
      CHECK(std::abs(run.visibility - std::abs(acc)) < 1e-12);
      CHECK(run.visibility >= 0.0);
      CHECK(run.visibility <= 1.0 + 1e-12);
    }
}

TEST_CASE("run_thermal: perfectly reversible transfer gives V=1") {
  // purification overlap with U = sum_n |E_n^tau><E_n^0| (aligned phases):
  // with identical spectra on both ends, V = sum_n p_n = 1
  const auto p = QubitRotationProtocol::discrete(1.0, 7);
  const double beta = 0.7;
  const auto th0 = thermal_state(hamiltonian_at(p, 0.0), beta);
  const auto tht = thermal_state(hamiltonian_at(p, kPi / 2.0), beta);
  ComplexMatrix u(2);
  for (int n = 0; n < 2; ++n) {
    CVec vt = eigcolumn(tht.eig, n);
    const cplx ov = vdot(vt, eigcolumn(th0.eig, n));
    const cplx ph = ov / std::abs(ov);
    for (auto& x : vt) x *= ph;
    u += outer(vt, eigcolumn(th0.eig, n));
  }
  cplx acc = 0.0;
  for (int n = 0; n < 2; ++n) {
    CVec vt = eigcolumn(tht.eig, n);
    const cplx ov = vdot(vt, eigcolumn(th0.eig, n));
    const cplx ph = ov / std::abs(ov);
    for (auto& x : vt) x *= ph;
    acc += std::sqrt(th0.probabilities[n] * tht.probabilities[n]) *
           vdot(vt, matvec(u, eigcolumn(th0.eig, n)));
  }
  CHECK(std::abs(std::abs(acc) - 1.0) < 1e-12);
}

TEST_CASE("detector_states: purity and system marginals") {
  const auto p = QubitRotationProtocol::discrete(1.2, 8);
  const double beta = 1.2;
  const auto det = detector_states(p, beta);
  for (const auto& rho : {det.first, det.second}) {
    const auto sq = rho.matrix * rho.matrix;
    CHECK(std::abs(sq.trace().real() - 1.0) < 1e-10);  // pure
    CHECK(std::abs(rho.matrix.trace() - 1.0) < 1e-12);
  }
  // forward marginal is rho_S(t_b) = U(t_b,0) rho_0 U(t_b,0)^dag
  const auto s = step_hamiltonians(p);
  const auto u = forward_unitary(s, p.tau / 2.0, 0.0);
  const auto rho0 = thermal_state(hamiltonian_at(p, 0.0), beta).density();
  const auto marg = partial_trace(det.first, Keep::First, 2, 2);
  CHECK((marg.matrix - u * rho0.matrix * u.adjoint()).max_abs() < 1e-12);
  // reversed marginal is Theta^dag rhotilde_S(tau - t_b) Theta
  const auto rhot = thermal_state(hamiltonian_at(p, kPi / 2.0), beta).density();
  const auto ur = reversed_unitary(s, p.tau / 2.0, 0.0);
  const auto marg2 = partial_trace(det.second, Keep::First, 2, 2);
  CHECK((marg2.matrix - (ur * rhot.matrix * ur.adjoint()).conjugate()).max_abs() <
        1e-12);
}

TEST_CASE("detector_states: zero-temperature purifications are product states") {
  const auto p = QubitRotationProtocol::discrete(1.0, 7);
  const auto det = detector_states(p, 1e3);
  // environment marginal collapses onto the ground label
  for (const auto& rho : {det.first, det.second}) {
    const auto env = partial_trace(rho, Keep::Second, 2, 2);
    CHECK(env.matrix(0, 0).real() >= 1.0 - 1e-9);
  }
}

TEST_CASE("complementarity_report: equality for pure detectors") {
  for (double beta : {0.1, 1.2, 5.0}) {
    const auto p = QubitRotationProtocol::discrete(1.5, 7);
    const auto run = run_thermal(p, SchemeMode::SplitHalf, beta);
    const auto rep = complementarity_report(run, detector_states(p, beta));
    CHECK(std::abs(rep.v_squared + rep.d_squared_joint - 1.0) < 1e-10);
    CHECK(rep.v_squared + rep.d_squared_marginal <= 1.0 + 1e-10);
    CHECK(rep.d_squared_marginal <= rep.d_squared_joint + 1e-12);
  }
  // the sec. V grid point keeps the marginal inequality strict
  const auto p = QubitRotationProtocol::discrete(1.5, 7);
  const auto run = run_thermal(p, SchemeMode::SplitHalf, 1.2);
  const auto rep = complementarity_report(run, detector_states(p, 1.2));
  CHECK(rep.v_squared + rep.d_squared_marginal < 1.0 - 1e-6);
}

TEST_CASE("complementarity_report: V extremes") {
  // V ~ 1: adiabatic at moderate temperature, D_joint ~ 0
  const auto pa = QubitRotationProtocol::discrete(100.0, 56);
  const auto runa = run_thermal(pa, SchemeMode::SplitHalf, 1e-4);
  const auto repa = complementarity_report(runa, detector_states(pa, 1e-4));
  CHECK(repa.v_squared >= 1.0 - 1e-2);
  CHECK(repa.d_squared_joint <= 1e-2);
  // V ~ 0: cold sudden protocol sends the legs to near-orthogonal states
  const auto ps = QubitRotationProtocol::discrete(0.01, 7);
  const auto runs = run_thermal(ps, SchemeMode::SplitHalf, 2000.0);
  const auto reps = complementarity_report(runs, detector_states(ps, 2000.0));
  CHECK(runs.visibility * runs.visibility ==
        doctest::Approx(reps.v_squared).epsilon(1e-12));
  CHECK(std::abs(reps.v_squared + reps.d_squared_joint - 1.0) < 1e-10);
}

TEST_CASE("dissipation_bounds: substitution limits and validity") {
  const auto p = QubitRotationProtocol::discrete(1.0, 7);
  const auto ht = hamiltonian_at(p, kPi / 2.0);
  const double beta = 1.2;

  // V=1 (D=0): B2 = 0, Blog = kT/e
  const auto b1 = bounds_from_distinguishability(0.0, beta, ht, 2);
  CHECK(std::abs(b1.b2) < 1e-14);
  CHECK(b1.blog == doctest::Approx(std::exp(-1.0) / beta).epsilon(1e-12));
  CHECK(b1.alpha > 0.0);
  CHECK(b1.alpha <= 1.0);

  // validity at the reference point for both bound variants
  const auto wd = work_distribution(protocol_unitary(p),
                                    hamiltonian_at(p, 0.0), ht, beta);
  const double wdiss = dissipative_work(wd);
  const auto run = run_thermal(p, SchemeMode::SplitHalf, beta);
  const auto bv = dissipation_bounds(run, beta, ht, 2);
  CHECK(wdiss <= bv.b2 + 1e-10);
  CHECK(wdiss <= bv.blog + 1e-10);
  const auto rep = complementarity_report(run, detector_states(p, beta));
  const auto bm = bounds_from_distinguishability(
      std::sqrt(rep.d_squared_marginal), beta, ht, 2);
  CHECK(wdiss <= bm.b2 + 1e-10);
  CHECK(wdiss <= bm.blog + 1e-10);
}

TEST_CASE("dissipation_bounds: regime ordering of the marginal bounds") {
  // omega = Omega, N = 7; high temperature favors B2, low temperature Blog
  auto marginal_bounds = [](double beta) {
    const auto p = QubitRotationProtocol::discrete(1.0, 7);
    const auto ht = hamiltonian_at(p, kPi / 2.0);
    const auto run = run_thermal(p, SchemeMode::SplitHalf, beta);
    const auto rep = complementarity_report(run, detector_states(p, beta));
    return bounds_from_distinguishability(std::sqrt(rep.d_squared_marginal),
                                          beta, ht, 2);
  };
  const auto hot = marginal_bounds(0.1);
  CHECK(hot.b2 < hot.blog);
  const auto cold = marginal_bounds(4.0);
  CHECK(cold.blog < cold.b2);
}

TEST_CASE("dissipation_bounds: alpha underflow marks B2 infinite") {
  const auto p = QubitRotationProtocol::discrete(1.0, 7);
  const auto ht = hamiltonian_at(p, kPi / 2.0);
  const auto b = bounds_from_distinguishability(0.5, 800.0, ht, 2);
  CHECK_FALSE(b.b2_finite);
  CHECK(std::isinf(b.b2));
  CHECK(std::isfinite(b.blog));
}

TEST_CASE("reconstruct_work_distribution: identities and error paths") {
  // identity conditionals -> delta at W=0
  const auto p = QubitRotationProtocol::discrete(1.5, 7);
  const auto h0 = hamiltonian_at(p, 0.0);
  const auto ht = hamiltonian_at(p, kPi / 2.0);
  const std::vector<std::vector<double>> ident = {{1.0, 0.0}, {0.0, 1.0}};
  const auto delta = reconstruct_work_distribution(ident, h0, ht, 1.2);
  CHECK(delta.at(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(delta.total() - 1.0) < 1e-12);
  CHECK(std::abs(delta.at(p.omega)) < 1e-12);
  CHECK(std::abs(delta.at(-p.omega)) < 1e-12);

  // all-half conditionals -> sudden three-point distribution
  const double r = std::sqrt(0.5);
  const std::vector<std::vector<double>> sudden = {{r, r}, {r, r}};
  const auto wds = reconstruct_work_distribution(sudden, h0, ht, 1.2);
  const auto ts = thermal_state(h0, 1.2);
  CHECK(std::abs(wds.at(p.omega) - 0.5 * ts.probabilities[0]) < 1e-12);
  CHECK(std::abs(wds.at(-p.omega) - 0.5 * ts.probabilities[1]) < 1e-12);
  CHECK(std::abs(wds.at(0.0) - 0.5) < 1e-12);

  // measured visibilities reproduce the TPM distribution
  const auto vis = visibility_matrix(p, SchemeMode::SplitHalf);
  const auto recon = reconstruct_work_distribution(vis, h0, ht, 1.2);
  const auto direct = work_distribution(protocol_unitary(p), h0, ht, 1.2);
  CHECK(recon.support.size() == direct.support.size());
  for (const auto& a : direct.support)
    CHECK(std::abs(recon.at(a.w) - a.p) < 1e-10);

  const std::vector<std::vector<double>> bad = {{0.9, 0.0}, {0.0, 0.9}};
  CHECK_THROWS_AS(reconstruct_work_distribution(bad, h0, ht, 1.2),
                  NonStochasticVisibilities);
}

TEST_CASE("reconstruct_dissipation: eq. (13) closed forms and triple identity") {
  const auto p = QubitRotationProtocol::discrete(1.5, 7);
  const auto h0 = hamiltonian_at(p, 0.0);
  const auto ht = hamiltonian_at(p, kPi / 2.0);

  // adiabatic (identity conditionals): reversible, ~0
  const std::vector<std::vector<double>> ident = {{1.0, 0.0}, {0.0, 1.0}};
  CHECK(std::abs(reconstruct_dissipation(ident, h0, ht, 1.2)) < 2e-3);

  // sudden closed form at beta*hbar*omega = 1.2 (in beta-scaled nats)
  const double bw = 1.2;
  const double beta = bw / p.omega;
  const double r = std::sqrt(0.5);
  const std::vector<std::vector<double>> sudden = {{r, r}, {r, r}};
  const auto ts = thermal_state(h0, beta);
  const double expected =
      beta * p.omega * (ts.probabilities[0] - ts.probabilities[1]) / 2.0;
  CHECK(std::abs(reconstruct_dissipation(sudden, h0, ht, beta) - expected) <
        1e-10);

  // triple identity at the reference grid point
  const auto vis = visibility_matrix(p, SchemeMode::SplitHalf);
  const double eq13 = reconstruct_dissipation(vis, h0, ht, 1.2);
  const auto wd = work_distribution(protocol_unitary(p), h0, ht, 1.2);
  const double eq2 = 1.2 * dissipative_work(wd);
  const double eq4 = dissipation_relative_entropy(p, 1.2, p.tau);
  CHECK(std::abs(eq13 - eq2) < 1e-10);
  CHECK(std::abs(eq13 - eq4) < 1e-10);
  // eq. (13) must also match the mean of its own reconstruction
  const auto recon = reconstruct_work_distribution(vis, h0, ht, 1.2);
  CHECK(std::abs(eq13 - 1.2 * dissipative_work(recon)) < 1e-10);
}

TEST_CASE("scheme equivalence on the standard grid") {
  for (double wr : {0.01, 0.5, 1.0, 1.5, 3.0, 100.0})
    for (int n : {1, 2, 7, 14, 28, 56}) {
      const auto p = QubitRotationProtocol::discrete(wr, n);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          CHECK(std::abs(run_pure(p, SchemeMode::SplitHalf, a, b).visibility -
                         run_pure(p, SchemeMode::FullForward, a, b).visibility) <
                1e-12);
    }
}
