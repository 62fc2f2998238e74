#pragma once

// Thermal ensembles, two-point-measurement work statistics, fluctuation
// theorem checks and the dissipation / relative-entropy identity.

#include <cmath>
#include <vector>

#include "mzwork/matcore.hpp"
#include "mzwork/protocol.hpp"

namespace mzwork {

struct InvalidBeta : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThermalState {
  double beta = 1.0;
  ComplexMatrix hamiltonian;
  SpectralDecomposition eig;
  std::vector<double> probabilities;  // p_n = e^{-beta(E_n - F)}
  double partition_function = 0.0;
  double free_energy = 0.0;  // F = -(1/beta) ln Z

  DensityOperator density() const {
    const int d = hamiltonian.dim();
    ComplexMatrix m(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        cplx s = 0.0;
        for (int k = 0; k < d; ++k)
          s += eig.eigenvectors(i, k) * probabilities[k] *
               std::conj(eig.eigenvectors(j, k));
        m(i, j) = s;
      }
    return DensityOperator{m, Role::System};
  }
};

inline ThermalState thermal_state(const ComplexMatrix& h, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw InvalidBeta("beta must be positive and finite");
  ThermalState ts;
  ts.beta = beta;
  ts.hamiltonian = h;
  ts.eig = hermitian_eig(h);
  const double emin = ts.eig.eigenvalues.front();
  double zs = 0.0;  // shifted by E_min for stability
  for (double e : ts.eig.eigenvalues) zs += std::exp(-beta * (e - emin));
  ts.partition_function = zs * std::exp(-beta * emin);
  ts.free_energy = emin - std::log(zs) / beta;
  ts.probabilities.reserve(ts.eig.eigenvalues.size());
  for (double e : ts.eig.eigenvalues)
    ts.probabilities.push_back(std::exp(-beta * (e - emin)) / zs);
  return ts;
}

// p_{m|n} = |<E_m^tau | U | E_n^0>|^2, indexed [m][n]
inline std::vector<std::vector<double>> tpm_conditional(
    const ComplexMatrix& u, const ComplexMatrix& h0,
    const ComplexMatrix& htau) {
  if (u.dim() != h0.dim() || u.dim() != htau.dim())
    throw DimensionMismatch("tpm_conditional dimensions differ");
  const auto e0 = hermitian_eig(h0);
  const auto et = hermitian_eig(htau);
  const int d = u.dim();
  std::vector<std::vector<double>> p(d, std::vector<double>(d));
  for (int n = 0; n < d; ++n) {
    const CVec evolved = matvec(u, eigcolumn(e0, n));
    for (int m = 0; m < d; ++m)
      p[m][n] = std::norm(vdot(eigcolumn(et, m), evolved));
  }
  return p;
}

enum class Direction { Forward, Reversed };

// Atomic work distribution; support points within 1e-9 of each other are
// merged (degenerate transitions collapse to one peak).
struct WorkDistribution {
  struct Atom {
    double w;  // work value (hbar = 1 internal units)
    double p;
  };
  std::vector<Atom> support;
  Direction direction = Direction::Forward;
  double delta_F = 0.0;

  double total() const {
    double s = 0.0;
    for (const auto& a : support) s += a.p;
    return s;
  }
  double mean() const {
    double s = 0.0;
    for (const auto& a : support) s += a.w * a.p;
    return s;
  }
  // probability at a given work value (0 if no support point within tol)
  double at(double w, double tol = 1e-9) const {
    for (const auto& a : support)
      if (std::abs(a.w - w) <= tol) return a.p;
    return 0.0;
  }
};

namespace detail {

inline std::vector<WorkDistribution::Atom> merge_atoms(
    std::vector<WorkDistribution::Atom> atoms, double tol) {
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.w < b.w; });
  std::vector<WorkDistribution::Atom> out;
  for (const auto& a : atoms) {
    if (!out.empty() && a.w - out.back().w <= tol) {
      // probability-weighted support point
      auto& b = out.back();
      const double p = b.p + a.p;
      if (p > 0.0) b.w = (b.w * b.p + a.w * a.p) / p;
      b.p = p;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace detail

inline WorkDistribution work_distribution(const ComplexMatrix& u,
                                          const ComplexMatrix& h0,
                                          const ComplexMatrix& htau,
                                          double beta,
                                          Direction dir = Direction::Forward) {
  const auto th0 = thermal_state(h0, beta);
  const auto tht = thermal_state(htau, beta);
  const auto cond = tpm_conditional(u, h0, htau);
  const int d = u.dim();

  std::vector<WorkDistribution::Atom> atoms;
  atoms.reserve(std::size_t(d) * d);
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m) {
      const double de = tht.eig.eigenvalues[m] - th0.eig.eigenvalues[n];
      if (dir == Direction::Forward)
        atoms.push_back({de, th0.probabilities[n] * cond[m][n]});
      else
        // p~_{n|m} = p_{m|n} by micro-reversibility
        atoms.push_back({-de, tht.probabilities[m] * cond[m][n]});
    }

  WorkDistribution wd;
  wd.direction = dir;
  wd.delta_F = (dir == Direction::Forward)
                   ? tht.free_energy - th0.free_energy
                   : th0.free_energy - tht.free_energy;
  wd.support = detail::merge_atoms(std::move(atoms), 1e-9);
  return wd;
}

// <e^{-beta (W - dF)}>; equals 1 for any unitary TPM distribution
inline double jarzynski_check(const WorkDistribution& p, double beta) {
  double s = 0.0;
  for (const auto& a : p.support)
    s += a.p * std::exp(-beta * (a.w - p.delta_F));
  return s;
}

// per-support-point log residual |ln P(W) - ln P~(-W) - beta (W - dF)|
inline std::vector<std::pair<double, double>> crooks_check(
    const WorkDistribution& p, const WorkDistribution& prev, double beta) {
  std::vector<std::pair<double, double>> out;
  for (const auto& a : p.support) {
    if (a.p <= 1e-12) continue;
    const double q = prev.at(-a.w);
    if (q <= 0.0)
      throw SupportMismatch("reversed distribution lacks mirrored support");
    out.emplace_back(a.w,
                     std::abs(std::log(a.p) - std::log(q) -
                              beta * (a.w - p.delta_F)));
  }
  return out;
}

inline double dissipative_work(const WorkDistribution& p) {
  return p.mean() - p.delta_F;
}

// beta <W_diss> = S(rho(t) || Theta^dag rho~(tau - t) Theta), Eq.-(4)-style
// identity, evaluated from an honest simulation of both legs.
inline double dissipation_relative_entropy(const QubitRotationProtocol& p,
                                           double beta, double t) {
  const ComplexMatrix h0 = hamiltonian_at(p, 0.0);
  const ComplexMatrix ht = hamiltonian_at(p, std::numbers::pi / 2.0);
  ComplexMatrix u, ur;
  if (p.continuous()) {
    u = continuous_unitary(p, t);
    ur = reversed_continuous_unitary(p, p.tau - t);
  } else {
    const auto s = step_hamiltonians(p);
    u = forward_unitary(s, t, 0.0);  // throws NonBoundaryTime off-grid
    ur = reversed_unitary(s, p.tau - t, 0.0);
  }

  // Both states are unitary conjugations of thermal states, so their
  // spectra are exactly the thermal weights; evaluating S(rho||sigma) in
  // spectral form keeps eigenvalues like e^{-beta omega} that would be
  // rounded away if the dense sigma matrix were diagonalized.
  const auto th0 = thermal_state(h0, beta);
  const auto tht = thermal_state(ht, beta);
  const int d = h0.dim();
  double s = 0.0;
  for (int n = 0; n < d; ++n) {
    const double pn = th0.probabilities[n];
    if (pn <= 0.0) continue;
    const CVec rn = matvec(u, eigcolumn(th0.eig, n));
    s += pn * std::log(pn);
    for (int j = 0; j < d; ++j) {
      // sigma eigenvector: Theta^dag Utilde |E_j^tau>
      const CVec sj = conj(matvec(ur, eigcolumn(tht.eig, j)));
      s -= pn * std::norm(vdot(sj, rn)) * std::log(tht.probabilities[j]);
    }
  }
  return s;
}

}  // namespace mzwork
