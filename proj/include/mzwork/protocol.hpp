#pragma once

// Driving protocols: the qubit rotation protocol H(Lambda) and generic
// piecewise-constant real Hamiltonian schedules, their forward and
// time-reversed propagators, and the time-reversal operation (complex
// conjugation in the computational basis).

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "mzwork/matcore.hpp"

namespace mzwork {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonBoundaryTime : ProtocolError {
  using ProtocolError::ProtocolError;
};
struct ContinuousModeRequested : ProtocolError {
  using ProtocolError::ProtocolError;
};
struct DiscreteModeRequested : ProtocolError {
  using ProtocolError::ProtocolError;
};

// Lambda sweeps 0 -> pi/2 over [0, tau]; Omega = pi/(2 tau) is the rotation
// rate. steps == 0 marks the continuous-rotation mode.
struct QubitRotationProtocol {
  double omega = 1.0;  // qubit natural frequency (hbar = 1)
  double tau = std::numbers::pi / 2.0;
  int steps = 7;  // 0: continuous

  double Omega() const { return std::numbers::pi / (2.0 * tau); }
  bool continuous() const { return steps == 0; }
  double dt() const { return tau / steps; }

  static QubitRotationProtocol discrete(double omega_over_Omega, int n_steps,
                                        double tau = std::numbers::pi / 2.0) {
    if (n_steps < 1) throw ProtocolError("discrete protocol needs steps >= 1");
    QubitRotationProtocol p;
    p.tau = tau;
    p.omega = omega_over_Omega * p.Omega();
    p.steps = n_steps;
    return p;
  }
  static QubitRotationProtocol continuous_rotation(
      double omega_over_Omega, double tau = std::numbers::pi / 2.0) {
    QubitRotationProtocol p;
    p.tau = tau;
    p.omega = omega_over_Omega * p.Omega();
    p.steps = 0;
    return p;
  }
};

// H(Lambda) = (hbar omega / 2) [1 + cos(Lambda) sz + sin(Lambda) sx]
inline ComplexMatrix hamiltonian_at(const QubitRotationProtocol& p,
                                    double lambda) {
  ComplexMatrix h(2);
  const double c = std::cos(lambda), s = std::sin(lambda);
  h(0, 0) = 0.5 * p.omega * (1.0 + c);
  h(1, 1) = 0.5 * p.omega * (1.0 - c);
  h(0, 1) = 0.5 * p.omega * s;
  h(1, 0) = 0.5 * p.omega * s;
  return h;
}

// Ordered list of (real Hermitian step generator, duration) pairs.
// Real entries are required: they make the schedule invariant under the
// time-reversal operation, Theta H Theta^dag = H.
class HamiltonianSchedule {
 public:
  struct Step {
    ComplexMatrix h;
    double dt;
  };

  HamiltonianSchedule() = default;
  explicit HamiltonianSchedule(std::vector<Step> steps)
      : steps_(std::move(steps)) {
    if (steps_.empty()) throw ProtocolError("empty schedule");
    const int d = steps_.front().h.dim();
    double t = 0.0;
    boundaries_.push_back(0.0);
    for (const auto& s : steps_) {
      if (s.h.dim() != d) throw DimensionMismatch("schedule step dimension");
      if (!(s.dt > 0.0)) throw ProtocolError("step duration must be > 0");
      if (s.h.hermiticity_defect() > 1e-12)
        throw NonHermitianInput("schedule step not Hermitian");
      double im = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          im = std::max(im, std::abs(s.h(i, j).imag()));
      if (im > 1e-12)
        throw ProtocolError("schedule step not real in computational basis");
      t += s.dt;
      boundaries_.push_back(t);
    }
  }

  const std::vector<Step>& steps() const { return steps_; }
  int dim() const { return steps_.front().h.dim(); }
  double total_duration() const { return boundaries_.back(); }
  const std::vector<double>& boundaries() const { return boundaries_; }

  // index of the step boundary equal to t (within 1e-12), or throw
  int boundary_index(double t) const {
    for (std::size_t k = 0; k < boundaries_.size(); ++k)
      if (std::abs(boundaries_[k] - t) <= 1e-12 * std::max(1.0, total_duration()))
        return int(k);
    throw NonBoundaryTime("time does not lie on a step boundary");
  }

  HamiltonianSchedule reversed() const {
    std::vector<Step> rs(steps_.rbegin(), steps_.rend());
    return HamiltonianSchedule(std::move(rs));
  }

 private:
  std::vector<Step> steps_;
  std::vector<double> boundaries_;
};

// H_k = H(k pi / 2N) applied for dt = tau/N, k = 1..N
inline HamiltonianSchedule step_hamiltonians(const QubitRotationProtocol& p) {
  if (p.continuous())
    throw ContinuousModeRequested("step_hamiltonians needs discrete mode");
  std::vector<HamiltonianSchedule::Step> steps;
  steps.reserve(p.steps);
  for (int k = 1; k <= p.steps; ++k)
    steps.push_back(
        {hamiltonian_at(p, k * std::numbers::pi / (2.0 * p.steps)), p.dt()});
  return HamiltonianSchedule(std::move(steps));
}

// U(t1,t0): ordered product of step propagators over [t0, t1]
inline ComplexMatrix forward_unitary(const HamiltonianSchedule& s, double t1,
                                     double t0) {
  const int k0 = s.boundary_index(t0);
  const int k1 = s.boundary_index(t1);
  if (k1 < k0) throw ProtocolError("forward_unitary needs t1 >= t0");
  ComplexMatrix u = ComplexMatrix::identity(s.dim());
  for (int k = k0; k < k1; ++k) {
    const auto& st = s.steps()[k];
    u = exp_hermitian_generator(st.h, st.dt) * u;
  }
  return u;
}

// Utilde(t1,t0): propagator of the time-reversed schedule. For real
// schedules Theta H Theta^dag = H, so this is the reversed-order product.
inline ComplexMatrix reversed_unitary(const HamiltonianSchedule& s, double t1,
                                      double t0) {
  return forward_unitary(s.reversed(), t1, t0);
}

// Closed form for Lambda(t) = Omega t:
// U(t,0) = exp(-i Omega t sy/2) exp(-i [omega (1+sz) - Omega sy] t / 2).
// The global phase e^{-i omega t / 2} is retained.
inline ComplexMatrix continuous_unitary(const QubitRotationProtocol& p,
                                        double t) {
  if (!p.continuous())
    throw DiscreteModeRequested("continuous_unitary needs continuous mode");
  const double Om = p.Omega();
  ComplexMatrix a(2);
  a(0, 0) = p.omega;
  a(0, 1) = cplx(0.0, 0.5 * Om);
  a(1, 0) = cplx(0.0, -0.5 * Om);
  const ComplexMatrix ry = exp_hermitian_generator(0.5 * Om * pauli_y(), t);
  return ry * exp_hermitian_generator(a, t);
}

// Propagator of the reversed continuous protocol Lambda~(t) = Omega (tau - t).
// In a frame co-rotating the other way the generator is time independent:
// Utilde(t,0) = exp(+i Omega t sy/2) exp(-i [omega (1+sx) + Omega sy] t / 2).
inline ComplexMatrix reversed_continuous_unitary(
    const QubitRotationProtocol& p, double t) {
  if (!p.continuous())
    throw DiscreteModeRequested("continuous mode required");
  const double Om = p.Omega();
  ComplexMatrix a(2);
  a(0, 0) = 0.5 * p.omega;
  a(1, 1) = 0.5 * p.omega;
  a(0, 1) = 0.5 * p.omega + cplx(0.0, -0.5 * Om);
  a(1, 0) = 0.5 * p.omega + cplx(0.0, 0.5 * Om);
  const ComplexMatrix ry = exp_hermitian_generator(-0.5 * Om * pauli_y(), t);
  return ry * exp_hermitian_generator(a, t);
}

enum class InitialEigenstate { ZMinus, ZPlus };  // ground / excited of H(0)

// Analytic continuous-mode solution expanded over the tilted axis
// n = (0, cos xi, sin xi), sin xi = omega/sqrt(omega^2+Omega^2),
// cos xi = -Omega/sqrt(omega^2+Omega^2). Includes the e^{-i omega t/2}
// global phase so it matches continuous_unitary exactly.
inline CVec appendix_b_state(const QubitRotationProtocol& p,
                             InitialEigenstate initial, double t) {
  if (!p.continuous())
    throw DiscreteModeRequested("appendix_b_state needs continuous mode");
  const double Om = p.Omega();
  const double a = std::sqrt(p.omega * p.omega + Om * Om);
  const double sxi = p.omega / a, cxi = -Om / a;
  const double xi = std::atan2(sxi, cxi);
  const double ch = std::cos(xi / 2.0), sh = std::sin(xi / 2.0);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const CVec yp = {inv_sqrt2, cplx(0.0, inv_sqrt2)};
  const CVec ym = {inv_sqrt2, cplx(0.0, -inv_sqrt2)};

  cplx c1, c2;
  if (initial == InitialEigenstate::ZPlus) {
    c1 = (ch + sh) * inv_sqrt2;
    c2 = -(sh - ch) * inv_sqrt2;
  } else {
    c1 = cplx(0.0, -1.0) * (ch - sh) * inv_sqrt2;
    c2 = cplx(0.0, 1.0) * (sh + ch) * inv_sqrt2;
  }

  const cplx em = std::exp(cplx(0.0, -0.5 * a * t));
  const cplx ep = std::conj(em);
  CVec psi0(2, 0.0);
  for (int i = 0; i < 2; ++i)
    psi0[i] = c1 * em * (ch * yp[i] + sh * ym[i]) +
              c2 * ep * (-sh * yp[i] + ch * ym[i]);

  const cplx global = std::exp(cplx(0.0, -0.5 * p.omega * t));
  const ComplexMatrix ry = exp_hermitian_generator(0.5 * Om * pauli_y(), t);
  CVec psi = matvec(ry, psi0);
  for (auto& x : psi) x *= global;
  return psi;
}

// Theta: complex conjugation in the computational basis
inline CVec apply_time_reversal(const CVec& v) { return conj(v); }
inline ComplexMatrix apply_time_reversal(const ComplexMatrix& m) {
  return m.conjugate();
}
inline DensityOperator apply_time_reversal(const DensityOperator& rho) {
  return DensityOperator{rho.matrix.conjugate(), rho.role};
}

}  // namespace mzwork
