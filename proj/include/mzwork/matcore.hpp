#pragma once

// Dense complex linear algebra for small Hilbert spaces (d <= ~8):
// Hermitian eigendecomposition, matrix functions on the spectral route,
// norms, distances, entropies and tensor operations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mzwork {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

struct MatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonHermitianInput : MatError {
  using MatError::MatError;
};
struct SingularInput : MatError {
  using MatError::MatError;
};
struct SupportMismatch : MatError {
  using MatError::MatError;
};
struct DimensionMismatch : MatError {
  using MatError::MatError;
};

class ComplexMatrix {
 public:
  ComplexMatrix() : dim_(0) {}
  explicit ComplexMatrix(int dim) : dim_(dim), a_(std::size_t(dim) * dim) {
    if (dim < 1) throw DimensionMismatch("matrix dimension must be >= 1");
  }

  static ComplexMatrix identity(int dim) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
  static ComplexMatrix zero(int dim) { return ComplexMatrix(dim); }

  int dim() const { return dim_; }

  cplx& operator()(int i, int j) { return a_[std::size_t(i) * dim_ + j]; }
  const cplx& operator()(int i, int j) const {
    return a_[std::size_t(i) * dim_ + j];
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = std::conj((*this)(i, j));
    return r;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : a_) m = std::max(m, std::abs(x));
    return m;
  }

  bool is_finite() const {
    for (const auto& x : a_)
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
  }

  double hermiticity_defect() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_dim(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_dim(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
    return a += b;
  }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
    return a -= b;
  }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a,
                                 const ComplexMatrix& b) {
    a.require_same_dim(b);
    const int d = a.dim_;
    ComplexMatrix r(d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        const cplx aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < d; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

 private:
  void require_same_dim(const ComplexMatrix& o) const {
    if (dim_ != o.dim_) throw DimensionMismatch("matrix dimensions differ");
  }

  int dim_;
  std::vector<cplx> a_;
};

// -- vector helpers ----------------------------------------------------------

inline CVec matvec(const ComplexMatrix& m, const CVec& v) {
  if (int(v.size()) != m.dim()) throw DimensionMismatch("matvec size");
  CVec r(v.size(), 0.0);
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) r[i] += m(i, j) * v[j];
  return r;
}

// <a|b>, conjugation on the left argument
inline cplx vdot(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vdot size");
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
  return s;
}

inline double norm(const CVec& v) { return std::sqrt(std::real(vdot(v, v))); }

inline ComplexMatrix outer(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("outer size");
  ComplexMatrix r(int(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r(int(i), int(j)) = a[i] * std::conj(b[j]);
  return r;
}

inline CVec conj(const CVec& v) {
  CVec r(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) r[k] = std::conj(v[k]);
  return r;
}

// -- norms -------------------------------------------------------------------

inline double frobenius_norm(const ComplexMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += std::norm(m(i, j));
  return std::sqrt(s);
}

// -- spectral decomposition --------------------------------------------------

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // orthonormal columns
};

namespace detail {

constexpr double kHermTol = 1e-12;
constexpr double kJacobiOff = 1e-14;
constexpr double kDegenerateGap = 1e-10;

// One cyclic Jacobi pass over all (p,q) pivots. A is overwritten in place,
// V accumulates the similarity transform.
inline void jacobi_sweep(ComplexMatrix& A, ComplexMatrix& V) {
  const int d = A.dim();
  for (int p = 0; p < d; ++p)
    for (int q = p + 1; q < d; ++q) {
      const cplx beta = A(p, q);
      const double ab = std::abs(beta);
      if (ab == 0.0) continue;
      const cplx phase = beta / ab;  // beta = ab * e^{i phi}
      const double alpha = A(p, p).real();
      const double gamma = A(q, q).real();
      const double th = (gamma - alpha) / (2.0 * ab);
      const double t = (th >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(th) + std::sqrt(th * th + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      // G = diag(1, e^{-i phi}) * planar rotation; A <- G^dag A G, V <- V G
      const cplx gqp = -s * std::conj(phase);
      const cplx gqq = c * std::conj(phase);
      for (int i = 0; i < d; ++i) {
        const cplx aip = A(i, p), aiq = A(i, q);
        A(i, p) = c * aip + gqp * aiq;
        A(i, q) = s * aip + gqq * aiq;
      }
      for (int j = 0; j < d; ++j) {
        const cplx apj = A(p, j), aqj = A(q, j);
        A(p, j) = c * apj + std::conj(gqp) * aqj;
        A(q, j) = s * apj + std::conj(gqq) * aqj;
      }
      A(p, q) = 0.0;
      A(q, p) = 0.0;
      for (int i = 0; i < d; ++i) {
        const cplx vip = V(i, p), viq = V(i, q);
        V(i, p) = c * vip + gqp * viq;
        V(i, q) = s * vip + gqq * viq;
      }
    }
}

inline double offdiag_frobenius(const ComplexMatrix& A) {
  double s = 0.0;
  for (int i = 0; i < A.dim(); ++i)
    for (int j = 0; j < A.dim(); ++j)
      if (i != j) s += std::norm(A(i, j));
  return std::sqrt(s);
}

}  // namespace detail

// Eigendecomposition of a Hermitian matrix via cyclic Jacobi sweeps.
// Eigenvalues ascending; eigenvectors orthonormal, degenerate clusters
// re-orthonormalized; phase convention: first nonzero component of each
// eigenvector real positive.
inline SpectralDecomposition hermitian_eig(const ComplexMatrix& M) {
  if (!M.is_finite()) throw NonHermitianInput("non-finite entries");
  if (M.hermiticity_defect() > detail::kHermTol)
    throw NonHermitianInput("matrix is not Hermitian within 1e-12");
  const int d = M.dim();

  // symmetrize to kill roundoff-level defect, then iterate
  ComplexMatrix A(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      A(i, j) = 0.5 * (M(i, j) + std::conj(M(j, i)));
  ComplexMatrix V = ComplexMatrix::identity(d);

  const double scale = std::max(1.0, frobenius_norm(A));
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (detail::offdiag_frobenius(A) < detail::kJacobiOff * scale) break;
    detail::jacobi_sweep(A, V);
  }

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return A(i, i).real() < A(j, j).real(); });

  SpectralDecomposition sd;
  sd.eigenvalues.resize(d);
  sd.eigenvectors = ComplexMatrix(d);
  for (int k = 0; k < d; ++k) {
    sd.eigenvalues[k] = A(order[k], order[k]).real();
    for (int i = 0; i < d; ++i) sd.eigenvectors(i, k) = V(i, order[k]);
  }

  // re-orthonormalize within degenerate clusters (modified Gram-Schmidt)
  int c0 = 0;
  while (c0 < d) {
    int c1 = c0 + 1;
    while (c1 < d &&
           sd.eigenvalues[c1] - sd.eigenvalues[c1 - 1] < detail::kDegenerateGap)
      ++c1;
    for (int k = c0; k < c1; ++k) {
      for (int j = c0; j < k; ++j) {
        cplx ov = 0.0;
        for (int i = 0; i < d; ++i)
          ov += std::conj(sd.eigenvectors(i, j)) * sd.eigenvectors(i, k);
        for (int i = 0; i < d; ++i)
          sd.eigenvectors(i, k) -= ov * sd.eigenvectors(i, j);
      }
      double nn = 0.0;
      for (int i = 0; i < d; ++i) nn += std::norm(sd.eigenvectors(i, k));
      nn = std::sqrt(nn);
      for (int i = 0; i < d; ++i) sd.eigenvectors(i, k) /= nn;
    }
    c0 = c1;
  }

  // deterministic phases
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      const cplx v = sd.eigenvectors(i, k);
      if (std::abs(v) > 1e-12) {
        const cplx ph = std::conj(v) / std::abs(v);
        for (int r = 0; r < d; ++r) sd.eigenvectors(r, k) *= ph;
        break;
      }
    }
  }
  return sd;
}

inline CVec eigcolumn(const SpectralDecomposition& sd, int k) {
  const int d = sd.eigenvectors.dim();
  CVec v(d);
  for (int i = 0; i < d; ++i) v[i] = sd.eigenvectors(i, k);
  return v;
}

// -- functions of Hermitian matrices -----------------------------------------

// e^{-i H t}  (hbar = 1)
inline ComplexMatrix exp_hermitian_generator(const ComplexMatrix& H,
                                             double t) {
  if (!std::isfinite(t)) throw MatError("non-finite duration");
  const auto sd = hermitian_eig(H);
  const int d = H.dim();
  ComplexMatrix r(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < d; ++k)
        s += sd.eigenvectors(i, k) *
             std::exp(cplx(0.0, -sd.eigenvalues[k] * t)) *
             std::conj(sd.eigenvectors(j, k));
      r(i, j) = s;
    }
  return r;
}

inline ComplexMatrix log_psd(const ComplexMatrix& M) {
  const auto sd = hermitian_eig(M);
  if (sd.eigenvalues.front() <= 1e-14)
    throw SingularInput("matrix logarithm requires eigenvalues > 1e-14");
  const int d = M.dim();
  ComplexMatrix r(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < d; ++k)
        s += sd.eigenvectors(i, k) * std::log(sd.eigenvalues[k]) *
             std::conj(sd.eigenvectors(j, k));
      r(i, j) = s;
    }
  return r;
}

// -- density operators -------------------------------------------------------

enum class Role { System, Environment, Auxiliary, Joint };

struct DensityOperator {
  ComplexMatrix matrix;
  Role role = Role::System;
};

inline DensityOperator make_density(const ComplexMatrix& m,
                                    Role role = Role::System) {
  if (m.hermiticity_defect() > 1e-12)
    throw NonHermitianInput("density operator not Hermitian within 1e-12");
  if (std::abs(m.trace() - 1.0) > 1e-12)
    throw MatError("density operator trace differs from 1 beyond 1e-12");
  const auto sd = hermitian_eig(m);
  if (sd.eigenvalues.front() < -1e-12)
    throw MatError("density operator has eigenvalue < -1e-12");
  return DensityOperator{m, role};
}

inline DensityOperator pure_density(const CVec& psi,
                                    Role role = Role::System) {
  CVec v = psi;
  const double n = norm(v);
  for (auto& x : v) x /= n;
  return DensityOperator{outer(v, v), role};
}

// -- entropies and distances -------------------------------------------------

// S(rho||sigma) = Tr[rho ln rho - rho ln sigma], in nats.
// Convention 0*ln 0 = 0 on rho's null space; SupportMismatch when a
// rho-eigenvector with weight > 1e-12 has sigma-expectation <= 1e-14.
inline double relative_entropy(const DensityOperator& rho,
                               const DensityOperator& sigma) {
  if (rho.matrix.dim() != sigma.matrix.dim())
    throw DimensionMismatch("relative_entropy dimensions differ");
  const auto er = hermitian_eig(rho.matrix);
  const auto es = hermitian_eig(sigma.matrix);
  const int d = rho.matrix.dim();

  // overlap[i][j] = |<r_i|s_j>|^2
  std::vector<std::vector<double>> ov(d, std::vector<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < d; ++k)
        s += std::conj(er.eigenvectors(k, i)) * es.eigenvectors(k, j);
      ov[i][j] = std::norm(s);
    }

  double val = 0.0;
  for (int i = 0; i < d; ++i) {
    const double r = er.eigenvalues[i];
    if (r <= 0.0) continue;  // null-space convention
    double sexp = 0.0;
    for (int j = 0; j < d; ++j)
      sexp += ov[i][j] * std::max(es.eigenvalues[j], 0.0);
    if (r > 1e-12 && sexp <= 1e-14)
      throw SupportMismatch("support(rho) not contained in support(sigma)");
    val += r * std::log(r);
    for (int j = 0; j < d; ++j) {
      const double sj = es.eigenvalues[j];
      if (sj <= 0.0) {
        if (r * ov[i][j] > 1e-14)
          throw SupportMismatch("rho overlaps sigma null space");
        continue;
      }
      val -= r * ov[i][j] * std::log(sj);
    }
  }
  return val;
}

// D = 1/2 ||rho - sigma||_1 via eigenvalues of the Hermitian difference.
inline double trace_distance(const DensityOperator& rho,
                             const DensityOperator& sigma) {
  if (rho.matrix.dim() != sigma.matrix.dim())
    throw DimensionMismatch("trace_distance dimensions differ");
  const auto sd = hermitian_eig(rho.matrix - sigma.matrix);
  double s = 0.0;
  for (double l : sd.eigenvalues) s += std::abs(l);
  return 0.5 * s;
}

// trace norm of a Hermitian matrix
inline double trace_norm_hermitian(const ComplexMatrix& m) {
  const auto sd = hermitian_eig(m);
  double s = 0.0;
  for (double l : sd.eigenvalues) s += std::abs(l);
  return s;
}

// -- tensor operations -------------------------------------------------------

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int da = a.dim(), db = b.dim();
  ComplexMatrix r(da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) {
      const cplx aij = a(i, j);
      if (aij == 0.0) continue;
      for (int k = 0; k < db; ++k)
        for (int l = 0; l < db; ++l) r(i * db + k, j * db + l) = aij * b(k, l);
    }
  return r;
}

inline CVec kron_vec(const CVec& a, const CVec& b) {
  CVec r(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      r[i * b.size() + k] = a[i] * b[k];
  return r;
}

enum class Keep { First, Second };

inline DensityOperator partial_trace(const DensityOperator& joint, Keep keep,
                                     int da, int db) {
  if (joint.matrix.dim() != da * db)
    throw DimensionMismatch("partial_trace: joint dim != da*db");
  const auto& m = joint.matrix;
  if (keep == Keep::First) {
    ComplexMatrix r(da);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < da; ++j) {
        cplx s = 0.0;
        for (int k = 0; k < db; ++k) s += m(i * db + k, j * db + k);
        r(i, j) = s;
      }
    return DensityOperator{r, Role::System};
  }
  ComplexMatrix r(db);
  for (int k = 0; k < db; ++k)
    for (int l = 0; l < db; ++l) {
      cplx s = 0.0;
      for (int i = 0; i < da; ++i) s += m(i * db + k, i * db + l);
      r(k, l) = s;
    }
  return DensityOperator{r, Role::System};
}

// -- Pauli / common matrices -------------------------------------------------

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}
inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2);
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}
inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

}  // namespace mzwork
