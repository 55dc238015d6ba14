#pragma once

// Complex linear-algebra substrate shared by every module: states, density
// matrices, Hermitian operator checks, and the scalar diagnostics (expectation
// values, trace distance) used throughout.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmfg {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Centralized tolerances. SDE steps inject O(dt) defects into Hermiticity /
// trace / positivity, so validators must not be tighter than these.
inline constexpr double kHermTol = 1e-12;
inline constexpr double kStateTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kUnitNormTol = 1e-8;

inline CMat pauli_x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMat pauli_y() {
  CMat m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline CMat pauli_z() {
  CMat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const CMat& m, double tol = kHermTol) {
  return max_abs(m - m.adjoint().eval()) <= tol;
}

inline bool is_anti_hermitian(const CMat& m, double tol = kHermTol) {
  return max_abs(m + m.adjoint().eval()) <= tol;
}

inline CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint().eval()); }

// Operator norm (largest |eigenvalue|) of a Hermitian matrix.
inline double operator_norm(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline std::vector<double> hermitian_eigenvalues(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(),
                         es.eigenvalues().data() + es.eigenvalues().size());
  return ev;
}

inline double min_eigenvalue(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Amplitude vector of a single atom (dimension n+1). Operations state whether
// they require unit norm; there is no normalized flag.
struct WaveFunction {
  CVec amps;

  WaveFunction() = default;
  explicit WaveFunction(CVec a) : amps(std::move(a)) {}

  int dim() const { return static_cast<int>(amps.size()); }
  double norm() const { return amps.norm(); }
  bool unit_norm(double tol = kUnitNormTol) const {
    return std::abs(norm() - 1.0) <= tol;
  }
  void normalize() {
    const double n = norm();
    if (n <= 0.0) throw std::invalid_argument("WaveFunction: zero vector");
    amps /= n;
  }
};

inline WaveFunction basis_state(int dim, int k) {
  CVec v = CVec::Zero(dim);
  v[k] = 1.0;
  return WaveFunction(v);
}

// <A>_v = (v, A v) / (v, v). Real when A is Hermitian.
inline Complex expectation_value(const CMat& a, const WaveFunction& v) {
  if (a.rows() != v.dim() || a.cols() != v.dim())
    throw std::invalid_argument("expectation_value: dimension mismatch");
  const double n2 = v.amps.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("expectation_value: zero vector");
  return (v.amps.adjoint() * (a * v.amps))(0) / n2;
}

inline double expectation_real(const CMat& a, const WaveFunction& v) {
  return expectation_value(a, v).real();
}

// Orthogonal projector psi (x) psi-bar. Requires unit norm (1e-8).
inline CMat pure_density(const WaveFunction& v) {
  if (!v.unit_norm())
    throw std::invalid_argument("pure_density: input not unit-normalized");
  return v.amps * v.amps.adjoint();
}

// tr|rho - sigma|: sum of absolute eigenvalues of the Hermitian difference.
inline double trace_distance(const CMat& rho, const CMat& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> es(rho - sigma, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

struct StateCheck {
  bool hermitian = false;
  bool unit_trace = false;
  bool psd = false;
  double herm_defect = 0.0;
  double trace_defect = 0.0;
  double min_eig = 0.0;
  bool ok() const { return hermitian && unit_trace && psd; }
};

inline StateCheck check_density_state(const CMat& rho,
                                      double herm_tol = kHermTol,
                                      double trace_tol = kStateTraceTol,
                                      double psd_tol = kPsdTol) {
  StateCheck c;
  c.herm_defect = max_abs(rho - rho.adjoint().eval());
  c.hermitian = c.herm_defect <= herm_tol;
  c.trace_defect = std::abs(rho.trace().real() - 1.0) +
                   std::abs(rho.trace().imag());
  c.unit_trace = c.trace_defect <= trace_tol;
  c.min_eig = min_eigenvalue(hermitize(rho));
  c.psd = c.min_eig >= -psd_tol;
  return c;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Bloch components tr(rho sigma_k) of a qubit density matrix.
inline Eigen::Vector3d bloch_vector(const CMat& rho) {
  Eigen::Vector3d r;
  r[0] = 2.0 * rho(1, 0).real();
  r[1] = 2.0 * rho(1, 0).imag();
  r[2] = (rho(0, 0) - rho(1, 1)).real();
  return r;
}

}  // namespace qmfg
