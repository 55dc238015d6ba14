#pragma once

// Two-particle interaction tensor A(j,k;j',k') with the pair symmetry
// A(j,k;j',k') = A(k,j;k',j') and self-adjointness A(j,k;j',k') =
// conj(A(j',k';j,k)). The multiplication-type potential V is the diagonal
// special case A(j,k;j,k) = V(j,k).

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmfg/core.hpp"
#include "qmfg/rng.hpp"
#include "qmfg/wave.hpp"

namespace qmfg {

class InteractionTensor {
 public:
  InteractionTensor() = default;
  explicit InteractionTensor(int dim)
      : dim_(dim), a_(static_cast<size_t>(dim) * dim * dim * dim, Complex(0)) {}

  int dim() const { return dim_; }

  Complex& at(int j, int k, int j2, int k2) { return a_[idx(j, k, j2, k2)]; }
  Complex at(int j, int k, int j2, int k2) const {
    return a_[idx(j, k, j2, k2)];
  }

  bool zero() const {
    for (const auto& v : a_)
      if (v != Complex(0)) return false;
    return true;
  }

  double hs_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  // Named violation, empty string when the invariants hold.
  std::string violation(double tol = kHermTol) const {
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        for (int j2 = 0; j2 < dim_; ++j2)
          for (int k2 = 0; k2 < dim_; ++k2) {
            if (std::abs(at(j, k, j2, k2) - at(k, j, k2, j2)) > tol)
              return "pair symmetry A(j,k;j',k') = A(k,j;k',j') violated";
            if (std::abs(at(j, k, j2, k2) - std::conj(at(j2, k2, j, k))) > tol)
              return "self-adjointness A(j,k;j',k') = conj(A(j',k';j,k)) "
                     "violated";
          }
    return "";
  }

  void validate(double tol = kHermTol) const {
    const std::string v = violation(tol);
    if (!v.empty()) throw std::invalid_argument("InteractionTensor: " + v);
  }

  // Effective one-particle operator A^{eta-bar}(j;j') =
  // sum_{k,k'} A(j,k;j',k') conj(eta(k,k')). Hermitian whenever the tensor
  // invariants hold and eta is Hermitian; linear in eta.
  CMat contract_eta_bar(const CMat& eta) const {
    if (eta.rows() != dim_ || eta.cols() != dim_)
      throw std::invalid_argument("contract_eta_bar: dimension mismatch");
    CMat out = CMat::Zero(dim_, dim_);
    for (int j = 0; j < dim_; ++j)
      for (int j2 = 0; j2 < dim_; ++j2) {
        Complex acc = 0.0;
        for (int k = 0; k < dim_; ++k)
          for (int k2 = 0; k2 < dim_; ++k2)
            acc += at(j, k, j2, k2) * std::conj(eta(k, k2));
        out(j, j2) = acc;
      }
    return out;
  }

  // Dense d^2 x d^2 matrix acting on two sites, row (j,k), column (j',k'),
  // first slot slowest.
  CMat two_site_matrix() const {
    const int d = dim_;
    CMat m = CMat::Zero(d * d, d * d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int j2 = 0; j2 < d; ++j2)
          for (int k2 = 0; k2 < d; ++k2)
            m(j * d + k, j2 * d + k2) = at(j, k, j2, k2);
    return m;
  }

  std::vector<TwoSiteEntry> nonzeros(double eps = 0.0) const {
    std::vector<TwoSiteEntry> out;
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        for (int j2 = 0; j2 < dim_; ++j2)
          for (int k2 = 0; k2 < dim_; ++k2) {
            const Complex v = at(j, k, j2, k2);
            if (std::abs(v) > eps) out.push_back({j, k, j2, k2, v});
          }
    return out;
  }

  // Photon-exchange coupling between two qubits: A(1,0;0,1)=A(0,1;1,0)=1.
  static InteractionTensor exchange() {
    InteractionTensor t(2);
    t.at(1, 0, 0, 1) = 1.0;
    t.at(0, 1, 1, 0) = 1.0;
    return t;
  }

  // Diagonal tensor A(j,k;j,k) = V(j,k) for a real symmetric potential.
  static InteractionTensor diagonal_potential(const Eigen::MatrixXd& v) {
    const int d = static_cast<int>(v.rows());
    if (v.cols() != d) throw std::invalid_argument("potential must be square");
    InteractionTensor t(d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) t.at(j, k, j, k) = 0.5 * (v(j, k) + v(k, j));
    return t;
  }

  // Random tensor satisfying both symmetries, entries O(scale).
  static InteractionTensor random_symmetric(SequenceRng& rng, int dim,
                                            double scale = 1.0) {
    InteractionTensor r(dim);
    for (auto& v : r.a_) v = scale * Complex(rng.normal(), rng.normal());
    InteractionTensor s(dim);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int j2 = 0; j2 < dim; ++j2)
          for (int k2 = 0; k2 < dim; ++k2)
            s.at(j, k, j2, k2) =
                0.5 * (r.at(j, k, j2, k2) + r.at(k, j, k2, j2));
    InteractionTensor t(dim);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int j2 = 0; j2 < dim; ++j2)
          for (int k2 = 0; k2 < dim; ++k2)
            t.at(j, k, j2, k2) = 0.5 * (s.at(j, k, j2, k2) +
                                        std::conj(s.at(j2, k2, j, k)));
    return t;
  }

 private:
  size_t idx(int j, int k, int j2, int k2) const {
    return ((static_cast<size_t>(j) * dim_ + k) * dim_ + j2) * dim_ + k2;
  }

  int dim_ = 0;
  std::vector<Complex> a_;
};

// Defect of the cancellation identity gamma_m A_{jm} gamma_m =
// gamma_m A_j^{conj(gamma_m)} on a two-site space, with gamma_m the projector
// onto phi acting on the second slot. Zero up to round-off for any tensor.
inline double cancellation_check(const InteractionTensor& a,
                                 const WaveFunction& phi) {
  const int d = a.dim();
  if (phi.dim() != d)
    throw std::invalid_argument("cancellation_check: dimension mismatch");
  const CMat gamma = pure_density(phi);
  const CMat id = CMat::Identity(d, d);
  const CMat gamma_m = kron(id, gamma);
  const CMat a2 = a.two_site_matrix();
  const CMat lhs = gamma_m * a2 * gamma_m;
  const CMat rhs = gamma_m * kron(a.contract_eta_bar(gamma), id);
  return max_abs(lhs - rhs);
}

}  // namespace qmfg
