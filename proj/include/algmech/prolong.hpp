#pragma once

// Coordinate realizations of the prolongations T^E E and T^E E*.
//
// T^E E* carries coordinates (x, p; z, u) in the basis {Y_a, P^a}, its dual
// (x, p; r, v) in {Y^a, P_a}. T^E E carries (x, y; s, w) in {X_a, V_a}, its
// dual (x, y; sbar, wbar).

#include <cctype>
#include <memory>
#include <optional>

#include "algmech/algebroid.hpp"

namespace algmech {

struct ProlongVector {
  DualPoint base;
  Vector z;
  Vector u;
};

struct ProlongCovector {
  DualPoint base;
  Vector r;
  Vector v;
};

struct TEEVector {
  FiberPoint base;
  Vector s;
  Vector w;
};

struct TEECovector {
  FiberPoint base;
  Vector sbar;
  Vector wbar;
};

/// <alpha, X> in the dual bases.
inline double pairing(const ProlongCovector& alpha, const ProlongVector& X) {
  return alpha.r.dot(X.z) + alpha.v.dot(X.u);
}

/// Scalar L(x, y) on E together with the algebroid it lives on.
class Lagrangian {
 public:
  /// All partial derivatives at one point of E.
  struct Derivatives {
    double value = 0.0;
    Vector Lx, Ly;
    Matrix Lxx, Lxy, Lyy;  // Lxy(i, a) = d2L / dx^i dy^a
  };

  Lagrangian(std::shared_ptr<const LieAlgebroid> A, expr::Expression L)
      : A_(std::move(A)), expr_(std::move(L)) {
    code_ = compile(expr_, A_->layout(), A_->parameters(), "lagrangian");
    for (const auto& name : expr::free_variables(expr_))
      if (name.size() > 1 && name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1])) &&
          A_->parameters().find(name) == A_->parameters().end())
        throw ConfigError("lagrangian must not depend on momenta");
  }

  const LieAlgebroid& algebroid() const { return *A_; }
  std::shared_ptr<const LieAlgebroid> algebroid_ptr() const { return A_; }
  const expr::Expression& expression() const { return expr_; }

  double value(const FiberPoint& e) const {
    return detail::value_at(code_, A_->layout().pack(e.x, &e.y), e.x);
  }

  Derivatives derivatives(const FiberPoint& e, bool hessian = true) const {
    const int m = A_->base_dim(), n = A_->rank();
    const auto j = detail::jet_at(code_, A_->layout().pack(e.x, &e.y), A_->layout().xy_slots(), hessian, e.x);
    Derivatives d;
    d.value = j.value;
    d.Lx = j.gradient.head(m);
    d.Ly = j.gradient.tail(n);
    if (hessian) {
      d.Lxx = j.hessian.topLeftCorner(m, m);
      d.Lxy = j.hessian.topRightCorner(m, n);
      d.Lyy = j.hessian.bottomRightCorner(n, n);
    }
    return d;
  }

 private:
  std::shared_ptr<const LieAlgebroid> A_;
  expr::Expression expr_;
  expr::Compiled code_;
};

/// Flat map of the canonical symplectic section:
/// r = -u - (C p) z, v = z.
inline ProlongCovector omega_flat(const LieAlgebroid& A, const ProlongVector& X) {
  const Matrix Cp = contract(A.at(X.base.x).C, X.base.p);
  return {X.base, -X.u - Cp * X.z, X.z};
}

/// Inverse of omega_flat (the sharp map of the associated algebraic
/// Poisson structure): z = v, u = -r - (C p) v.
inline ProlongVector omega_sharp(const LieAlgebroid& A, const ProlongCovector& alpha) {
  const Matrix Cp = contract(A.at(alpha.base.x).C, alpha.base.p);
  return {alpha.base, alpha.v, -alpha.r - Cp * alpha.v};
}

/// Matrix M of the symplectic section with Omega(X, Y) = X^T M Y for
/// X = (z, u): M = [[C p, I], [-I, 0]].
inline Matrix symplectic_matrix(const LieAlgebroid& A, const DualPoint& pt) {
  const int n = A.rank();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = contract(A.at(pt.x).C, pt.p);
  M.topRightCorner(n, n) = Matrix::Identity(n, n);
  M.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return M;
}

/// Liouville section: r = p, v = 0.
inline ProlongCovector liouville(const LieAlgebroid& A, const DualPoint& pt) {
  return {pt, pt.p, Vector::Zero(A.rank())};
}

struct EulerAndS {
  TEEVector delta;
  TEEVector SX;
};

/// Euler section Delta = y^a V_a and vertical endomorphism S X_a = V_a,
/// S V_a = 0.
inline EulerAndS euler_and_S(const TEEVector& X) {
  const auto n = X.s.size();
  return {{X.base, Vector::Zero(n), X.base.y}, {X.base, Vector::Zero(n), X.s}};
}

/// Legendre transformation (x, y) -> (x, dL/dy).
inline DualPoint legendre(const Lagrangian& Lg, const FiberPoint& e) {
  return {e.x, Lg.derivatives(e, false).Ly};
}

/// (x, p; z, u) -> (x, z; u + (C p) z, p).
inline TEECovector A_E_map(const LieAlgebroid& A, const ProlongVector& X) {
  const Matrix Cp = contract(A.at(X.base.x).C, X.base.p);
  return {{X.base.x, X.z}, X.u + Cp * X.z, X.base.p};
}

inline ProlongVector A_E_inverse(const LieAlgebroid& A, const TEECovector& w) {
  const Matrix Cp = contract(A.at(w.base.x).C, w.wbar);
  return {{w.base.x, w.wbar}, w.base.y, w.sbar - Cp * w.base.y};
}

/// (x, y; s, w) -> (x, w; -s, y).
inline ProlongCovector gamma_E_map(const TEECovector& w) { return {{w.base.x, w.wbar}, -w.sbar, w.base.y}; }

/// Differential of L on T^E E: (x, y; rho^T dL/dx, dL/dy).
inline TEECovector d_TEE_L(const Lagrangian& Lg, const FiberPoint& e) {
  const auto d = Lg.derivatives(e, false);
  const Matrix rho = Lg.algebroid().at(e.x).rho;
  return {e, rho.transpose() * d.Lx, d.Ly};
}

/// Dirac differential (x, dL/dy; -rho^T dL/dx, y).
inline ProlongCovector dirac_differential(const Lagrangian& Lg, const FiberPoint& e) {
  const auto d = Lg.derivatives(e, false);
  const Matrix rho = Lg.algebroid().at(e.x).rho;
  return {{e.x, d.Ly}, -(rho.transpose() * d.Lx), e.y};
}

struct Energies {
  double epsilon_L = 0.0;  // y . dL/dy - L
  double E_L = 0.0;        // p . y - L
};

inline Energies energies(const Lagrangian& Lg, const FiberPoint& e, const std::optional<Vector>& p = std::nullopt) {
  const auto d = Lg.derivatives(e, false);
  Energies out;
  out.epsilon_L = e.y.dot(d.Ly) - d.value;
  out.E_L = (p ? *p : d.Ly).dot(e.y) - d.value;
  return out;
}

}  // namespace algmech
