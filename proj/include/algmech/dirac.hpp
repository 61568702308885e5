#pragma once

// The almost Dirac structure D_U induced on T^E E* by a subbundle U of E,
// queried pointwise through both the symplectic and the Poisson
// constructions.

#include <vector>

#include "algmech/prolong.hpp"

namespace algmech {

struct DiracPair {
  ProlongVector X;
  ProlongCovector alpha;
};

struct DiracBasis {
  DualPoint base;
  std::vector<DiracPair> generators;
};

/// Basis of the lifted subbundle {(z, u) : z in U(x)} as columns of a
/// 2n x (n + r) matrix: r columns (s_a, 0) followed by n columns (0, e_a).
inline Matrix lift_subbundle(const Subbundle& U, const DualPoint& pt, double tol = 1e-9) {
  const auto f = frame(U, pt.x, tol);
  const int n = U.fiber_rank(), r = U.rank();
  Matrix out = Matrix::Zero(2 * n, n + r);
  out.topLeftCorner(n, r) = f.span;
  out.bottomRightCorner(n, n) = Matrix::Identity(n, n);
  return out;
}

struct DiracVerdict {
  bool member = false;
  double res_z_in_U = 0.0;  // distance of z from U(x)
  double res_v_eq_z = 0.0;  // |v - z|_inf
  double res_annihilator = 0.0;  // max |(r + u + (C p) z) . s| over spanning columns s
};

/// Membership via the symplectic form: z in U, v = z and
/// r + u + (C p) z in U°.
inline DiracVerdict dirac_member_symplectic(const LieAlgebroid& A, const Subbundle& U, const DiracPair& pair,
                                            double tol = 1e-9) {
  const auto& X = pair.X;
  const auto& al = pair.alpha;
  const auto f = frame(U, X.base.x, tol);
  const Matrix Cp = contract(A.at(X.base.x).C, X.base.p);
  const Vector w = al.r + X.u + Cp * X.z;
  DiracVerdict d;
  d.res_z_in_U = distance_to_U(f, X.z);
  d.res_v_eq_z = (al.v - X.z).cwiseAbs().maxCoeff();
  d.res_annihilator = annihilator_gap(f, w);
  d.member = d.res_z_in_U <= tol * (1.0 + X.z.norm()) &&
             d.res_v_eq_z <= tol * (1.0 + X.z.cwiseAbs().maxCoeff()) &&
             d.res_annihilator <= tol * (1.0 + w.norm());
  return d;
}

/// Membership via the algebraic Poisson structure: alpha has v in U and
/// X - sharp(alpha) lies in the annihilator of the lifted dual subbundle
/// (zero z-part, u-part in U°).
inline bool dirac_member_poisson(const LieAlgebroid& A, const Subbundle& U, const DiracPair& pair,
                                 double tol = 1e-9) {
  const auto& X = pair.X;
  const auto& al = pair.alpha;
  const auto f = frame(U, al.base.x, tol);
  const ProlongVector sharp = omega_sharp(A, al);
  const Vector dz = X.z - sharp.z;
  const Vector du = X.u - sharp.u;
  return distance_to_U(f, al.v) <= tol * (1.0 + al.v.norm()) &&
         dz.cwiseAbs().maxCoeff() <= tol * (1.0 + al.v.cwiseAbs().maxCoeff()) &&
         annihilator_gap(f, du) <= tol * (1.0 + du.norm());
}

/// 2n generators of D_U(pt). The fiber basis is completed from the spanning
/// columns of U(x) by an orthonormal complement; the adapted-frame formulas
/// z^A = v^A = 0, v^a = z^a, r_a = -u_a - C^c_ab p_c z^b are applied there
/// and mapped back to the original coordinates.
inline DiracBasis dirac_generators(const LieAlgebroid& A, const Subbundle& U, const DualPoint& pt,
                                   double tol = 1e-9) {
  const int n = U.fiber_rank(), r = U.rank();
  const auto f = frame(U, pt.x, tol);
  Matrix B(n, n);
  B << f.span, f.complement;
  const Matrix Binv_t = B.transpose().partialPivLu().inverse();
  const Matrix Cp_adapted = B.transpose() * contract(A.at(pt.x).C, pt.p) * B;

  DiracBasis basis{pt, {}};
  basis.generators.reserve(2 * n);
  auto push = [&](const Vector& z, const Vector& u, const Vector& rr, const Vector& v) {
    basis.generators.push_back({{pt, B * z, Binv_t * u}, {pt, Binv_t * rr, B * v}});
  };
  for (int a = 0; a < r; ++a) {
    const Vector e = Vector::Unit(n, a);
    Vector rr = Vector::Zero(n);
    for (int b = 0; b < r; ++b) rr[b] = -Cp_adapted(b, a);
    push(e, Vector::Zero(n), rr, e);
  }
  for (int a = 0; a < n; ++a) {
    const Vector e = Vector::Unit(n, a);
    push(Vector::Zero(n), e, a < r ? Vector(-e) : Vector(Vector::Zero(n)), Vector::Zero(n));
  }
  for (int a = r; a < n; ++a) push(Vector::Zero(n), Vector::Zero(n), Vector::Unit(n, a), Vector::Zero(n));
  return basis;
}

/// Max over generator pairs of |alpha_i(X_j) + alpha_j(X_i)|; zero exactly
/// when the span is isotropic for the symmetric pairing.
inline double check_self_orthogonal(const DiracBasis& basis) {
  double worst = 0.0;
  const auto& g = basis.generators;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i; j < g.size(); ++j)
      worst = std::max(worst, std::abs(pairing(g[i].alpha, g[j].X) + pairing(g[j].alpha, g[i].X)));
  return worst;
}

/// Numerical rank of the generators stacked as rows (z, u, r, v) in R^{4n}.
inline int generator_rank(const DiracBasis& basis, double tol = 1e-9) {
  const auto& g = basis.generators;
  if (g.empty()) return 0;
  const int n = static_cast<int>(g.front().X.z.size());
  Matrix rows(g.size(), 4 * n);
  for (std::size_t i = 0; i < g.size(); ++i)
    rows.row(i) << g[i].X.z.transpose(), g[i].X.u.transpose(), g[i].alpha.r.transpose(), g[i].alpha.v.transpose();
  Eigen::JacobiSVD<Matrix> svd(rows);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[0] > 0.0 && s[i] > tol * s[0]) ++rank;
  return rank;
}

}  // namespace algmech
