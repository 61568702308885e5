#pragma once

// Implicit Lagrangian systems (L, U): residuals of the local equations,
// integration along U and energy monitoring.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "algmech/prolong.hpp"

namespace algmech {

class ImplicitSystem {
 public:
  ImplicitSystem(Lagrangian L, Subbundle U) : L_(std::move(L)), U_(std::move(U)) {
    if (U_.fiber_rank() != L_.algebroid().rank()) throw ConfigError("subbundle and algebroid ranks differ");
  }

  const LieAlgebroid& algebroid() const { return L_.algebroid(); }
  const Lagrangian& lagrangian() const { return L_; }
  const Subbundle& constraint() const { return U_; }
  int m() const { return algebroid().base_dim(); }
  int n() const { return algebroid().rank(); }
  int r() const { return U_.rank(); }

 private:
  Lagrangian L_;
  Subbundle U_;
};

struct State {
  Vector x, y, p;
};

enum class Method { rk4, implicit_midpoint };

inline std::string to_string(Method m) { return m == Method::rk4 ? "rk4" : "implicit_midpoint"; }

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  double h = 0.0;
  Method method = Method::rk4;
};

struct Residual {
  double r_U = 0.0;
  double r_kin = 0.0;
  double r_leg = 0.0;
  double r_mom = 0.0;
  bool pass = false;
};

/// Residuals of the local implicit Lagrangian equations at one state given
/// time derivatives of x and p. The momentum equation is tested by pairing
/// against the spanning columns of U(x).
inline Residual residual(const ImplicitSystem& sys, const State& st, const Vector& xdot, const Vector& pdot,
                         double tol) {
  const auto& A = sys.algebroid();
  const auto loc = A.at(st.x);
  const auto d = sys.lagrangian().derivatives({st.x, st.y}, false);
  const auto f = frame(sys.constraint(), st.x);
  Residual res;
  res.r_U = distance_to_U(f, st.y);
  res.r_kin = st.x.size() ? (xdot - loc.rho * st.y).cwiseAbs().maxCoeff() : 0.0;
  res.r_leg = (st.p - d.Ly).cwiseAbs().maxCoeff();
  const Vector mom = pdot + contract(loc.C, st.p) * st.y - loc.rho.transpose() * d.Lx;
  res.r_mom = annihilator_gap(f, mom);
  res.pass = res.r_U <= tol && res.r_kin <= tol && res.r_leg <= tol && res.r_mom <= tol;
  return res;
}

struct AdaptedRhs {
  Vector xdot;
  Vector ydot_a;  // time derivative of the coordinates of y on the spanning columns
  Vector y;
  Vector p;
};

/// Reduced equations for y = S(x) a with S the spanning columns of U:
/// xdot = rho y, p = dL/dy and
///   (S^T Lyy S) adot = S^T (rho^T Lx - (C p) y) - S^T Lyy Sdot a - S^T Lyx xdot.
/// For the adapted frame this is the textbook reduction with
/// pdot_a = -C^c_ab p_c y^b + rho^i_a dL/dx^i.
inline AdaptedRhs adapted_rhs(const ImplicitSystem& sys, const Vector& x, const Vector& ya) {
  const auto& U = sys.constraint();
  const int m = sys.m(), r = sys.r();
  const Matrix S = U.span_at(x);
  const auto loc = sys.algebroid().at(x);
  AdaptedRhs out;
  out.y = S * ya;
  const auto d = sys.lagrangian().derivatives({x, out.y}, true);
  out.p = d.Ly;
  out.xdot = loc.rho * out.y;
  out.ydot_a = Vector::Zero(r);
  if (r == 0) return out;

  const Matrix M = S.transpose() * d.Lyy * S;
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cond = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : INFINITY;
  if (!(cond < 1e12)) throw Degenerate(cond);

  Vector rhs = S.transpose() * (loc.rho.transpose() * d.Lx - contract(loc.C, out.p) * out.y);
  if (m > 0) {
    rhs -= S.transpose() * (d.Lxy.transpose() * out.xdot);
    if (!U.is_constant()) {
      const auto dS = U.span_derivatives(x);
      Matrix Sdot = Matrix::Zero(S.rows(), S.cols());
      for (int i = 0; i < m; ++i) Sdot += out.xdot[i] * dS[i];
      rhs -= S.transpose() * (d.Lyy * (Sdot * ya));
    }
  }
  out.ydot_a = svd.solve(rhs);
  return out;
}

/// Coordinates a with y = S(x) a on the spanning columns of U(x). Throws
/// BadParams when y is not in U(x).
inline Vector coordinates_in_U(const ImplicitSystem& sys, const Vector& x, const Vector& y, double tol = 1e-9) {
  if (y.size() == sys.r() && sys.constraint().is_adapted()) return y;
  if (y.size() != sys.n()) throw BadParams("fiber vector must have n entries");
  const Matrix S = sys.constraint().span_at(x);
  if (S.cols() == 0) {
    if (y.cwiseAbs().maxCoeff() > tol) throw BadParams("fiber vector is not in U(x)");
    return Vector::Zero(0);
  }
  const Vector a = S.colPivHouseholderQr().solve(y);
  if ((S * a - y).norm() > tol * (1.0 + y.norm())) throw BadParams("fiber vector is not in U(x)");
  return a;
}

namespace detail {

inline void check_finite(const Vector& v, int step) {
  const double nrm = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(nrm) || nrm > 1e6) throw IntegrationBlowUp(step, nrm);
}

inline double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Newton with a central-difference Jacobian and a halving line search.
inline Vector newton(const std::function<Vector(const Vector&)>& F, Vector u, int step) {
  constexpr int max_iter = 25;
  Vector Fu = F(u);
  for (int it = 0; it < max_iter; ++it) {
    const double nF = inf_norm(Fu);
    if (nF <= 1e-11 * (1.0 + inf_norm(u))) return u;
    const int k = static_cast<int>(u.size());
    Matrix J(Fu.size(), k);
    for (int j = 0; j < k; ++j) {
      const double d = 1e-7 * (1.0 + std::abs(u[j]));
      Vector up = u, um = u;
      up[j] += d;
      um[j] -= d;
      J.col(j) = (F(up) - F(um)) / (2.0 * d);
    }
    Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cond = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : INFINITY;
    if (!(cond < 1e12)) throw NewtonDivergence(step, nF, "singular Jacobian (condition " + expr::format_number(cond) + ")");
    const Vector delta = -svd.solve(Fu);
    double lambda = 1.0;
    Vector trial = u + lambda * delta;
    Vector Ft = F(trial);
    for (int halvings = 0; halvings < 30 && !(inf_norm(Ft) < nF); ++halvings) {
      lambda *= 0.5;
      trial = u + lambda * delta;
      Ft = F(trial);
    }
    if (!(inf_norm(Ft) < nF) && inf_norm(Ft) > 1e-11 * (1.0 + inf_norm(trial)))
      throw NewtonDivergence(step, nF, "line search failed");
    u = std::move(trial);
    Fu = std::move(Ft);
  }
  if (inf_norm(Fu) <= 1e-11 * (1.0 + inf_norm(u))) return u;
  throw NewtonDivergence(step, inf_norm(Fu), "no convergence in 25 iterations");
}

}  // namespace detail

/// Integrates from x0 with y0 = S(x0) ya0 on the uniform grid t_k = k h,
/// k = 0..round(T / h).
inline Trajectory integrate(const ImplicitSystem& sys, const Vector& x0, const Vector& ya0, double h, double T,
                            Method method) {
  const int m = sys.m(), n = sys.n(), r = sys.r();
  if (x0.size() != m || ya0.size() != r) throw BadParams("initial condition has wrong dimensions");
  if (!(h > 0.0) || !(T >= 0.0)) throw BadParams("step and horizon must be positive");
  const long steps = std::lround(T / h);
  Trajectory traj;
  traj.h = h;
  traj.method = method;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  const auto& U = sys.constraint();
  const auto& Lg = sys.lagrangian();

  if (method == Method::rk4) {
    auto f = [&](const Vector& z) {
      const auto rhs = adapted_rhs(sys, z.head(m), z.tail(r));
      Vector dz(m + r);
      dz << rhs.xdot, rhs.ydot_a;
      return dz;
    };
    auto record = [&](const Vector& z, long k) {
      const Vector x = z.head(m);
      const Vector y = U.span_at(x) * z.tail(r);
      const Vector p = Lg.derivatives({x, y}, false).Ly;
      traj.times.push_back(static_cast<double>(k) * h);
      traj.states.push_back({x, y, p});
    };
    Vector z(m + r);
    z << x0, ya0;
    record(z, 0);
    for (long k = 1; k <= steps; ++k) {
      const Vector k1 = f(z);
      const Vector k2 = f(z + 0.5 * h * k1);
      const Vector k3 = f(z + 0.5 * h * k2);
      const Vector k4 = f(z + h * k3);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      detail::check_finite(z, static_cast<int>(k));
      record(z, k);
    }
    return traj;
  }

  // Implicit midpoint on the full system: unknowns (x', a', p').
  const auto& A = sys.algebroid();
  Vector x = x0, a = ya0;
  Vector y = U.span_at(x) * a;
  Vector p = Lg.derivatives({x, y}, false).Ly;
  traj.times.push_back(0.0);
  traj.states.push_back({x, y, p});
  for (long k = 1; k <= steps; ++k) {
    auto F = [&](const Vector& u) {
      const Vector xn = u.head(m), an = u.segment(m, r), pn = u.tail(n);
      const Vector yn = U.span_at(xn) * an;
      const Vector xm = 0.5 * (x + xn), ym = 0.5 * (y + yn), pm = 0.5 * (p + pn);
      const auto loc = A.at(xm);
      const auto dm = Lg.derivatives({xm, ym}, false);
      Vector out(m + r + n);
      out.head(m) = xn - x - h * (loc.rho * ym);
      out.segment(m, n) = pn - Lg.derivatives({xn, yn}, false).Ly;
      out.tail(r) = U.span_at(xm).transpose() *
                    ((pn - p) + h * (contract(loc.C, pm) * ym - loc.rho.transpose() * dm.Lx));
      return out;
    };
    Vector u(m + r + n);
    u << x, a, p;
    u = detail::newton(F, u, static_cast<int>(k));
    detail::check_finite(u, static_cast<int>(k));
    x = u.head(m);
    a = u.segment(m, r);
    p = u.tail(n);
    y = U.span_at(x) * a;
    traj.times.push_back(static_cast<double>(k) * h);
    traj.states.push_back({x, y, p});
  }
  return traj;
}

struct EnergyDrift {
  double E0 = 0.0;
  double max_abs_drift = 0.0;
};

inline std::vector<double> energy_series(const ImplicitSystem& sys, const Trajectory& traj) {
  std::vector<double> E;
  E.reserve(traj.states.size());
  for (const auto& s : traj.states) E.push_back(energies(sys.lagrangian(), {s.x, s.y}, s.p).E_L);
  return E;
}

inline EnergyDrift energy_drift(const ImplicitSystem& sys, const Trajectory& traj) {
  EnergyDrift out;
  const auto E = energy_series(sys, traj);
  if (E.empty()) return out;
  out.E0 = E.front();
  for (double e : E) out.max_abs_drift = std::max(out.max_abs_drift, std::abs(e - out.E0));
  return out;
}

/// Time derivatives of uniformly sampled vectors. Order 4 uses five-point
/// windows (shifted near the ends), order 2 centered differences with
/// one-sided second-order stencils at the ends.
inline std::vector<Vector> differentiate(const std::vector<Vector>& f, double h, int order) {
  const int N = static_cast<int>(f.size());
  std::vector<Vector> df(N);
  if (N == 0) return df;
  if (N == 1) {
    df[0] = Vector::Zero(f[0].size());
    return df;
  }
  if (N == 2) {
    df[0] = df[1] = (f[1] - f[0]) / h;
    return df;
  }
  if (order >= 4 && N >= 5) {
    static constexpr double w[5][5] = {{-25, 48, -36, 16, -3},
                                       {-3, -10, 18, -6, 1},
                                       {1, -8, 0, 8, -1},
                                       {-1, 6, -18, 10, 3},
                                       {3, -16, 36, -48, 25}};
    for (int i = 0; i < N; ++i) {
      const int k = i < 2 ? i : (i >= N - 2 ? 4 - (N - 1 - i) : 2);
      const int start = i - k;
      Vector acc = Vector::Zero(f[i].size());
      for (int j = 0; j < 5; ++j) acc += w[k][j] * f[start + j];
      df[i] = acc / (12.0 * h);
    }
    return df;
  }
  df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int i = 1; i < N - 1; ++i) df[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  df[N - 1] = (3.0 * f[N - 1] - 4.0 * f[N - 2] + f[N - 3]) / (2.0 * h);
  return df;
}

struct TrajectoryCheck {
  std::vector<Residual> nodes;  // every node, ends included
  Residual worst;               // over interior nodes only
};

/// Residuals along a trajectory using finite-difference xdot and pdot.
/// Interior nodes are those whose stencil is centered.
inline TrajectoryCheck trajectory_residuals(const ImplicitSystem& sys, const Trajectory& traj, int order, double tol) {
  std::vector<Vector> xs, ps;
  for (const auto& s : traj.states) {
    xs.push_back(s.x);
    ps.push_back(s.p);
  }
  const auto xd = differentiate(xs, traj.h, order);
  const auto pd = differentiate(ps, traj.h, order);
  TrajectoryCheck out;
  const int N = static_cast<int>(traj.states.size());
  const int edge = order >= 4 && N >= 5 ? 2 : 1;
  out.worst.pass = true;
  for (int i = 0; i < N; ++i) {
    out.nodes.push_back(residual(sys, traj.states[i], xd[i], pd[i], tol));
    if (i < edge || i >= N - edge) continue;
    const auto& r = out.nodes.back();
    out.worst.r_U = std::max(out.worst.r_U, r.r_U);
    out.worst.r_kin = std::max(out.worst.r_kin, r.r_kin);
    out.worst.r_leg = std::max(out.worst.r_leg, r.r_leg);
    out.worst.r_mom = std::max(out.worst.r_mom, r.r_mom);
    out.worst.pass = out.worst.pass && r.pass;
  }
  return out;
}

/// Largest absolute coordinate over all states; used to scale tolerances.
inline double state_scale(const Trajectory& traj) {
  double s = 0.0;
  for (const auto& st : traj.states)
    s = std::max({s, detail::inf_norm(st.x), detail::inf_norm(st.y), detail::inf_norm(st.p)});
  return s;
}

}  // namespace algmech
