#pragma once

// Hamilton-Jacobi sections x -> (gamma(x), gammabar(x)) in E + E*:
// hypotheses, the HJ residual, the base flow c' = rho(c) gamma(c), and the
// check that lifted base curves solve the implicit system exactly when the
// HJ equation holds.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "algmech/dynamics.hpp"

namespace algmech {

struct HJSection {
  std::vector<expr::Expression> gamma;
  std::vector<expr::Expression> gammabar;
};

/// HJSection compiled against a system, evaluated with first derivatives.
class CompiledSection {
 public:
  struct Values {
    Vector g, gb;
    Matrix Dg, Dgb;  // Dg(a, i) = d gamma^a / dx^i
  };

  CompiledSection(const ImplicitSystem& sys, const HJSection& s) : m_(sys.m()), n_(sys.n()) {
    if (static_cast<int>(s.gamma.size()) != n_ || static_cast<int>(s.gammabar.size()) != n_)
      throw BadParams("section components must have n entries");
    const auto& A = sys.algebroid();
    for (const auto& e : s.gamma) g_.push_back(compile(e, A.layout(), A.parameters(), "section gamma"));
    for (const auto& e : s.gammabar) gb_.push_back(compile(e, A.layout(), A.parameters(), "section gammabar"));
    layout_size_ = A.layout().size();
    wrt_ = A.layout().x_slots();
  }

  Values at(const Vector& x) const {
    Values v{Vector(n_), Vector(n_), Matrix(n_, m_), Matrix(n_, m_)};
    std::vector<double> in(layout_size_, 0.0);
    for (int i = 0; i < m_; ++i) in[i] = x[i];
    for (int a = 0; a < n_; ++a) {
      const auto j = detail::jet_at(g_[a], in, wrt_, false, x);
      v.g[a] = j.value;
      v.Dg.row(a) = j.gradient.transpose();
      const auto k = detail::jet_at(gb_[a], in, wrt_, false, x);
      v.gb[a] = k.value;
      v.Dgb.row(a) = k.gradient.transpose();
    }
    return v;
  }

 private:
  int m_, n_;
  std::vector<expr::Compiled> g_, gb_;
  std::size_t layout_size_ = 0;
  std::vector<int> wrt_;
};

struct InK {
  bool in_U = false;
  double legendre_gap = 0.0;  // |gammabar - dL/dy(x, gamma)|_inf
};

inline InK check_in_K(const ImplicitSystem& sys, const CompiledSection& s, const BasePoint& x, double tol) {
  const auto v = s.at(x.x);
  InK out;
  out.in_U = member_U(sys.constraint(), x, v.g, tol);
  out.legendre_gap = (v.gb - sys.lagrangian().derivatives({x.x, v.g}, false).Ly).cwiseAbs().maxCoeff();
  return out;
}

inline InK check_in_K(const ImplicitSystem& sys, const HJSection& s, const BasePoint& x, double tol) {
  return check_in_K(sys, CompiledSection(sys, s), x, tol);
}

/// Antisymmetric bilinear form of a matrix K on (v, w), summed over
/// index pairs b < d so that swapping the arguments flips the sign exactly.
inline double closedness_form(const Matrix& K, const Vector& v, const Vector& w) {
  double s = 0.0;
  for (int b = 0; b < K.rows(); ++b)
    for (int d = b + 1; d < K.cols(); ++d) s += K(b, d) * (v[b] * w[d] - v[d] * w[b]);
  return s;
}

/// d^E gammabar as a matrix at x.
inline Matrix closedness_matrix(const ImplicitSystem& sys, const CompiledSection& s, const Vector& x) {
  const auto v = s.at(x);
  return d_one_section(sys.algebroid().at(x), v.gb, v.Dgb);
}

/// Largest |d^E gammabar (v, w)| over pairs of spanning columns of U(x).
inline double check_closedness(const ImplicitSystem& sys, const CompiledSection& s, const BasePoint& x) {
  const Matrix K = closedness_matrix(sys, s, x.x);
  const Matrix S = sys.constraint().span_at(x.x);
  double worst = 0.0;
  for (int a = 0; a < S.cols(); ++a)
    for (int b = a + 1; b < S.cols(); ++b)
      worst = std::max(worst, std::abs(closedness_form(K, S.col(a), S.col(b))));
  return worst;
}

inline double check_closedness(const ImplicitSystem& sys, const HJSection& s, const BasePoint& x) {
  return check_closedness(sys, CompiledSection(sys, s), x);
}

/// Component a: (gamma^b d gammabar_b / dx^i - dL/dx^i(x, gamma)) rho^i_c s^c_a.
inline Vector hj_residual(const ImplicitSystem& sys, const CompiledSection& s, const BasePoint& x) {
  const auto v = s.at(x.x);
  const auto d = sys.lagrangian().derivatives({x.x, v.g}, false);
  const Vector g = v.Dgb.transpose() * v.g - d.Lx;
  const Matrix S = sys.constraint().span_at(x.x);
  return S.transpose() * (sys.algebroid().at(x.x).rho.transpose() * g);
}

inline Vector hj_residual(const ImplicitSystem& sys, const HJSection& s, const BasePoint& x) {
  return hj_residual(sys, CompiledSection(sys, s), x);
}

struct BaseTrajectory {
  std::vector<double> times;
  std::vector<Vector> xs;
  double h = 0.0;
};

/// rk4 on c' = rho(c) gamma(c).
inline BaseTrajectory base_flow(const ImplicitSystem& sys, const CompiledSection& s, const BasePoint& x0, double h,
                                double T) {
  if (!(h > 0.0) || !(T >= 0.0)) throw BadParams("step and horizon must be positive");
  const auto& A = sys.algebroid();
  auto f = [&](const Vector& x) -> Vector { return A.at(x).rho * s.at(x).g; };
  const long steps = std::lround(T / h);
  BaseTrajectory out;
  out.h = h;
  Vector x = x0.x;
  out.times.push_back(0.0);
  out.xs.push_back(x);
  for (long k = 1; k <= steps; ++k) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * h * k1);
    const Vector k3 = f(x + 0.5 * h * k2);
    const Vector k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    detail::check_finite(x, static_cast<int>(k));
    out.times.push_back(static_cast<double>(k) * h);
    out.xs.push_back(x);
  }
  return out;
}

inline BaseTrajectory base_flow(const ImplicitSystem& sys, const HJSection& s, const BasePoint& x0, double h,
                                double T) {
  return base_flow(sys, CompiledSection(sys, s), x0, h, T);
}

struct HJVerdict {
  bool hj_pass = false;
  bool lift_pass = false;
  bool consistent = false;
  double max_hj = 0.0;        // largest |hj_residual|_inf along the flow
  double max_lift = 0.0;      // largest residual of the lifted curve
  double lift_tol = 0.0;      // tol plus the finite-difference allowance
  double max_legendre_gap = 0.0;
  double max_closedness = 0.0;
  std::size_t nodes = 0;
};

/// Checks both sides of the HJ equivalence along the base flow from x0.
/// The hypotheses (gamma in U, Legendre relation, closedness on U) are
/// checked at every node and raise HypothesisViolated when they fail.
inline HJVerdict verify_theorem(const ImplicitSystem& sys, const HJSection& section, const BasePoint& x0, double h,
                                double T, double tol) {
  const CompiledSection s(sys, section);
  const auto flow = base_flow(sys, s, x0, h, T);
  HJVerdict out;
  out.nodes = flow.xs.size();

  Trajectory lifted;
  lifted.h = h;
  lifted.method = Method::rk4;
  lifted.times = flow.times;
  for (const auto& x : flow.xs) {
    const auto v = s.at(x);
    const double scale = 1.0 + std::max(detail::inf_norm(v.g), detail::inf_norm(v.gb));
    const auto k = check_in_K(sys, s, {x}, tol);
    if (!k.in_U) throw HypothesisViolated("gamma(x) in U(x)", to_std(x), distance_to_U(frame(sys.constraint(), x), v.g));
    if (k.legendre_gap > tol * scale) throw HypothesisViolated("gammabar = dL/dy(x, gamma)", to_std(x), k.legendre_gap);
    const double closed = check_closedness(sys, s, {x});
    if (closed > tol * scale * scale)
      throw HypothesisViolated("d gammabar vanishes on U x U", to_std(x), closed);
    out.max_legendre_gap = std::max(out.max_legendre_gap, k.legendre_gap);
    out.max_closedness = std::max(out.max_closedness, closed);
    out.max_hj = std::max(out.max_hj, detail::inf_norm(hj_residual(sys, s, {x})));
    lifted.states.push_back({x, v.g, v.gb});
  }

  const auto check = trajectory_residuals(sys, lifted, 2, tol);
  for (const auto& r : check.nodes) out.max_lift = std::max({out.max_lift, r.r_U, r.r_kin, r.r_leg, r.r_mom});
  const double scale = 1.0 + state_scale(lifted);
  out.lift_tol = tol + 10.0 * h * h * scale * scale;
  out.hj_pass = out.max_hj <= tol;
  out.lift_pass = out.max_lift <= out.lift_tol;
  out.consistent = out.hj_pass == out.lift_pass;
  return out;
}

}  // namespace algmech
