#pragma once

// Lie algebroids in a single chart: anchor rho^i_a(x) and structure
// functions C^c_ab(x), the exterior differential d^E in low degree, the
// linear Poisson bracket on the dual bundle, and constraint subbundles.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "algmech/error.hpp"
#include "algmech/expr.hpp"

namespace algmech {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct BasePoint {
  Vector x;
};

struct FiberPoint {
  Vector x;
  Vector y;
};

struct DualPoint {
  Vector x;
  Vector p;
};

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Variable naming shared by every model expression: x1..xm, y1..yn, p1..pn.
class Layout {
 public:
  Layout(int m, int n) : m_(m), n_(n) {
    for (int i = 1; i <= m; ++i) names_.push_back("x" + std::to_string(i));
    for (int a = 1; a <= n; ++a) names_.push_back("y" + std::to_string(a));
    for (int a = 1; a <= n; ++a) names_.push_back("p" + std::to_string(a));
  }

  int m() const { return m_; }
  int n() const { return n_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  std::vector<int> x_slots() const { return range(0, m_); }
  std::vector<int> y_slots() const { return range(m_, n_); }
  std::vector<int> p_slots() const { return range(m_ + n_, n_); }
  std::vector<int> xy_slots() const { return range(0, m_ + n_); }
  std::vector<int> xp_slots() const {
    auto s = x_slots();
    auto p = p_slots();
    s.insert(s.end(), p.begin(), p.end());
    return s;
  }

  std::vector<double> pack(const Vector& x, const Vector* y = nullptr, const Vector* p = nullptr) const {
    std::vector<double> v(size(), 0.0);
    for (int i = 0; i < m_; ++i) v[i] = x[i];
    if (y)
      for (int a = 0; a < n_; ++a) v[m_ + a] = (*y)[a];
    if (p)
      for (int a = 0; a < n_; ++a) v[m_ + n_ + a] = (*p)[a];
    return v;
  }

 private:
  static std::vector<int> range(int start, int count) {
    std::vector<int> s(count);
    for (int i = 0; i < count; ++i) s[i] = start + i;
    return s;
  }

  int m_, n_;
  std::vector<std::string> names_;
};

/// Compiles `e` against the layout, folding in named parameters. Throws
/// ConfigError when the expression references anything else.
inline expr::Compiled compile(const expr::Expression& e, const Layout& layout, const expr::Binding& params,
                              const std::string& what) {
  expr::Compiled c(e, layout.names(), params);
  if (!c.unbound().empty())
    throw ConfigError(what + ": unknown variable '" + c.unbound().front() + "' in '" + expr::to_string(e) + "'");
  return c;
}

namespace detail {

inline double value_at(const expr::Compiled& c, const std::vector<double>& v, const Vector& x) {
  auto r = c.eval(v);
  if (!r) throw EvaluationError(r.fault().message, to_std(x));
  return r.value();
}

inline expr::Jet jet_at(const expr::Compiled& c, const std::vector<double>& v, const std::vector<int>& wrt,
                        bool hessian, const Vector& x) {
  auto r = c.jet(v, wrt, hessian);
  if (!r) throw EvaluationError(r.fault().message, to_std(x));
  return std::move(r.value());
}

}  // namespace detail

/// Lie algebroid of rank n over an m-dimensional chart.
///
/// Only the n(n-1)/2 structure functions C^c_ab with a < b are stored; the
/// remaining entries are produced by antisymmetry when evaluated, so the
/// evaluated C is exactly antisymmetric in its lower indices.
class LieAlgebroid {
 public:
  /// Anchor, structure functions and their first derivatives at a base point.
  struct Local {
    Matrix rho;                          // m x n, rho(i, a) = rho^i_a
    std::vector<Matrix> C;               // C[c](a, b) = C^c_ab
    std::vector<Matrix> drho;            // drho[j] = d rho / d x^j
    std::vector<std::vector<Matrix>> dC; // dC[c][i] = d C^c / d x^i
  };

  /// `anchor` is m rows of n expressions; `structure` is n rows (one per
  /// upper index c) of n(n-1)/2 expressions ordered (1,2),(1,3),..,(2,3),..
  LieAlgebroid(int m, int n, std::vector<std::vector<expr::Expression>> anchor,
               std::vector<std::vector<expr::Expression>> structure, expr::Binding params = {})
      : layout_(m, n), anchor_(std::move(anchor)), structure_(std::move(structure)), params_(std::move(params)) {
    if (m < 0 || n < 1) throw ConfigError("algebroid dimensions must satisfy m >= 0, n >= 1");
    if (static_cast<int>(anchor_.size()) != m) throw ConfigError("anchor must have m rows");
    for (const auto& row : anchor_)
      if (static_cast<int>(row.size()) != n) throw ConfigError("anchor rows must have n entries");
    if (structure_.empty()) structure_.assign(n, std::vector<expr::Expression>(pairs(n), expr::num(0.0)));
    if (static_cast<int>(structure_.size()) != n) throw ConfigError("structure must have n rows");
    for (const auto& row : structure_)
      if (static_cast<int>(row.size()) != pairs(n)) throw ConfigError("structure rows must have n(n-1)/2 entries");
    for (const auto& row : anchor_)
      for (const auto& e : row) anchor_code_.push_back(compile(e, layout_, params_, "anchor"));
    for (const auto& row : structure_)
      for (const auto& e : row) structure_code_.push_back(compile(e, layout_, params_, "structure"));
  }

  int base_dim() const { return layout_.m(); }
  int rank() const { return layout_.n(); }
  const Layout& layout() const { return layout_; }
  const expr::Binding& parameters() const { return params_; }
  const std::vector<std::vector<expr::Expression>>& anchor() const { return anchor_; }
  const std::vector<std::vector<expr::Expression>>& structure() const { return structure_; }

  static int pairs(int n) { return n * (n - 1) / 2; }
  /// Position of the pair (a, b), a < b, in a structure row.
  static int pair_index(int a, int b, int n) { return a * n - a * (a + 1) / 2 + (b - a - 1); }

  Local at(const Vector& x, bool derivatives = false) const {
    const int m = base_dim(), n = rank();
    const auto v = layout_.pack(x);
    const auto wrt = layout_.x_slots();
    Local loc;
    loc.rho.setZero(m, n);
    loc.C.assign(n, Matrix::Zero(n, n));
    if (derivatives) {
      loc.drho.assign(m, Matrix::Zero(m, n));
      loc.dC.assign(n, std::vector<Matrix>(m, Matrix::Zero(n, n)));
    }
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < n; ++a) {
        const auto& code = anchor_code_[i * n + a];
        if (!derivatives) {
          loc.rho(i, a) = detail::value_at(code, v, x);
          continue;
        }
        const auto j = detail::jet_at(code, v, wrt, false, x);
        loc.rho(i, a) = j.value;
        for (int k = 0; k < m; ++k) loc.drho[k](i, a) = j.gradient[k];
      }
    const int np = pairs(n);
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const auto& code = structure_code_[c * np + pair_index(a, b, n)];
          if (!derivatives) {
            const double val = detail::value_at(code, v, x);
            loc.C[c](a, b) = val;
            loc.C[c](b, a) = -val;
            continue;
          }
          const auto j = detail::jet_at(code, v, wrt, false, x);
          loc.C[c](a, b) = j.value;
          loc.C[c](b, a) = -j.value;
          for (int k = 0; k < m; ++k) {
            loc.dC[c][k](a, b) = j.gradient[k];
            loc.dC[c][k](b, a) = -j.gradient[k];
          }
        }
    return loc;
  }

 private:
  Layout layout_;
  std::vector<std::vector<expr::Expression>> anchor_;
  std::vector<std::vector<expr::Expression>> structure_;
  expr::Binding params_;
  std::vector<expr::Compiled> anchor_code_;
  std::vector<expr::Compiled> structure_code_;
};

/// (C p)_ab = C^c_ab p_c. Antisymmetric whenever each C[c] is.
inline Matrix contract(const std::vector<Matrix>& C, const Vector& p) {
  const int n = static_cast<int>(C.size());
  Matrix out = Matrix::Zero(n, n);
  for (int c = 0; c < n; ++c) out += p[c] * C[c];
  return out;
}

struct StructureReport {
  double max_residual_eq1 = 0.0;
  double max_residual_eq2 = 0.0;
  bool pass = false;
  std::vector<double> worst_point;
};

/// Residuals of the anchored bracket condition (eq1) and the Jacobi
/// identity with anchor derivative terms (eq2) over the sample points.
inline StructureReport validate_structure(const LieAlgebroid& A, const std::vector<BasePoint>& points, double tol) {
  if (points.empty()) throw BadParams("validate_structure needs at least one sample point");
  const int m = A.base_dim(), n = A.rank();
  StructureReport rep;
  double worst = -1.0;
  for (const auto& pt : points) {
    const auto L = A.at(pt.x, true);
    double local = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int i = 0; i < m; ++i) {
          double s = 0.0;
          for (int j = 0; j < m; ++j) s += L.rho(j, a) * L.drho[j](i, b) - L.rho(j, b) * L.drho[j](i, a);
          for (int c = 0; c < n; ++c) s -= L.rho(i, c) * L.C[c](a, b);
          rep.max_residual_eq1 = std::max(rep.max_residual_eq1, std::abs(s));
          local = std::max(local, std::abs(s));
        }
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          for (int c = b + 1; c < n; ++c) {
            const int idx[3][3] = {{a, b, c}, {b, c, a}, {c, a, b}};
            double s = 0.0;
            for (const auto& t : idx) {
              for (int i = 0; i < m; ++i) s += L.rho(i, t[0]) * L.dC[d][i](t[1], t[2]);
              for (int v = 0; v < n; ++v) s += L.C[d](t[0], v) * L.C[v](t[1], t[2]);
            }
            rep.max_residual_eq2 = std::max(rep.max_residual_eq2, std::abs(s));
            local = std::max(local, std::abs(s));
          }
    if (local > worst) {
      worst = local;
      rep.worst_point = to_std(pt.x);
    }
  }
  rep.pass = rep.max_residual_eq1 <= tol && rep.max_residual_eq2 <= tol;
  return rep;
}

/// Coefficients of d^E f in the dual basis: (df/dx^i rho^i_a)_a.
inline Vector d_function(const LieAlgebroid& A, const expr::Expression& f, const BasePoint& x) {
  const auto code = compile(f, A.layout(), A.parameters(), "scalar field");
  const auto j = detail::jet_at(code, A.layout().pack(x.x), A.layout().x_slots(), false, x.x);
  return A.at(x.x).rho.transpose() * j.gradient;
}

/// d^E theta evaluated on basis pairs: entry (b, c) is d^E theta(e_b, e_c)
/// = rho(e_b) theta_c - rho(e_c) theta_b - theta_a C^a_bc. This is the full
/// antisymmetrization of the coefficient on e^b ^ e^c, with the pairing
/// <e^b ^ e^c, (e_u, e_v)> = delta^b_u delta^c_v - delta^b_v delta^c_u.
///
/// `jacobian(c, i)` is d theta_c / d x^i.
inline Matrix d_one_section(const LieAlgebroid::Local& L, const Vector& theta, const Matrix& jacobian) {
  const int n = static_cast<int>(theta.size());
  const Matrix J = jacobian * L.rho;  // J(c, b) = d theta_c / dx^i rho^i_b
  const Matrix Ct = contract(L.C, theta);
  Matrix out = Matrix::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int c = b + 1; c < n; ++c) {
      const double v = J(c, b) - J(b, c) - Ct(b, c);
      out(b, c) = v;
      out(c, b) = -v;
    }
  return out;
}

inline Matrix d_one_section(const LieAlgebroid& A, const std::vector<expr::Expression>& theta, const BasePoint& x) {
  const int n = A.rank(), m = A.base_dim();
  if (static_cast<int>(theta.size()) != n) throw BadParams("one-section must have n components");
  const auto v = A.layout().pack(x.x);
  Vector values(n);
  Matrix jac(n, m);
  for (int c = 0; c < n; ++c) {
    const auto j = detail::jet_at(compile(theta[c], A.layout(), A.parameters(), "one-section"), v,
                                  A.layout().x_slots(), false, x.x);
    values[c] = j.value;
    jac.row(c) = j.gradient.transpose();
  }
  return d_one_section(A.at(x.x), values, jac);
}

/// Linear Poisson bracket on the dual bundle from gradients split into base
/// and momentum parts.
inline double poisson_bracket(const LieAlgebroid::Local& L, const Vector& p, const Vector& Fx, const Vector& Fp,
                              const Vector& Gx, const Vector& Gp) {
  const Matrix Cp = contract(L.C, p);
  return Fx.dot(L.rho * Gp) - Gx.dot(L.rho * Fp) - Fp.dot(Cp * Gp);
}

inline double poisson_bracket(const LieAlgebroid& A, const expr::Expression& F, const expr::Expression& G,
                              const DualPoint& pt) {
  const auto& lay = A.layout();
  const int m = A.base_dim(), n = A.rank();
  const auto v = lay.pack(pt.x, nullptr, &pt.p);
  const auto wrt = lay.xp_slots();
  const auto jf = detail::jet_at(compile(F, lay, A.parameters(), "bracket argument"), v, wrt, false, pt.x);
  const auto jg = detail::jet_at(compile(G, lay, A.parameters(), "bracket argument"), v, wrt, false, pt.x);
  return poisson_bracket(A.at(pt.x), pt.p, jf.gradient.head(m), jf.gradient.tail(n), jg.gradient.head(m),
                         jg.gradient.tail(n));
}

// ---------------------------------------------------------------------------
// Subbundles

/// Constant-rank subbundle U of E given by an n x r spanning map x -> U(x).
/// `adapted` marks the special case U(x) = span(e_1, .., e_r).
class Subbundle {
 public:
  Subbundle(const Layout& layout, int r, std::vector<std::vector<expr::Expression>> span, bool adapted,
            const expr::Binding& params = {})
      : n_(layout.n()), r_(r), adapted_(adapted), span_(std::move(span)) {
    if (r < 0 || r > n_) throw ConfigError("subbundle rank must lie in [0, n]");
    if (static_cast<int>(span_.size()) != n_) throw ConfigError("subbundle span must have n rows");
    for (const auto& row : span_) {
      if (static_cast<int>(row.size()) != r) throw ConfigError("subbundle span rows must have r entries");
      for (const auto& e : row) {
        code_.push_back(compile(e, layout, params, "subbundle"));
        constant_ = constant_ && expr::free_variables(e).empty();
      }
    }
    m_ = layout.m();
    x_slots_ = layout.x_slots();
    layout_size_ = layout.size();
  }

  /// U = span(e_1, .., e_r).
  static Subbundle adapted(const Layout& layout, int r) {
    std::vector<std::vector<expr::Expression>> span(layout.n(), std::vector<expr::Expression>(r));
    for (int a = 0; a < layout.n(); ++a)
      for (int b = 0; b < r; ++b) span[a][b] = expr::num(a == b ? 1.0 : 0.0);
    return Subbundle(layout, r, std::move(span), true);
  }
  static Subbundle full(const Layout& layout) { return adapted(layout, layout.n()); }

  int rank() const { return r_; }
  int fiber_rank() const { return n_; }
  bool is_adapted() const { return adapted_; }
  /// True when the spanning columns do not depend on the base point.
  bool is_constant() const { return constant_; }
  const std::vector<std::vector<expr::Expression>>& span() const { return span_; }

  Matrix span_at(const Vector& x) const {
    Matrix S(n_, r_);
    std::vector<double> v(layout_size_, 0.0);
    for (int i = 0; i < m_; ++i) v[i] = x[i];
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < r_; ++b) S(a, b) = detail::value_at(code_[a * r_ + b], v, x);
    return S;
  }

  /// dS[i] = d S / d x^i.
  std::vector<Matrix> span_derivatives(const Vector& x) const {
    std::vector<Matrix> dS(m_, Matrix::Zero(n_, r_));
    if (constant_) return dS;
    std::vector<double> v(layout_size_, 0.0);
    for (int i = 0; i < m_; ++i) v[i] = x[i];
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < r_; ++b) {
        const auto j = detail::jet_at(code_[a * r_ + b], v, x_slots_, false, x);
        for (int i = 0; i < m_; ++i) dS[i](a, b) = j.gradient[i];
      }
    return dS;
  }

 private:
  int n_, r_, m_ = 0;
  bool adapted_;
  bool constant_ = true;
  std::vector<std::vector<expr::Expression>> span_;
  std::vector<expr::Compiled> code_;
  std::vector<int> x_slots_;
  std::size_t layout_size_ = 0;
};

/// Orthonormal bases of U(x) and of its Euclidean complement (identified
/// with the annihilator U°(x) through the coordinate pairing).
struct SubbundleFrame {
  Matrix span;        // n x r, the raw spanning columns
  Matrix basis;       // n x r, orthonormal
  Matrix complement;  // n x (n - r), orthonormal
};

/// Numerical rank uses the threshold tol * (largest singular value).
inline SubbundleFrame frame(const Subbundle& U, const Vector& x, double tol = 1e-9) {
  const int n = U.fiber_rank(), r = U.rank();
  SubbundleFrame f;
  f.span = U.span_at(x);
  if (r == 0) {
    f.basis.resize(n, 0);
    f.complement = Matrix::Identity(n, n);
    return f;
  }
  Eigen::JacobiSVD<Matrix> svd(f.span, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  int found = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[0] > 0.0 && s[i] > tol * s[0]) ++found;
  if (found != r) throw RankDeficient(r, found);
  f.basis = svd.matrixU().leftCols(r);
  f.complement = svd.matrixU().rightCols(n - r);
  return f;
}

/// n - r orthonormal covectors spanning U°(x), as columns.
inline Matrix annihilator(const Subbundle& U, const BasePoint& x, double tol = 1e-9) {
  return frame(U, x.x, tol).complement;
}

inline double distance_to_U(const SubbundleFrame& f, const Vector& v) {
  return (v - f.basis * (f.basis.transpose() * v)).norm();
}

inline bool member_U(const Subbundle& U, const BasePoint& x, const Vector& v, double tol = 1e-9) {
  return distance_to_U(frame(U, x.x, tol), v) <= tol * (1.0 + v.norm());
}

/// Largest |xi . u| over the spanning columns u.
inline double annihilator_gap(const SubbundleFrame& f, const Vector& xi) {
  if (f.span.cols() == 0) return 0.0;
  return (f.span.transpose() * xi).cwiseAbs().maxCoeff();
}

inline bool member_Uann(const Subbundle& U, const BasePoint& x, const Vector& xi, double tol = 1e-9) {
  return annihilator_gap(frame(U, x.x, tol), xi) <= tol * (1.0 + xi.norm());
}

}  // namespace algmech
