#pragma once

// Built-in models. Each is an ordinary ModelConfig (so it can be exported
// and reloaded) plus, where available, a hand-written classical integrator
// used as an independent reference.

#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "algmech/config.hpp"
#include "algmech/rng.hpp"

namespace algmech {

/// Reference integrator: (x0, y0, h, T) -> trajectory on the grid k h.
using Oracle = std::function<Trajectory(const Vector&, const Vector&, double, double)>;

struct ModelBundle {
  std::string name;
  std::string doc;
  ModelConfig config;
  BuiltModel built;
  bool regular = true;  // restricted Hessian invertible, so rk4 applies
  Oracle oracle;        // empty when the model has none

  const ImplicitSystem& system() const { return *built.system; }
  const LieAlgebroid& algebroid() const { return *built.algebroid; }
  Vector x0() const { return Eigen::Map<const Vector>(config.x0.data(), config.x0.size()); }
  Vector y0() const { return Eigen::Map<const Vector>(config.y0.data(), config.y0.size()); }

  const HJSection& section(const std::string& name) const {
    for (const auto& [k, s] : built.sections)
      if (k == name) return s;
    throw BadParams("model '" + this->name + "' has no section '" + name + "'");
  }

  BasePoint sample_base(SplitMix64& rng) const {
    Vector x(config.m);
    for (int i = 0; i < config.m; ++i) x[i] = rng.uniform(config.box[i].first, config.box[i].second);
    return {x};
  }
};

inline ModelBundle model_from_config(ModelConfig c) {
  ModelBundle b;
  b.name = c.name;
  b.doc = c.doc;
  b.built = build(c);
  b.config = std::move(c);
  return b;
}

namespace detail {

inline std::string num(double v) {
  const auto s = expr::format_number(v);
  return v < 0 ? "(" + s + ")" : s;
}

/// Fixed-step rk4 over z' = f(z) recording states through `unpack`.
template <class F, class Unpack>
Trajectory oracle_rk4(F f, Vector z, double h, double T, Unpack unpack) {
  Trajectory traj;
  traj.h = h;
  traj.method = Method::rk4;
  const long steps = std::lround(T / h);
  traj.times.push_back(0.0);
  traj.states.push_back(unpack(z));
  for (long k = 1; k <= steps; ++k) {
    const Vector k1 = f(z);
    const Vector k2 = f(z + 0.5 * h * k1);
    const Vector k3 = f(z + 0.5 * h * k2);
    const Vector k4 = f(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(z, static_cast<int>(k));
    traj.times.push_back(static_cast<double>(k) * h);
    traj.states.push_back(unpack(z));
  }
  return traj;
}

inline Vector cross(const Vector& a, const Vector& b) {
  return Vector(Eigen::Vector3d(a[0], a[1], a[2]).cross(Eigen::Vector3d(b[0], b[1], b[2])));
}

/// Reads a parameter object, rejecting unknown keys.
class Params {
 public:
  Params(const ojson& j, std::set<std::string> allowed, const std::string& model) : j_(j), model_(model) {
    if (j_.is_null()) j_ = ojson::object();
    if (!j_.is_object()) throw BadParams("parameters for '" + model + "' must be a JSON object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw BadParams("model '" + model + "' has no parameter '" + k + "'");
  }

  double number(const std::string& key, double fallback) const {
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_number()) throw BadParams("parameter '" + key + "' must be a number");
    return j_.at(key).get<double>();
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    if (!j_.contains(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw BadParams("parameter '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw BadParams("parameter '" + key + "' must contain numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// A 3x3 symmetric matrix given as a 3-vector (diagonal) or nested rows.
  Eigen::Matrix3d inertia(const std::string& key, const Eigen::Matrix3d& fallback) const {
    if (!j_.contains(key)) return fallback;
    const auto& v = j_.at(key);
    Eigen::Matrix3d I = Eigen::Matrix3d::Zero();
    auto bad = [&] { return BadParams("parameter '" + key + "' must be 3 numbers or a symmetric 3x3 matrix"); };
    if (!v.is_array() || v.size() != 3) throw bad();
    if (v[0].is_number()) {
      for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw bad();
        I(i, i) = v[i].get<double>();
      }
    } else {
      for (int i = 0; i < 3; ++i) {
        if (!v[i].is_array() || v[i].size() != 3) throw bad();
        for (int k = 0; k < 3; ++k) {
          if (!v[i][k].is_number()) throw bad();
          I(i, k) = v[i][k].get<double>();
        }
      }
      if ((I - I.transpose()).cwiseAbs().maxCoeff() > 0.0) throw bad();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(I);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw BadParams("inertia must be positive definite");
    return I;
  }

 private:
  ojson j_;
  std::string model_;
};

inline void add_inertia(ModelConfig& c, const Eigen::Matrix3d& I) {
  c.parameters = {{"I11", I(0, 0)}, {"I12", I(0, 1)}, {"I13", I(0, 2)},
                  {"I22", I(1, 1)}, {"I23", I(1, 2)}, {"I33", I(2, 2)}};
  c.lagrangian = "0.5*(I11*y1^2 + I22*y2^2 + I33*y3^2) + I12*y1*y2 + I13*y1*y3 + I23*y2*y3";
  c.m = 0;
  c.n = 3;
  c.anchor = {};
  c.structure = {{"0", "0", "1"}, {"0", "-1", "0"}, {"1", "0", "0"}};
  c.box = {};
  c.x0 = {};
}

inline ModelBundle free_particle(const ojson& params) {
  const Params P(params, {"d", "k"}, "free-particle");
  const double dd = P.number("d", 2);
  if (dd != std::floor(dd) || dd < 1 || dd > 8) throw BadParams("d must be an integer in [1, 8]");
  const int d = static_cast<int>(dd);
  std::vector<double> kdef;
  for (int i = 0; i < d; ++i) kdef.push_back(std::ldexp(1.0, -i));
  const auto k = P.list("k", kdef);
  if (static_cast<int>(k.size()) != d) throw BadParams("k must have d entries");
  ModelConfig c;
  c.name = "free-particle";
  c.doc = "Free particle on TQ over R^d, L = |y|^2 / 2, no constraints.";
  c.m = c.n = c.r = d;
  c.anchor.assign(d, std::vector<std::string>(d, "0"));
  for (int i = 0; i < d; ++i) c.anchor[i][i] = "1";
  c.structure.assign(d, std::vector<std::string>(LieAlgebroid::pairs(d), "0"));
  c.lagrangian = "0.5*(";
  for (int i = 1; i <= d; ++i) c.lagrangian += (i > 1 ? " + y" : "y") + std::to_string(i) + "^2";
  c.lagrangian += ")";
  c.box.assign(d, {-2.0, 2.0});
  SectionStrings s{"constant", {}, {}};
  for (double v : k) {
    s.gamma.push_back(expr::format_number(v));
    s.gammabar.push_back(expr::format_number(v));
  }
  c.hj_sections.push_back(s);
  c.x0.assign(d, 0.0);
  c.y0 = k;
  auto b = model_from_config(std::move(c));
  b.oracle = [](const Vector& x0, const Vector& y0, double h, double T) {
    Trajectory traj;
    traj.h = h;
    const long steps = std::lround(T / h);
    for (long i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) * h;
      traj.times.push_back(t);
      traj.states.push_back({x0 + t * y0, y0, y0});
    }
    return traj;
  };
  return b;
}

inline ModelBundle harmonic_oscillator(const ojson& params) {
  const Params P(params, {"k", "E"}, "harmonic-oscillator");
  const double k = P.number("k", 1.0), E = P.number("E", 1.0);
  if (!(k > 0.0) || !(E > 0.0)) throw BadParams("k and E must be positive");
  ModelConfig c;
  c.name = "harmonic-oscillator";
  c.doc = "Harmonic oscillator on TR, L = y^2/2 - k x^2/2; section 'energy' solves the HJ equation at energy E.";
  c.m = c.n = c.r = 1;
  c.parameters = {{"k", k}, {"E", E}};
  c.anchor = {{"1"}};
  c.structure = std::vector<std::vector<std::string>>(1);
  c.lagrangian = "0.5*y1^2 - 0.5*k*x1^2";
  const double edge = 0.85 * std::sqrt(2.0 * E / k);
  c.box = {{-edge, edge}};
  c.hj_sections.push_back({"energy", {"sqrt(2*E - k*x1^2)"}, {"sqrt(2*E - k*x1^2)"}});
  c.x0 = {0.0};
  c.y0 = {1.0};
  auto b = model_from_config(std::move(c));
  b.oracle = [k](const Vector& x0, const Vector& y0, double h, double T) {
    const double w = std::sqrt(k);
    Trajectory traj;
    traj.h = h;
    const long steps = std::lround(T / h);
    for (long i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) * h;
      Vector x(1), y(1);
      x[0] = x0[0] * std::cos(w * t) + y0[0] / w * std::sin(w * t);
      y[0] = -x0[0] * w * std::sin(w * t) + y0[0] * std::cos(w * t);
      traj.times.push_back(t);
      traj.states.push_back({x, y, y});
    }
    return traj;
  };
  return b;
}

inline ModelBundle pendulum(const ojson& params) {
  const Params P(params, {"k"}, "pendulum");
  const double k = P.number("k", 1.0);
  ModelConfig c;
  c.name = "pendulum";
  c.doc = "Planar pendulum on TR (angle chart), L = y^2/2 - k (1 - cos x).";
  c.m = c.n = c.r = 1;
  c.parameters = {{"k", k}};
  c.anchor = {{"1"}};
  c.structure = std::vector<std::vector<std::string>>(1);
  c.lagrangian = "0.5*y1^2 - k*(1 - cos(x1))";
  c.box = {{-3.0, 3.0}};
  c.x0 = {M_PI / 2};
  c.y0 = {0.0};
  auto b = model_from_config(std::move(c));
  b.oracle = [k](const Vector& x0, const Vector& y0, double h, double T) {
    Vector z(2);
    z << x0[0], y0[0];
    return oracle_rk4([k](const Vector& s) { return Vector(Eigen::Vector2d(s[1], -k * std::sin(s[0]))); }, z, h, T,
                      [](const Vector& s) { return State{s.head(1), s.tail(1), s.tail(1)}; });
  };
  return b;
}

inline ModelBundle rigid_body(const ojson& params) {
  const Params P(params, {"I"}, "rigid-body");
  const Eigen::Matrix3d I = P.inertia("I", Eigen::Vector3d(1, 2, 3).asDiagonal());
  ModelConfig c;
  c.name = "rigid-body";
  c.doc = "Free rigid body on so(3): rho = 0, C = epsilon, L = w^T I w / 2.";
  add_inertia(c, I);
  c.r = 3;
  c.y0 = {1.0, 1.0, 1.0};
  auto b = model_from_config(std::move(c));
  b.oracle = [I](const Vector&, const Vector& y0, double h, double T) {
    const Eigen::Matrix3d Iinv = I.inverse();
    const Matrix Id = I;
    return oracle_rk4(
        [&](const Vector& w) { return Vector(Iinv * Eigen::Vector3d(cross(Id * w, w))); }, y0, h, T,
        [&](const Vector& w) { return State{Vector(0), w, Id * w}; });
  };
  return b;
}

inline ModelBundle suslov(const ojson& params) {
  const Params P(params, {"I", "axis"}, "suslov");
  const Eigen::Matrix3d I = P.inertia("I", Eigen::Vector3d(1, 2, 3).asDiagonal());
  const auto av = P.list("axis", {0.0, 0.0, 1.0});
  if (av.size() != 3) throw BadParams("axis must have 3 entries");
  const Eigen::Vector3d axis(av[0], av[1], av[2]);
  if (!(axis.norm() > 0.0)) throw BadParams("axis must be nonzero");
  ModelConfig c;
  c.name = "suslov";
  c.doc = "Suslov problem: rigid body on so(3) with the constraint <axis, w> = 0.";
  add_inertia(c, I);
  c.r = 2;
  const Eigen::Vector3d e = axis.normalized();
  if (axis[0] == 0.0 && axis[1] == 0.0) {
    c.adapted = true;
  } else {
    // Complete from the coordinate vectors least aligned with the axis.
    int skip = 0;
    e.cwiseAbs().maxCoeff(&skip);
    c.adapted = false;
    c.subbundle.assign(3, {});
    for (int k = 0; k < 3; ++k) {
      if (k == skip) continue;
      const Eigen::Vector3d v = Eigen::Vector3d::Unit(k) - e[k] * e;
      for (int i = 0; i < 3; ++i) c.subbundle[i].push_back(num(v[i]));
    }
  }
  const Eigen::Vector3d w0 = Eigen::Vector3d(0.3, 0.4, 0.5) - e.dot(Eigen::Vector3d(0.3, 0.4, 0.5)) * e;
  c.y0 = {w0[0], w0[1], w0[2]};
  auto b = model_from_config(std::move(c));
  b.oracle = [I, axis](const Vector&, const Vector& y0, double h, double T) {
    const Eigen::Matrix3d Iinv = I.inverse();
    const Matrix Id = I;
    const Vector a = axis;
    return oracle_rk4(
        [&](const Vector& w) {
          const Vector f = cross(Id * w, w);
          const Vector Iinv_a = Iinv * a;
          const double lambda = -a.dot(Iinv * f) / a.dot(Iinv_a);
          return Vector(Iinv * (f + lambda * a));
        },
        y0, h, T, [&](const Vector& w) { return State{Vector(0), w, Id * w}; });
  };
  return b;
}

inline ModelBundle degenerate_demo(const ojson& params) {
  const Params P(params, {}, "degenerate-demo");
  ModelConfig c;
  c.name = "degenerate-demo";
  c.doc = "Rank-2 trivial algebroid over R with rho = (1, 0) and L = y1^2 / 2 (Hessian singular on E).";
  c.m = 1;
  c.n = c.r = 2;
  c.anchor = {{"1", "0"}};
  c.structure = {{"0"}, {"0"}};
  c.lagrangian = "0.5*y1^2";
  c.box = {{-1.0, 1.0}};
  c.x0 = {0.0};
  c.y0 = {1.0, 0.0};
  auto b = model_from_config(std::move(c));
  b.regular = false;
  return b;
}

inline ModelBundle affine_rank2(const ojson& params) {
  const Params P(params, {}, "affine-rank2");
  ModelConfig c;
  c.name = "affine-rank2";
  c.doc = "Rank-2 algebroid over R with rho = (1, x), C^1_12 = 1 and L = |y|^2/2 - x^2/2.";
  c.m = 1;
  c.n = c.r = 2;
  c.anchor = {{"1", "x1"}};
  c.structure = {{"1"}, {"0"}};
  c.lagrangian = "0.5*(y1^2 + y2^2) - 0.5*x1^2";
  c.box = {{-1.0, 1.0}};
  c.x0 = {0.2};
  c.y0 = {0.5, -0.3};
  auto b = model_from_config(std::move(c));
  b.oracle = [](const Vector& x0, const Vector& y0, double h, double T) {
    Vector z(3);
    z << x0[0], y0[0], y0[1];
    return oracle_rk4(
        [](const Vector& s) {
          const double x = s[0], y1 = s[1], y2 = s[2];
          return Vector(Eigen::Vector3d(y1 + x * y2, -x - y1 * y2, y1 * y1 - x * x));
        },
        z, h, T, [](const Vector& s) { return State{s.head(1), s.tail(2), s.tail(2)}; });
  };
  return b;
}

}  // namespace detail

struct ModelInfo {
  std::string name;
  std::string doc;
};

inline std::vector<std::string> model_names() {
  return {"free-particle", "pendulum", "harmonic-oscillator", "rigid-body", "suslov", "degenerate-demo",
          "affine-rank2"};
}

inline ModelBundle get_model(const std::string& name, const ojson& params = ojson::object()) {
  if (name == "free-particle") return detail::free_particle(params);
  if (name == "pendulum") return detail::pendulum(params);
  if (name == "harmonic-oscillator") return detail::harmonic_oscillator(params);
  if (name == "rigid-body") return detail::rigid_body(params);
  if (name == "suslov") return detail::suslov(params);
  if (name == "degenerate-demo") return detail::degenerate_demo(params);
  if (name == "affine-rank2") return detail::affine_rank2(params);
  throw UnknownModel(name);
}

inline std::vector<ModelInfo> list_models() {
  std::vector<ModelInfo> out;
  for (const auto& n : model_names()) out.push_back({n, get_model(n).doc});
  return out;
}

/// Reference trajectory from the model's hand-written integrator.
inline Trajectory oracle_trajectory(const ModelBundle& b, const Vector& x0, const Vector& y0, double h, double T) {
  if (!b.oracle) throw BadParams("model '" + b.name + "' has no oracle");
  return b.oracle(x0, y0, h, T);
}

}  // namespace algmech
