#pragma once

// Independent oracles and generators shared by the unit tests and the
// acceptance binary. Nothing here calls the derivative machinery under test.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "algmech/hj.hpp"
#include "algmech/models.hpp"
#include "algmech/rng.hpp"

namespace algmech::testing {

/// Random polynomial in `vars` with monomials of total degree <= max_degree
/// and coefficients in [-2, 2], as expression text.
inline std::string random_polynomial(SplitMix64& rng, const std::vector<std::string>& vars, int max_degree = 4,
                                     int max_terms = 6) {
  const int terms = rng.integer(1, max_terms);
  std::string s;
  for (int t = 0; t < terms; ++t) {
    const double c = rng.uniform(-2.0, 2.0);
    std::string term = "(" + expr::format_number(c) + ")";
    int budget = rng.integer(0, max_degree);
    while (budget > 0) {
      const int k = rng.integer(1, budget);
      term += "*" + vars[rng.integer(0, static_cast<int>(vars.size()) - 1)] + (k > 1 ? "^" + std::to_string(k) : "");
      budget -= k;
    }
    s += (t ? " + " : "") + term;
  }
  return s;
}

/// Central difference of f along coordinate i with step h.
inline double fd1(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x, int i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

/// Fourth-order central difference of f along coordinate i.
inline double fd1_4(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x, int i,
                    double h) {
  const double x0 = x[i];
  double acc = 0.0;
  const double w[4] = {1.0, -8.0, 8.0, -1.0};
  const double off[4] = {-2.0, -1.0, 1.0, 2.0};
  for (int k = 0; k < 4; ++k) {
    x[i] = x0 + off[k] * h;
    acc += w[k] * f(x);
  }
  return acc / (12.0 * h);
}

/// Second derivative d2f/dxi dxj by nesting fourth-order central differences.
/// Exact (up to roundoff) for polynomials of degree <= 4.
inline double fd2_4(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x, int i,
                    int j, double h) {
  auto dj = [&](const std::vector<double>& y) { return fd1_4(f, y, j, h); };
  return fd1_4(dj, x, i, h);
}

inline Vector random_vector(SplitMix64& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Largest |x| and |y| gap between two trajectories on the same grid.
inline double trajectory_gap(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  const auto N = std::min(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < N; ++k) {
    worst = std::max(worst, max_abs(a.states[k].x - b.states[k].x));
    worst = std::max(worst, max_abs(a.states[k].y - b.states[k].y));
  }
  return worst;
}

struct HJScenario {
  std::string label;
  ModelBundle model;
  HJSection section;
  Vector x0;
  double h = 1e-3, T = 1.0;
  bool solves = true;  // whether the section satisfies the HJ equation
};

inline HJSection section_from_strings(const std::vector<std::string>& g, const std::vector<std::string>& gb) {
  HJSection s;
  for (const auto& e : g) s.gamma.push_back(expr::parse(e));
  for (const auto& e : gb) s.gammabar.push_back(expr::parse(e));
  return s;
}

inline std::string num(double v) { return "(" + expr::format_number(v) + ")"; }

/// Harmonic oscillator sections gamma = gammabar = sqrt(2E - x^2) + eps.
/// eps = 0 solves the HJ equation; eps != 0 keeps the hypotheses (the
/// Legendre relation is gammabar = gamma, closedness is automatic in one
/// dimension) but breaks the equation.
inline HJScenario oscillator_scenario(double E, double eps) {
  const std::string g = "sqrt(2*" + num(E) + " - x1^2)" + (eps != 0.0 ? " + " + num(eps) : "");
  return {"harmonic-oscillator E=" + expr::format_number(E) + " eps=" + expr::format_number(eps),
          get_model("harmonic-oscillator"), section_from_strings({g}, {g}), Vector::Zero(1), 1e-3, 1.0, eps == 0.0};
}

/// Free particle in the plane. Constant k solves the HJ equation; so does
/// the radial field (x - c)/|x - c|. gamma = k + eps H x with H symmetric
/// keeps closedness (gammabar is a gradient) and the Legendre relation but
/// violates the equation since gamma . dgamma = eps H (k + eps H x) != 0.
inline HJScenario free_constant_scenario(const Vector& k) {
  return {"free-particle k", get_model("free-particle"),
          section_from_strings({expr::format_number(k[0]), expr::format_number(k[1])},
                               {expr::format_number(k[0]), expr::format_number(k[1])}),
          Vector::Zero(2), 1e-3, 1.0, true};
}

inline HJScenario free_radial_scenario(const Vector& c) {
  const std::string dx = "(x1 - " + num(c[0]) + ")", dy = "(x2 - " + num(c[1]) + ")";
  const std::string r = "sqrt(" + dx + "^2 + " + dy + "^2)";
  return {"free-particle radial", get_model("free-particle"),
          section_from_strings({dx + "/" + r, dy + "/" + r}, {dx + "/" + r, dy + "/" + r}), Vector::Zero(2), 1e-3,
          1.0, true};
}

inline HJScenario free_perturbed_scenario(const Vector& k, const Eigen::Matrix2d& H, double eps) {
  std::vector<std::string> g;
  for (int a = 0; a < 2; ++a)
    g.push_back(num(k[a]) + " + " + num(eps * H(a, 0)) + "*x1 + " + num(eps * H(a, 1)) + "*x2");
  return {"free-particle perturbed", get_model("free-particle"), section_from_strings(g, g), Vector::Zero(2), 1e-3,
          1.0, false};
}

/// Seeded perturbation families: (true solutions, perturbed non-solutions).
inline std::vector<HJScenario> oscillator_family(SplitMix64& rng, int count) {
  std::vector<HJScenario> out;
  for (int i = 0; i < count; ++i) {
    const double E = rng.uniform(1.0, 2.0);
    const double mag = rng.uniform(0.05, 0.3);
    const double eps = rng.uniform() < 0.5 ? -mag : mag;
    if (i % 2 == 0)
      out.push_back(oscillator_scenario(E, 0.0));
    else
      out.push_back(oscillator_scenario(E, eps));
  }
  return out;
}

inline std::vector<HJScenario> free_family(SplitMix64& rng, int count) {
  std::vector<HJScenario> out;
  for (int i = 0; i < count; ++i) {
    const Vector k = random_vector(rng, 2, -1.0, 1.0);
    switch (i % 3) {
      case 0:
        out.push_back(free_constant_scenario(k));
        break;
      case 1: {
        Vector c = random_vector(rng, 2, -3.0, 3.0);
        if (c.norm() < 2.0) c *= 3.0 / c.norm();  // keep the centre away from the flow
        out.push_back(free_radial_scenario(c));
        break;
      }
      default: {
        // The HJ residual starts at eps H k; keep it well away from zero so
        // the verdict is not decided by the finite-difference allowance.
        Vector kk = k;
        if (kk.norm() < 0.3) kk *= 0.3 / kk.norm();
        Eigen::Matrix2d H;
        do {
          H(0, 0) = rng.uniform(-1.0, 1.0);
          H(1, 1) = rng.uniform(-1.0, 1.0);
          H(0, 1) = H(1, 0) = rng.uniform(-1.0, 1.0);
          H /= H.norm();
        } while ((H * Eigen::Vector2d(kk[0], kk[1])).norm() < 0.3 * kk.norm());
        const double mag = rng.uniform(0.05, 0.3);
        out.push_back(free_perturbed_scenario(kk, H, rng.uniform() < 0.5 ? -mag : mag));
      }
    }
  }
  return out;
}

}  // namespace algmech::testing
