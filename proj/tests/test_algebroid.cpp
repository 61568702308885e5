#include "algmech/algebroid.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

namespace algmech {
namespace {

using expr::Expression;
using expr::num;
using expr::parse;
using Rows = std::vector<std::vector<Expression>>;

Rows rows(const std::vector<std::vector<std::string>>& text) {
  Rows out;
  for (const auto& r : text) {
    out.emplace_back();
    for (const auto& e : r) out.back().push_back(parse(e));
  }
  return out;
}

// so(3) over a point: rho = 0, C^c_ab = eps_abc. Pairs ordered (1,2),(1,3),(2,3).
LieAlgebroid so3() { return LieAlgebroid(0, 3, {}, rows({{"0", "0", "1"}, {"0", "-1", "0"}, {"1", "0", "0"}})); }

LieAlgebroid tangent_plane() { return LieAlgebroid(2, 2, rows({{"1", "0"}, {"0", "1"}}), {}); }

LieAlgebroid affine(bool broken) {
  return LieAlgebroid(1, 2, rows({{"1", "x1"}}), rows({{broken ? "0" : "1"}, {"0"}}));
}

// Action algebroid of so(3) on R^3: rho(e_a)(x) = x cross e_a, i.e.
// rho^i_a = eps_iaj x_j.
LieAlgebroid action_so3() {
  return LieAlgebroid(3, 3, rows({{"0", "-x3", "x2"}, {"x3", "0", "-x1"}, {"-x2", "x1", "0"}}),
                      rows({{"0", "0", "1"}, {"0", "-1", "0"}, {"1", "0", "0"}}));
}

std::vector<BasePoint> sample(SplitMix64& rng, int m, int count) {
  std::vector<BasePoint> pts;
  for (int i = 0; i < count; ++i) pts.push_back({testing::random_vector(rng, m)});
  return pts;
}

TEST(AlgebroidTest, StoredStructureIsAntisymmetric) {
  SplitMix64 rng(1);
  const auto A = action_so3();
  for (const auto& pt : sample(rng, 3, 20)) {
    const auto L = A.at(pt.x, true);
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ((L.C[c] + L.C[c].transpose()).cwiseAbs().maxCoeff(), 0.0);
      for (const auto& d : L.dC[c]) EXPECT_EQ((d + d.transpose()).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(AlgebroidTest, ShapeErrors) {
  EXPECT_THROW(LieAlgebroid(1, 2, rows({{"1"}}), {}), ConfigError);
  EXPECT_THROW(LieAlgebroid(1, 2, rows({{"1", "0"}}), rows({{"0", "1"}, {"0"}})), ConfigError);
  EXPECT_THROW(LieAlgebroid(1, 2, rows({{"1", "q"}}), {}), ConfigError);
}

TEST(ValidateStructureTest, Examples) {
  const std::vector<BasePoint> pt0 = {{Vector(0)}};
  const auto s = validate_structure(so3(), pt0, 1e-12);
  EXPECT_EQ(s.max_residual_eq1, 0.0);
  EXPECT_EQ(s.max_residual_eq2, 0.0);
  EXPECT_TRUE(s.pass);

  SplitMix64 rng(2);
  const auto pts = sample(rng, 1, 10);
  const auto good = validate_structure(affine(false), pts, 1e-12);
  EXPECT_EQ(good.max_residual_eq1, 0.0);
  EXPECT_EQ(good.max_residual_eq2, 0.0);
  EXPECT_TRUE(good.pass);

  const auto bad = validate_structure(affine(true), pts, 1e-10);
  EXPECT_NEAR(bad.max_residual_eq1, 1.0, 1e-15);
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.worst_point.size(), 1u);

  EXPECT_THROW(validate_structure(so3(), {}, 1e-10), BadParams);
}

TEST(ValidateStructureTest, ActionAlgebroidIsValid) {
  SplitMix64 rng(3);
  const auto rep = validate_structure(action_so3(), sample(rng, 3, 100), 1e-10);
  EXPECT_LE(rep.max_residual_eq1, 1e-12);
  EXPECT_LE(rep.max_residual_eq2, 1e-12);
  EXPECT_TRUE(rep.pass);
}

TEST(ValidateStructureTest, WrongSignAnchorFails) {
  const LieAlgebroid A(3, 3, rows({{"0", "x3", "-x2"}, {"-x3", "0", "x1"}, {"x2", "-x1", "0"}}),
                       rows({{"0", "0", "1"}, {"0", "-1", "0"}, {"1", "0", "0"}}));
  SplitMix64 rng(4);
  EXPECT_FALSE(validate_structure(A, sample(rng, 3, 10), 1e-10).pass);
}

TEST(ValidateStructureTest, JacobiViolationIsSeen) {
  // Constant C with C^1_12 = C^2_23 = C^3_31 = 1 (pairs (1,2),(1,3),(2,3)):
  // not the structure constants of a Lie algebra.
  const LieAlgebroid A(0, 3, {}, rows({{"1", "0", "0"}, {"0", "0", "1"}, {"0", "-1", "0"}}));
  const auto rep = validate_structure(A, {{Vector(0)}}, 1e-10);
  EXPECT_EQ(rep.max_residual_eq1, 0.0);
  EXPECT_GT(rep.max_residual_eq2, 0.5);
}

TEST(DFunctionTest, Examples) {
  EXPECT_TRUE(d_function(tangent_plane(), parse("x1^2"), {Vector::Unit(2, 0)}).isApprox(Vector::Unit(2, 0) * 2.0));
  EXPECT_EQ(d_function(so3(), parse("3"), {Vector(0)}), Vector::Zero(3));
  Vector x(1);
  x << 2.0;
  const Vector d = d_function(affine(false), parse("x1"), {x});
  EXPECT_EQ(d[0], 1.0);
  EXPECT_EQ(d[1], 2.0);
}

TEST(DOneSectionTest, Examples) {
  SplitMix64 rng(5);
  const auto tq = tangent_plane();
  const std::vector<Expression> gradW = {parse("2*x1*x2 + cos(x1)"), parse("x1^2 + 3*x2^2")};
  for (const auto& pt : sample(rng, 2, 10)) EXPECT_LE(d_one_section(tq, gradW, pt).cwiseAbs().maxCoeff(), 1e-14);

  const auto M = d_one_section(so3(), {num(0), num(0), num(1)}, {Vector(0)});
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 1) = -1.0;
  expected(1, 0) = 1.0;
  EXPECT_EQ(M, expected);

  const auto Z = d_one_section(action_so3(), {num(0), num(0), num(0)}, {Vector::Ones(3)});
  EXPECT_EQ(Z, Matrix::Zero(3, 3));
}

TEST(DOneSectionTest, ExactlyAntisymmetric) {
  SplitMix64 rng(6);
  const auto A = action_so3();
  const std::vector<Expression> theta = {parse("x1*x2"), parse("sin(x3)"), parse("x1^3 - x2")};
  for (const auto& pt : sample(rng, 3, 20)) {
    const auto M = d_one_section(A, theta, pt);
    EXPECT_EQ((M + M.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

// d(d f) = 0 with the Jacobian of d f taken by finite differences, so the
// check does not reuse the jet machinery for the second derivatives.
void expect_dd_zero(const LieAlgebroid& A, const Expression& f, const std::vector<BasePoint>& pts) {
  const int m = A.base_dim(), n = A.rank();
  for (const auto& pt : pts) {
    Matrix jac(n, m);
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < m; ++i) {
        auto comp = [&](const std::vector<double>& y) {
          return d_function(A, f, {Eigen::Map<const Vector>(y.data(), m)})[c];
        };
        jac(c, i) = testing::fd1_4(comp, to_std(pt.x), i, 1e-3);
      }
    const auto M = d_one_section(A.at(pt.x), d_function(A, f, pt), jac);
    EXPECT_LE(M.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(DOneSectionTest, SquareOfDifferentialVanishes) {
  SplitMix64 rng(7);
  expect_dd_zero(action_so3(), parse("x1^2*x3 + sin(x2) - x1*x2*x3"), sample(rng, 3, 100));
  expect_dd_zero(affine(false), parse("exp(x1) + x1^3"), sample(rng, 1, 100));
  expect_dd_zero(tangent_plane(), parse("x1*x2^2 + cos(x1)"), sample(rng, 2, 100));
}

TEST(DOneSectionTest, BrokenStructureBreaksSquare) {
  const auto A = affine(true);
  Vector x(1);
  x << 0.5;
  const Vector df = d_function(A, parse("x1"), {x});  // (1, x1)
  Matrix jac(2, 1);
  jac << 0.0, 1.0;
  EXPECT_NEAR(std::abs(d_one_section(A.at(x), df, jac)(0, 1)), 1.0, 1e-15);
}

TEST(PoissonBracketTest, Examples) {
  Vector p(3);
  p << 0, 0, 2;
  EXPECT_EQ(poisson_bracket(so3(), parse("p1"), parse("p2"), {Vector(0), p}), -2.0);
  SplitMix64 rng(8);
  const auto tq = tangent_plane();
  for (int i = 0; i < 10; ++i) {
    const DualPoint pt{testing::random_vector(rng, 2), testing::random_vector(rng, 2)};
    EXPECT_EQ(poisson_bracket(tq, parse("x1"), parse("p1"), pt), 1.0);
    EXPECT_EQ(poisson_bracket(tq, parse("x1"), parse("p2"), pt), 0.0);
    const auto F = parse("x1*p2 + sin(x2)*p1^2");
    EXPECT_EQ(poisson_bracket(tq, F, F, pt), 0.0);
  }
}

TEST(PoissonBracketTest, BilinearAntisymmetricLeibniz) {
  SplitMix64 rng(9);
  const auto A = action_so3();
  const std::vector<std::string> vars = {"x1", "x2", "x3", "p1", "p2", "p3"};
  for (int i = 0; i < 100; ++i) {
    const auto F = parse(testing::random_polynomial(rng, vars, 3, 3));
    const auto G = parse(testing::random_polynomial(rng, vars, 3, 3));
    const auto H = parse(testing::random_polynomial(rng, vars, 3, 3));
    const DualPoint pt{testing::random_vector(rng, 3), testing::random_vector(rng, 3)};
    const double fg = poisson_bracket(A, F, G, pt), gf = poisson_bracket(A, G, F, pt);
    const double fh = poisson_bracket(A, F, H, pt);
    EXPECT_NEAR(fg, -gf, 1e-10);
    EXPECT_NEAR(poisson_bracket(A, F, num(2.5) * G + H, pt), 2.5 * fg + fh, 1e-10 * (1 + std::abs(fg) + std::abs(fh)));
    const auto binding = [&] {
      expr::Binding b;
      for (int k = 0; k < 3; ++k) {
        b["x" + std::to_string(k + 1)] = pt.x[k];
        b["p" + std::to_string(k + 1)] = pt.p[k];
      }
      return b;
    }();
    const double g = expr::eval(G, binding).value(), h = expr::eval(H, binding).value();
    EXPECT_NEAR(poisson_bracket(A, F, G * H, pt), fg * h + g * fh, 1e-10 * (1 + std::abs(fg * h) + std::abs(g * fh)));
  }
}

// Brackets of coordinate functions as expressions: {x^i, p_a} = rho^i_a,
// {p_a, p_b} = -C^c_ab p_c, {x^i, x^j} = 0.
Expression coordinate_bracket(const LieAlgebroid& A, int u, int v) {
  const int m = A.base_dim(), n = A.rank();
  auto structure = [&](int c, int a, int b) {
    if (a == b) return num(0);
    const auto& e = A.structure()[c][LieAlgebroid::pair_index(std::min(a, b), std::max(a, b), n)];
    return a < b ? e : -e;
  };
  if (u < m && v < m) return num(0);
  if (u < m) return A.anchor()[u][v - m];
  if (v < m) return -A.anchor()[v][u - m];
  Expression s = num(0);
  for (int c = 0; c < n; ++c) s = s - structure(c, u - m, v - m) * expr::var("p" + std::to_string(c + 1));
  return s;
}

Expression coordinate(const LieAlgebroid& A, int u) {
  return u < A.base_dim() ? expr::var("x" + std::to_string(u + 1)) : expr::var("p" + std::to_string(u - A.base_dim() + 1));
}

void expect_jacobi(const LieAlgebroid& A, SplitMix64& rng) {
  const int N = A.base_dim() + A.rank();
  for (int k = 0; k < 100; ++k) {
    const DualPoint pt{testing::random_vector(rng, A.base_dim()), testing::random_vector(rng, A.rank())};
    double worst = 0.0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        for (int c = 0; c < N; ++c) {
          const double s = poisson_bracket(A, coordinate_bracket(A, a, b), coordinate(A, c), pt) +
                           poisson_bracket(A, coordinate_bracket(A, b, c), coordinate(A, a), pt) +
                           poisson_bracket(A, coordinate_bracket(A, c, a), coordinate(A, b), pt);
          worst = std::max(worst, std::abs(s));
        }
    EXPECT_LE(worst, 1e-8);
  }
}

TEST(PoissonBracketTest, CoordinateBracketsMatchDefinition) {
  const auto A = action_so3();
  SplitMix64 rng(10);
  for (int k = 0; k < 10; ++k) {
    const DualPoint pt{testing::random_vector(rng, 3), testing::random_vector(rng, 3)};
    for (int u = 0; u < 6; ++u)
      for (int v = 0; v < 6; ++v) {
        expr::Binding b;
        for (int i = 0; i < 3; ++i) {
          b["x" + std::to_string(i + 1)] = pt.x[i];
          b["p" + std::to_string(i + 1)] = pt.p[i];
        }
        EXPECT_NEAR(poisson_bracket(A, coordinate(A, u), coordinate(A, v), pt),
                    expr::eval(coordinate_bracket(A, u, v), b).value(), 1e-15);
      }
  }
}

TEST(PoissonBracketTest, JacobiOnCoordinateFunctions) {
  SplitMix64 rng(11);
  expect_jacobi(action_so3(), rng);
  expect_jacobi(affine(false), rng);
  expect_jacobi(so3(), rng);
}

TEST(PoissonBracketTest, JacobiFailsForBrokenAlgebroid) {
  SplitMix64 rng(12);
  const auto A = affine(true);
  const DualPoint pt{testing::random_vector(rng, 1), testing::random_vector(rng, 2)};
  // cyclic sum over (x1, p1, p2); with C = 0 only {{p2, x1}, p1} = -1 survives
  const double s = poisson_bracket(A, coordinate_bracket(A, 0, 1), coordinate(A, 2), pt) +
                   poisson_bracket(A, coordinate_bracket(A, 1, 2), coordinate(A, 0), pt) +
                   poisson_bracket(A, coordinate_bracket(A, 2, 0), coordinate(A, 1), pt);
  EXPECT_NEAR(std::abs(s), 1.0, 1e-14);
}

Subbundle span_of(const LieAlgebroid& A, const std::vector<std::vector<std::string>>& span, int r) {
  return Subbundle(A.layout(), r, rows(span), false);
}

TEST(SubbundleTest, AnnihilatorExamples) {
  const auto A = so3();
  const BasePoint x{Vector(0)};
  const auto U = Subbundle::adapted(A.layout(), 2);
  const Matrix ann = annihilator(U, x);
  ASSERT_EQ(ann.cols(), 1);
  EXPECT_NEAR(std::abs(ann(2, 0)), 1.0, 1e-15);
  EXPECT_NEAR(ann.col(0).head(2).norm(), 0.0, 1e-15);

  EXPECT_EQ(annihilator(Subbundle::full(A.layout()), x).cols(), 0);

  const auto B = LieAlgebroid(0, 2, {}, {});
  const auto diag = span_of(B, {{"1/sqrt(2)"}, {"1/sqrt(2)"}}, 1);
  const Matrix a2 = annihilator(diag, x);
  ASSERT_EQ(a2.cols(), 1);
  const double s = a2(0, 0) > 0 ? 1.0 : -1.0;
  EXPECT_NEAR(s * a2(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s * a2(1, 0), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SubbundleTest, AnnihilatorIsOrthonormalAndAnnihilates) {
  SplitMix64 rng(13);
  const auto A = action_so3();
  const auto U = span_of(A, {{"1", "x1"}, {"x2", "1"}, {"0", "x3^2 + 1"}}, 2);
  for (const auto& pt : sample(rng, 3, 50)) {
    const auto f = frame(U, pt.x);
    const Matrix ann = annihilator(U, pt);
    EXPECT_LE((ann.transpose() * ann - Matrix::Identity(1, 1)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((f.span.transpose() * ann).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SubbundleTest, MembershipExamples) {
  const auto A = so3();
  const BasePoint x{Vector(0)};
  const auto U = Subbundle::adapted(A.layout(), 2);
  EXPECT_TRUE(member_U(U, x, Eigen::Vector3d(1, 5, 0)));
  EXPECT_FALSE(member_U(U, x, Eigen::Vector3d(0, 0, 1e-3), 1e-9));
  EXPECT_TRUE(member_Uann(U, x, Eigen::Vector3d(0, 0, 7)));
  EXPECT_FALSE(member_Uann(U, x, Eigen::Vector3d(1e-3, 0, 7)));
  EXPECT_TRUE(member_U(U, x, Vector::Zero(3)));
  const auto V = span_of(A, {{"1"}, {"2"}, {"3"}}, 1);
  EXPECT_TRUE(member_U(V, x, Vector::Zero(3)));
  EXPECT_TRUE(member_U(V, x, Eigen::Vector3d(-2, -4, -6)));
  EXPECT_FALSE(member_U(V, x, Eigen::Vector3d(1, 2, 3.001)));
}

TEST(SubbundleTest, RankDeficiencyIsReported) {
  const auto A = action_so3();
  const auto U = span_of(A, {{"1", "x1"}, {"0", "0"}, {"0", "0"}}, 2);
  try {
    frame(U, Eigen::Vector3d(0.5, 0, 0));
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient&) {
  }
  const auto V = span_of(A, {{"x1"}, {"0"}, {"0"}}, 1);
  EXPECT_THROW(annihilator(V, {Vector::Zero(3)}), RankDeficient);
  EXPECT_NO_THROW(annihilator(V, {Eigen::Vector3d(1, 0, 0)}));
}

TEST(SubbundleTest, SpanDerivativesMatchFiniteDifferences) {
  SplitMix64 rng(14);
  const auto A = action_so3();
  const auto U = span_of(A, {{"1", "x1*x2"}, {"sin(x2)", "1"}, {"0", "x3^2 + 1"}}, 2);
  EXPECT_FALSE(U.is_constant());
  EXPECT_TRUE(Subbundle::adapted(A.layout(), 2).is_constant());
  for (const auto& pt : sample(rng, 3, 10)) {
    const auto dS = U.span_derivatives(pt.x);
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 2; ++b) {
          auto f = [&](const std::vector<double>& y) { return U.span_at(Eigen::Map<const Vector>(y.data(), 3))(a, b); };
          EXPECT_NEAR(dS[i](a, b), testing::fd1_4(f, to_std(pt.x), i, 1e-3), 1e-9);
        }
  }
}

}  // namespace
}  // namespace algmech
