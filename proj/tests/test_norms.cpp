#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blaschke/extremal.hpp"
#include "blaschke/norms.hpp"
#include "blaschke/quadrature.hpp"
#include "blaschke/random.hpp"

using namespace blaschke;

namespace {

// Frozen calibration constants (see the README section on calibration).
constexpr double kStandardEstimateC = 16.0;  // window [1/C, C] for the standard integral estimate
constexpr double kBernsteinC = 3.0;          // ||f^(l)||_inf <= C (n/(1-r))^l ||f||_inf

void expect_near(Complex a, Complex b, double tol) { EXPECT_LE(std::abs(a - b), tol) << a << " vs " << b; }

std::vector<Complex> random_poly(std::mt19937_64& rng, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::normal_distribution<double> g;
  std::vector<Complex> c(static_cast<std::size_t>(deg(rng)) + 1);
  for (auto& v : c) v = Complex(g(rng), g(rng));
  return c;
}

Complex random_disk_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

Expr poly_expr(const std::vector<Complex>& c) { return Expr::polynomial(c); }

}  // namespace

TEST(Quadrature, CircleGridIsNormalized) {
  const CircleGrid g(64);
  EXPECT_DOUBLE_EQ(g.weight() * static_cast<double>(g.size()), 1.0);
  expect_near(g.node(16), Complex(0.0, 1.0), 1e-15);
  EXPECT_THROW(CircleGrid(48), DomainError);
}

TEST(Quadrature, DiskRuleIntegratesTheWeight) {
  for (double beta : {-0.9, -0.5, 0.0, 1.0, 2.5}) {
    const DiskQuadrature q(beta, 12, 8);
    double total = 0.0;
    for (std::size_t i = 0; i < q.radial_count(); ++i) total += q.radial_weight(i);
    EXPECT_NEAR(total, 1.0 / (beta + 1.0), 1e-12) << "beta " << beta;
  }
}

TEST(Quadrature, GaussJacobiIsExactForPolynomials) {
  // int_0^1 t^k (1-t)^beta dt = B(k+1, beta+1)
  for (double beta : {-0.5, 0.0, 1.5}) {
    const GaussJacobiRule rule = gauss_jacobi_unit(8, beta);
    for (int k = 0; k < 16; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
      const double exact = std::exp(std::lgamma(k + 1.0) + std::lgamma(beta + 1.0) - std::lgamma(k + beta + 2.0));
      EXPECT_NEAR(s, exact, 1e-13 * exact) << "beta " << beta << " k " << k;
    }
  }
}

TEST(HardyNorm, Examples) {
  for (double p : {1.0, 2.0, 3.5}) EXPECT_NEAR(hardy_norm(Expr::polynomial({0.0, 0.0, 0.0, 1.0}), p).value, 1.0, 1e-12);
  EXPECT_NEAR(hardy_norm(Expr::polynomial({1.0, 1.0}), 2.0).value, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(hardy_norm(test_function(4, 0.5, 1).expr, 1.0).value, 4.0, 4e-8);
  EXPECT_THROW(hardy_norm(Expr::constant(1.0), std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(hardy_norm(Expr::constant(1.0), 0.5), DomainError);
}

TEST(HardyNorm, ChartAndDirectRoutesAgree) {
  const TestFunction tf = test_function(6, 0.75, 1);
  for (double p : {1.0, 2.0, 4.0}) {
    const double direct = hardy_norm(tf.expr, p).value;
    const double chart = hardy_norm(tf.chart(), p).value;
    EXPECT_NEAR(direct, chart, 1e-8 * direct) << "p " << p;
  }
}

TEST(SupNorm, Examples) {
  EXPECT_NEAR(sup_norm(Expr::polynomial({0.0, 0.0, 1.0})).value, 1.0, 1e-12);
  EXPECT_NEAR(sup_norm(test_function(4, 0.5, 1).expr, 8.0).value, 48.0, 48e-8);
  EXPECT_NEAR(sup_norm(dirichlet_kernel(8)).value, 8.0, 8e-8);
}

TEST(SupNorm, RefinesOffGridMaxima) {
  // |1 + c z^k| peaks at angles that are not grid nodes
  const Complex c = std::polar(0.9, 0.123456);
  EXPECT_NEAR(sup_norm(Expr::polynomial({1.0, 0.0, 0.0, c})).value, 1.9, 1e-8);
}

TEST(BergmanNorm, Examples) {
  for (double p : {1.0, 2.0, 3.0})
    for (double beta : {-0.5, 0.0, 2.0})
      EXPECT_NEAR(bergman_norm(Expr::constant(1.0), p, beta).value, std::pow(beta + 1.0, -1.0 / p), 1e-10);
  EXPECT_NEAR(bergman_norm(Expr::polynomial({0.0, 0.0, 1.0}), 2.0, 1.0).value, std::sqrt(1.0 / 12.0), 1e-10);
  EXPECT_NEAR(bergman_norm(Expr::polynomial({1.0, 1.0}), 2.0, 0.0).value, std::sqrt(1.5), 1e-10);
  EXPECT_THROW(bergman_norm(Expr::constant(1.0), 2.0, -1.0), DomainError);
}

TEST(BergmanNorm, ChartAndDirectRoutesAgree) {
  const TestFunction tf = test_function(5, 0.5, 2);
  for (double p : {1.0, 2.0})
    for (double beta : {0.0, 1.0}) {
      const double direct = bergman_norm(tf.expr, p, beta).value;
      const double chart = bergman_norm(tf.chart(), p, beta).value;
      EXPECT_NEAR(direct, chart, 1e-7 * direct) << "p " << p << " beta " << beta;
    }
}

TEST(BlochSeminorm, Examples) {
  EXPECT_NEAR(bloch_seminorm(Expr::polynomial({0.0, 1.0}), 0.0).value, 1.0, 1e-12);
  EXPECT_NEAR(bloch_seminorm(Expr::polynomial({0.0, 0.0, 1.0}), 0.0).value, 2.0, 1e-10);
  EXPECT_NEAR(bloch_seminorm(Expr::constant(3.0), 0.5).value, 0.0, 0.0);
  EXPECT_THROW(bloch_seminorm(Expr::constant(1.0), 1.5), DomainError);
}

TEST(BlochSeminorm, WeightedMonomial) {
  // sup_t 2t (1 - t) = 1/2 at t = 1/2 for f = z^2, alpha = 1
  EXPECT_NEAR(bloch_seminorm(Expr::polynomial({0.0, 0.0, 1.0}), 1.0).value, 0.5, 1e-6);
}

TEST(FracDiff, Examples) {
  for (double a : {-0.5, 0.0, 1.0, 3.3}) expect_near(frac_diff({1.0}, a)[0], 1.0, 1e-14);
  expect_near(frac_diff({0.0, 0.0, 1.0}, 1.0)[2], 2.0, 1e-13);
  const auto id = frac_diff({1.0, 2.0, 3.0, 4.0}, 0.0);
  for (std::size_t m = 0; m < id.size(); ++m) expect_near(id[m], static_cast<double>(m + 1), 1e-13);
  EXPECT_THROW(frac_diff({1.0}, -1.0), DomainError);
}

TEST(Pairings, Examples) {
  const Expr z = Expr::polynomial({0.0, 1.0}), one = Expr::constant(1.0);
  expect_near(cauchy_pairing(z, z), 1.0, 1e-14);
  expect_near(cauchy_pairing(z, one), 0.0, 1e-14);
  expect_near(cauchy_pairing(Expr::cauchy_kernel(0.5), Expr::cauchy_kernel(0.5)), 4.0 / 3.0, 1e-12);
  expect_near(bergman_pairing(one, one), 1.0, 1e-13);
  expect_near(bergman_pairing(z, z), 0.5, 1e-13);
  expect_near(bergman_pairing(z, one), 0.0, 1e-13);
}

TEST(BackwardShift, Examples) {
  const Expr a = backward_shift(Expr::constant(1.0));
  const Expr b = backward_shift(Expr::polynomial({0.0, 0.0, 1.0}));
  const Expr k = Expr::cauchy_kernel(0.5);
  const Expr c = backward_shift(k);
  for (Complex z : {Complex(0.0), Complex(0.3, -0.2), Complex(-1.0, 0.0)}) {
    expect_near(a(z), 0.0, 1e-15);
    expect_near(b(z), z, 1e-14);
    expect_near(c(z), 0.5 * k(z), 1e-13);
  }
}

TEST(GreenFormula, SimplestForm) {
  // <phi, psi> = (phi', S* psi) + phi(0) conj(psi(0))
  auto rng = make_rng(0x6721);
  for (int trial = 0; trial < 200; ++trial) {
    const auto phi = random_poly(rng, 12), psi = random_poly(rng, 12);
    const Complex lhs = cauchy_pairing(poly_expr(phi), poly_expr(psi));
    const Complex rhs = bergman_pairing(poly_expr(poly::derivative(phi)), backward_shift(poly_expr(psi))) + phi[0] * std::conj(psi[0]);
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(1.0, std::abs(lhs))) << "trial " << trial;
  }
}

TEST(GreenFormula, FractionalForm) {
  // (f, g) = (alpha + 1) int D_alpha f conj(g) (1 - |u|^2)^alpha dA
  auto rng = make_rng(0x6722);
  const double alphas[] = {0.5, 1.0, 2.0};
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = alphas[trial % 3];
    const auto f = random_poly(rng, 12), g = random_poly(rng, 12);
    const Complex lhs = bergman_pairing(poly_expr(f), poly_expr(g));
    const Complex rhs = (alpha + 1.0) * bergman_pairing(poly_expr(frac_diff(f, alpha)), poly_expr(g), alpha);
    // scale of the pairing: sum |f_m||g_m| / (m + 1)
    double scale = 0.0;
    for (std::size_t m = 0; m < std::min(f.size(), g.size()); ++m) scale += std::abs(f[m]) * std::abs(g[m]) / (m + 1.0);
    EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::max(std::abs(lhs), scale)) << "trial " << trial;
  }
}

TEST(NormEquivalence, FractionalAndOrdinaryDerivatives) {
  // ||D_l f|| and ||f^(l)|| + sum_{j<l} |f^(j)(0)| are comparable in A^p(beta)
  auto rng = make_rng(0x6723);
  const double ps[] = {1.0, 2.0, 4.0};
  const double betas[] = {0.0, 1.0};
  QuadratureOptions opts;
  opts.tol = 1e-4;  // only boundedness of the ratio is asserted
  double lo = 1e300, hi = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int l = 1 + trial % 2;
    const double p = ps[(trial / 2) % 3], beta = betas[(trial / 6) % 2];
    auto f = random_poly(rng, 12);
    if (f.size() <= static_cast<std::size_t>(l)) f.resize(static_cast<std::size_t>(l) + 1, Complex(1.0));
    const double lhs = bergman_norm(poly_expr(frac_diff(f, l)), p, beta, opts).value;
    std::vector<Complex> d = f;
    double rhs = 0.0, fact = 1.0;
    for (int j = 0; j < l; ++j) {
      if (j) fact *= j;
      rhs += std::abs(d[0]) * fact;
      d = poly::derivative(d);
    }
    rhs += bergman_norm(poly_expr(d), p, beta, opts).value;
    const double ratio = lhs / rhs;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    EXPECT_GE(ratio, 1.0 / 20.0) << "trial " << trial;
    EXPECT_LE(ratio, 20.0) << "trial " << trial;
  }
  RecordProperty("ratio_min", std::to_string(lo));
  RecordProperty("ratio_max", std::to_string(hi));
}

TEST(StandardEstimate, WindowIsUniformInW) {
  // int (1-|z|)^alpha / |1 - conj(w) z|^b' dA ~ (1-|w|)^{alpha + 2 - b'} with b' = 2 alpha + 4.
  // The (1-|z|)^alpha factor is split as (1-|z|^2)^alpha (1+|z|)^-alpha so that
  // the Gauss-Jacobi weight carries it, and the chart centred at w resolves
  // the peak.
  for (double alpha : {0.0, 0.5}) {
    const double bp = 2.0 * alpha + 4.0;
    for (double w : {0.9, 0.99, 0.999}) {
      QuadratureOptions o;
      o.chart = Complex(w, 0.0);
      const double I = disk_integral<double>(
          [&](Complex z) { return std::pow(1.0 + std::abs(z), -alpha) / std::pow(std::abs(1.0 - w * z), bp); }, alpha, o);
      const double v = I * std::pow(1.0 - w, bp - alpha - 2.0);
      EXPECT_GE(v, 1.0 / kStandardEstimateC) << "alpha " << alpha << " w " << w;
      EXPECT_LE(v, kStandardEstimateC) << "alpha " << alpha << " w " << w;
    }
  }
}

TEST(Bernstein, Examples) {
  for (int n : {2, 5, 9}) {
    const PointSequence s = PointSequence::one_point(0.0, static_cast<std::size_t>(n));
    std::vector<Complex> c(static_cast<std::size_t>(n), 0.0);
    c.back() = 1.0;
    EXPECT_NEAR(bernstein_ratio_of(Expr::polynomial(c), s, 1), (n - 1.0) / n, 1e-8);
  }
  EXPECT_EQ(bernstein_ratio(PointSequence({0.0}), 1, 3, 1), 0.0);
  EXPECT_THROW(bernstein_ratio(PointSequence({0.0}), 0, 3, 1), DomainError);
}

TEST(Bernstein, RatioIsBoundedOverTheGrid) {
  auto rng = make_rng(0xBE57);
  double worst = 0.0;
  for (int n : {4, 8, 16, 32})
    for (double r : {0.5, 0.75, 0.9})
      for (int l : {1, 2}) {
        worst = std::max(worst, bernstein_ratio(PointSequence::one_point(-r, static_cast<std::size_t>(n)), l, 4, 7));
        std::vector<Complex> pts;
        for (int j = 0; j < n; ++j) pts.push_back(random_disk_point(rng, r));
        pts[0] = std::polar(r, 1.0);
        worst = std::max(worst, bernstein_ratio(PointSequence(pts), l, 4, 7));
      }
  RecordProperty("bernstein_max", std::to_string(worst));
  EXPECT_LE(worst, kBernsteinC);
}
