#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "blaschke/funcexpr.hpp"
#include "blaschke/random.hpp"

using namespace blaschke;

namespace {

void expect_near(Complex a, Complex b, double tol) { EXPECT_LE(std::abs(a - b), tol) << a << " vs " << b; }

Complex random_disk_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

std::vector<Complex> random_coeffs(std::mt19937_64& rng, int degree, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Complex> c(static_cast<std::size_t>(degree) + 1);
  for (auto& v : c) v = Complex(u(rng), u(rng));
  return c;
}

// Random expression of bounded depth, analytic on a neighbourhood of the
// closed disk. Inner functions of compositions are Blaschke factors so that
// they map the disk into itself.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 3);
  switch (pick(rng)) {
    case 0: return Expr::polynomial(random_coeffs(rng, std::uniform_int_distribution<int>(0, 4)(rng), 1.0));
    case 1: return Expr::blaschke_factor(random_disk_point(rng, 0.8));
    case 2: return Expr::cauchy_kernel(random_disk_point(rng, 0.7));
    case 3: {
      const Complex a = random_disk_point(rng, 0.7);
      return Expr::rational(random_coeffs(rng, 2, 1.0), {1.0, -a});
    }
    case 4: return Expr::sum({random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
    case 5: return Expr::product({random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
    case 6: return Expr::power(random_expr(rng, depth - 1), std::uniform_int_distribution<unsigned>(0, 3)(rng));
    case 7: return Expr::compose(random_expr(rng, depth - 1), Expr::blaschke_factor(random_disk_point(rng, 0.8)));
    case 8: return Expr::scaled(random_disk_point(rng, 2.0), random_expr(rng, depth - 1));
    default: return Expr::difference_quotient(random_expr(rng, depth - 1), random_disk_point(rng, 0.9));
  }
}

}  // namespace

TEST(Eval, BlaschkeFactorExamples) {
  expect_near(eval(Expr::blaschke_factor(0.0), 0.5), -0.5, 1e-15);
  expect_near(eval(Expr::blaschke_factor(0.5), 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(eval(Expr::blaschke_factor(0.5), 1.0)), 1.0, 1e-15);
}

TEST(Eval, RejectsPointsOutsideClosedDisk) {
  EXPECT_THROW(eval(Expr::constant(1.0), 1.5), DomainError);
  EXPECT_THROW(eval(Expr::constant(1.0), Complex(std::nan(""), 0.0)), DomainError);
}

TEST(Eval, PoleOnDomainRaisesPoleError) {
  EXPECT_THROW(eval(Expr::cauchy_kernel(1.0), 1.0), PoleError);
  EXPECT_THROW(Expr::rational({1.0}, {1.0, -1.0}), PoleError);
  EXPECT_THROW(Expr::rational({1.0}, {1.0, -2.0}), PoleError);
  EXPECT_THROW(Expr::blaschke_factor(1.0), DomainError);
}

TEST(EvalJet, Examples) {
  const Jet a = eval_jet(Expr::polynomial({0.0, 0.0, 1.0}), 1.0, 2);
  expect_near(a[0], 1.0, 1e-15);
  expect_near(a[1], 2.0, 1e-15);
  expect_near(a[2], 2.0, 1e-15);

  const Jet b = eval_jet(Expr::blaschke_factor(0.0), 0.3, 1);
  expect_near(b[0], -0.3, 1e-15);
  expect_near(b[1], -1.0, 1e-15);

  const Jet c = eval_jet(Expr::cauchy_kernel(0.5), 0.0, 2);
  expect_near(c[0], 1.0, 1e-15);
  expect_near(c[1], 0.5, 1e-15);
  expect_near(c[2], 0.5, 1e-15);
}

TEST(EvalJet, PolynomialJetOffTheDiskMatchesHandExpansion) {
  // The jet of z^2 at z = 2 is [4, 4, 2]; evaluated through the series
  // interface because public evaluation is restricted to the closed disk.
  const Series s = Expr::polynomial({0.0, 0.0, 1.0}).series(2.0, 2);
  const Jet j = Jet::from_series(s);
  expect_near(j[0], 4.0, 1e-15);
  expect_near(j[1], 4.0, 1e-15);
  expect_near(j[2], 2.0, 1e-15);
}

TEST(EvalJet, LengthIsOrderPlusOne) {
  for (int L : {0, 1, 5, 12}) EXPECT_EQ(eval_jet(Expr::cauchy_kernel(0.3), 0.1, L).values.size(), static_cast<std::size_t>(L) + 1);
  EXPECT_THROW(eval_jet(Expr::constant(1.0), 0.0, -1), DomainError);
}

TEST(EvalJet, OrderZeroMatchesEvalForRandomExpressions) {
  auto rng = make_rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_expr(rng, 4);
    const Complex z = random_disk_point(rng, 0.95);
    const Complex v = eval(e, z);
    EXPECT_LE(std::abs(eval_jet(e, z, 0)[0] - v), 1e-13 * std::max(1.0, std::abs(v))) << "trial " << trial;
  }
}

TEST(EvalJet, FirstDerivativeMatchesCentralDifferences) {
  auto rng = make_rng(202);
  constexpr double h = 1e-5;
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_expr(rng, 4);
    const Complex z = random_disk_point(rng, 0.9);
    const Complex d = eval_jet(e, z, 1)[1];
    const Complex fd = (e(z + h) - e(z - h)) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(d), std::abs(e(z))});
    EXPECT_LE(std::abs(d - fd), 1e-6 * scale) << "trial " << trial;
  }
}

TEST(EvalJet, HighOrderDerivativesOfCauchyKernel) {
  // d^k/dz^k 1/(1 - a z) = k! a^k / (1 - a z)^{k+1}
  const Complex a(0.3, -0.4), z(0.2, 0.5);
  const Jet j = eval_jet(Expr::cauchy_kernel(std::conj(a)), z, 10);
  double fact = 1.0;
  for (int k = 0; k <= 10; ++k) {
    if (k) fact *= k;
    const Complex expected = fact * std::pow(a, k) / std::pow(1.0 - a * z, k + 1);
    EXPECT_LE(std::abs(j[k] - expected), 1e-12 * std::abs(expected));
  }
}

TEST(TaylorCoefficients, Examples) {
  const auto a = taylor_coefficients(Expr::polynomial({1.0, 2.0, 3.0}), 2);
  expect_near(a[0], 1.0, 1e-14);
  expect_near(a[1], 2.0, 1e-14);
  expect_near(a[2], 3.0, 1e-14);

  const auto b = taylor_coefficients(Expr::cauchy_kernel(0.5), 3);
  const double geo[] = {1.0, 0.5, 0.25, 0.125};
  for (int k = 0; k < 4; ++k) expect_near(b[static_cast<std::size_t>(k)], geo[k], 1e-12);

  const auto c = taylor_coefficients(Expr::blaschke_factor(0.5), 1);
  expect_near(c[0], 0.5, 1e-12);
  expect_near(c[1], -0.75, 1e-12);
}

TEST(TaylorCoefficients, RejectsBadSampleCounts) {
  EXPECT_THROW(taylor_coefficients(Expr::constant(1.0), 3, 100), DomainError);
  EXPECT_THROW(taylor_coefficients(Expr::constant(1.0), 8, 8), DomainError);
  EXPECT_THROW(taylor_coefficients(Expr::constant(1.0), -1), DomainError);
}

TEST(TaylorCoefficients, CompositionOfPolynomialsMatchesConvolution) {
  auto rng = make_rng(303);
  std::uniform_int_distribution<int> deg(1, 16);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_coeffs(rng, deg(rng), 1.0);
    auto q = random_coeffs(rng, deg(rng), 1.0);
    // keep |q| <= 1 on the disk so the composed coefficients stay O(1)
    double l1 = 0.0;
    for (auto c : q) l1 += std::abs(c);
    for (auto& c : q) c /= l1;
    const auto expected = poly::compose(p, q);
    const auto got = taylor_coefficients(Expr::compose(Expr::polynomial(p), Expr::polynomial(q)),
                                         static_cast<int>(expected.size()) - 1);
    for (std::size_t k = 0; k < expected.size(); ++k)
      EXPECT_LE(std::abs(got[k] - expected[k]), 1e-12) << "trial " << trial << " k " << k;
  }
}

TEST(DifferenceQuotient, RemovableSingularityUsesTheDerivative) {
  const Expr f = Expr::cauchy_kernel(0.5);
  const Expr q = Expr::difference_quotient(f, 0.2);
  // at z = a the quotient equals f'(a)
  expect_near(q(0.2), eval_jet(f, 0.2, 1)[1], 1e-13);
  // elsewhere it is (f(z) - f(a)) / (z - a)
  const Complex z(0.4, 0.3);
  expect_near(q(z), (f(z) - f(0.2)) / (z - 0.2), 1e-13);
  // and q'(a) = f''(a) / 2
  const Jet j = eval_jet(q, 0.2, 2);
  expect_near(j[1], eval_jet(f, 0.2, 2)[2] / 2.0, 1e-10);
}

TEST(Expr, DegreeHintTracksStructure) {
  EXPECT_EQ(Expr::polynomial({1.0, 2.0, 0.0}).degree_hint(), 1);
  EXPECT_EQ(Expr::power(Expr::polynomial({0.0, 1.0}), 5).degree_hint(), 5);
  EXPECT_EQ(Expr::compose(Expr::polynomial({0.0, 0.0, 1.0}), Expr::blaschke_factor(0.3)).degree_hint(), 2);
}

TEST(Expr, ImmutableValuesAreSafeToShareAcrossThreads) {
  const Expr e = Expr::power(Expr::compose(Expr::cauchy_kernel(0.4), Expr::blaschke_factor(-0.6)), 7);
  const Complex z(0.1, 0.2);
  const Complex expected = eval_jet(e, z, 3)[0];
  std::vector<std::thread> pool;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t)
    pool.emplace_back([&] {
      for (int i = 0; i < 2000; ++i)
        if (eval_jet(e, z, 3)[0] != expected) ++mismatches;
    });
  for (auto& th : pool) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}
