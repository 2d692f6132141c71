#pragma once

// Finite Blaschke products, model spaces K_B = H^2 (-) B H^2, the
// Malmquist-Walsh orthonormal basis, reproducing kernels and the projection
// P_B f = sum_k <f, e_k> e_k.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blaschke/error.hpp"
#include "blaschke/funcexpr.hpp"
#include "blaschke/polynomial.hpp"
#include "blaschke/quadrature.hpp"

namespace blaschke {

/// Finite sequence of points of the open disk; repetition encodes multiplicity.
class PointSequence {
 public:
  explicit PointSequence(std::vector<Complex> points) : points_(std::move(points)) {
    if (points_.empty()) throw DomainError("point sequence must contain at least one point");
    for (auto p : points_) {
      if (!is_finite(p)) throw DomainError("point sequence contains a non-finite point");
      if (!(std::abs(p) < 1.0)) throw DomainError("point sequence must lie in the open unit disk");
      r_ = std::max(r_, std::abs(p));
    }
  }

  /// lambda repeated n times.
  static PointSequence one_point(Complex lambda, std::size_t n) {
    return PointSequence(std::vector<Complex>(n, lambda));
  }

  std::size_t n() const { return points_.size(); }
  double r() const { return r_; }
  const std::vector<Complex>& points() const { return points_; }
  Complex operator[](std::size_t j) const { return points_[j]; }

  bool is_one_point() const {
    return std::all_of(points_.begin(), points_.end(), [&](Complex p) { return p == points_.front(); });
  }
  bool has_distinct_points() const {
    for (std::size_t i = 0; i < points_.size(); ++i)
      for (std::size_t j = i + 1; j < points_.size(); ++j)
        if (points_[i] == points_[j]) return false;
    return true;
  }

  /// n / (1 - r), the scale governing every growth estimate.
  double scale() const { return static_cast<double>(n()) / (1.0 - r_); }

  PointSequence appended(Complex lambda) const {
    auto pts = points_;
    pts.push_back(lambda);
    return PointSequence(std::move(pts));
  }

 private:
  std::vector<Complex> points_;
  double r_ = 0.0;
};

/// Reads the sigma text format: one "re im" pair per line, '#' comments.
inline PointSequence read_sigma(std::istream& in) {
  std::vector<Complex> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double re = 0.0, im = 0.0;
    if (!(ls >> re >> im)) throw DomainError("sigma line " + std::to_string(lineno) + ": expected \"re im\"");
    std::string rest;
    if (ls >> rest) throw DomainError("sigma line " + std::to_string(lineno) + ": trailing content");
    pts.emplace_back(re, im);
  }
  return PointSequence(std::move(pts));
}

inline PointSequence read_sigma_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open sigma file: " + path);
  return read_sigma(in);
}

inline void write_sigma(std::ostream& out, const PointSequence& sigma) {
  out.precision(17);
  for (auto p : sigma.points()) out << p.real() << ' ' << p.imag() << '\n';
}

struct BlaschkeProduct {
  PointSequence sigma;
  Expr expr;

  Complex operator()(Complex z) const { return expr(z); }
};

/// B_sigma = prod b_lambda; runs of equal points become integer powers.
inline BlaschkeProduct blaschke_product(const PointSequence& sigma) {
  std::vector<Expr> factors;
  const auto& pts = sigma.points();
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    const auto run = static_cast<unsigned>(j - i);
    Expr b = Expr::blaschke_factor(pts[i]);
    factors.push_back(run == 1 ? b : Expr::power(b, run));
    i = j;
  }
  return {sigma, factors.size() == 1 ? factors.front() : Expr::product(std::move(factors))};
}

struct MalmquistWalshBasis {
  PointSequence sigma;
  std::vector<Expr> elements;

  std::size_t size() const { return elements.size(); }
  const Expr& operator[](std::size_t j) const { return elements[j]; }
};

/// e_j = (1 - |lambda_j|^2)^{1/2} B_{j-1} k_{lambda_j}, j = 1..n (0-based here).
inline MalmquistWalshBasis mw_basis(const PointSequence& sigma) {
  std::vector<Expr> elements;
  elements.reserve(sigma.n());
  Expr partial = Expr::constant(1.0);
  for (std::size_t j = 0; j < sigma.n(); ++j) {
    const Complex lam = sigma[j];
    const double s = std::sqrt(1.0 - std::norm(lam));
    elements.push_back(Expr::scaled(s, j == 0 ? Expr::cauchy_kernel(lam)
                                              : Expr::product({partial, Expr::cauchy_kernel(lam)})));
    partial = (j == 0) ? Expr::blaschke_factor(lam) : Expr::product({partial, Expr::blaschke_factor(lam)});
  }
  return {sigma, std::move(elements)};
}

/// All basis values at z in O(n) by the running partial product.
inline void mw_values(const PointSequence& sigma, Complex z, std::span<Complex> out) {
  Complex partial{1.0};
  for (std::size_t j = 0; j < sigma.n(); ++j) {
    const Complex lam = sigma[j];
    const Complex den = 1.0 - std::conj(lam) * z;
    out[j] = std::sqrt(1.0 - std::norm(lam)) * partial / den;
    partial *= (lam - z) / den;
  }
}

/// Basis sampled on an M-point circle grid: E(j, k) = e_k(omega^j).
inline Eigen::MatrixXcd sample_basis(const PointSequence& sigma, std::size_t M) {
  const CircleGrid grid(M);
  Eigen::MatrixXcd E(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(sigma.n()));
  std::vector<Complex> row(sigma.n());
  for (std::size_t j = 0; j < M; ++j) {
    mw_values(sigma, grid.node(j), row);
    for (std::size_t k = 0; k < sigma.n(); ++k) E(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = row[k];
  }
  return E;
}

/// Starting boundary resolution for functions built on sigma.
inline std::size_t boundary_samples_for(const PointSequence& sigma) {
  // b_lambda^n oscillates with local frequency n (1 + r) / (1 - r) near the
  // boundary point closest to lambda; the Cauchy factors decay like r^k.
  const double n = static_cast<double>(sigma.n());
  const double r = sigma.r();
  return std::max<std::size_t>(256, next_pow2(static_cast<std::size_t>(4.0 * n * (1.0 + r) / (1.0 - r) + 64.0 / (1.0 - r))));
}

/// f = sum_k c_k e_k as an expression of linear size, nested as
/// c_1 e_1 + b_1 (c_2 s_2 k_2 + b_2 (...)).
inline Expr reconstruct(const PointSequence& sigma, const std::vector<Complex>& coeffs) {
  if (coeffs.size() != sigma.n()) throw DomainError("coefficient count does not match the sequence length");
  Expr acc;
  for (std::size_t jj = sigma.n(); jj-- > 0;) {
    const Complex lam = sigma[jj];
    const Expr head = Expr::scaled(coeffs[jj] * std::sqrt(1.0 - std::norm(lam)), Expr::cauchy_kernel(lam));
    acc = acc.valid() ? Expr::sum({head, Expr::product({Expr::blaschke_factor(lam), acc})}) : head;
  }
  return acc;
}

struct KernelFunction {
  PointSequence sigma;
  Complex zeta;
  Expr expr;

  Complex operator()(Complex z) const { return expr(z); }
};

/// k_zeta^B(z) = (1 - conj(B(zeta)) B(z)) / (1 - conj(zeta) z).
///
/// For |zeta| = 1 the same function is written as
/// zeta conj(B(zeta)) (B(z) - B(zeta)) / (z - zeta), whose removable
/// singularity is handled by the difference-quotient node.
inline KernelFunction reproducing_kernel(const PointSequence& sigma, Complex zeta) {
  if (!is_finite(zeta) || std::abs(zeta) > 1.0 + 1e-12) throw DomainError("kernel point must lie in the closed disk");
  const BlaschkeProduct B = blaschke_product(sigma);
  const Complex Bz = B(zeta);
  if (std::abs(std::abs(zeta) - 1.0) <= 1e-12) {
    return {sigma, zeta, Expr::scaled(zeta * std::conj(Bz), Expr::difference_quotient(B.expr, zeta))};
  }
  Expr numer = Expr::sum({Expr::constant(1.0), Expr::scaled(-std::conj(Bz), B.expr)});
  return {sigma, zeta, Expr::product({numer, Expr::cauchy_kernel(zeta)})};
}

/// Coefficients <f, e_k> by boundary quadrature, refined until stable.
inline std::vector<Complex> project(const PointSequence& sigma, const Expr& f, std::size_t initial_samples = 0) {
  constexpr std::size_t kCap = std::size_t{1} << 22;
  std::size_t M = initial_samples ? next_pow2(initial_samples) : boundary_samples_for(sigma);
  M = std::max(M, next_pow2(static_cast<std::size_t>(std::min(f.degree_hint(), 1L << 20)) * 4));
  std::vector<Complex> prev;
  while (true) {
    const CircleGrid grid(M);
    const Eigen::MatrixXcd E = sample_basis(sigma, M);
    Eigen::VectorXcd fv(static_cast<Eigen::Index>(M));
    for (std::size_t j = 0; j < M; ++j) fv(static_cast<Eigen::Index>(j)) = f(grid.node(j));
    const Eigen::VectorXcd c = E.adjoint() * fv / static_cast<double>(M);
    std::vector<Complex> cur(c.data(), c.data() + c.size());
    if (!prev.empty()) {
      double scale = 0.0, diff = 0.0;
      for (std::size_t k = 0; k < cur.size(); ++k) {
        scale = std::max(scale, std::abs(cur[k]));
        diff = std::max(diff, std::abs(cur[k] - prev[k]));
      }
      const double fscale = fv.cwiseAbs().maxCoeff();
      if (diff <= 1e-13 * std::max(scale, fscale) || diff == 0.0) return cur;
    }
    if (M >= kCap) throw ConvergenceError("projection quadrature did not stabilize before the sample cap");
    prev = std::move(cur);
    M *= 2;
  }
}

/// Boundary-quadrature Gram matrix of the Malmquist-Walsh basis.
inline Eigen::MatrixXcd mw_gram(const PointSequence& sigma, std::size_t M = 0) {
  if (M == 0) M = 2 * boundary_samples_for(sigma);
  const Eigen::MatrixXcd E = sample_basis(sigma, M);
  return E.adjoint() * E / static_cast<double>(M);
}

namespace detail {

inline Complex clustered_newton(const std::vector<Complex>& den, Complex center, int multiplicity) {
  // Newton on the (m-1)-th derivative, which has a simple root at a root of
  // multiplicity m.
  std::vector<Complex> d = den;
  for (int k = 1; k < multiplicity; ++k) d = poly::derivative(d);
  const auto dd = poly::derivative(d);
  Complex z = center;
  for (int it = 0; it < 8; ++it) {
    const Complex fp = poly::horner(dd, z);
    if (std::abs(fp) == 0.0) break;
    const Complex step = poly::horner(d, z) / fp;
    if (!is_finite(step)) break;
    z -= step;
    if (std::abs(step) <= 1e-16 * std::abs(z)) break;
  }
  return is_finite(z) ? z : center;
}

/// Relative boundary agreement of f with its projection onto K_{z B_sigma}.
inline double membership_defect(const PointSequence& sigma, const Expr& f) {
  const PointSequence extended = sigma.appended(0.0);
  const Expr rebuilt = reconstruct(extended, project(extended, f));
  std::mt19937_64 rng(0x5EED5EEDULL);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  double scale = 0.0, diff = 0.0;
  for (int i = 0; i < 64; ++i) {
    const Complex z = std::polar(1.0, angle(rng));
    const Complex fz = f(z);
    scale = std::max(scale, std::abs(fz));
    diff = std::max(diff, std::abs(fz - rebuilt(z)));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace detail

/// Maps a rational function of R_n to the sequence sigma with f in K_{z B_sigma}:
/// every pole rho gives lambda = 1 / conj(rho); poles at infinity
/// (numerator degree exceeding denominator degree) give lambda = 0.
///
/// Multiple poles come out of the companion matrix as perturbed clusters, so
/// increasingly coarse clusterings are tried until the membership check
/// passes at relative tolerance 1e-8.
inline PointSequence poles_to_sigma(const Expr& f) {
  std::vector<Complex> num, den;
  if (f.kind() == ExprKind::Polynomial) {
    num = static_cast<const detail::PolynomialNode&>(f.node()).coefficients();
    den = {1.0};
  } else if (f.kind() == ExprKind::Rational) {
    const auto& node = static_cast<const detail::RationalNode&>(f.node());
    num = node.numerator();
    den = node.denominator();
  } else {
    throw DomainError("poles_to_sigma expects a polynomial or rational expression");
  }
  const int dnum = std::max(poly::degree(num), 0);
  const int dden = std::max(poly::degree(den), 0);
  const std::vector<Complex> rts = poly::roots(den);
  for (auto rho : rts)
    if (std::abs(rho) <= 1.0) throw DomainError("pole inside the closed unit disk (|rho| = " + std::to_string(std::abs(rho)) + ")");
  const std::size_t n = static_cast<std::size_t>(std::max({dnum, dden, 1}));

  constexpr double kMembershipTol = 1e-8;
  double best = std::numeric_limits<double>::infinity();
  for (double tol : {0.0, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1}) {
    std::vector<Complex> lambdas;
    for (const auto& c : poly::cluster_roots(rts, tol)) {
      const Complex center = c.multiplicity > 1 ? detail::clustered_newton(den, c.center, c.multiplicity) : c.center;
      if (std::abs(center) <= 1.0) continue;
      for (int k = 0; k < c.multiplicity; ++k) lambdas.push_back(1.0 / std::conj(center));
    }
    if (lambdas.size() != rts.size()) continue;
    while (lambdas.size() < n) lambdas.push_back(0.0);
    PointSequence sigma(std::move(lambdas));
    const double defect = detail::membership_defect(sigma, f);
    best = std::min(best, defect);
    if (defect <= kMembershipTol) return sigma;
  }
  throw NumericalBreakdown("poles_to_sigma: membership check failed (best relative defect " + std::to_string(best) + ")");
}

}  // namespace blaschke
