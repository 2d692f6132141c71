#pragma once

// Composable analytic-function expressions with value and jet evaluation.
//
// Every function the library manipulates (Blaschke factors and products,
// Cauchy and reproducing kernels, polynomials, the extremal test functions)
// is an immutable tree of `Expr` nodes. Derivatives come from truncated
// Taylor (jet) arithmetic propagated through the tree, never from finite
// differences.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "blaschke/error.hpp"
#include "blaschke/jet.hpp"
#include "blaschke/polynomial.hpp"

namespace blaschke {

enum class ExprKind {
  Polynomial,
  Rational,
  BlaschkeFactor,
  CauchyKernel,
  Sum,
  Product,
  IntegerPower,
  Compose,
  ScalarMultiple,
  DifferenceQuotient,
};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

namespace detail {

class Node {
 public:
  virtual ~Node() = default;
  virtual ExprKind kind() const = 0;
  virtual Complex eval(Complex z) const = 0;
  virtual Series series(Complex z, int order) const = 0;
  virtual long degree_hint() const = 0;
};

inline long saturating_mul(long a, long b) {
  constexpr long cap = 1L << 30;
  if (a == 0 || b == 0) return 0;
  return (a > cap / b) ? cap : a * b;
}

}  // namespace detail

/// Immutable handle to an analytic-function expression tree.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

  ExprKind kind() const { return node_->kind(); }
  long degree_hint() const { return node_->degree_hint(); }
  bool valid() const { return static_cast<bool>(node_); }

  /// Unchecked evaluation (the point is trusted to be finite).
  Complex operator()(Complex z) const { return node_->eval(z); }
  Series series(Complex z, int order) const { return node_->series(z, order); }

  const detail::Node& node() const { return *node_; }

  static Expr constant(Complex c);
  static Expr polynomial(std::vector<Complex> coeffs);
  static Expr rational(std::vector<Complex> num, std::vector<Complex> den);
  static Expr blaschke_factor(Complex lambda);
  static Expr cauchy_kernel(Complex zeta);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr power(Expr base, unsigned k);
  static Expr compose(Expr outer, Expr inner);
  static Expr scaled(Complex s, Expr e);
  /// (f(z) - f(a)) / (z - a), continuous at z = a.
  static Expr difference_quotient(Expr f, Complex a);

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator*(Complex s, const Expr& e) { return scaled(s, e); }
  friend Expr operator-(const Expr& a, const Expr& b) { return sum({a, scaled(-1.0, b)}); }

 private:
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {

class PolynomialNode final : public Node {
 public:
  explicit PolynomialNode(std::vector<Complex> a) : a_(std::move(a)) {
    if (a_.empty()) a_.push_back(0.0);
    for (auto c : a_)
      if (!is_finite(c)) throw DomainError("polynomial coefficient is not finite");
  }
  ExprKind kind() const override { return ExprKind::Polynomial; }
  Complex eval(Complex z) const override { return poly::horner(a_, z); }
  Series series(Complex z, int order) const override { return poly::taylor_shift(a_, z, order); }
  long degree_hint() const override { return std::max(poly::degree(a_), 0); }
  const std::vector<Complex>& coefficients() const { return a_; }

 private:
  std::vector<Complex> a_;
};

class RationalNode final : public Node {
 public:
  RationalNode(std::vector<Complex> num, std::vector<Complex> den)
      : num_(poly::trimmed(std::move(num))), den_(poly::trimmed(std::move(den))) {
    for (auto c : num_)
      if (!is_finite(c)) throw DomainError("rational numerator coefficient is not finite");
    for (auto c : den_)
      if (!is_finite(c)) throw DomainError("rational denominator coefficient is not finite");
    if (poly::degree(den_) < 0) throw DomainError("rational denominator is identically zero");
    for (auto rho : poly::roots(den_)) {
      if (std::abs(rho) <= 1.0)
        throw PoleError("rational denominator has a zero in the closed unit disk (|root| = " +
                          std::to_string(std::abs(rho)) + ")");
    }
  }
  ExprKind kind() const override { return ExprKind::Rational; }
  Complex eval(Complex z) const override {
    const Complex d = poly::horner(den_, z);
    if (std::abs(d) < 1e-14) throw PoleError("rational denominator vanishes at the evaluation point");
    return poly::horner(num_, z) / d;
  }
  Series series(Complex z, int order) const override {
    const Series d = poly::taylor_shift(den_, z, order);
    if (std::abs(d[0]) < 1e-14) throw PoleError("rational denominator vanishes at the evaluation point");
    return poly::taylor_shift(num_, z, order) / d;
  }
  long degree_hint() const override { return std::max({poly::degree(num_), poly::degree(den_), 0}); }
  const std::vector<Complex>& numerator() const { return num_; }
  const std::vector<Complex>& denominator() const { return den_; }

 private:
  std::vector<Complex> num_;
  std::vector<Complex> den_;
};

class BlaschkeFactorNode final : public Node {
 public:
  explicit BlaschkeFactorNode(Complex lambda) : lambda_(lambda) {
    if (!is_finite(lambda) || !(std::abs(lambda) < 1.0))
      throw DomainError("Blaschke factor requires |lambda| < 1");
  }
  ExprKind kind() const override { return ExprKind::BlaschkeFactor; }
  Complex eval(Complex z) const override { return (lambda_ - z) / (1.0 - std::conj(lambda_) * z); }
  Series series(Complex z, int order) const override {
    Series num(order, lambda_ - z);
    Series den(order, 1.0 - std::conj(lambda_) * z);
    if (order >= 1) {
      num[1] = -1.0;
      den[1] = -std::conj(lambda_);
    }
    return num / den;
  }
  long degree_hint() const override { return 1; }
  Complex zero() const { return lambda_; }

 private:
  Complex lambda_;
};

class CauchyKernelNode final : public Node {
 public:
  explicit CauchyKernelNode(Complex zeta) : zeta_(zeta) {
    if (!is_finite(zeta) || std::abs(zeta) > 1.0 + 1e-12)
      throw DomainError("Cauchy kernel requires a point of the closed unit disk");
  }
  ExprKind kind() const override { return ExprKind::CauchyKernel; }
  Complex eval(Complex z) const override {
    const Complex d = 1.0 - std::conj(zeta_) * z;
    if (std::abs(d) < 1e-14) throw PoleError("Cauchy kernel evaluated at its pole");
    return 1.0 / d;
  }
  Series series(Complex z, int order) const override {
    const Complex zb = std::conj(zeta_);
    const Complex d = 1.0 - zb * z;
    if (std::abs(d) < 1e-14) throw PoleError("Cauchy kernel evaluated at its pole");
    // coefficient k is zb^k / d^(k+1)
    Series s(order);
    Complex term = 1.0 / d;
    const Complex ratio = zb / d;
    for (int k = 0; k <= order; ++k) {
      s[k] = term;
      term *= ratio;
    }
    return s;
  }
  long degree_hint() const override { return 1; }

 private:
  Complex zeta_;
};

class SumNode final : public Node {
 public:
  explicit SumNode(std::vector<Expr> terms) : terms_(std::move(terms)) {}
  ExprKind kind() const override { return ExprKind::Sum; }
  Complex eval(Complex z) const override {
    Complex acc{};
    for (const auto& t : terms_) acc += t(z);
    return acc;
  }
  Series series(Complex z, int order) const override {
    Series acc(order);
    for (const auto& t : terms_) acc += t.series(z, order);
    return acc;
  }
  long degree_hint() const override {
    long d = 0;
    for (const auto& t : terms_) d = std::max(d, t.degree_hint());
    return d;
  }

 private:
  std::vector<Expr> terms_;
};

class ProductNode final : public Node {
 public:
  explicit ProductNode(std::vector<Expr> factors) : factors_(std::move(factors)) {}
  ExprKind kind() const override { return ExprKind::Product; }
  Complex eval(Complex z) const override {
    Complex acc{1.0};
    for (const auto& f : factors_) acc *= f(z);
    return acc;
  }
  Series series(Complex z, int order) const override {
    Series acc(order, 1.0);
    for (const auto& f : factors_) acc = acc * f.series(z, order);
    return acc;
  }
  long degree_hint() const override {
    long d = 0;
    for (const auto& f : factors_) d = std::min(d + f.degree_hint(), 1L << 30);
    return d;
  }

 private:
  std::vector<Expr> factors_;
};

class PowerNode final : public Node {
 public:
  PowerNode(Expr base, unsigned k) : base_(std::move(base)), k_(k) {}
  ExprKind kind() const override { return ExprKind::IntegerPower; }
  Complex eval(Complex z) const override {
    Complex b = base_(z);
    Complex acc{1.0};
    unsigned k = k_;
    while (k > 0) {
      if (k & 1U) acc *= b;
      k >>= 1U;
      if (k > 0) b *= b;
    }
    return acc;
  }
  Series series(Complex z, int order) const override { return base_.series(z, order).pow(k_); }
  long degree_hint() const override { return saturating_mul(base_.degree_hint(), static_cast<long>(k_)); }

 private:
  Expr base_;
  unsigned k_;
};

class ComposeNode final : public Node {
 public:
  ComposeNode(Expr outer, Expr inner) : outer_(std::move(outer)), inner_(std::move(inner)) {}
  ExprKind kind() const override { return ExprKind::Compose; }
  Complex eval(Complex z) const override { return outer_(inner_(z)); }
  Series series(Complex z, int order) const override {
    const Series in = inner_.series(z, order);
    return outer_.series(in[0], order).compose_after(in);
  }
  long degree_hint() const override {
    return saturating_mul(std::max(outer_.degree_hint(), 1L), std::max(inner_.degree_hint(), 1L));
  }

 private:
  Expr outer_;
  Expr inner_;
};

class ScaledNode final : public Node {
 public:
  ScaledNode(Complex s, Expr e) : s_(s), e_(std::move(e)) {
    if (!is_finite(s)) throw DomainError("scalar multiple is not finite");
  }
  ExprKind kind() const override { return ExprKind::ScalarMultiple; }
  Complex eval(Complex z) const override { return s_ * e_(z); }
  Series series(Complex z, int order) const override { return s_ * e_.series(z, order); }
  long degree_hint() const override { return e_.degree_hint(); }

 private:
  Complex s_;
  Expr e_;
};

/// (f(z) - f(a)) / (z - a). Near `a` the direct formula cancels
/// catastrophically, so inside a radius derived from the Taylor coefficients
/// of f at `a` the node switches to the truncated series
/// sum_{k>=1} t_k (z - a)^(k-1).
class DifferenceQuotientNode final : public Node {
 public:
  static constexpr int kTaylorOrder = 24;

  DifferenceQuotientNode(Expr f, Complex a) : f_(std::move(f)), a_(a) {
    if (!is_finite(a)) throw DomainError("difference quotient base point is not finite");
    const Series t = f_.series(a_, kTaylorOrder);
    fa_ = t[0];
    shifted_.resize(kTaylorOrder);
    for (int k = 1; k <= kTaylorOrder; ++k) shifted_[static_cast<std::size_t>(k - 1)] = t[k];
    switch_radius_ = 0.2 * local_scale(t);
  }
  ExprKind kind() const override { return ExprKind::DifferenceQuotient; }
  Complex eval(Complex z) const override {
    const Complex u = z - a_;
    if (std::abs(u) < switch_radius_) return poly::horner(shifted_, u);
    return (f_(z) - fa_) / u;
  }
  Series series(Complex z, int order) const override {
    const Complex u = z - a_;
    if (std::abs(u) < switch_radius_) return poly::taylor_shift(shifted_, u, order);
    Series num = f_.series(z, order);
    num[0] -= fa_;
    return num / Series::variable(order, u);
  }
  long degree_hint() const override { return f_.degree_hint(); }

 private:
  // Radius on which the expansion at `a` is trusted: the smallest
  // |t_1 / t_k|^(1/(k-1)), falling back to a normalized root test when t_1 = 0.
  static double local_scale(const Series& t) {
    double scale = std::numeric_limits<double>::infinity();
    const double t1 = std::abs(t[1]);
    if (t1 > 0.0) {
      for (int k = 2; k <= t.order(); ++k) {
        const double tk = std::abs(t[k]);
        if (tk > 0.0) scale = std::min(scale, std::pow(t1 / tk, 1.0 / (k - 1)));
      }
    } else {
      double big = 0.0;
      for (int k = 0; k <= t.order(); ++k) big = std::max(big, std::abs(t[k]));
      if (big == 0.0) return 1.0;
      for (int k = 1; k <= t.order(); ++k) {
        const double tk = std::abs(t[k]);
        if (tk > 0.0) scale = std::min(scale, std::pow(big / tk, 1.0 / k));
      }
    }
    if (!std::isfinite(scale)) scale = 1.0;
    return std::min(scale, 1.0);
  }

  Expr f_;
  Complex a_;
  Complex fa_;
  std::vector<Complex> shifted_;
  double switch_radius_ = 0.0;
};

}  // namespace detail

inline Expr Expr::constant(Complex c) { return polynomial({c}); }
inline Expr Expr::polynomial(std::vector<Complex> coeffs) {
  return Expr(std::make_shared<detail::PolynomialNode>(std::move(coeffs)));
}
inline Expr Expr::rational(std::vector<Complex> num, std::vector<Complex> den) {
  return Expr(std::make_shared<detail::RationalNode>(std::move(num), std::move(den)));
}
inline Expr Expr::blaschke_factor(Complex lambda) {
  return Expr(std::make_shared<detail::BlaschkeFactorNode>(lambda));
}
inline Expr Expr::cauchy_kernel(Complex zeta) { return Expr(std::make_shared<detail::CauchyKernelNode>(zeta)); }
inline Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) return constant(0.0);
  return Expr(std::make_shared<detail::SumNode>(std::move(terms)));
}
inline Expr Expr::product(std::vector<Expr> factors) {
  if (factors.empty()) return constant(1.0);
  return Expr(std::make_shared<detail::ProductNode>(std::move(factors)));
}
inline Expr Expr::power(Expr base, unsigned k) { return Expr(std::make_shared<detail::PowerNode>(std::move(base), k)); }
inline Expr Expr::compose(Expr outer, Expr inner) {
  return Expr(std::make_shared<detail::ComposeNode>(std::move(outer), std::move(inner)));
}
inline Expr Expr::scaled(Complex s, Expr e) { return Expr(std::make_shared<detail::ScaledNode>(s, std::move(e))); }
inline Expr Expr::difference_quotient(Expr f, Complex a) {
  return Expr(std::make_shared<detail::DifferenceQuotientNode>(std::move(f), a));
}

namespace detail {
inline void check_point(Complex z) {
  if (!is_finite(z)) throw DomainError("evaluation point is not finite");
  if (std::abs(z) > 1.0 + 1e-12) throw DomainError("evaluation point lies outside the closed unit disk");
}
}  // namespace detail

/// Value at a point of the closed unit disk.
inline Complex eval(const Expr& e, Complex z) {
  detail::check_point(z);
  return e(z);
}

/// [f(z), f'(z), ..., f^(L)(z)] by jet arithmetic.
inline Jet eval_jet(const Expr& e, Complex z, int order) {
  if (order < 0) throw DomainError("jet order must be nonnegative");
  detail::check_point(z);
  return Jet::from_series(e.series(z, order));
}

/// k-th derivative only (convenience over eval_jet).
inline Complex eval_derivative(const Expr& e, Complex z, int k) {
  if (k == 0) return e(z);
  return e.series(z, k)[k] * std::tgamma(k + 1.0);
}

inline std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1U;
  return p;
}

/// First D+1 Taylor coefficients from the DFT of M equispaced boundary
/// samples; M doubles until the requested coefficients are stable.
///
/// `initial_samples` = 0 selects max(4096, next power of two >= 32 * degree).
inline std::vector<Complex> taylor_coefficients(const Expr& e, int D, std::size_t initial_samples = 0) {
  constexpr std::size_t kCap = std::size_t{1} << 22;
  constexpr double kTol = 1e-10;
  if (D < 0) throw DomainError("coefficient count must be nonnegative");
  std::size_t M = initial_samples;
  if (M == 0) {
    const auto deg = static_cast<std::size_t>(std::min(e.degree_hint(), 1L << 24));
    M = std::max<std::size_t>(4096, next_pow2(32 * std::max<std::size_t>(deg, 1)));
  }
  if ((M & (M - 1)) != 0 || M <= static_cast<std::size_t>(D))
    throw DomainError("sample count must be a power of two exceeding the requested degree");
  M = std::min(M, kCap);

  std::vector<Complex> samples(M);
  for (std::size_t j = 0; j < M; ++j) samples[j] = e(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(M)));

  auto coefficients_of = [D](const std::vector<Complex>& s) {
    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum;
    fft.fwd(spectrum, s);
    std::vector<Complex> out(static_cast<std::size_t>(D) + 1);
    const double inv = 1.0 / static_cast<double>(s.size());
    for (int k = 0; k <= D; ++k) out[static_cast<std::size_t>(k)] = spectrum[static_cast<std::size_t>(k)] * inv;
    return out;
  };

  std::vector<Complex> prev = coefficients_of(samples);
  while (true) {
    if (M >= kCap)
      throw ConvergenceError("Taylor coefficients did not stabilize before the sample cap");
    const std::size_t M2 = 2 * M;
    std::vector<Complex> next(M2);
    for (std::size_t j = 0; j < M; ++j) {
      next[2 * j] = samples[j];
      next[2 * j + 1] = e(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(2 * j + 1) / static_cast<double>(M2)));
    }
    std::vector<Complex> cur = coefficients_of(next);
    double scale = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      scale = std::max(scale, std::abs(cur[k]));
      diff = std::max(diff, std::abs(cur[k] - prev[k]));
    }
    samples = std::move(next);
    M = M2;
    if (diff <= kTol * scale || scale == 0.0) return cur;
    prev = std::move(cur);
  }
}

}  // namespace blaschke
