#pragma once

// Extremal test functions phi = Q_n^N, lower-bound estimators for the
// interpolation and embedding constants, kernel-norm sweeps and log-log
// exponent fits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "blaschke/error.hpp"
#include "blaschke/funcexpr.hpp"
#include "blaschke/modelspace.hpp"
#include "blaschke/norms.hpp"
#include "blaschke/polynomial.hpp"
#include "blaschke/quotient.hpp"
#include "blaschke/random.hpp"

namespace blaschke {

/// D_n(z) = 1 + z + ... + z^{n-1}.
inline Expr dirichlet_kernel(int n) {
  if (n < 1) throw DomainError("dirichlet_kernel requires n >= 1");
  return Expr::polynomial(std::vector<Complex>(static_cast<std::size_t>(n), 1.0));
}

struct TestFunction {
  int n = 1;
  double r = 0.0;
  int N = 1;
  Expr expr;                        // phi = Q_n^N
  std::vector<Complex> psi_coeffs;  // Psi = phi o b_{-r}, all coefficients real and positive

  std::vector<Complex> base;        // (1 + r z) D_n(z)

  /// phi in the chart centred at -r: Psi = (1 - r^2)^{-N} base^{2N}.
  ChartPolynomial chart() const {
    return {base, Complex(-r, 0.0), static_cast<unsigned>(2 * N), std::pow(1.0 - r * r, -N)};
  }
  /// ||phi||_inf = Psi(1) = sum of the coefficients.
  double sup() const {
    double s = 0.0;
    for (auto c : psi_coeffs) s += c.real();
    return s;
  }
};

/// Q_n = (1 - r^2) k_{-r}^2 (D_n o b_{-r})^2 and phi = Q_n^N.
///
/// Psi is built by exact convolution powering of
/// (1 + r z) D_n(z) = 1 + (1 + r)(z + ... + z^{n-1}) + r z^n
/// so that every coefficient stays positive and relatively accurate.
inline TestFunction test_function(int n, double r, int N) {
  if (n < 1) throw DomainError("test_function requires n >= 1");
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("test_function requires 0 <= r < 1");
  if (N < 1) throw DomainError("test_function requires N >= 1");
  TestFunction tf;
  tf.n = n;
  tf.r = r;
  tf.N = N;

  const Complex lam(-r, 0.0);
  const Expr Q = Expr::scaled(1.0 - r * r, Expr::product({Expr::power(Expr::cauchy_kernel(lam), 2),
                                                          Expr::power(Expr::compose(dirichlet_kernel(n), Expr::blaschke_factor(lam)), 2)}));
  tf.expr = N == 1 ? Q : Expr::power(Q, static_cast<unsigned>(N));

  std::vector<double> base = poly::multiply(std::vector<double>{1.0, r}, std::vector<double>(static_cast<std::size_t>(n), 1.0));
  if (r == 0.0) base.pop_back();
  const std::vector<double> powered = poly::power(base, static_cast<unsigned>(2 * N));
  tf.base.assign(base.begin(), base.end());
  const double scale = std::pow(1.0 - r * r, -N);
  tf.psi_coeffs.reserve(powered.size());
  for (double c : powered) tf.psi_coeffs.emplace_back(c * scale, 0.0);

  // the compositional expression and the coefficient polynomial must agree
  auto rng = make_rng(0x7E57F00DULL, static_cast<std::uint64_t>(n) * 131 + static_cast<std::uint64_t>(N));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double peak = tf.sup();
  const Expr chart = Expr::blaschke_factor(lam);
  for (int i = 0; i < 16; ++i) {
    const Complex w = std::polar(1.0, angle(rng));
    const Complex direct = tf.expr(chart(w));
    const Complex coeff = poly::horner(tf.psi_coeffs, w);
    if (std::abs(direct - coeff) > 1e-8 * peak)
      throw NumericalBreakdown("test_function: expression and coefficient polynomial disagree");
  }
  return tf;
}

/// N = l + 2 where beta lies in (l - 1, l], l >= 0.
inline int choose_N(double beta) {
  if (!(beta > -1.0)) throw DomainError("choose_N requires beta > -1");
  const int l = std::max(0, static_cast<int>(std::ceil(beta)));
  return l + 2;
}

struct Space {
  enum class Kind { Hardy, Bergman };
  Kind kind = Kind::Hardy;
  double p = 2.0;
  double beta = 0.0;

  static Space hardy(double p) { return {Kind::Hardy, p, 0.0}; }
  static Space bergman(double p, double beta) { return {Kind::Bergman, p, beta}; }

  /// Exponent s with C_{n,r} of order (n / (1 - r))^s.
  double exponent() const { return kind == Kind::Hardy ? 1.0 / p : (2.0 + beta) / p; }

  void validate() const {
    if (!(p >= 1.0) || std::isinf(p)) throw DomainError("space exponent p must satisfy 1 <= p < infinity");
    if (kind == Kind::Bergman && !(beta > -1.0)) throw DomainError("Bergman weight beta must exceed -1");
  }
};

struct InterpResult {
  int n = 0;
  double r = 0.0;
  double x = 0.0;          // n / (1 - r)
  int N = 1;
  double quotient = 0.0;   // ||phi||_{H^inf / b_{-r}^n H^inf}
  double fejer = 0.0;      // Fejer lower bound for the quotient norm
  double supnorm = 0.0;    // ||phi||_inf
  double xnorm = 0.0;      // ||phi||_X
  double lower = 0.0;      // quotient / xnorm
  double fejer_lower = 0.0;
};

/// Lower bound c(sigma_{n,-r}, X, H^inf) >= ||phi||_{H^inf / b_{-r}^n H^inf} / ||phi||_X.
inline InterpResult interp_lower(int n, double r, const Space& space) {
  space.validate();
  const int N = space.kind == Space::Kind::Hardy ? 1 : choose_N(space.beta);
  const TestFunction tf = test_function(n, r, N);
  InterpResult out;
  out.n = n;
  out.r = r;
  out.x = n / (1.0 - r);
  out.N = N;
  const auto un = static_cast<std::size_t>(n);
  out.quotient = operator_norm(lower_toeplitz(tf.psi_coeffs, un));
  out.fejer = fejer_lower_bound(tf.psi_coeffs, un);
  out.supnorm = sup_norm(tf.chart()).value;
  out.xnorm = space.kind == Space::Kind::Hardy ? hardy_norm(tf.chart(), space.p).value
                                               : bergman_norm(tf.chart(), space.p, space.beta).value;
  out.lower = out.quotient / out.xnorm;
  out.fejer_lower = out.fejer / out.xnorm;
  return out;
}

struct EmbedResult {
  int n = 0;
  double r = 0.0;
  double x = 0.0;
  int m = 0;
  int N = 0;
  double supnorm = 0.0;
  double bergman = 0.0;
  double lower = 0.0;  // supnorm / bergman
};

/// E_{n,r}(H^inf, A^p(beta)) >= ||phi_m||_inf / ||phi_m||_{A^p(beta)}, m = [n / (2N)].
inline EmbedResult embed_lower(int n, double r, double p, double beta) {
  Space::bergman(p, beta).validate();
  const int N = choose_N(beta);
  if (n <= 2 * N) throw DomainError("embed_lower requires n > 2N (n = " + std::to_string(n) + ", N = " + std::to_string(N) + ")");
  EmbedResult out;
  out.n = n;
  out.r = r;
  out.x = n / (1.0 - r);
  out.N = N;
  out.m = n / (2 * N);
  const TestFunction tf = test_function(out.m, r, N);
  out.supnorm = sup_norm(tf.chart()).value;
  out.bergman = bergman_norm(tf.chart(), p, beta).value;
  out.lower = out.supnorm / out.bergman;
  return out;
}

struct SweepGrid {
  std::vector<int> n_values{8, 16, 32, 64, 128};
  std::vector<double> r_values{0.5, 0.75, 0.9};

  struct Point {
    int n;
    double r;
  };
  /// Grid points ordered by (n, r).
  std::vector<Point> points() const {
    std::vector<Point> pts;
    for (int n : n_values)
      for (double r : r_values) pts.push_back({n, r});
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.n != b.n ? a.n < b.n : a.r < b.r; });
    return pts;
  }

  void validate() const {
    if (n_values.empty() || r_values.empty()) throw DomainError("sweep grid is empty");
    for (int n : n_values)
      if (n < 1) throw DomainError("grid n values must be positive");
    for (double r : r_values)
      if (!(r >= 0.0 && r < 1.0)) throw DomainError("grid r values must lie in [0, 1)");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& p : points()) {
      lo = std::min(lo, p.n / (1.0 - p.r));
      hi = std::max(hi, p.n / (1.0 - p.r));
    }
    if (hi < 32.0 * lo) throw DomainError("grid x = n/(1-r) must span a factor of at least 32");
  }
};

/// Evaluates fn on every item with up to `jobs` threads; results keep the
/// input order. The first exception (in input order) is rethrown.
template <class T, class Fn>
auto parallel_map(const std::vector<T>& items, Fn&& fn, unsigned jobs = 0) -> std::vector<decltype(fn(items.front()))> {
  using R = decltype(fn(items.front()));
  std::vector<R> results(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(items.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        results[i] = fn(items[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

struct KernelTarget {
  enum class Kind { Hq, dAq, ddAq, Bloch, HigherL };
  Kind kind = Kind::Hq;
  double q = 2.0;      // std::numeric_limits<double>::infinity() for the sup norm
  double gamma = 0.0;  // Bergman weight
  double alpha = 0.0;  // Bloch weight
  int l = 1;           // derivative order for Bloch and HigherL

  /// Exponent s in ||.|| of order (n / (1 - r))^s.
  double exponent() const {
    const double qinv = std::isinf(q) ? 0.0 : 1.0 / q;
    switch (kind) {
      case Kind::Hq: return 1.0 - qinv;
      case Kind::dAq: return 2.0 - (gamma + 2.0) * qinv;
      case Kind::ddAq: return 3.0 - (gamma + 2.0) * qinv;
      case Kind::Bloch: return l + 2.0 - alpha;
      case Kind::HigherL: return l + 1.0 - (gamma + 2.0) * qinv;
    }
    return 0.0;
  }

  void validate() const {
    if (kind == Kind::Bloch) {
      if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("Bloch weight alpha must lie in [0, 1]");
      if (l < 0) throw DomainError("derivative order must be nonnegative");
      return;
    }
    if (!(q > 1.0)) throw DomainError("kernel norm exponent q must exceed 1");
    if (kind != Kind::Hq) {
      if (std::isinf(q)) throw DomainError("Bergman kernel targets need finite q");
      if (!(gamma > -1.0)) throw DomainError("Bergman weight gamma must exceed -1");
      const double gamma_max = kind == Kind::dAq ? q - 1.0 : q;
      if (gamma > gamma_max) throw DomainError("Bergman weight gamma exceeds the admissible range for this target");
      if (kind == Kind::HigherL && l < 2) throw DomainError("higher-order kernel targets need l >= 2");
    }
  }
};

struct ScanRow {
  int n = 0;
  double r = 0.0;
  double x = 0.0;
  double value = 0.0;
};

/// Boundary point where the kernels of sigma_{n,-r} peak. The one-point
/// sequence at -r sits nearest to zeta = -1; at zeta = +1 the kernel norms stay
/// bounded as r -> 1.
inline Complex kernel_scan_zeta() { return Complex(-1.0, 0.0); }

inline double kernel_norm_at(int n, double r, const KernelTarget& target) {
  const PointSequence sigma = PointSequence::one_point(Complex(-r, 0.0), static_cast<std::size_t>(n));
  const Expr k = reproducing_kernel(sigma, kernel_scan_zeta()).expr;
  QuadratureOptions opts;
  opts.chart = Complex(-r, 0.0);
  opts.scale_hint = sigma.scale();
  switch (target.kind) {
    case KernelTarget::Kind::Hq:
      if (std::isinf(target.q)) return sup_norm(k, sigma.scale()).value;
      return hardy_norm(k, target.q, opts).value;
    case KernelTarget::Kind::dAq:
      opts.derivative = 1;
      return bergman_norm(k, target.q, target.gamma, opts).value;
    case KernelTarget::Kind::ddAq:
      opts.derivative = 2;
      return bergman_norm(k, target.q, target.gamma, opts).value;
    case KernelTarget::Kind::HigherL:
      opts.derivative = target.l;
      return bergman_norm(k, target.q, target.gamma, opts).value;
    case KernelTarget::Kind::Bloch:
      opts.chart.reset();
      opts.derivative = target.l;
      return bloch_seminorm(k, target.alpha, opts).value;
  }
  return 0.0;
}

inline std::vector<ScanRow> kernel_norm_scan(const SweepGrid& grid, const KernelTarget& target, unsigned jobs = 0) {
  target.validate();
  return parallel_map(grid.points(), [&](const SweepGrid::Point& p) {
    return ScanRow{p.n, p.r, p.n / (1.0 - p.r), kernel_norm_at(p.n, p.r, target)};
  }, jobs);
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Ordinary least squares of log y against log x.
inline ExponentFit exponent_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("exponent_fit needs at least two (x, y) pairs");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw DomainError("exponent_fit needs positive finite data");
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  if (hi < 32.0 * lo) throw DomainError("exponent_fit: x range spans less than a factor of 32");
  const double m = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.max_residual = std::max(fit.max_residual, std::abs(std::log(y[i]) - fit.intercept - fit.slope * std::log(x[i])));
  return fit;
}

inline ExponentFit exponent_fit(const std::vector<ScanRow>& rows) {
  std::vector<double> x, y;
  for (const auto& row : rows) {
    x.push_back(row.x);
    y.push_back(row.value);
  }
  return exponent_fit(x, y);
}

/// Norm of point evaluation at t on the unit ball of H^2 or A^2(beta),
/// computed from the monomial norms as (sum_m t^{2m} / ||z^m||^2)^{1/2}.
inline double eval_functional_proxy(const Space& space, double t) {
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("eval_functional_proxy requires 0 <= t < 1");
  if (space.p != 2.0) throw DomainError("eval_functional_proxy supports only H^2 and A^2(beta)");
  space.validate();
  double sum = 0.0;
  for (int m = 0; m < 10000000; ++m) {
    const double md = m;
    // ||z^m||^2 = 1 on H^2 and B(m + 1, beta + 1) on A^2(beta)
    const double log_norm2 = space.kind == Space::Kind::Hardy
                                 ? 0.0
                                 : std::lgamma(md + 1.0) + std::lgamma(space.beta + 1.0) - std::lgamma(md + space.beta + 2.0);
    const double term = t == 0.0 ? (m == 0 ? std::exp(-log_norm2) : 0.0) : std::exp(2.0 * md * std::log(t) - log_norm2);
    sum += term;
    if (term <= 1e-17 * sum && m > 0) break;
  }
  return std::sqrt(sum);
}

/// ||f^(l)||_inf / ((n/(1-r))^l ||f||_inf) for one f.
inline double bernstein_ratio_of(const Expr& f, const PointSequence& sigma, int l) {
  if (l < 1) throw DomainError("bernstein_ratio requires l >= 1");
  const double x = sigma.scale();
  QuadratureOptions d;
  d.derivative = l;
  const double num = sup_norm(f, x, d).value;
  const double den = sup_norm(f, x).value;
  if (den == 0.0) return 0.0;
  return num / (std::pow(x, l) * den);
}

/// Max of the Bernstein ratio over random unit-coefficient MW combinations.
inline double bernstein_ratio(const PointSequence& sigma, int l, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("bernstein_ratio requires at least one sample");
  auto rng = make_rng(seed, 0xBE);
  std::normal_distribution<double> gauss;
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<Complex> c(sigma.n());
    double norm2 = 0.0;
    for (auto& v : c) {
      v = Complex(gauss(rng), gauss(rng));
      norm2 += std::norm(v);
    }
    for (auto& v : c) v /= std::sqrt(norm2);
    best = std::max(best, bernstein_ratio_of(reconstruct(sigma, c), sigma, l));
  }
  return best;
}

}  // namespace blaschke
