#pragma once

// Quadrature engines for H^p, A^p(beta), weighted Bloch seminorms, the
// fractional derivative and the two pairings.
//
// Functions concentrated near one boundary point are integrated in the
// conformal chart z = b_c(w): the Jacobian is |b_c'(w)| on the circle and
// |b_c'(w)|^{beta+2} (1 - |w|^2)^beta on the weighted disk, so the peak is
// spread over the whole circle in w.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "blaschke/error.hpp"
#include "blaschke/funcexpr.hpp"
#include "blaschke/quadrature.hpp"

namespace blaschke {

struct NormEstimate {
  double value = 0.0;
  double error_est = 0.0;
};

struct QuadratureOptions {
  double tol = 0.0;                    // 0 selects the routine default
  int derivative = 0;                  // measure f^(derivative) instead of f
  std::optional<Complex> chart;        // integrate in w with z = b_c(w)
  double scale_hint = 1.0;             // n / (1 - r) when known
  std::size_t min_angular = 0;
  std::size_t min_radial = 0;
};

/// z = b_c(w) together with |b_c'(w)|.
struct Chart {
  Complex c{};
  bool identity = true;

  static Chart from(const std::optional<Complex>& center) {
    if (!center) return {};
    if (!(std::abs(*center) < 1.0)) throw DomainError("chart centre must lie in the open disk");
    return {*center, false};
  }
  Complex map(Complex w) const { return identity ? w : (c - w) / (1.0 - std::conj(c) * w); }
  double jacobian(Complex w) const { return identity ? 1.0 : (1.0 - std::norm(c)) / std::norm(1.0 - std::conj(c) * w); }
};

namespace detail {

constexpr std::size_t kSampleCap = std::size_t{1} << 22;

inline double circle_angle(std::size_t j, std::size_t M, bool half) {
  return 2.0 * std::numbers::pi * (static_cast<double>(j) + (half ? 0.5 : 0.0)) / static_cast<double>(M);
}

/// f^(l)(z) through jets (plain evaluation when l = 0).
inline Complex derivative_value(const Expr& f, Complex z, int l) {
  if (l == 0) return f(z);
  double fact = 1.0;
  for (int k = 2; k <= l; ++k) fact *= k;
  return f.series(z, l)[l] * fact;
}

/// Trapezoid mean over the circle |w| = rho with sample doubling; `cb` fills
/// M values at angles 2 pi (j + half/2) / M. On return M holds the final count.
template <class T, class Callback>
T circle_mean(Callback& cb, double rho, std::size_t& M, double rel_tol, double* abs_mean = nullptr) {
  std::vector<T> buf;
  auto sums = [&](bool half) {
    cb(rho, M, half, buf);
    T s{};
    double a = 0.0;
    for (const auto& v : buf) {
      s += v;
      a += std::abs(v);
    }
    return std::pair<T, double>{s, a};
  };
  auto [S, A] = sums(false);
  while (true) {
    if (M >= kSampleCap) throw ConvergenceError("circle quadrature did not converge before the sample cap");
    auto [Sh, Ah] = sums(true);
    const T mean_old = S / static_cast<double>(M);
    S += Sh;
    A += Ah;
    M *= 2;
    const T mean_new = S / static_cast<double>(M);
    const double scale = A / static_cast<double>(M);
    if (std::abs(mean_new - mean_old) <= rel_tol * scale || scale == 0.0) {
      if (abs_mean) *abs_mean = scale;
      return mean_new;
    }
  }
}

/// Values of a polynomial on the circle |w| = rho by one FFT.
inline void polynomial_on_circle(const std::vector<Complex>& a, double rho, std::size_t M, bool half,
                                 std::vector<Complex>& out) {
  std::vector<Complex> folded(M);
  double rk = 1.0;
  const double step = half ? std::numbers::pi / static_cast<double>(M) : 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    folded[k % M] += a[k] * rk * std::polar(1.0, step * static_cast<double>(k));
    rk *= rho;
  }
  // out[j] = sum_k folded[k] exp(2 pi i j k / M)
  Eigen::FFT<double> fft;
  fft.inv(out, folded);
  for (auto& v : out) v *= static_cast<double>(M);
}

}  // namespace detail

/// Tensor quadrature of int_D F(w) (1 - |w|^2)^beta dA(w), where `cb`
/// supplies F on circles (see circle_mean). The radial Gauss-Jacobi order
/// doubles until the total changes by less than tol relative.
template <class T, class Callback>
T integrate_disk(Callback&& cb, double beta, double tol, std::size_t min_radial, std::size_t min_angular,
                 double* error_est = nullptr) {
  constexpr std::size_t kRadialCap = 4096;
  constexpr double kCircleTol = 1e-12;
  std::size_t K = std::max<std::size_t>(min_radial, 16);
  const std::size_t M0 = std::max<std::size_t>(next_pow2(std::max<std::size_t>(min_angular, 16)), 16);
  std::optional<T> prev;
  while (true) {
    const GaussJacobiRule rule = gauss_jacobi_unit(K, beta);
    T total{};
    double abs_total = 0.0;
    std::size_t M_hint = M0;
    for (std::size_t i = 0; i < K; ++i) {
      std::size_t M = M_hint;
      double am = 0.0;
      total += rule.weights[i] * detail::circle_mean<T>(cb, std::sqrt(rule.nodes[i]), M, kCircleTol, &am);
      abs_total += rule.weights[i] * am;
      M_hint = std::max(M0, M / 2);
    }
    if (prev) {
      const double diff = std::abs(total - *prev);
      if (diff <= tol * abs_total || abs_total == 0.0) {
        if (error_est) *error_est = diff;
        return total;
      }
    }
    if (K >= kRadialCap) throw ConvergenceError("radial quadrature did not converge before the node cap");
    prev = total;
    K *= 2;
  }
}

/// int_D F(z) (1 - |z|^2)^beta dA(z) for a pointwise integrand F.
template <class T = double, class F>
T disk_integral(F&& integrand, double beta, const QuadratureOptions& opts = {}, double* error_est = nullptr) {
  if (!(beta > -1.0)) throw DomainError("Bergman weight exponent must exceed -1");
  const Chart chart = Chart::from(opts.chart);
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-8;
  auto cb = [&](double rho, std::size_t M, bool half, std::vector<T>& out) {
    out.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
      const Complex w = std::polar(rho, detail::circle_angle(j, M, half));
      out[j] = static_cast<T>(integrand(chart.map(w))) *
               (chart.identity ? 1.0 : std::pow(chart.jacobian(w), beta + 2.0));
    }
  };
  return integrate_disk<T>(cb, beta, tol, opts.min_radial, opts.min_angular, error_est);
}

/// f with f o b_c = scale * base(w)^power, base a polynomial in w. Norms of the
/// extremal family run on FFT samples of the low-degree base; powering the
/// samples keeps relative accuracy where the expanded polynomial is tiny.
struct ChartPolynomial {
  std::vector<Complex> base;
  Complex center;
  unsigned power = 1;
  double scale = 1.0;

  std::size_t degree() const { return (base.size() - 1) * power; }
  Complex operator()(Complex w) const { return scale * std::pow(poly::horner(base, w), static_cast<int>(power)); }

  /// Values at angles 2 pi (j + half/2) / M on |w| = rho.
  void on_circle(double rho, std::size_t M, bool half, std::vector<Complex>& out) const;
};

inline void ChartPolynomial::on_circle(double rho, std::size_t M, bool half, std::vector<Complex>& out) const {
  detail::polynomial_on_circle(base, rho, M, half, out);
  for (auto& v : out) {
    Complex acc{1.0}, b = v;
    for (unsigned k = power; k > 0; k >>= 1U) {
      if (k & 1U) acc *= b;
      b *= b;
    }
    v = scale * acc;
  }
}

inline NormEstimate hardy_norm(const Expr& f, double p, const QuadratureOptions& opts = {}) {
  if (std::isinf(p)) throw DomainError("hardy_norm: p = infinity is handled by sup_norm");
  if (!(p >= 1.0)) throw DomainError("hardy_norm requires 1 <= p < infinity");
  const Chart chart = Chart::from(opts.chart);
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-9;
  auto cb = [&](double, std::size_t M, bool half, std::vector<double>& out) {
    out.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
      const Complex w = std::polar(1.0, detail::circle_angle(j, M, half));
      out[j] = std::pow(std::abs(detail::derivative_value(f, chart.map(w), opts.derivative)), p) * chart.jacobian(w);
    }
  };
  std::size_t M = std::max<std::size_t>(4096, next_pow2(opts.min_angular));
  const double mean = detail::circle_mean<double>(cb, 1.0, M, tol);
  // the doubling tolerance bounds the change of the mean; report it on the norm scale
  const double value = std::pow(mean, 1.0 / p);
  return {value, value * tol / p};
}

inline NormEstimate hardy_norm(const ChartPolynomial& g, double p, const QuadratureOptions& opts = {}) {
  if (std::isinf(p)) throw DomainError("hardy_norm: p = infinity is handled by sup_norm");
  if (!(p >= 1.0)) throw DomainError("hardy_norm requires 1 <= p < infinity");
  const Chart chart = Chart::from(g.center);
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-9;
  std::vector<Complex> vals;
  auto cb = [&](double, std::size_t M, bool half, std::vector<double>& out) {
    g.on_circle(1.0, M, half, vals);
    out.resize(M);
    for (std::size_t j = 0; j < M; ++j)
      out[j] = std::pow(std::abs(vals[j]), p) * chart.jacobian(std::polar(1.0, detail::circle_angle(j, M, half)));
  };
  std::size_t M = std::max<std::size_t>(next_pow2(std::max<std::size_t>(4096, 4 * g.degree() + 4)), next_pow2(opts.min_angular));
  const double mean = detail::circle_mean<double>(cb, 1.0, M, tol);
  const double value = std::pow(mean, 1.0 / p);
  return {value, value * tol / p};
}

inline NormEstimate bergman_norm(const Expr& f, double p, double beta, const QuadratureOptions& opts = {}) {
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("bergman_norm requires 1 <= p < infinity");
  double err = 0.0;
  const double I = disk_integral<double>(
      [&](Complex z) { return std::pow(std::abs(detail::derivative_value(f, z, opts.derivative)), p); }, beta, opts, &err);
  const double value = std::pow(I, 1.0 / p);
  return {value, I > 0.0 ? value * err / (p * I) : 0.0};
}

inline NormEstimate bergman_norm(const ChartPolynomial& g, double p, double beta, const QuadratureOptions& opts = {}) {
  if (!(p >= 1.0) || std::isinf(p)) throw DomainError("bergman_norm requires 1 <= p < infinity");
  if (!(beta > -1.0)) throw DomainError("Bergman weight exponent must exceed -1");
  const Chart chart = Chart::from(g.center);
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-8;
  std::vector<Complex> vals;
  auto cb = [&](double rho, std::size_t M, bool half, std::vector<double>& out) {
    g.on_circle(rho, M, half, vals);
    out.resize(M);
    for (std::size_t j = 0; j < M; ++j)
      out[j] = std::pow(std::abs(vals[j]), p) *
               std::pow(chart.jacobian(std::polar(rho, detail::circle_angle(j, M, half))), beta + 2.0);
  };
  double err = 0.0;
  const std::size_t min_angular = std::max(opts.min_angular, next_pow2(2 * g.degree() + 2));
  const std::size_t min_radial = std::max(opts.min_radial, next_pow2(g.degree() / 4 + 1));
  const double I = integrate_disk<double>(cb, beta, tol, min_radial, min_angular, &err);
  const double value = std::pow(I, 1.0 / p);
  return {value, I > 0.0 ? value * err / (p * I) : 0.0};
}

namespace detail {

/// Maximum of a smooth periodic function sampled on M points, refined by
/// successive parabolic steps (step shrinking by 4) around the 8 best local
/// maxima.
template <class G>
NormEstimate refine_circle_max(G&& g, const std::vector<double>& grid) {
  const std::size_t M = grid.size();
  const double h0 = 2.0 * std::numbers::pi / static_cast<double>(M);
  std::vector<std::size_t> peaks;
  for (std::size_t j = 0; j < M; ++j) {
    const double v = grid[j];
    if (v >= grid[(j + M - 1) % M] && v >= grid[(j + 1) % M]) peaks.push_back(j);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
  if (peaks.size() > 8) peaks.resize(8);
  const double grid_max = *std::max_element(grid.begin(), grid.end());
  double best = grid_max;
  for (auto j : peaks) {
    double theta = h0 * static_cast<double>(j);
    double fc = grid[j];
    double h = h0;
    double fl = grid[(j + M - 1) % M], fr = grid[(j + 1) % M];
    for (int it = 0; it < 40 && h > 1e-14; ++it) {
      const double curv = fl - 2.0 * fc + fr;
      if (curv < 0.0) {
        const double delta = std::clamp(0.5 * h * (fl - fr) / curv, -h, h);
        const double fv = g(theta + delta);
        if (fv > fc) {
          theta += delta;
          fc = fv;
        }
      } else {
        // flat or convex triple: move toward the larger neighbour
        if (fl > fc) { theta -= h; fc = fl; }
        else if (fr > fc) { theta += h; fc = fr; }
      }
      h *= 0.25;
      fl = g(theta - h);
      fr = g(theta + h);
    }
    best = std::max(best, fc);
  }
  return {best, best - grid_max};
}

}  // namespace detail

/// sup over the unit circle of |f^(l)|; by the maximum principle this is the
/// sup over the closed disk.
inline NormEstimate sup_norm(const Expr& f, double scale_hint = 1.0, const QuadratureOptions& opts = {}) {
  const int l = opts.derivative;
  const std::size_t M = std::max({std::size_t{4096}, next_pow2(static_cast<std::size_t>(64.0 * std::max(scale_hint, 1.0))),
                                  next_pow2(opts.min_angular)});
  auto g = [&](double theta) { return std::abs(detail::derivative_value(f, std::polar(1.0, theta), l)); };
  std::vector<double> grid(M);
  for (std::size_t j = 0; j < M; ++j) grid[j] = g(detail::circle_angle(j, M, false));
  return detail::refine_circle_max(g, grid);
}

inline NormEstimate sup_norm(const ChartPolynomial& g, const QuadratureOptions& opts = {}) {
  const std::size_t M = std::max({std::size_t{4096}, next_pow2(8 * g.degree() + 8), next_pow2(opts.min_angular)});
  std::vector<Complex> vals;
  g.on_circle(1.0, M, false, vals);
  std::vector<double> grid(M);
  for (std::size_t j = 0; j < M; ++j) grid[j] = std::abs(vals[j]);
  auto eval = [&](double theta) { return std::abs(g(std::polar(1.0, theta))); };
  return detail::refine_circle_max(eval, grid);
}

/// sup |f^(l+1)(z)| (1 - |z|)^alpha over circles of radius 1 - 2^-j (and the
/// unit circle when alpha = 0), j increasing until the sup is stable over
/// four consecutive circles past the scale of the data.
inline NormEstimate bloch_seminorm(const Expr& f, double alpha, const QuadratureOptions& opts = {}) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("Bloch weight exponent must lie in [0, 1]");
  const int order = opts.derivative + 1;
  const std::size_t M = std::max({std::size_t{256}, next_pow2(static_cast<std::size_t>(64.0 * std::max(opts.scale_hint, 1.0))),
                                  next_pow2(opts.min_angular)});
  auto circle_sup = [&](double rho) {
    const double weight = std::pow(1.0 - rho, alpha);
    auto g = [&](double theta) { return std::abs(detail::derivative_value(f, std::polar(rho, theta), order)) * weight; };
    if (rho == 0.0) return NormEstimate{g(0.0), 0.0};
    std::vector<double> grid(M);
    for (std::size_t j = 0; j < M; ++j) grid[j] = g(detail::circle_angle(j, M, false));
    return detail::refine_circle_max(g, grid);
  };
  NormEstimate best{0.0, 0.0};
  const int j_min = static_cast<int>(std::ceil(std::log2(std::max(opts.scale_hint, 1.0)))) + 2;
  int stale = 0;
  for (int j = 0; j <= 48; ++j) {
    const NormEstimate c = circle_sup(1.0 - std::ldexp(1.0, -j));
    if (c.value > best.value * (1.0 + 1e-12)) {
      best = c;
      stale = 0;
    } else {
      ++stale;
    }
    if (j >= j_min && stale >= 4) break;
  }
  if (alpha == 0.0) {
    const NormEstimate c = circle_sup(1.0);
    if (c.value > best.value) best = c;
  }
  return best;
}

/// D_alpha(z^m) = Gamma(m+2+alpha) / ((m+1)! Gamma(2+alpha)) z^m.
inline std::vector<Complex> frac_diff(const std::vector<Complex>& coeffs, double alpha) {
  if (!(alpha > -1.0)) throw DomainError("fractional differentiation requires alpha > -1");
  std::vector<Complex> out(coeffs.size());
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const double md = static_cast<double>(m);
    const double log_mult = std::lgamma(md + 2.0 + alpha) - std::lgamma(md + 2.0) - std::lgamma(2.0 + alpha);
    out[m] = coeffs[m] * std::exp(log_mult);
  }
  return out;
}

/// <h, g> = int_T h conj(g) dm.
inline Complex cauchy_pairing(const Expr& h, const Expr& g, const QuadratureOptions& opts = {}) {
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-10;
  auto cb = [&](double, std::size_t M, bool half, std::vector<Complex>& out) {
    out.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
      const Complex z = std::polar(1.0, detail::circle_angle(j, M, half));
      out[j] = h(z) * std::conj(g(z));
    }
  };
  std::size_t M = std::max<std::size_t>(256, next_pow2(std::max(opts.min_angular,
      static_cast<std::size_t>(4 * std::min(std::max(h.degree_hint(), g.degree_hint()), 1L << 20) + 4))));
  return detail::circle_mean<Complex>(cb, 1.0, M, tol);
}

/// (h, g) = int_D h conj(g) (1 - |u|^2)^beta dA(u).
inline Complex bergman_pairing(const Expr& h, const Expr& g, double beta = 0.0, const QuadratureOptions& opts = {}) {
  QuadratureOptions o = opts;
  if (o.tol <= 0.0) o.tol = 1e-10;
  return disk_integral<Complex>([&](Complex z) { return h(z) * std::conj(g(z)); }, beta, o);
}

/// S* f = (f - f(0)) / z.
inline Expr backward_shift(const Expr& f) { return Expr::difference_quotient(f, 0.0); }

}  // namespace blaschke
