#pragma once

// Dense polynomial helpers on ascending coefficient vectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "blaschke/error.hpp"
#include "blaschke/jet.hpp"

namespace blaschke::poly {

template <class T>
using Coeffs = std::vector<T>;

/// Horner evaluation sum_k a[k] z^k.
template <class C, class Z>
auto horner(const std::vector<C>& a, Z z) -> decltype(C{} * Z{}) {
  using R = decltype(C{} * Z{});
  R acc{};
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * z + *it;
  return acc;
}

/// Degree ignoring trailing exact zeros; -1 for the zero polynomial.
template <class T>
int degree(const std::vector<T>& a) {
  for (int k = static_cast<int>(a.size()) - 1; k >= 0; --k)
    if (a[static_cast<std::size_t>(k)] != T{}) return k;
  return -1;
}

template <class T>
std::vector<T> trimmed(std::vector<T> a) {
  a.resize(static_cast<std::size_t>(std::max(degree(a), 0)) + 1);
  return a;
}

template <class T>
std::vector<T> add(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

template <class T>
std::vector<T> scaled(std::vector<T> a, T s) {
  for (auto& v : a) v *= s;
  return a;
}

/// Direct (schoolbook) product. For nonnegative inputs every output
/// coefficient is a sum of nonnegative terms, so relative accuracy is kept
/// coefficientwise, which an FFT product cannot offer.
template <class T>
std::vector<T> multiply(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<T> out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == T{}) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

template <class T>
std::vector<T> power(const std::vector<T>& a, unsigned k) {
  std::vector<T> result{T{1}};
  std::vector<T> base = a;
  while (k > 0) {
    if (k & 1U) result = multiply(result, base);
    k >>= 1U;
    if (k > 0) base = multiply(base, base);
  }
  return result;
}

template <class T>
std::vector<T> derivative(const std::vector<T>& a) {
  if (a.size() <= 1) return {T{}};
  std::vector<T> d(a.size() - 1);
  for (std::size_t k = 1; k < a.size(); ++k) d[k - 1] = a[k] * static_cast<double>(k);
  return d;
}

/// Composition p(q(z)) by Horner in polynomial arithmetic.
template <class T>
std::vector<T> compose(const std::vector<T>& p, const std::vector<T>& q) {
  std::vector<T> acc{T{}};
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    acc = multiply(acc, q);
    if (acc.empty()) acc.push_back(T{});
    acc[0] += *it;
  }
  return acc;
}

/// Taylor expansion of the polynomial around z0, truncated at `order`
/// (repeated synthetic division).
inline Series taylor_shift(const std::vector<Complex>& a, Complex z0, int order) {
  Series s(order);
  std::vector<Complex> work = a;
  const int n = static_cast<int>(work.size());
  for (int k = 0; k <= order && k < n; ++k) {
    // after this pass, work[k] is the k-th Taylor coefficient at z0
    for (int j = n - 2; j >= k; --j) work[static_cast<std::size_t>(j)] += z0 * work[static_cast<std::size_t>(j) + 1];
    s[k] = work[static_cast<std::size_t>(k)];
  }
  return s;
}

/// All complex roots (with repetition) via companion-matrix eigenvalues,
/// polished by a few Newton steps.
inline std::vector<Complex> roots(const std::vector<Complex>& coeffs) {
  const std::vector<Complex> a = trimmed(coeffs);
  const int d = degree(a);
  if (d < 0) throw DomainError("roots of the zero polynomial are undefined");
  if (d == 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  const Complex lead = a[static_cast<std::size_t>(d)];
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -a[static_cast<std::size_t>(i)] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("companion eigenvalue solver failed");
  std::vector<Complex> out(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
  const auto da = derivative(a);
  for (auto& z : out) {
    for (int it = 0; it < 3; ++it) {
      const Complex f = horner(a, z);
      const Complex fp = horner(da, z);
      if (std::abs(fp) == 0.0) break;
      const Complex step = f / fp;
      if (!(std::isfinite(step.real()) && std::isfinite(step.imag()))) break;
      // accept only steps that reduce the residual
      if (std::abs(horner(a, z - step)) < std::abs(f)) z -= step; else break;
    }
  }
  return out;
}

struct RootCluster {
  Complex center;
  int multiplicity = 1;
};

/// Groups roots that lie within `rel_tol * max(1, |root|)` of each other and
/// replaces each group by its mean. The mean of a perturbed multiple root is
/// far better conditioned than the individual members.
inline std::vector<RootCluster> cluster_roots(const std::vector<Complex>& rts, double rel_tol) {
  std::vector<RootCluster> clusters;
  std::vector<bool> used(rts.size(), false);
  for (std::size_t i = 0; i < rts.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> members{i};
    used[i] = true;
    // grow transitively so that a ring of perturbed roots is caught whole
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Complex c = rts[members[m]];
      for (std::size_t j = 0; j < rts.size(); ++j) {
        if (used[j]) continue;
        if (std::abs(rts[j] - c) <= rel_tol * std::max(1.0, std::abs(c))) {
          used[j] = true;
          members.push_back(j);
        }
      }
    }
    Complex mean{};
    for (auto idx : members) mean += rts[idx];
    mean /= static_cast<double>(members.size());
    clusters.push_back({mean, static_cast<int>(members.size())});
  }
  return clusters;
}

}  // namespace blaschke::poly
