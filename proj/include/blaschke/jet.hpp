#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "blaschke/error.hpp"

namespace blaschke {

using Complex = std::complex<double>;

/// Truncated Taylor expansion f(z0 + h) = sum_k c[k] h^k, k = 0..order.
///
/// This is the working representation for derivative propagation through
/// expression trees. Coefficients are normalized (c[k] = f^(k)(z0)/k!) so that
/// products are plain Cauchy convolutions.
class Series {
 public:
  Series() = default;
  explicit Series(int order) : c_(static_cast<std::size_t>(order) + 1) {}
  Series(int order, Complex value) : Series(order) { c_[0] = value; }

  /// Expansion of the identity map z around z0: z0 + h.
  static Series variable(int order, Complex z0) {
    Series s(order, z0);
    if (order >= 1) s.c_[1] = 1.0;
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  Complex& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  Complex operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  std::span<const Complex> coefficients() const { return c_; }

  Series& operator+=(const Series& o) {
    for (int k = 0; k <= order(); ++k) (*this)[k] += o[k];
    return *this;
  }
  Series& operator-=(const Series& o) {
    for (int k = 0; k <= order(); ++k) (*this)[k] -= o[k];
    return *this;
  }
  Series& operator*=(Complex s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Complex s, Series a) { return a *= s; }

  friend Series operator*(const Series& a, const Series& b) {
    const int L = a.order();
    Series out(L);
    for (int i = 0; i <= L; ++i) {
      if (a[i] == Complex{}) continue;
      for (int j = 0; i + j <= L; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  }

  /// Truncated quotient; the divisor must not vanish at the expansion point.
  friend Series operator/(const Series& a, const Series& b) {
    const int L = a.order();
    if (b[0] == Complex{}) throw PoleError("series division by a function vanishing at the point");
    Series q(L);
    const Complex inv = 1.0 / b[0];
    for (int k = 0; k <= L; ++k) {
      Complex acc = a[k];
      for (int j = 1; j <= k; ++j) acc -= b[j] * q[k - j];
      q[k] = acc * inv;
    }
    return q;
  }

  /// Integer power by binary exponentiation (well defined when c[0] == 0).
  Series pow(unsigned k) const {
    Series result(order(), 1.0);
    Series base = *this;
    while (k > 0) {
      if (k & 1U) result = result * base;
      k >>= 1U;
      if (k > 0) base = base * base;
    }
    return result;
  }

  /// outer(inner(z0 + h)), where *this is the expansion of `outer` around
  /// inner(z0) and `inner` is the expansion of the inner map around z0.
  Series compose_after(const Series& inner) const {
    const int L = order();
    Series d = inner;
    d[0] = 0.0;
    Series res(L, (*this)[L]);
    for (int k = L - 1; k >= 0; --k) {
      res = res * d;
      res[0] += (*this)[k];
    }
    return res;
  }

 private:
  std::vector<Complex> c_;
};

/// Values and derivatives [f(z), f'(z), ..., f^(L)(z)] at one point.
struct Jet {
  int order = 0;
  std::vector<Complex> values;

  static Jet from_series(const Series& s) {
    Jet j;
    j.order = s.order();
    j.values.resize(static_cast<std::size_t>(j.order) + 1);
    double fact = 1.0;
    for (int k = 0; k <= j.order; ++k) {
      if (k > 0) fact *= k;
      j.values[static_cast<std::size_t>(k)] = s[k] * fact;
    }
    return j;
  }

  Complex operator[](int k) const { return values[static_cast<std::size_t>(k)]; }
};

}  // namespace blaschke
