#pragma once

// The model operator M_B, matrix functions f(M_B) and the quotient norm
// ||f||_{H^inf / B H^inf} = ||f(M_B)||.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "blaschke/error.hpp"
#include "blaschke/funcexpr.hpp"
#include "blaschke/modelspace.hpp"
#include "blaschke/norms.hpp"
#include "blaschke/quadrature.hpp"
#include "blaschke/random.hpp"

namespace blaschke {

/// Largest singular value by power iteration on A^H A.
///
/// The iteration runs on a normalized power (A^H A)^32, which has the same top
/// eigenvector and a 32-fold wider relative gap; convergence is declared by the
/// residual ||H v - mu v|| <= 1e-10 mu of the unpowered H = A^H A.
inline double operator_norm(const Eigen::MatrixXcd& A, std::uint64_t seed = 0x0B1A5C4EULL) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  if (!A.allFinite()) throw DomainError("operator_norm: matrix has non-finite entries");
  const Eigen::MatrixXcd H = A.adjoint() * A;
  const double hmax = H.cwiseAbs().maxCoeff();
  if (hmax == 0.0) return 0.0;
  if (H.rows() == 1) return std::sqrt(H(0, 0).real());

  Eigen::MatrixXcd G = H / hmax;
  for (int s = 0; s < 5; ++s) {
    G = G * G;
    const double g = G.cwiseAbs().maxCoeff();
    if (g == 0.0) break;
    G /= g;
  }
  G = 0.5 * (G + G.adjoint().eval());

  constexpr int kRestarts = 3;
  constexpr long kIterationCap = 100000;
  const auto n = H.rows();
  for (int attempt = 0; attempt <= kRestarts; ++attempt) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    v.normalize();
    for (long it = 0; it < kIterationCap; ++it) {
      Eigen::VectorXcd u = G * v;
      const double nu = u.norm();
      if (nu == 0.0) break;  // start orthogonal to the dominant space; restart
      v = u / nu;
      const Eigen::VectorXcd Hv = H * v;
      const double mu = v.dot(Hv).real();
      if (mu <= 0.0) continue;
      if ((Hv - mu * v).norm() <= 1e-10 * mu) return std::sqrt(mu);
    }
  }
  throw ConvergenceError("operator_norm: power iteration did not converge after restarts");
}

struct ModelOperatorMatrix {
  PointSequence sigma;
  Eigen::MatrixXcd entries;

  std::size_t n() const { return sigma.n(); }
};

namespace detail {

/// (1/M) sum_k w_k conj(e_i(w_k)) e_j(w_k) over the (possibly half-shifted)
/// M-point grid, accumulated in blocks to bound memory.
inline Eigen::MatrixXcd shift_pairing_sum(const PointSequence& sigma, std::size_t M, bool half) {
  const auto n = static_cast<Eigen::Index>(sigma.n());
  constexpr std::size_t kBlock = 2048;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
  std::vector<Complex> row(sigma.n());
  for (std::size_t start = 0; start < M; start += kBlock) {
    const std::size_t len = std::min(kBlock, M - start);
    Eigen::MatrixXcd E(static_cast<Eigen::Index>(len), n);
    Eigen::MatrixXcd ZE(static_cast<Eigen::Index>(len), n);
    for (std::size_t k = 0; k < len; ++k) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(start + k) + (half ? 0.5 : 0.0)) /
                           static_cast<double>(M);
      const Complex w = std::polar(1.0, theta);
      mw_values(sigma, w, row);
      for (Eigen::Index j = 0; j < n; ++j) {
        E(static_cast<Eigen::Index>(k), j) = row[static_cast<std::size_t>(j)];
        ZE(static_cast<Eigen::Index>(k), j) = w * row[static_cast<std::size_t>(j)];
      }
    }
    acc.noalias() += E.adjoint() * ZE;
  }
  return acc;
}

inline void check_model_invariants(const ModelOperatorMatrix& A) {
  const auto& M = A.entries;
  const auto n = M.rows();
  const double norm = operator_norm(M);
  if (norm > 1.0 + 1e-10)
    throw NumericalBreakdown("model operator is not a contraction (norm " + std::to_string(norm) + ")");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(M(i, j)) > 1e-10) throw NumericalBreakdown("model operator is not lower triangular");
  // characteristic polynomial of a triangular matrix against the monic P_sigma,
  // relative to the coefficients of prod (z + |lambda_j|)
  std::vector<Complex> charpoly{1.0}, target{1.0};
  std::vector<double> majorant{1.0};
  for (Eigen::Index j = 0; j < n; ++j) {
    charpoly = poly::multiply(charpoly, std::vector<Complex>{-M(j, j), 1.0});
    target = poly::multiply(target, std::vector<Complex>{-A.sigma[static_cast<std::size_t>(j)], 1.0});
    majorant = poly::multiply(majorant, std::vector<double>{std::abs(A.sigma[static_cast<std::size_t>(j)]), 1.0});
  }
  for (std::size_t k = 0; k < charpoly.size(); ++k)
    if (std::abs(charpoly[k] - target[k]) > 1e-8 * std::max(1.0, majorant[k]))
      throw NumericalBreakdown("model operator eigenvalues do not match the sequence");
}

}  // namespace detail

/// A_ij = <z e_j, e_i> in the Malmquist-Walsh basis by boundary quadrature,
/// with the grid doubled (reusing samples) until the entries are stable.
inline ModelOperatorMatrix model_operator(const PointSequence& sigma) {
  if (sigma.n() > 512) throw DomainError("model_operator supports n <= 512");
  std::size_t M = boundary_samples_for(sigma);
  Eigen::MatrixXcd S = detail::shift_pairing_sum(sigma, M, false);
  Eigen::MatrixXcd A = S / static_cast<double>(M);
  while (true) {
    if (M >= detail::kSampleCap) throw ConvergenceError("model operator quadrature did not stabilize");
    S += detail::shift_pairing_sum(sigma, M, true);
    M *= 2;
    Eigen::MatrixXcd A2 = S / static_cast<double>(M);
    const double diff = (A2 - A).cwiseAbs().maxCoeff();
    A = std::move(A2);
    if (diff <= 1e-13) break;
  }
  ModelOperatorMatrix out{sigma, std::move(A)};
  detail::check_model_invariants(out);
  return out;
}

/// Newton form of the Hermite interpolant of f on sigma (confluent nodes).
struct HermiteInterpolant {
  PointSequence sigma;
  std::vector<Complex> nodes;           // Leja-ordered distinct points, each repeated by multiplicity
  std::vector<Complex> newton_coeffs;   // divided differences f[x_0, ..., x_k]

  std::size_t degree() const { return nodes.size() - 1; }

  Complex operator()(Complex z) const {
    Complex acc = newton_coeffs.back();
    for (std::size_t k = nodes.size() - 1; k-- > 0;) acc = acc * (z - nodes[k]) + newton_coeffs[k];
    return acc;
  }

  Series series(Complex z, int order) const {
    Series acc(order, newton_coeffs.back());
    for (std::size_t k = nodes.size() - 1; k-- > 0;) {
      acc = Series::variable(order, z - nodes[k]) * acc;
      acc[0] += newton_coeffs[k];
    }
    return acc;
  }

  /// p(A) by Horner on the Newton form: P <- (A - x_k I) P + c_k I.
  Eigen::MatrixXcd at(const Eigen::MatrixXcd& A) const {
    const auto n = A.rows();
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd P = newton_coeffs.back() * I;
    for (std::size_t k = nodes.size() - 1; k-- > 0;) {
      P = (A * P - nodes[k] * P).eval();
      P.diagonal().array() += newton_coeffs[k];
    }
    return P;
  }
};

inline HermiteInterpolant hermite_interpolant(const Expr& f, const PointSequence& sigma) {
  struct Group {
    Complex point;
    int multiplicity;
  };
  std::vector<Group> groups;
  for (auto p : sigma.points()) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.point == p; });
    if (it == groups.end()) groups.push_back({p, 1});
    else ++it->multiplicity;
  }

  // Leja order, weighting chosen points by their multiplicity
  std::vector<Group> ordered;
  {
    std::vector<bool> used(groups.size(), false);
    std::size_t first = 0;
    for (std::size_t i = 1; i < groups.size(); ++i)
      if (std::abs(groups[i].point) > std::abs(groups[first].point)) first = i;
    ordered.push_back(groups[first]);
    used[first] = true;
    std::vector<double> logprod(groups.size(), 0.0);
    while (ordered.size() < groups.size()) {
      const Group& last = ordered.back();
      std::size_t best = groups.size();
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (used[i]) continue;
        logprod[i] += last.multiplicity * std::log(std::abs(groups[i].point - last.point));
        if (best == groups.size() || logprod[i] > logprod[best]) best = i;
      }
      ordered.push_back(groups[best]);
      used[best] = true;
    }
  }

  HermiteInterpolant out{sigma, {}, {}};
  std::vector<Series> taylor;
  std::vector<std::size_t> owner;
  for (std::size_t g = 0; g < ordered.size(); ++g) {
    taylor.push_back(f.series(ordered[g].point, ordered[g].multiplicity - 1));
    for (int k = 0; k < ordered[g].multiplicity; ++k) {
      out.nodes.push_back(ordered[g].point);
      owner.push_back(g);
    }
  }
  const std::size_t n = out.nodes.size();
  std::vector<Complex> dd(n);
  for (std::size_t i = 0; i < n; ++i) dd[i] = taylor[owner[i]][0];
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = n - 1; i >= j; --i) {
      if (out.nodes[i] == out.nodes[i - j]) dd[i] = taylor[owner[i]][static_cast<int>(j)];
      else dd[i] = (dd[i] - dd[i - 1]) / (out.nodes[i] - out.nodes[i - j]);
    }
  }
  out.newton_coeffs = std::move(dd);

  for (std::size_t g = 0; g < ordered.size(); ++g) {
    const int m = ordered[g].multiplicity;
    const Jet want = Jet::from_series(taylor[g]);
    const Jet got = Jet::from_series(out.series(ordered[g].point, m - 1));
    for (int k = 0; k < m; ++k)
      if (std::abs(got[k] - want[k]) > 1e-8 * std::max(1.0, std::abs(want[k])))
        throw NumericalBreakdown("Hermite interpolant does not reproduce the data on the sequence");
  }
  return out;
}

/// f(M_B) in the Malmquist-Walsh basis.
inline Eigen::MatrixXcd matrix_function(const Expr& f, const PointSequence& sigma) {
  return hermite_interpolant(f, sigma).at(model_operator(sigma).entries);
}

/// Lower-triangular Toeplitz matrix with first column c_0..c_{n-1}.
inline Eigen::MatrixXcd lower_toeplitz(const std::vector<Complex>& c, std::size_t n) {
  if (c.size() < n) throw DomainError("lower_toeplitz: not enough coefficients");
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) T(i, j) = c[static_cast<std::size_t>(i - j)];
  return T;
}

/// ||f||_{H^inf / B_sigma H^inf}.
///
/// A one-point sequence (lambda, ..., lambda) is routed through
/// ||f||_{H^inf / b_lambda^n H^inf} = ||f o b_lambda||_{H^inf / z^n H^inf}, the norm of
/// the Toeplitz matrix of the first n Taylor coefficients of f o b_lambda.
inline double quotient_norm(const Expr& f, const PointSequence& sigma) {
  if (sigma.is_one_point()) {
    const Expr g = Expr::compose(f, Expr::blaschke_factor(sigma[0]));
    const auto n = sigma.n();
    return operator_norm(lower_toeplitz(taylor_coefficients(g, static_cast<int>(n) - 1), n));
  }
  return operator_norm(matrix_function(f, sigma));
}

/// (Psi * F_n)(1) = (1/n) sum_{j<n} S_j(1) = sum_{k<n} (1 - k/n) psi_k, with the
/// Fejer kernel normalized to unit mean; its modulus never exceeds the
/// quotient norm over z^n.
inline double fejer_lower_bound(const std::vector<Complex>& psi_coeffs, std::size_t n) {
  if (n == 0) throw DomainError("fejer_lower_bound requires n >= 1");
  if (psi_coeffs.size() < n) throw DomainError("fejer_lower_bound: fewer than n coefficients");
  Complex acc{};
  for (std::size_t k = 0; k < n; ++k)
    acc += (1.0 - static_cast<double>(k) / static_cast<double>(n)) * psi_coeffs[k];
  return std::abs(acc);
}

/// Upper-triangular contraction with diagonal sigma (distinct points) and
/// random strictly-upper part scaled by the largest t in (0, 1] keeping ||T|| <= 1.
inline Eigen::MatrixXcd random_contraction(const PointSequence& sigma, std::uint64_t seed) {
  if (!sigma.has_distinct_points()) throw DomainError("random_contraction requires distinct points");
  const auto n = static_cast<Eigen::Index>(sigma.n());
  auto rng = make_rng(seed, 0xC0);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, i) = sigma[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) U(i, j) = Complex(gauss(rng), gauss(rng));
  }
  auto norm_at = [&](double t) { return operator_norm(D + t * U, seed); };
  if (norm_at(1.0) <= 1.0) return D + U;
  double lo = 0.0, hi = 1.0;  // ||D + tU|| is convex in t and ||D|| < 1
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) <= 1.0 ? lo : hi) = mid;
  }
  return D + lo * U;
}

/// f(T) for a matrix whose minimal polynomial is P_sigma.
inline Eigen::MatrixXcd matrix_function_at(const Expr& f, const PointSequence& sigma, const Eigen::MatrixXcd& T) {
  return hermite_interpolant(f, sigma).at(T);
}

}  // namespace blaschke
