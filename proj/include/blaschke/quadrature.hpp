#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "blaschke/error.hpp"
#include "blaschke/jet.hpp"

namespace blaschke {

/// M equispaced nodes on the unit circle, each with weight 1/M
/// (trapezoid rule for the normalized Lebesgue measure).
class CircleGrid {
 public:
  explicit CircleGrid(std::size_t M) : M_(M) {
    if (M == 0 || (M & (M - 1)) != 0) throw DomainError("circle grid size must be a power of two");
  }
  std::size_t size() const { return M_; }
  double weight() const { return 1.0 / static_cast<double>(M_); }
  double angle(std::size_t j) const {
    return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(M_);
  }
  Complex node(std::size_t j) const { return std::polar(1.0, angle(j)); }

 private:
  std::size_t M_;
};

/// Gauss-Jacobi rule for  int_0^1 g(t) (1 - t)^beta dt.
///
/// Nodes are eigenvalues of the Jacobi matrix of the (beta, 0) family mapped
/// from [-1, 1]; weights are the Christoffel numbers obtained from the
/// orthonormal three-term recurrence (so no eigenvectors are needed).
struct GaussJacobiRule {
  double beta = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussJacobiRule gauss_jacobi_unit(std::size_t K, double beta) {
  if (K == 0) throw DomainError("Gauss-Jacobi rule needs at least one node");
  if (!(beta > -1.0)) throw DomainError("Gauss-Jacobi weight exponent must exceed -1");
  const double a = beta;  // exponent of (1 - x)
  const double b = 0.0;   // exponent of (1 + x)
  const auto n = static_cast<Eigen::Index>(K);

  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max<Eigen::Index>(n - 1, 1));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + a + b;
    diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + a + b;
    const double bk = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s * s * (s + 1.0) * (s - 1.0));
    off(k - 1) = std::sqrt(bk);
  }

  Eigen::VectorXd x(n);
  if (n == 1) {
    x(0) = diag(0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off.head(n - 1), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceError("Jacobi matrix eigenvalue solver failed");
    x = solver.eigenvalues();
  }

  // mu0 = int_{-1}^{1} (1-x)^a (1+x)^b dx
  const double log_mu0 = (a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                         std::lgamma(a + b + 2.0);
  GaussJacobiRule rule;
  rule.beta = beta;
  rule.nodes.resize(K);
  rule.weights.resize(K);
  // int_0^1 g(t)(1-t)^beta dt = 2^{-beta-1} int_{-1}^{1} g((1+x)/2) (1-x)^beta dx
  const double map_factor = std::exp(-(beta + 1.0) * std::log(2.0) + log_mu0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p_prev = 0.0, p = 1.0, sum = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const double next = ((x(i) - diag(k)) * p - (k > 0 ? off(k - 1) * p_prev : 0.0)) / off(k);
      p_prev = p;
      p = next;
      sum += p * p;
    }
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 + x(i));
    rule.weights[static_cast<std::size_t>(i)] = map_factor / sum;
  }
  return rule;
}

/// Tensor rule on the disk for the normalized area measure with weight
/// (1 - |z|^2)^beta: Gauss-Jacobi in t = |z|^2 times the trapezoid rule in
/// the angle (dA = dt dtheta / 2pi).
class DiskQuadrature {
 public:
  DiskQuadrature(double beta, std::size_t radial, std::size_t angular)
      : rule_(gauss_jacobi_unit(radial, beta)), circle_(angular) {}

  double beta() const { return rule_.beta; }
  std::size_t radial_count() const { return rule_.nodes.size(); }
  std::size_t angular_count() const { return circle_.size(); }
  double radius(std::size_t i) const { return std::sqrt(rule_.nodes[i]); }
  double radial_weight(std::size_t i) const { return rule_.weights[i]; }
  Complex node(std::size_t i, std::size_t j) const { return radius(i) * circle_.node(j); }
  const CircleGrid& circle() const { return circle_; }

 private:
  GaussJacobiRule rule_;
  CircleGrid circle_;
};

}  // namespace blaschke
