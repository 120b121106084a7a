#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "demf/mesh.hpp"
#include "demf/sparse.hpp"

namespace demf {

enum class Ordering {
  /// Approximate minimum degree (fill reducing).
  amd,
  /// Identity permutation.
  natural,
};

/// Sparse Cholesky factor P Q P^T = L L^T of a symmetric positive definite matrix.
///
/// Throws NumericalError("matrix not SPD ...") naming the first failing pivot,
/// both in permuted position and as a row of Q.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SparseSymmetric& q, Ordering ordering = Ordering::amd);

  Index dimension() const { return n_; }
  double log_determinant() const { return log_det_; }
  /// Row of Q placed at permuted position k.
  Index original_index(Index k) const { return perm_inv_.indices()[k]; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// x = P^T L^{-T} z, which has covariance Q^{-1} when z is standard normal.
  Eigen::VectorXd apply_inverse_root(const Eigen::VectorXd& z) const;
  /// Draws from N(0, Q^{-1}) with a CounterRng seeded by `seed`.
  Eigen::VectorXd sample(std::uint64_t seed) const;
  /// diag(Q^{-1}) as squared norms of L^{-1} P e_i (one triangular solve per column).
  Eigen::VectorXd marginal_variances() const;

  const SparseSymmetric::Matrix& factor_l() const { return l_; }
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>& permutation() const { return perm_; }

 private:
  Index n_ = 0;
  double log_det_ = 0.0;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_inv_;
  SparseSymmetric::Matrix l_;
};

/// Point observation y at location (x, y) and time t.
struct Observation {
  double x;
  double y;
  double t;
  double value;
};

/// Design matrix A mapping coefficients (index j * N_s + i) to the field at the
/// observation points: barycentric weights in space times linear hat weights in
/// time. Zero weights are not stored, so a point on a vertex and a time knot has a
/// single unit entry. Throws InputError naming the first point outside the mesh
/// or the time range.
SparseSymmetric::Matrix project(const Mesh2D& mesh, const TimeGrid& grid, const std::vector<Observation>& points);

Eigen::VectorXd observation_values(const std::vector<Observation>& points);

struct Posterior {
  Eigen::VectorXd mean;
  CholeskyFactor factor;  // of Q_p = Q + A^T A / noise_variance
};

/// Gaussian conditioning on y = A u + noise, noise ~ N(0, noise_variance I).
Posterior condition(const SparseSymmetric& q, const SparseSymmetric::Matrix& a, const Eigen::VectorXd& y,
                    double noise_variance, Ordering ordering = Ordering::amd);

/// log N(y; 0, A Q^{-1} A^T + noise_variance I), evaluated with sparse factors only:
///   1/2 log|Q| - 1/2 log|Q_p| - n/2 log(2 pi s2) - 1/2 (y^T y / s2 - b^T Q_p^{-1} b),
/// with b = A^T y / s2.
double gaussian_log_likelihood(const SparseSymmetric& q, const SparseSymmetric::Matrix& a,
                               const Eigen::VectorXd& y, double noise_variance,
                               Ordering ordering = Ordering::amd);

}  // namespace demf
