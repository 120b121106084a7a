#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <vector>

namespace demf {

using Index = Eigen::Index;
using Triplet = Eigen::Triplet<double>;

/// Symmetric sparse matrix (mass, stiffness, precision).
///
/// Both triangles are stored so that products and Kronecker products can be
/// formed directly. Explicitly stored zeros are kept: the stored pattern is the
/// structural (assembly) pattern, which is what neighbour counts refer to.
class SparseSymmetric {
 public:
  using Matrix = Eigen::SparseMatrix<double>;

  SparseSymmetric() = default;

  /// Takes a full (both triangles) matrix. Throws InputError when it is not
  /// square, has non-finite entries or is not symmetric to round-off.
  explicit SparseSymmetric(Matrix full);

  static SparseSymmetric from_triplets(Index n, const std::vector<Triplet>& triplets);
  static SparseSymmetric diagonal(const Eigen::VectorXd& values);
  static SparseSymmetric from_dense(const Eigen::MatrixXd& dense);

  Index dimension() const { return matrix_.rows(); }
  /// Stored entries, both triangles.
  Index nonzeros() const { return matrix_.nonZeros(); }
  double coeff(Index i, Index j) const { return matrix_.coeff(i, j); }
  const Matrix& matrix() const { return matrix_; }

  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(matrix_); }
  Eigen::VectorXd row_sums() const;
  Eigen::VectorXd diagonal_values() const { return matrix_.diagonal(); }

  /// Number of structurally coupled nodes in row i, excluding i itself.
  Index neighbour_count(Index i) const;

  SparseSymmetric scaled(double factor) const;

  friend SparseSymmetric operator+(const SparseSymmetric& a, const SparseSymmetric& b);

 private:
  Matrix matrix_;
};

/// Kronecker product a (x) b. Index (j, i) of the result maps to j * b.dim + i.
SparseSymmetric kron(const SparseSymmetric& a, const SparseSymmetric& b);

/// MatrixMarket coordinate export of the lower triangle, 1-based indices.
void write_matrix_market(std::ostream& os, const SparseSymmetric& m);

}  // namespace demf
