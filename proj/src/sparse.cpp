#include "demf/sparse.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "demf/errors.hpp"

namespace demf {

SparseSymmetric::SparseSymmetric(Matrix full) : matrix_(std::move(full)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw InputError("symmetric matrix must be square");
  }
  matrix_.makeCompressed();
  double scale = 0.0;
  for (Index k = 0; k < matrix_.nonZeros(); ++k) {
    const double v = matrix_.valuePtr()[k];
    if (!std::isfinite(v)) {
      throw InputError("symmetric matrix has a non-finite entry");
    }
    scale = std::max(scale, std::abs(v));
  }
  const Matrix transposed = matrix_.transpose();
  for (Index col = 0; col < matrix_.outerSize(); ++col) {
    Matrix::InnerIterator it(matrix_, col);
    Matrix::InnerIterator jt(transposed, col);
    for (; it && jt; ++it, ++jt) {
      if (it.index() != jt.index() || std::abs(it.value() - jt.value()) > 1e-10 * scale) {
        throw InputError("matrix is not symmetric");
      }
    }
    if (it || jt) {
      throw InputError("matrix is not structurally symmetric");
    }
  }
}

SparseSymmetric SparseSymmetric::from_triplets(Index n, const std::vector<Triplet>& triplets) {
  Matrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseSymmetric(std::move(m));
}

SparseSymmetric SparseSymmetric::diagonal(const Eigen::VectorXd& values) {
  std::vector<Triplet> triplets;
  triplets.reserve(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    triplets.emplace_back(i, i, values(i));
  }
  return from_triplets(values.size(), triplets);
}

SparseSymmetric SparseSymmetric::from_dense(const Eigen::MatrixXd& dense) {
  std::vector<Triplet> triplets;
  for (Index j = 0; j < dense.cols(); ++j) {
    for (Index i = 0; i < dense.rows(); ++i) {
      if (dense(i, j) != 0.0) {
        triplets.emplace_back(i, j, dense(i, j));
      }
    }
  }
  Matrix m(dense.rows(), dense.cols());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseSymmetric(std::move(m));
}

Eigen::VectorXd SparseSymmetric::row_sums() const {
  // Symmetric, so column sums equal row sums.
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(dimension());
  for (Index col = 0; col < matrix_.outerSize(); ++col) {
    for (Matrix::InnerIterator it(matrix_, col); it; ++it) {
      sums(col) += it.value();
    }
  }
  return sums;
}

Index SparseSymmetric::neighbour_count(Index i) const {
  Index count = 0;
  for (Matrix::InnerIterator it(matrix_, i); it; ++it) {
    if (it.index() != i) {
      ++count;
    }
  }
  return count;
}

SparseSymmetric SparseSymmetric::scaled(double factor) const {
  SparseSymmetric out;
  out.matrix_ = matrix_ * factor;
  return out;
}

SparseSymmetric operator+(const SparseSymmetric& a, const SparseSymmetric& b) {
  if (a.dimension() != b.dimension()) {
    throw InputError("dimension mismatch in symmetric matrix sum");
  }
  SparseSymmetric out;
  out.matrix_ = a.matrix_ + b.matrix_;
  return out;
}

SparseSymmetric kron(const SparseSymmetric& a, const SparseSymmetric& b) {
  const Index nb = b.dimension();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonzeros() * b.nonzeros()));
  const auto& am = a.matrix();
  const auto& bm = b.matrix();
  for (Index ac = 0; ac < am.outerSize(); ++ac) {
    for (SparseSymmetric::Matrix::InnerIterator ia(am, ac); ia; ++ia) {
      for (Index bc = 0; bc < bm.outerSize(); ++bc) {
        for (SparseSymmetric::Matrix::InnerIterator ib(bm, bc); ib; ++ib) {
          triplets.emplace_back(ia.row() * nb + ib.row(), ac * nb + bc, ia.value() * ib.value());
        }
      }
    }
  }
  return SparseSymmetric::from_triplets(a.dimension() * nb, triplets);
}

void write_matrix_market(std::ostream& os, const SparseSymmetric& m) {
  const auto& mat = m.matrix();
  Index lower = 0;
  for (Index col = 0; col < mat.outerSize(); ++col) {
    for (SparseSymmetric::Matrix::InnerIterator it(mat, col); it; ++it) {
      lower += it.row() >= col ? 1 : 0;
    }
  }
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << m.dimension() << ' ' << m.dimension() << ' ' << lower << '\n';
  os << std::setprecision(17);
  for (Index col = 0; col < mat.outerSize(); ++col) {
    for (SparseSymmetric::Matrix::InnerIterator it(mat, col); it; ++it) {
      if (it.row() >= col) {
        os << it.row() + 1 << ' ' << col + 1 << ' ' << it.value() << '\n';
      }
    }
  }
}

}  // namespace demf
