#include "demf/solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>
#include <string>

#include "demf/errors.hpp"
#include "demf/random.hpp"

namespace demf {

namespace {

using SpMat = SparseSymmetric::Matrix;
using NaturalLlt = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>>;

bool factorises(const SpMat& m) {
  NaturalLlt llt(m);
  return llt.info() == Eigen::Success;
}

// Smallest k such that the leading k x k block of m is not positive definite.
Index first_bad_pivot(const SpMat& m) {
  Index lo = 1;
  Index hi = m.rows();
  while (lo < hi) {
    const Index mid = (lo + hi) / 2;
    if (factorises(SpMat(m.topLeftCorner(mid, mid)))) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo - 1;
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw InputError(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

CholeskyFactor::CholeskyFactor(const SparseSymmetric& q, Ordering ordering) : n_(q.dimension()) {
  if (n_ == 0) {
    throw InputError("cannot factorise an empty matrix");
  }
  if (ordering == Ordering::amd) {
    Eigen::AMDOrdering<int> amd;
    amd(q.matrix(), perm_inv_);
  } else {
    perm_inv_.setIdentity(n_);
  }
  perm_ = perm_inv_.inverse();
  SpMat permuted;
  permuted = q.matrix().twistedBy(perm_);

  NaturalLlt llt(permuted);
  if (llt.info() != Eigen::Success) {
    const Index k = first_bad_pivot(permuted);
    throw NumericalError("matrix not SPD: non-positive pivot at position " + std::to_string(k) + " (row " +
                         std::to_string(original_index(k)) + ")");
  }
  l_ = llt.matrixL();
  log_det_ = 2.0 * l_.diagonal().array().log().sum();
  if (!std::isfinite(log_det_)) {
    throw NumericalError("matrix not SPD: log-determinant is not finite");
  }
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) {
    throw InputError("right-hand side has wrong dimension");
  }
  Eigen::VectorXd y = perm_ * b;
  l_.triangularView<Eigen::Lower>().solveInPlace(y);
  l_.transpose().triangularView<Eigen::Upper>().solveInPlace(y);
  return perm_inv_ * y;
}

Eigen::VectorXd CholeskyFactor::apply_inverse_root(const Eigen::VectorXd& z) const {
  if (z.size() != n_) {
    throw InputError("noise vector has wrong dimension");
  }
  Eigen::VectorXd y = z;
  l_.transpose().triangularView<Eigen::Upper>().solveInPlace(y);
  return perm_inv_ * y;
}

Eigen::VectorXd CholeskyFactor::sample(std::uint64_t seed) const {
  CounterRng rng(seed);
  return apply_inverse_root(rng.normal_vector(n_));
}

Eigen::VectorXd CholeskyFactor::marginal_variances() const {
  Eigen::VectorXd out(n_);
  Eigen::VectorXd e(n_);
  for (Index i = 0; i < n_; ++i) {
    // P e_i is the unit vector at the permuted position of row i.
    const Index k = perm_.indices()[i];
    e.setZero();
    e[k] = 1.0;
    l_.triangularView<Eigen::Lower>().solveInPlace(e);
    out[i] = e.squaredNorm();
  }
  return out;
}

SpMat project(const Mesh2D& mesh, const TimeGrid& grid, const std::vector<Observation>& points) {
  const Index ns = mesh.vertex_count();
  std::vector<Triplet> triplets;
  triplets.reserve(6 * points.size());
  const double slack = 1e-12 * grid.step();
  for (std::size_t r = 0; r < points.size(); ++r) {
    const Observation& p = points[r];
    const auto loc = mesh.locate({p.x, p.y});
    if (!loc) {
      throw InputError("observation " + std::to_string(r) + " at (" + std::to_string(p.x) + ", " +
                       std::to_string(p.y) + ") is outside the mesh");
    }
    if (!(p.t >= grid.start() - slack && p.t <= grid.end() + slack)) {
      throw InputError("observation " + std::to_string(r) + " at time " + std::to_string(p.t) +
                       " is outside the time grid");
    }
    const double s = std::clamp((p.t - grid.start()) / grid.step(), 0.0, static_cast<double>(grid.count() - 1));
    int j = std::min(static_cast<int>(std::floor(s)), grid.count() - 2);
    double w = s - j;
    // Snap time values that hit a knot to a single weight.
    if (std::abs(w) < 1e-12) {
      w = 0.0;
    } else if (std::abs(1.0 - w) < 1e-12) {
      w = 1.0;
    }
    const auto& tri = mesh.triangles()[loc->triangle];
    for (int k = 0; k < 3; ++k) {
      const double ws = loc->barycentric[k];
      if (ws == 0.0) {
        continue;
      }
      if (w != 1.0) {
        triplets.emplace_back(static_cast<Index>(r), j * ns + tri[k], ws * (1.0 - w));
      }
      if (w != 0.0) {
        triplets.emplace_back(static_cast<Index>(r), (j + 1) * ns + tri[k], ws * w);
      }
    }
  }
  SpMat a(static_cast<Index>(points.size()), ns * grid.count());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::VectorXd observation_values(const std::vector<Observation>& points) {
  Eigen::VectorXd y(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    y[static_cast<Index>(i)] = points[i].value;
  }
  return y;
}

namespace {

struct Conditioned {
  Eigen::VectorXd rhs;
  Posterior posterior;
};

Conditioned condition_impl(const SparseSymmetric& q, const SpMat& a, const Eigen::VectorXd& y, double noise_variance,
                           Ordering ordering) {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw InputError("noise variance must be positive and finite");
  }
  if (a.cols() != q.dimension() || a.rows() != y.size()) {
    throw InputError("observation matrix, data and precision dimensions do not match");
  }
  check_finite(y, "observation vector");
  const SpMat at = a.transpose();
  const SpMat ata = at * a;
  const SpMat sym = 0.5 * (ata + SpMat(ata.transpose()));
  const SparseSymmetric qp(SpMat(q.matrix() + sym / noise_variance));
  Eigen::VectorXd rhs = at * y / noise_variance;
  CholeskyFactor factor(qp, ordering);
  Eigen::VectorXd mean = factor.solve(rhs);
  return {std::move(rhs), Posterior{std::move(mean), std::move(factor)}};
}

}  // namespace

Posterior condition(const SparseSymmetric& q, const SpMat& a, const Eigen::VectorXd& y, double noise_variance,
                    Ordering ordering) {
  return condition_impl(q, a, y, noise_variance, ordering).posterior;
}

double gaussian_log_likelihood(const SparseSymmetric& q, const SpMat& a, const Eigen::VectorXd& y,
                               double noise_variance, Ordering ordering) {
  if (y.size() == 0) {
    return 0.0;
  }
  const CholeskyFactor prior(q, ordering);
  const Conditioned c = condition_impl(q, a, y, noise_variance, ordering);
  const double n = static_cast<double>(y.size());
  return 0.5 * prior.log_determinant() - 0.5 * c.posterior.factor.log_determinant() -
         0.5 * n * std::log(2.0 * std::numbers::pi * noise_variance) -
         0.5 * (y.squaredNorm() / noise_variance - c.rhs.dot(c.posterior.mean));
}

}  // namespace demf
