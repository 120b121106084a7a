#include "demf/gmrf.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <string>

#include "demf/errors.hpp"

namespace demf {

namespace {

using SpMat = SparseSymmetric::Matrix;

SparseSymmetric symmetrised(const SpMat& m) {
  SpMat t = m.transpose();
  return SparseSymmetric(SpMat(0.5 * (m + t)));
}

Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void check_dimensions(const SpatialFem& spatial) {
  const Index n = spatial.lumped_mass.dimension();
  if (spatial.stiffness.dimension() != n || spatial.mass.dimension() != n) {
    throw InputError("spatial FEM matrices have inconsistent dimensions");
  }
}

}  // namespace

SparseSymmetric spatial_precision(int order, double gamma_s, const SpatialFem& fem) {
  if (order < 1 || order > 3) {
    throw InputError("spatial precision order must be 1, 2 or 3, got " + std::to_string(order));
  }
  if (!(gamma_s > 0.0) || !std::isfinite(gamma_s)) {
    throw InputError("gamma_s must be positive and finite");
  }
  check_dimensions(fem);
  const SpMat& c = fem.lumped_mass.matrix();
  const SpMat k = gamma_s * gamma_s * c + fem.stiffness.matrix();
  const Eigen::VectorXd c_inv = fem.lumped_mass.diagonal_values().cwiseInverse();

  SpMat q = k;
  for (int p = 1; p < order; ++p) {
    const SpMat scaled = c_inv.asDiagonal() * q;
    q = k * scaled;
  }
  SparseSymmetric result = symmetrised(q);

  Eigen::SimplicialLLT<SpMat> llt(result.matrix());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("spatial precision of order " + std::to_string(order) + " is not positive definite");
  }
  return result;
}

Ar2Coefficients ar2_coefficients(double q0, double q1, double q2) {
  const double bp2 = q0 + 2.0 * q1 + 2.0 * q2;
  const double bm2 = q0 - 2.0 * q1 + 2.0 * q2;
  if (!(bp2 > 0.0)) {
    throw InputError("AR2 bands violate q0 + 2 q1 + 2 q2 > 0");
  }
  if (!(bm2 > 0.0)) {
    throw InputError("AR2 bands violate q0 - 2 q1 + 2 q2 > 0");
  }
  const double bp = std::sqrt(bp2);
  const double bm = std::sqrt(bm2);
  const double bs = bp + bm;
  const double disc = bs * bs - 16.0 * q2;
  if (disc < 0.0) {
    throw InputError("AR2 bands violate (b+ + b-)^2 >= 16 q2");
  }
  const double root = std::sqrt(disc);
  Ar2Coefficients a{(bs + root) / 4.0, (bp - bm) / 2.0, (bs - root) / 4.0};

  const double scale = std::max({std::abs(q0), std::abs(q1), std::abs(q2)});
  const double r0 = a.a0 * a.a0 + a.a1 * a.a1 + a.a2 * a.a2 - q0;
  const double r1 = a.a1 * (a.a0 + a.a2) - q1;
  const double r2 = a.a0 * a.a2 - q2;
  if (std::max({std::abs(r0), std::abs(r1), std::abs(r2)}) > 1e-12 * scale) {
    throw NumericalError("AR2 factorisation does not reproduce the bands");
  }
  return a;
}

SparseSymmetric ar2_stationary_precision(double q0, double q1, double q2, int n) {
  if (n < 3) {
    throw InputError("AR2 precision needs n >= 3");
  }
  const Ar2Coefficients a = ar2_coefficients(q0, q1, q2);
  std::vector<Triplet> triplets;
  auto add = [&](int i, int j, double v) {
    triplets.emplace_back(i, j, v);
    if (i != j) {
      triplets.emplace_back(j, i, v);
    }
  };
  for (int i = 0; i < n; ++i) {
    double diag = q0;
    if (i == 0 || i == n - 1) {
      diag = a.a0 * a.a0;
    } else if (i == 1 || i == n - 2) {
      diag = a.a0 * a.a0 + a.a1 * a.a1;
    }
    add(i, i, diag);
    if (i + 1 < n) {
      const bool outer = (i == 0 || i + 1 == n - 1);
      add(i, i + 1, outer ? a.a0 * a.a1 : q1);
    }
    if (i + 2 < n && q2 != 0.0) {
      add(i, i + 2, q2);
    }
  }
  return SparseSymmetric::from_triplets(n, triplets);
}

double ou_correction_factor(double kappa, const TemporalFem& temporal, BoundaryCorrection correction) {
  if (correction == BoundaryCorrection::first_order) {
    return 1.0;
  }
  const double hk = temporal.step * kappa;
  const double divisor = temporal.mass_kind == TemporalMass::lumped ? 4.0 : 12.0;
  return std::sqrt(1.0 + hk * hk / divisor);
}

SparseSymmetric ou_precision(double kappa, double b, const TemporalFem& temporal, BoundaryCorrection correction) {
  if (!(kappa > 0.0) || !(b > 0.0) || !std::isfinite(kappa) || !std::isfinite(b)) {
    throw InputError("OU precision needs positive finite kappa and b");
  }
  const double c = ou_correction_factor(kappa, temporal, correction);
  return (temporal.m0.scaled(b * kappa * kappa) + temporal.m1.scaled(2.0 * b * kappa * c)) +
         temporal.m2.scaled(b);
}

SparseSymmetric demf121_precision(const ScaleParams& sc, const SpatialFem& spatial, const TemporalFem& temporal) {
  const double gs = sc.gamma_s();
  const double gt = sc.gamma_t();
  const double ge2 = sc.gamma_e() * sc.gamma_e();
  const SparseSymmetric q1 = spatial_precision(1, gs, spatial);
  const SparseSymmetric q2 = spatial_precision(2, gs, spatial);
  const SparseSymmetric q3 = spatial_precision(3, gs, spatial);
  return (kron(temporal.m0, q3).scaled(ge2) + kron(temporal.m1, q2).scaled(2.0 * gt * ge2)) +
         kron(temporal.m2, q1).scaled(gt * gt * ge2);
}

SparseSymmetric separable_precision(const SmoothnessParams& sp, const ScaleParams& sc,
                                    const SpatialFem& spatial, const TemporalFem& temporal) {
  const bool supported = sp.alpha_t() == 1.0 && sp.alpha_s() == 0.0 && (sp.alpha_e() == 2.0 || sp.alpha_e() == 3.0);
  if (!supported) {
    throw InputError("separable precision supports DEMF(1, 0, 2) and DEMF(1, 0, 3), got " + sp.to_string());
  }
  const double gt = sc.gamma_t();
  const double ge2 = sc.gamma_e() * sc.gamma_e();
  const SparseSymmetric r_t = ou_precision(1.0 / gt, gt / 2.0, temporal, BoundaryCorrection::exact);
  const SparseSymmetric q_s =
      spatial_precision(static_cast<int>(sp.alpha_e()), sc.gamma_s(), spatial).scaled(2.0 * gt * ge2);
  return kron(r_t, q_s);
}

SparseSymmetric spacetime_precision(const SmoothnessParams& sp, const ScaleParams& sc,
                                    const SpatialFem& spatial, const TemporalFem& temporal) {
  if (sp.alpha_t() == 1.0 && sp.alpha_s() == 2.0 && sp.alpha_e() == 1.0) {
    return demf121_precision(sc, spatial, temporal);
  }
  if (sp.separable()) {
    return separable_precision(sp, sc, spatial, temporal);
  }
  throw InputError("no sparse discretisation available for " + sp.to_string() +
                   "; supported: DEMF(1, 2, 1), DEMF(1, 0, 2), DEMF(1, 0, 3)");
}

double slowest_temporal_rate(const SmoothnessParams& sp, const ScaleParams& sc) {
  return std::pow(sc.gamma_s(), sp.alpha_s()) / sc.gamma_t();
}

EigenOracle eigen_oracle(const ScaleParams& sc, const SpatialFem& spatial, const TemporalFem& temporal,
                         BoundaryCorrection correction) {
  check_dimensions(spatial);
  const Eigen::MatrixXd c = spatial.lumped_mass.to_dense();
  const Eigen::MatrixXd g = spatial.stiffness.to_dense();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, c, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("generalised eigenproblem G V = C V Lambda failed");
  }
  const double gs2 = sc.gamma_s() * sc.gamma_s();
  const double gt = sc.gamma_t();
  const double ge2 = sc.gamma_e() * sc.gamma_e();

  const Eigen::VectorXd lambda = solver.eigenvalues();
  const Index ns = lambda.size();
  Eigen::VectorXd d0(ns), d1(ns), d2(ns);
  for (Index j = 0; j < ns; ++j) {
    const double a = gs2 + lambda[j];
    const double kappa = a / gt;
    const double b = gt * gt * ge2 * a;
    d0[j] = b * kappa * kappa;
    d1[j] = 2.0 * b * kappa * ou_correction_factor(kappa, temporal, correction);
    d2[j] = b;
  }
  const Eigen::MatrixXd w = c * solver.eigenvectors();
  const Eigen::MatrixXd s0 = w * d0.asDiagonal() * w.transpose();
  const Eigen::MatrixXd s1 = w * d1.asDiagonal() * w.transpose();
  const Eigen::MatrixXd s2 = w * d2.asDiagonal() * w.transpose();

  EigenOracle out;
  out.precision = dense_kron(temporal.m0.to_dense(), s0) + dense_kron(temporal.m1.to_dense(), s1) +
                  dense_kron(temporal.m2.to_dense(), s2);
  out.eigenvalues = lambda;
  out.modes = solver.eigenvectors();
  return out;
}

}  // namespace demf
