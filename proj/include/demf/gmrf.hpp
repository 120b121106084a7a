#pragma once

#include <Eigen/Dense>

#include "demf/fem.hpp"
#include "demf/params.hpp"
#include "demf/sparse.hpp"

namespace demf {

/// Spatial precision Q_order(gamma_s) for order 1, 2 or 3, without the gamma_e^2
/// factor:  K = gamma_s^2 C~ + G,  Q1 = K,  Q2 = K C~^-1 K,  Q3 = K C~^-1 K C~^-1 K,
/// with C~ the lumped mass. Throws InputError for gamma_s <= 0 or an unsupported
/// order and NumericalError if the result fails a Cholesky check.
SparseSymmetric spatial_precision(int order, double gamma_s, const SpatialFem& fem);

/// Coefficients (a0, a1, a2) of the stationary AR2 factorisation
/// e_t = a0 x_t + a1 x_{t-1} + a2 x_{t-2} matching the interior bands (q0, q1, q2).
struct Ar2Coefficients {
  double a0;
  double a1;
  double a2;
};

/// Solves q0 = a0^2 + a1^2 + a2^2, q1 = a1 (a0 + a2), q2 = a0 a2 for the causal root.
/// Throws InputError naming the violated inequality when
/// q0 + 2 q1 + 2 q2 > 0, q0 - 2 q1 + 2 q2 > 0 or (b+ + b-)^2 >= 16 q2 fails.
Ar2Coefficients ar2_coefficients(double q0, double q1, double q2);

/// Precision of a stationary AR2 vector of length n >= 3 with interior bands
/// (q0, q1, q2). The first and last two diagonal entries and the outermost
/// first off-diagonal entries are replaced by a0^2, a0^2 + a1^2 and a0 a1.
SparseSymmetric ar2_stationary_precision(double q0, double q1, double q2, int n);

enum class BoundaryCorrection {
  /// Corner term b kappa, the small-step limit (as written in the space-time precision).
  first_order,
  /// Corner term b kappa c with c chosen so the discrete process is exactly stationary.
  exact,
};

/// Stationarity factor c of the OU corner term. It depends on the temporal mass:
/// sqrt(1 + h^2 kappa^2 / 4) for the lumped mass and sqrt(1 + h^2 kappa^2 / 12)
/// for the consistent one. Returns 1 for BoundaryCorrection::first_order.
double ou_correction_factor(double kappa, const TemporalFem& temporal, BoundaryCorrection correction);

/// OU precision R = b (kappa^2 M0 + 2 kappa c M1 + M2). The stationary variance
/// of the continuous process is 1 / (2 kappa b).
SparseSymmetric ou_precision(double kappa, double b, const TemporalFem& temporal,
                             BoundaryCorrection correction = BoundaryCorrection::exact);

/// Sparse space-time precision of DEMF(1,2,1):
///   gamma_e^2 (M0 (x) Q3 + 2 gamma_t M1 (x) Q2 + gamma_t^2 M2 (x) Q1),
/// ordered with space fastest (index j * N_s + i). The mode-independent corner
/// term of this form corresponds to BoundaryCorrection::first_order.
SparseSymmetric demf121_precision(const ScaleParams& sc, const SpatialFem& spatial,
                                  const TemporalFem& temporal);

/// Sparse precision of the separable DEMF(1,0,alpha_e), alpha_e in {2, 3}:
///   R_t (x) (2 gamma_t gamma_e^2 Q_{alpha_e}),
/// with R_t the exactly corrected unit-variance OU precision (kappa = 1/gamma_t,
/// b = gamma_t / 2).
SparseSymmetric separable_precision(const SmoothnessParams& sp, const ScaleParams& sc,
                                    const SpatialFem& spatial, const TemporalFem& temporal);

/// Dispatches to demf121_precision or separable_precision; throws InputError for
/// smoothness triples without a sparse discretisation.
SparseSymmetric spacetime_precision(const SmoothnessParams& sp, const ScaleParams& sc,
                                    const SpatialFem& spatial, const TemporalFem& temporal);

/// Temporal rate kappa of the slowest (constant) spatial mode; the grid step
/// should satisfy step * kappa <= 0.5.
double slowest_temporal_rate(const SmoothnessParams& sp, const ScaleParams& sc);

/// Dense DEMF(1,2,1) precision built mode by mode from G V = C~ V Lambda with
/// V^T C~ V = I: each mode is an OU process with kappa_j = (gamma_s^2 + lambda_j) / gamma_t
/// and b_j = gamma_t^2 gamma_e^2 (gamma_s^2 + lambda_j), mapped back with C~ V.
struct EigenOracle {
  Eigen::MatrixXd precision;
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd modes;        // V, columns C~-orthonormal
};

/// Intended for small meshes (N_s <= 200). With BoundaryCorrection::first_order
/// the result equals demf121_precision() up to round-off.
EigenOracle eigen_oracle(const ScaleParams& sc, const SpatialFem& spatial, const TemporalFem& temporal,
                         BoundaryCorrection correction = BoundaryCorrection::first_order);

}  // namespace demf
