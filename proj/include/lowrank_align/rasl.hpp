#pragma once

#include "lowrank_align/core.hpp"
#include "lowrank_align/transform.hpp"

#include <optional>
#include <vector>

namespace lowrank_align::rasl {

struct RaslConfig {
  std::optional<double> lambda;  // weight on ||E||_1; defaults to 1/sqrt(m)
  int max_outer = 50;
  int max_inner = 500;
  double tol_outer = 1e-6;  // relative objective decrease
  double tol_inner = 1e-7;  // ||D - A - E||_F / ||D||_F
  std::optional<double> mu_init;  // defaults to 1.25 / ||D||_2
  double rho = 1.5;
  int max_halvings = 5;
  TransformModel model = TransformModel::kTranslation;

  /// Throws kInvalidArgument.
  void validate() const;
  double lambda_for(Index rows) const;
};

struct IterationRecord {
  double objective = 0.0;  // ||A||_* + lambda ||E||_1
  Index rank = 0;
  double l1_error = 0.0;
  double residual = 0.0;  // relative constraint residual
};

struct RpcaResult {
  MatrixXd A;
  MatrixXd E;
  std::vector<IterationRecord> trace;
  int iterations = 0;
  bool converged = false;  // false means max_inner was hit; A, E are the best iterate
};

/// min ||A||_* + lambda ||E||_1  s.t.  A + E = D, by inexact ALM.
RpcaResult rpca_alm(const MatrixXd& D, double lambda, const RaslConfig& config);

struct RaslResult {
  StackedMatrix A;
  StackedMatrix E;
  StackedMatrix warped;  // column-normalized D o tau at the final tau
  TransformParams tau;
  std::vector<IterationRecord> trace;  // one entry per accepted outer step, entry 0 at tau = 0
  int outer_iterations = 0;
  bool converged = false;
};

/// Batch alignment by alternating linearized warp updates with a low-rank +
/// sparse decomposition of the column-normalized warped stack.
/// Throws kDivergedTransform when a step cannot keep every warp invertible.
RaslResult rasl_align(const ImageSet& set, const RaslConfig& config);

/// Pixelwise mean of the columns of A.
Image rasl_output_image(const RaslResult& result);

}  // namespace lowrank_align::rasl
