#pragma once

#include "lowrank_align/core.hpp"
#include "lowrank_align/transform.hpp"

#include <optional>
#include <string>

namespace lowrank_align::eval {

enum class Method { kRasl, kGan, kNone };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct EvalReport {
  std::string set_id;
  Method method = Method::kNone;
  VectorXd singular_values;
  Index effective_rank = 0;
  double residual_sparsity = 0.0;
  std::optional<double> template_rmse;
  std::optional<double> shift_error_px;

  /// One JSON object, no trailing newline.
  std::string to_json_line() const;
  static EvalReport from_json_line(const std::string& line);
};

/// Singular values, descending. Throws kSvdFailure.
VectorXd singular_spectrum(const MatrixXd& m);

/// Number of singular values with sigma_i / sigma_1 > rel_tol. Throws kZeroMatrix.
Index effective_rank(const MatrixXd& m, double rel_tol = 1e-2);

/// Fraction of entries with |e| > abs_tol.
double residual_sparsity(const MatrixXd& e, double abs_tol);

/// RMS difference after mapping both images to zero mean, unit std.
double template_rmse(const Image& aligned, const Image& clean_template);

/// Max over images of the distance between gauge-fixed (mean-removed) shifts.
/// Throws kModelMismatch.
double shift_error(const TransformParams& recovered, const TransformParams& truth);

}  // namespace lowrank_align::eval
