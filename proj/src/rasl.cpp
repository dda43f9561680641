#include "lowrank_align/rasl.hpp"

#include "lowrank_align/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lowrank_align::rasl {

void RaslConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "rasl config: " + what); };
  if (lambda && !(*lambda > 0)) fail("lambda must be positive");
  if (max_outer < 1 || max_inner < 1) fail("iteration limits must be positive");
  if (!(tol_outer > 0) || !(tol_inner > 0)) fail("tolerances must be positive");
  if (mu_init && !(*mu_init > 0)) fail("mu_init must be positive");
  if (!(rho > 1)) fail("rho must exceed 1");
  if (max_halvings < 0) fail("max_halvings must be >= 0");
}

double RaslConfig::lambda_for(Index rows) const {
  return lambda ? *lambda : 1.0 / std::sqrt(static_cast<double>(rows));
}

namespace {

double spectral_norm(const MatrixXd& m) {
  return checked_svd(m, 0).singularValues()(0);
}

double nuclear_norm(const VectorXd& singular_values) { return singular_values.sum(); }

// Standard dual initialization Y = D / J(D), J(D) = max(||D||_2, ||D||_inf / lambda).
MatrixXd initial_dual(const MatrixXd& D, double lambda, double norm_two) {
  const double norm_inf = D.cwiseAbs().maxCoeff() / lambda;
  return D / std::max(norm_two, norm_inf);
}

IterationRecord record(const MatrixXd& D, const MatrixXd& A, const MatrixXd& E, double lambda, double norm_d) {
  IterationRecord rec;
  const auto svd = checked_svd(A, 0);
  const VectorXd sv = svd.singularValues();
  rec.objective = nuclear_norm(sv) + lambda * E.cwiseAbs().sum();
  rec.rank = 0;
  if (sv.size() > 0 && sv(0) > 0) {
    while (rec.rank < sv.size() && sv(rec.rank) > 1e-10 * sv(0)) ++rec.rank;
  }
  rec.l1_error = E.cwiseAbs().sum();
  rec.residual = (D - A - E).norm() / norm_d;
  return rec;
}

}  // namespace

RpcaResult rpca_alm(const MatrixXd& D, double lambda, const RaslConfig& config) {
  config.validate();
  if (!(lambda > 0)) throw Error(ErrorKind::kInvalidArgument, "lambda must be positive");
  if (!D.allFinite()) throw Error(ErrorKind::kInvalidArgument, "D contains non-finite entries");

  RpcaResult result;
  result.A = MatrixXd::Zero(D.rows(), D.cols());
  result.E = MatrixXd::Zero(D.rows(), D.cols());
  const double norm_d = D.norm();
  if (norm_d == 0.0) {
    result.converged = true;
    return result;
  }

  const double norm_two = spectral_norm(D);
  MatrixXd Y = initial_dual(D, lambda, norm_two);
  double mu = config.mu_init ? *config.mu_init : 1.25 / norm_two;
  const double mu_max = mu * 1e7;
  MatrixXd A = result.A;
  MatrixXd E = result.E;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int k = 0; k < config.max_inner; ++k) {
    A = svt(D - E + Y / mu, 1.0 / mu).thresholded;
    E = shrink(D - A + Y / mu, lambda / mu);
    const MatrixXd Z = D - A - E;
    Y += mu * Z;
    mu = std::min(mu * config.rho, mu_max);
    result.iterations = k + 1;
    const double residual = Z.norm() / norm_d;
    if (residual < best_residual) {
      best_residual = residual;
      result.A = A;
      result.E = E;
    }
    if (residual <= config.tol_inner) {
      result.converged = true;
      break;
    }
  }
  result.trace.push_back(record(D, result.A, result.E, lambda, norm_d));
  return result;
}

namespace {

struct WarpedStack {
  MatrixXd normalized;  // m x n, unit columns
  VectorXd norms;
};

WarpedStack warp_stack(const ImageSet& set, const TransformParams& tau) {
  WarpedStack out;
  const Index m = set.images.front().size();
  out.normalized.resize(m, set.size());
  out.norms.resize(set.size());
  for (Index j = 0; j < set.size(); ++j) {
    const VectorXd theta = tau.theta.row(j).transpose();
    VectorXd column = warp(set.images[j], theta, tau.model).pixels;
    const double norm = column.norm();
    if (!(norm > 0)) throw Error(ErrorKind::kInvalidArgument, "warped image " + std::to_string(j) + " is all zero");
    out.norms(j) = norm;
    out.normalized.col(j) = column / norm;
  }
  return out;
}

struct Evaluation {
  WarpedStack stack;
  RpcaResult rpca;
  double objective = 0.0;
};

Evaluation evaluate(const ImageSet& set, const TransformParams& tau, double lambda, const RaslConfig& config) {
  Evaluation eval;
  eval.stack = warp_stack(set, tau);
  eval.rpca = rpca_alm(eval.stack.normalized, lambda, config);
  eval.objective = eval.rpca.trace.back().objective;
  return eval;
}

bool all_invertible(const TransformParams& tau) {
  try {
    for (Index j = 0; j < tau.size(); ++j) check_invertible(tau.theta.row(j).transpose(), tau.model);
  } catch (const Error&) {
    return false;
  }
  return true;
}

// Solves min ||A||_* + lambda ||E||_1  s.t.  D + sum_j J_j dtau_j e_j^T = A + E.
MatrixXd linearized_step(const MatrixXd& D, const std::vector<MatrixXd>& jacobians, double lambda,
                         const RaslConfig& config) {
  const Index n = D.cols();
  const Index p = jacobians.front().cols();
  std::vector<Eigen::ColPivHouseholderQR<MatrixXd>> solvers;
  solvers.reserve(n);
  for (const MatrixXd& J : jacobians) solvers.emplace_back(J);

  const double norm_d = D.norm();
  const double norm_two = spectral_norm(D);
  MatrixXd Y = initial_dual(D, lambda, norm_two);
  double mu = config.mu_init ? *config.mu_init : 1.25 / norm_two;
  const double mu_max = mu * 1e7;
  MatrixXd A = MatrixXd::Zero(D.rows(), n);
  MatrixXd E = MatrixXd::Zero(D.rows(), n);
  MatrixXd delta = MatrixXd::Zero(n, p);
  MatrixXd shifted = D;  // D + J dtau

  for (int k = 0; k < config.max_inner; ++k) {
    A = svt(shifted - E + Y / mu, 1.0 / mu).thresholded;
    E = shrink(shifted - A + Y / mu, lambda / mu);
    const MatrixXd target = A + E - D - Y / mu;
    for (Index j = 0; j < n; ++j) {
      delta.row(j) = solvers[j].solve(target.col(j)).transpose();
      shifted.col(j) = D.col(j) + jacobians[j] * delta.row(j).transpose();
    }
    const MatrixXd Z = shifted - A - E;
    Y += mu * Z;
    mu = std::min(mu * config.rho, mu_max);
    if (Z.norm() / norm_d <= config.tol_inner) break;
  }
  return delta;
}

}  // namespace

RaslResult rasl_align(const ImageSet& set, const RaslConfig& config) {
  config.validate();
  set.validate();
  const Index n = set.size();
  const Index m = set.images.front().size();
  const double lambda = config.lambda_for(m);

  RaslResult result;
  result.tau = TransformParams::zeros(config.model, n);
  Evaluation current = evaluate(set, result.tau, lambda, config);
  result.trace.push_back(current.rpca.trace.back());

  for (int outer = 0; outer < config.max_outer; ++outer) {
    result.outer_iterations = outer + 1;
    const MatrixXd& D = current.stack.normalized;

    // Jacobian of the normalized column x / ||x||: (I - x x^T) J / ||x||.
    std::vector<MatrixXd> jacobians;
    jacobians.reserve(n);
    for (Index j = 0; j < n; ++j) {
      const MatrixXd J = warp_jacobian(set.images[j], result.tau.theta.row(j).transpose(), config.model);
      const VectorXd x = D.col(j);
      jacobians.push_back((J - x * (x.transpose() * J)) / current.stack.norms(j));
    }

    MatrixXd delta = linearized_step(D, jacobians, lambda, config);
    // A common transform of every image leaves the stack's rank unchanged;
    // pin it by keeping the mean update at zero.
    delta.rowwise() -= delta.colwise().mean();

    bool accepted = false;
    bool any_invertible = false;
    double step = 1.0;
    for (int halving = 0; halving <= config.max_halvings; ++halving, step *= 0.5) {
      TransformParams candidate = result.tau;
      candidate.theta += step * delta;
      if (!all_invertible(candidate)) continue;
      any_invertible = true;
      Evaluation next = evaluate(set, candidate, lambda, config);
      if (next.objective <= current.objective) {
        const double decrease = (current.objective - next.objective) / std::max(current.objective, 1e-300);
        result.tau = std::move(candidate);
        current = std::move(next);
        result.trace.push_back(current.rpca.trace.back());
        accepted = true;
        if (decrease < config.tol_outer) result.converged = true;
        break;
      }
    }
    if (!any_invertible) {
      throw Error(ErrorKind::kDivergedTransform,
                  "every step size along the update leaves a warp outside the invertible range");
    }
    if (!accepted) result.converged = true;
    if (result.converged) break;
  }

  result.A = {current.rpca.A, {set.height(), set.width(), set.channels()}};
  result.E = {current.rpca.E, result.A.shape};
  result.warped = {current.stack.normalized, result.A.shape};
  return result;
}

Image rasl_output_image(const RaslResult& result) {
  StackedMatrix mean = result.A;
  mean.data = result.A.data.rowwise().mean();
  return column_image(mean, 0);
}

}  // namespace lowrank_align::rasl
