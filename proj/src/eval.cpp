#include "lowrank_align/eval.hpp"

#include "lowrank_align/error.hpp"

#include <json.hpp>

#include <cmath>

namespace lowrank_align::eval {

using nlohmann::json;

std::string to_string(Method method) {
  switch (method) {
    case Method::kRasl: return "rasl";
    case Method::kGan: return "gan";
    case Method::kNone: return "none";
  }
  return "none";
}

Method method_from_string(const std::string& name) {
  if (name == "rasl") return Method::kRasl;
  if (name == "gan") return Method::kGan;
  if (name == "none") return Method::kNone;
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + name + "'");
}

std::string EvalReport::to_json_line() const {
  json j;
  j["set_id"] = set_id;
  j["method"] = to_string(method);
  j["singular_values"] = std::vector<double>(singular_values.data(), singular_values.data() + singular_values.size());
  j["effective_rank"] = effective_rank;
  j["residual_sparsity"] = residual_sparsity;
  j["template_rmse"] = template_rmse ? json(*template_rmse) : json(nullptr);
  j["shift_error_px"] = shift_error_px ? json(*shift_error_px) : json(nullptr);
  return j.dump();
}

EvalReport EvalReport::from_json_line(const std::string& line) {
  EvalReport report;
  try {
    const json j = json::parse(line);
    report.set_id = j.at("set_id").get<std::string>();
    report.method = method_from_string(j.at("method").get<std::string>());
    const auto sv = j.at("singular_values").get<std::vector<double>>();
    report.singular_values = Eigen::Map<const VectorXd>(sv.data(), static_cast<Index>(sv.size()));
    report.effective_rank = j.at("effective_rank").get<Index>();
    report.residual_sparsity = j.at("residual_sparsity").get<double>();
    if (!j.at("template_rmse").is_null()) report.template_rmse = j.at("template_rmse").get<double>();
    if (!j.at("shift_error_px").is_null()) report.shift_error_px = j.at("shift_error_px").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIoError, std::string("malformed report line: ") + e.what());
  }
  return report;
}

VectorXd singular_spectrum(const MatrixXd& m) {
  if (m.size() == 0) return VectorXd();
  return checked_svd(m, 0).singularValues();
}

Index effective_rank(const MatrixXd& m, double rel_tol) {
  const VectorXd sv = singular_spectrum(m);
  if (sv.size() == 0 || !(sv(0) > 0)) throw Error(ErrorKind::kZeroMatrix, "effective rank of a zero matrix");
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) / sv(0) > rel_tol) ++rank;
  }
  return rank;
}

double residual_sparsity(const MatrixXd& e, double abs_tol) {
  if (!(abs_tol > 0)) throw Error(ErrorKind::kInvalidArgument, "abs_tol must be positive");
  if (e.size() == 0) return 0.0;
  return static_cast<double>((e.array().abs() > abs_tol).count()) / static_cast<double>(e.size());
}

namespace {

VectorXd normalized(const VectorXd& v) {
  const double count = static_cast<double>(v.size());
  const VectorXd centered = v.array() - v.sum() / count;
  const double sd = std::sqrt(centered.squaredNorm() / count);
  return sd > 1e-12 ? VectorXd(centered / sd) : centered;
}

}  // namespace

double template_rmse(const Image& aligned, const Image& clean_template) {
  if (!aligned.same_shape(clean_template)) {
    throw Error(ErrorKind::kShapeMismatch, "aligned image and template differ in shape");
  }
  const VectorXd diff = normalized(aligned.pixels) - normalized(clean_template.pixels);
  return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

double shift_error(const TransformParams& recovered, const TransformParams& truth) {
  if (recovered.model != truth.model) {
    throw Error(ErrorKind::kModelMismatch, "cannot compare " + to_string(recovered.model) + " with " + to_string(truth.model));
  }
  if (recovered.size() != truth.size() || recovered.size() == 0) {
    throw Error(ErrorKind::kShapeMismatch, "transform sets differ in length");
  }
  // Translation occupies the last two parameters in every model.
  MatrixXd a = recovered.theta.rightCols(2);
  MatrixXd b = truth.theta.rightCols(2);
  a.rowwise() -= a.colwise().mean();
  b.rowwise() -= b.colwise().mean();
  return (a - b).rowwise().norm().maxCoeff();
}

}  // namespace lowrank_align::eval
