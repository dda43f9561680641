#include "lowrank_align/gan/grad_check.hpp"

#include "lowrank_align/error.hpp"
#include "lowrank_align/gan/losses.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lowrank_align::gan {

void GradCheckConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "grad check: " + what); };
  gen.validate();
  disc.validate();
  if (gen.height > 16 || gen.width > 16) fail("images must be at most 16x16");
  if (gen.base_width > 4) fail("base_width must be at most 4");
  if (gen.n_res_blocks != 1) fail("exactly one residual block is supported");
  if (batch_size < 1 || coords_per_tensor < 1) fail("batch_size and coords_per_tensor must be positive");
  if (!(step > 0) || !(tolerance > 0) || !(magnitude_floor > 0)) fail("step, tolerance and floor must be positive");
  if (!(gamma >= 0)) fail("gamma must be >= 0");
}

double GradCheckReport::max_rel_error_for(const std::string& objective) const {
  double worst = 0.0;
  for (const auto& c : checks) {
    if (c.objective == objective) worst = std::max(worst, c.max_rel_error);
  }
  return worst;
}

std::string GradCheckReport::to_json() const {
  nlohmann::json j;
  j["tolerance"] = tolerance;
  j["max_rel_error"] = max_rel_error;
  j["passed"] = passed;
  for (const auto& c : checks) {
    j["checks"].push_back({{"objective", c.objective},
                           {"tensor", c.tensor},
                           {"checked", c.checked},
                           {"skipped_kinks", c.skipped_kinks},
                           {"max_rel_error", c.max_rel_error}});
  }
  return j.dump(2);
}

namespace {

enum class Objective { kSparse, kGanGen, kFull, kGanDisc };

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::kSparse: return "loss_sparse";
    case Objective::kGanGen: return "loss_gan_ls_gen";
    case Objective::kFull: return "loss_full";
    case Objective::kGanDisc: return "loss_gan_ls_disc";
  }
  return "";
}

using Map = FeatureMap<double>;
using Params = ParameterSet<double>;

struct Problem {
  Generator<double> gen;
  Discriminator<double> disc;
  std::vector<Map> inputs;
  std::vector<Map> reals;
  double gamma;
};

struct Evaluation {
  double value = 0.0;
  std::vector<std::uint8_t> signature;
};

void append_residual_signs(const Map& stacked, const Map& generated, std::vector<std::uint8_t>& out) {
  const Index c = generated.channels;
  for (Index j = 0; j < stacked.channels / c; ++j) {
    const Matrix<double> diff = stacked.data.middleRows(j * c, c) - generated.data;
    for (Index i = 0; i < diff.size(); ++i) out.push_back(diff.data()[i] > 0 ? 2 : (diff.data()[i] < 0 ? 0 : 1));
  }
}

Evaluation evaluate(const Problem& p, Objective objective, const Params& gp, const Params& dp) {
  Evaluation eval;
  const double batch = static_cast<double>(p.inputs.size());
  double sparse = 0.0;
  std::vector<Map> fake_scores;
  std::vector<Map> real_scores;
  for (std::size_t b = 0; b < p.inputs.size(); ++b) {
    LayerCache<double> gen_tape;
    const Map fake = p.gen.forward(gp, p.inputs[b], &gen_tape);
    const auto gs = p.gen.signature(gen_tape);
    eval.signature.insert(eval.signature.end(), gs.begin(), gs.end());
    if (objective == Objective::kSparse || objective == Objective::kFull) {
      sparse += loss_sparse(p.inputs[b], fake) / batch;
      append_residual_signs(p.inputs[b], fake, eval.signature);
    }
    if (objective != Objective::kSparse) {
      LayerCache<double> tape;
      fake_scores.push_back(p.disc.forward(dp, fake, &tape));
      const auto ds = p.disc.signature(tape);
      eval.signature.insert(eval.signature.end(), ds.begin(), ds.end());
    }
    if (objective == Objective::kGanDisc) {
      LayerCache<double> tape;
      real_scores.push_back(p.disc.forward(dp, p.reals[b], &tape));
      const auto ds = p.disc.signature(tape);
      eval.signature.insert(eval.signature.end(), ds.begin(), ds.end());
    }
  }
  switch (objective) {
    case Objective::kSparse: eval.value = sparse; break;
    case Objective::kGanGen: eval.value = loss_gan_ls<double>({}, fake_scores).gen; break;
    case Objective::kFull: eval.value = loss_full(loss_gan_ls<double>({}, fake_scores).gen, sparse, p.gamma); break;
    case Objective::kGanDisc: eval.value = loss_gan_ls<double>(real_scores, fake_scores).disc; break;
  }
  return eval;
}

// Analytic gradients of the objective with respect to the generator and
// discriminator parameters.
std::pair<Params, Params> analytic(const Problem& p, Objective objective, const Params& gp, const Params& dp) {
  const Index batch = static_cast<Index>(p.inputs.size());
  Params gen_grads = gp.zeros_like();
  Params disc_grads = dp.zeros_like();
  std::vector<LayerCache<double>> gen_tapes(batch), fake_tapes(batch), real_tapes(batch);
  std::vector<Map> fakes(batch), fake_scores(batch), real_scores(batch), sparse_grads(batch);
  for (Index b = 0; b < batch; ++b) {
    fakes[b] = p.gen.forward(gp, p.inputs[b], &gen_tapes[b]);
    loss_sparse(p.inputs[b], fakes[b], &sparse_grads[b]);
    sparse_grads[b].data /= static_cast<double>(batch);
    fake_scores[b] = p.disc.forward(dp, fakes[b], &fake_tapes[b]);
    real_scores[b] = p.disc.forward(dp, p.reals[b], &real_tapes[b]);
  }
  GanLossGradients<double> g;
  loss_gan_ls(real_scores, fake_scores, &g);
  if (objective == Objective::kGanDisc) {
    for (Index b = 0; b < batch; ++b) {
      p.disc.backward(dp, real_tapes[b], g.disc_real[b], disc_grads);
      p.disc.backward(dp, fake_tapes[b], g.disc_fake[b], disc_grads);
    }
    return {gen_grads, disc_grads};
  }
  Params scratch = dp.zeros_like();
  for (Index b = 0; b < batch; ++b) {
    Map d_fake(fakes[b].channels, fakes[b].height, fakes[b].width);
    if (objective != Objective::kSparse) d_fake = p.disc.backward(dp, fake_tapes[b], g.gen_fake[b], scratch);
    if (objective == Objective::kSparse) d_fake.data += sparse_grads[b].data;
    if (objective == Objective::kFull) d_fake.data += p.gamma * sparse_grads[b].data;
    p.gen.backward(gp, gen_tapes[b], d_fake, gen_grads);
  }
  return {gen_grads, disc_grads};
}

Map random_map(Index c, Index h, Index w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Map m(c, h, w);
  for (Index i = 0; i < m.data.size(); ++i) m.data.data()[i] = unit(rng);
  return m;
}

}  // namespace

GradCheckReport grad_check(const GradCheckConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Problem problem{Generator<double>(config.gen), Discriminator<double>(config.disc), {}, {}, config.gamma};
  for (Index b = 0; b < config.batch_size; ++b) {
    problem.inputs.push_back(random_map(config.gen.input_channels(), config.gen.height, config.gen.width, rng));
    problem.reals.push_back(random_map(config.gen.channels, config.gen.height, config.gen.width, rng));
  }
  Params gen_params = problem.gen.init_parameters(rng);
  Params disc_params = problem.disc.init_parameters(rng);

  GradCheckReport report;
  report.tolerance = config.tolerance;
  for (Objective objective : {Objective::kSparse, Objective::kGanGen, Objective::kFull, Objective::kGanDisc}) {
    const bool on_disc = objective == Objective::kGanDisc;
    const auto [gen_grads, disc_grads] = analytic(problem, objective, gen_params, disc_params);
    const Evaluation base = evaluate(problem, objective, gen_params, disc_params);
    Params& params = on_disc ? disc_params : gen_params;
    const Params& grads = on_disc ? disc_grads : gen_grads;

    for (Index t = 0; t < params.size(); ++t) {
      TensorCheck check;
      check.objective = objective_name(objective);
      check.tensor = std::string(on_disc ? "disc/" : "gen/") + params.name(t);
      std::vector<Index> order(params[t].values.size());
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (Index coord : order) {
        if (check.checked >= config.coords_per_tensor) break;
        double& value = params[t].values(coord);
        const double saved = value;
        value = saved + config.step;
        const Evaluation plus = evaluate(problem, objective, gen_params, disc_params);
        value = saved - config.step;
        const Evaluation minus = evaluate(problem, objective, gen_params, disc_params);
        value = saved;
        if (plus.signature != base.signature || minus.signature != base.signature) {
          ++check.skipped_kinks;
          continue;
        }
        const double numeric = (plus.value - minus.value) / (2 * config.step);
        const double exact = grads[t].values(coord);
        const double scale = std::max({std::abs(numeric), std::abs(exact), config.magnitude_floor});
        check.max_rel_error = std::max(check.max_rel_error, std::abs(numeric - exact) / scale);
        ++check.checked;
      }
      report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
      report.checks.push_back(std::move(check));
    }
  }
  report.passed = report.max_rel_error <= config.tolerance;
  return report;
}

}  // namespace lowrank_align::gan
