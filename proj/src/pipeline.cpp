#include "sogpe/pipeline.hpp"

#include <chrono>
#include <memory>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace {

SpinorField to_p2(const Discretization& p2, const SpinorField& u) {
  Vec coeffs(4 * static_cast<Eigen::Index>(p2.dofs()));
  SpinorField out(p2.space_ptr(), std::move(coeffs));
  for (int p = 0; p < 4; ++p) out.part(p) = interpolate_p1_to_p2(u.space(), p2.space(), u.part(p));
  return normalize(p2, out);
}

}  // namespace

RunArtifacts run_pipeline(const RunConfig& cfg, const PipelineObserver& observer) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto t_run = clock::now();

  RunArtifacts art;
  art.reference_energy = cfg.reference_energy;
  std::unique_ptr<Discretization> disc;
  std::optional<SpinorField> u;
  std::optional<double> last_sigma;

  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const StageConfig& stage = cfg.stages[i];
    const auto t_stage = clock::now();
    if (!disc || disc->space().order() != stage.order) {
      auto next = std::make_unique<Discretization>(build_space(cfg.domain, stage.order), cfg.physics);
      if (u) {
        u = to_p2(*next, *u);
      } else {
        u = initial_state(*next);
        art.initial_energy = energy(*next, *u);
      }
      disc = std::move(next);
    }

    const int stage_index = static_cast<int>(i);
    const IterationObserver record = [&](const IterationRecord& rec, const SpinorField& v) {
      art.history.push_back(rec);
      art.stage_of.push_back(stage_index);
      if (observer) observer(stage_index, rec, v);
    };
    const StoppingRule rule = cfg.stage_rule(i);
    MethodResult result;
    try {
      if (stage.method == 'A') {
        result = run_a_method(*disc, *u, cfg.a_step, rule, record);
      } else {
        result = run_j_method(*disc, *u, cfg.shift, rule, record);
      }
    } catch (const NumericalError& e) {
      result.state = {*u, 0.0};
      result.reason = StopReason::Aborted;
      result.diagnostics = e.what();
    }
    u = result.state.u;
    art.final_state = result.state;
    if (stage.method == 'J' && !result.history.empty()) last_sigma = result.history.back().sigma;

    StageOutcome outcome;
    outcome.stage = stage;
    outcome.reason = result.reason;
    outcome.diagnostics = result.diagnostics;
    outcome.iterations = static_cast<int>(result.history.size());
    outcome.wall_s = std::chrono::duration<double>(clock::now() - t_stage).count();
    art.stages.push_back(outcome);
    art.reason = result.reason;
    art.diagnostics = result.diagnostics;
    if (!result.converged()) break;
  }

  if (cfg.spectral && art.converged() && art.final_state) {
    const std::optional<double> sigma = cfg.spectral_sigma ? cfg.spectral_sigma : last_sigma;
    try {
      art.spectral = spectral_report(*disc, *art.final_state, cfg.spectral_k, sigma);
    } catch (const NumericalError& e) {
      art.warnings.push_back(std::string("spectral analysis failed: ") + e.what());
    }
  }
  art.wall_s = std::chrono::duration<double>(clock::now() - t_run).count();
  return art;
}

}  // namespace sogpe
