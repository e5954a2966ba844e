#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sogpe/config.hpp"
#include "sogpe/spectral.hpp"

namespace sogpe {

struct StageOutcome {
  StageConfig stage;
  StopReason reason = StopReason::IterationCap;
  std::string diagnostics;
  int iterations = 0;
  double wall_s = 0.0;
};

struct RunArtifacts {
  /// Every iteration of every stage, in execution order.
  std::vector<IterationRecord> history;
  /// Stage index of each history entry.
  std::vector<int> stage_of;
  std::vector<StageOutcome> stages;
  /// Last iterate (present once the first stage has started).
  std::optional<Eigenpair> final_state;
  std::optional<double> initial_energy;
  std::optional<double> reference_energy;
  std::optional<SpectralReport> spectral;
  std::vector<std::string> warnings;
  StopReason reason = StopReason::IterationCap;
  std::string diagnostics;
  double wall_s = 0.0;

  bool converged() const { return reason != StopReason::IterationCap && reason != StopReason::Aborted; }
};

/// Called with the stage index, the record and the new iterate.
using PipelineObserver = std::function<void(int, const IterationRecord&, const SpinorField&)>;

/// Runs the stages in order, carrying the state across them and interpolating
/// at the P1 -> P2 boundary. A stage that stops for any reason other than its
/// tolerance ends the run; the partial history is kept.
RunArtifacts run_pipeline(const RunConfig& cfg, const PipelineObserver& observer = {});

}  // namespace sogpe
