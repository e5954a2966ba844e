#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sogpe/state.hpp"

namespace sogpe {

/// The first criterion that holds ends the run. The energy difference is
/// |E(u^{n-1}) - E(u^n)| between consecutive iterates.
struct StoppingRule {
  std::optional<double> energy_diff_tol = 1e-12;
  std::optional<double> residual_tol;
  std::optional<double> reference_energy;
  double reference_tol = 1e-12;
  int max_iters = 10000;

  void validate() const;
};

enum class StopReason { EnergyDifference, Residual, ReferenceEnergy, IterationCap, Aborted };

const char* to_string(StopReason r);

struct MethodResult {
  Eigenpair state;
  std::vector<IterationRecord> history;
  StopReason reason = StopReason::IterationCap;
  /// Human-readable detail for IterationCap and Aborted.
  std::string diagnostics;

  bool converged() const { return reason != StopReason::IterationCap && reason != StopReason::Aborted; }
};

/// Called after every iteration with the record and the new iterate.
using IterationObserver = std::function<void(const IterationRecord&, const SpinorField&)>;

/// Checks the rule after an iteration; `previous_energy` is E(u^{n-1}).
std::optional<StopReason> check_stop(const StoppingRule& rule, int iters_done, double previous_energy,
                                     const IterationRecord& rec);

/// "A1", "J2", ... for a method letter and the element order of u.
std::string method_tag(char method, const SpinorField& u);

}  // namespace sogpe
