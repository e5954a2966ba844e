#include "sogpe/iteration.hpp"

#include <cmath>

#include "sogpe/errors.hpp"

namespace sogpe {

void StoppingRule::validate() const {
  const auto nonneg = [](const std::optional<double>& v) { return !v || (std::isfinite(*v) && *v >= 0.0); };
  if (!nonneg(energy_diff_tol) || !nonneg(residual_tol)) throw ConfigError("stopping tolerances must be >= 0");
  if (reference_energy && !std::isfinite(*reference_energy)) throw ConfigError("reference energy must be finite");
  if (!(reference_tol >= 0.0)) throw ConfigError("reference tolerance must be >= 0");
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::EnergyDifference: return "energy_difference";
    case StopReason::Residual: return "residual";
    case StopReason::ReferenceEnergy: return "reference_energy";
    case StopReason::IterationCap: return "iteration_cap";
    case StopReason::Aborted: return "aborted";
  }
  return "unknown";
}

std::optional<StopReason> check_stop(const StoppingRule& rule, int iters_done, double previous_energy,
                                     const IterationRecord& rec) {
  if (rule.reference_energy && std::abs(rec.energy - *rule.reference_energy) < rule.reference_tol) {
    return StopReason::ReferenceEnergy;
  }
  if (rule.energy_diff_tol && std::abs(previous_energy - rec.energy) < *rule.energy_diff_tol) {
    return StopReason::EnergyDifference;
  }
  if (rule.residual_tol && rec.residual < *rule.residual_tol) return StopReason::Residual;
  if (iters_done >= rule.max_iters) return StopReason::IterationCap;
  return std::nullopt;
}

std::string method_tag(char method, const SpinorField& u) {
  return std::string(1, method) + std::to_string(u.space().order());
}

}  // namespace sogpe
