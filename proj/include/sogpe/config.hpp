#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sogpe/a_method.hpp"
#include "sogpe/j_method.hpp"

namespace sogpe {

struct StageConfig {
  char method = 'A';  // 'A' or 'J'
  int order = 2;
  /// Energy difference that ends the stage; nullopt on the final stage,
  /// which uses the run's final stopping rule instead.
  std::optional<double> switch_tol;
  int max_iters = 10000;

  std::string tag() const { return std::string(1, method) + std::to_string(order); }
};

struct RunConfig {
  RectDomain domain;
  PhysicsParams physics;
  std::vector<StageConfig> stages;
  AStepConfig a_step;
  ShiftPolicy shift;
  /// Final-stage criteria: consecutive energy difference, |E - E_ref| when a
  /// reference energy is known, and the residual norm. At least one is set.
  std::optional<double> final_energy_diff = 1e-12;
  std::optional<double> reference_energy;
  double reference_tol = 1e-12;
  std::optional<double> final_residual;

  std::filesystem::path output_dir = "sogpe_out";
  bool spectral = false;
  int spectral_k = 3;
  /// Shift for the J-gap; defaults to the last shift of a final J stage.
  std::optional<double> spectral_sigma;

  /// Throws ConfigError. Stage orders must be non-decreasing.
  void validate() const;
  /// Stopping rule of stage i.
  StoppingRule stage_rule(std::size_t i) const;
};

/// Stage list such as "A1:1e-4,A2:1e-4,J2": method letter, element order and,
/// except on the last stage, the switching energy difference.
std::vector<StageConfig> parse_stages(std::string_view spec, int max_iters = 10000);

/// INI-style key-value file with sections [domain], [physics], [pipeline],
/// [a_method], [j_method], [stopping] and [output].
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& file);

}  // namespace sogpe
