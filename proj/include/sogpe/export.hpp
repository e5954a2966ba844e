#pragma once

#include <filesystem>
#include <string>

#include "sogpe/pipeline.hpp"

namespace sogpe {

/// Decimal text with 17 significant digits (round-trips every double).
std::string format_double(double v);

/// Header of history.csv.
inline constexpr const char* kHistoryCsvHeader = "iter,method,energy,lambda,residual,sigma,tau,wall_ms";

/// Writes history.json, history.csv, density_1.csv, density_2.csv,
/// convergence.csv and report.json into dir (created when missing). Throws
/// OutputError before creating any file when dir is not writable.
void export_outputs(const RunArtifacts& art, const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace sogpe
