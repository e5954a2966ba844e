#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "sogpe/errors.hpp"
#include "sogpe/export.hpp"
#include "sogpe/pipeline.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIterationCap = 2;
constexpr int kExitNumerical = 3;

int exit_code(const sogpe::RunArtifacts& art) {
  if (art.reason == sogpe::StopReason::Aborted) return kExitNumerical;
  if (art.reason == sogpe::StopReason::IterationCap) return kExitIterationCap;
  return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of two-component spin-orbit coupled condensates"};
  app.require_subcommand(1);
  CLI::App* solve = app.add_subcommand("solve", "Run a configured A/J pipeline and write its artifacts");
  std::string config_file;
  std::string out_dir;
  std::string stages;
  bool spectral = false;
  bool quiet = false;
  solve->add_option("--config", config_file, "Configuration file")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  solve->add_option("--stages", stages, "Stage list such as A1:1e-4,A2:1e-4,J2");
  solve->add_flag("--spectral", spectral, "Compute the spectral report of the final state");
  solve->add_flag("-q,--quiet", quiet, "Do not print per-iteration progress");
  CLI11_PARSE(app, argc, argv);

  sogpe::RunConfig cfg;
  try {
    cfg = sogpe::load_config(config_file);
    if (!stages.empty()) {
      const int max_iters = cfg.stages.front().max_iters;
      cfg.stages = sogpe::parse_stages(stages, max_iters);
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (spectral) cfg.spectral = true;
    cfg.validate();
  } catch (const sogpe::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  }

  const sogpe::PipelineObserver progress = [&](int, const sogpe::IterationRecord& r, const sogpe::SpinorField&) {
    if (quiet) return;
    std::printf("%-3s %6d  E = %.15f  lambda = %.12f  res = %.3e\n", r.method.c_str(), r.iter, r.energy, r.lambda,
                r.residual);
    std::fflush(stdout);
  };
  try {
    const sogpe::RunArtifacts art = sogpe::run_pipeline(cfg, progress);
    sogpe::export_outputs(art, cfg, cfg.output_dir);
    std::printf("status: %s%s%s\n", sogpe::to_string(art.reason), art.diagnostics.empty() ? "" : " - ",
                art.diagnostics.c_str());
    for (const std::string& w : art.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    return exit_code(art);
  } catch (const sogpe::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const sogpe::OutputError& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
    return kExitConfig;
  } catch (const sogpe::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  }
}
