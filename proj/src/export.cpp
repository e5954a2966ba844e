#include "sogpe/export.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::ofstream open_output(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot create " + file.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& file) {
  out.flush();
  if (!out) throw OutputError("failed writing " + file.string());
}

std::optional<double> reference_of(const RunArtifacts& art) {
  if (art.reference_energy) return art.reference_energy;
  if (!art.history.empty()) return art.history.back().energy;
  return std::nullopt;
}

json config_echo(const RunConfig& cfg) {
  json stages = json::array();
  for (const StageConfig& s : cfg.stages) {
    stages.push_back({{"method", s.tag()}, {"switch_tol", number(s.switch_tol)}, {"max_iters", s.max_iters}});
  }
  const PhysicsParams& p = cfg.physics;
  return {
      {"domain",
       {{"xmin", cfg.domain.xmin},
        {"xmax", cfg.domain.xmax},
        {"ymin", cfg.domain.ymin},
        {"ymax", cfg.domain.ymax},
        {"n_sub", cfg.domain.n_sub}}},
      {"physics",
       {{"delta", p.delta},
        {"omega", p.omega},
        {"k0", p.k0},
        {"beta11", p.beta11},
        {"beta12", p.beta12},
        {"beta22", p.beta22},
        {"potential_shift", p.potential_shift_enabled}}},
      {"stages", stages},
      {"a_method",
       {{"tau_strategy", cfg.a_step.strategy == AStepConfig::TauStrategy::Fixed ? "fixed" : "line_search"},
        {"tau", cfg.a_step.tau},
        {"tau_min", cfg.a_step.tau_min},
        {"tau_max", cfg.a_step.tau_max},
        {"line_search_evals", cfg.a_step.line_search_evals}}},
      {"j_method",
       {{"shift", cfg.shift.mode == ShiftPolicy::Mode::Fixed ? "fixed" : "adaptive"},
        {"sigma", number(cfg.shift.sigma)},
        {"freeze_after", cfg.shift.freeze_after ? json(*cfg.shift.freeze_after) : json("never")}}},
      {"stopping",
       {{"energy_diff", number(cfg.final_energy_diff)},
        {"reference_energy", number(cfg.reference_energy)},
        {"reference_tol", cfg.reference_tol},
        {"residual", number(cfg.final_residual)}}},
  };
}

json spectral_json(const SpectralReport& r) {
  json out = {{"lambda", number(r.lambda)},
              {"hessian_smallest", r.hessian_smallest},
              {"sigma", number(r.sigma)},
              {"mu0", nullptr},
              {"predicted_rate", number(r.predicted_rate)},
              {"deflation_residual", number(r.deflation_residual)},
              {"warnings", r.warnings}};
  if (r.mu0) out["mu0"] = {{"re", number(r.mu0->real())}, {"im", number(r.mu0->imag())}};
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void export_outputs(const RunArtifacts& art, const RunConfig& cfg, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
  if (::access(dir.c_str(), W_OK) != 0) throw OutputError("output directory is not writable: " + dir.string());

  const std::optional<double> ref = reference_of(art);

  {
    json hist = json::array();
    for (std::size_t i = 0; i < art.history.size(); ++i) {
      const IterationRecord& r = art.history[i];
      hist.push_back({{"stage", art.stage_of.at(i)},
                      {"iter", r.iter},
                      {"method", r.method},
                      {"energy", number(r.energy)},
                      {"energy_error", ref ? number(std::abs(r.energy - *ref)) : json(nullptr)},
                      {"lambda", number(r.lambda)},
                      {"residual", number(r.residual)},
                      {"sigma", number(r.sigma)},
                      {"tau", number(r.tau)},
                      {"wall_ms", number(r.wall_ms)}});
    }
    const fs::path file = dir / "history.json";
    std::ofstream out = open_output(file);
    out << hist.dump(1) << '\n';
    finish(out, file);
  }

  {
    const fs::path file = dir / "history.csv";
    std::ofstream out = open_output(file);
    out << kHistoryCsvHeader << '\n';
    for (const IterationRecord& r : art.history) {
      out << r.iter << ',' << r.method << ',' << format_double(r.energy) << ',' << format_double(r.lambda) << ','
          << format_double(r.residual) << ',' << (r.sigma ? format_double(*r.sigma) : "") << ','
          << (r.tau ? format_double(*r.tau) : "") << ',' << format_double(r.wall_ms) << '\n';
    }
    finish(out, file);
  }

  for (int c = 0; c < 2; ++c) {
    const fs::path file = dir / ("density_" + std::to_string(c + 1) + ".csv");
    std::ofstream out = open_output(file);
    out << "x,y,value\n";
    if (art.final_state) {
      const SpinorField& u = art.final_state->u;
      const Vec rho = density(u)[c];
      const auto& nodes = u.space().nodes();
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        out << format_double(nodes[k][0]) << ',' << format_double(nodes[k][1]) << ','
            << format_double(rho[static_cast<Eigen::Index>(k)]) << '\n';
      }
    }
    finish(out, file);
  }

  {
    const fs::path file = dir / "convergence.csv";
    std::ofstream out = open_output(file);
    out << "iter,energy_error\n";
    for (std::size_t i = 0; i < art.history.size(); ++i) {
      out << i + 1 << ',' << format_double(std::abs(art.history[i].energy - *ref)) << '\n';
    }
    finish(out, file);
  }

  {
    json stages = json::array();
    for (const StageOutcome& s : art.stages) {
      stages.push_back({{"method", s.stage.tag()},
                        {"iterations", s.iterations},
                        {"reason", to_string(s.reason)},
                        {"diagnostics", s.diagnostics},
                        {"wall_s", number(s.wall_s)}});
    }
    json final_json = nullptr;
    if (!art.history.empty()) {
      const IterationRecord& last = art.history.back();
      final_json = {{"energy", number(last.energy)},
                    {"lambda", number(last.lambda)},
                    {"residual", number(last.residual)},
                    {"method", last.method}};
    }
    const json report = {
        {"status", to_string(art.reason)},
        {"converged", art.converged()},
        {"diagnostics", art.diagnostics},
        {"initial_energy", number(art.initial_energy)},
        {"reference_energy", number(art.reference_energy)},
        {"final", final_json},
        {"total_iterations", art.history.size()},
        {"stages", stages},
        {"spectral", art.spectral ? spectral_json(*art.spectral) : json(nullptr)},
        {"warnings", art.warnings},
        {"config", config_echo(cfg)},
        {"wall_s", number(art.wall_s)},
    };
    const fs::path file = dir / "report.json";
    std::ofstream out = open_output(file);
    out << report.dump(1) << '\n';
    finish(out, file);
  }
}

}  // namespace sogpe
