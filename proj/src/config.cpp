#include "sogpe/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sogpe/errors.hpp"

namespace sogpe {

namespace {

using boost::property_tree::ptree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError("'" + key + "': expected a number, got '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError("'" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + s + "'");
}

// Reads one section, rejecting keys that are not listed.
class Section {
 public:
  Section(const ptree& root, const std::string& name, std::set<std::string> allowed) : name_(name) {
    const auto child = root.get_child_optional(name);
    if (!child) return;
    for (const auto& [key, value] : *child) {
      if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      values_[key] = value.data();
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return trim(it->second);
  }
  void read(const std::string& key, double& out) const {
    if (auto t = text(key)) out = parse_double(full(key), *t);
  }
  void read(const std::string& key, int& out) const {
    if (auto t = text(key)) out = parse_int(full(key), *t);
  }
  void read(const std::string& key, bool& out) const {
    if (auto t = text(key)) out = parse_bool(full(key), *t);
  }
  void read(const std::string& key, std::optional<double>& out) const {
    if (auto t = text(key)) out = parse_double(full(key), *t);
  }

 private:
  std::string full(const std::string& key) const { return name_ + "." + key; }

  std::string name_;
  std::map<std::string, std::string> values_;
};

}  // namespace

void RunConfig::validate() const {
  if (!(domain.xmax > domain.xmin && domain.ymax > domain.ymin)) throw ConfigError("empty domain");
  if (domain.n_sub < 2) throw ConfigError("n_sub must be >= 2");
  physics.validate();
  if (stages.empty()) throw ConfigError("the pipeline needs at least one stage");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const StageConfig& s = stages[i];
    if (s.method != 'A' && s.method != 'J') throw ConfigError("stage method must be A or J");
    if (s.order != 1 && s.order != 2) throw ConfigError("stage order must be 1 or 2");
    if (s.max_iters < 0) throw ConfigError("stage max_iters must be >= 0");
    if (i > 0 && s.order < stages[i - 1].order) throw ConfigError("stage orders must be non-decreasing");
    const bool last = i + 1 == stages.size();
    if (!last && !(s.switch_tol && *s.switch_tol > 0.0)) {
      throw ConfigError("stage " + s.tag() + " needs a positive switching tolerance");
    }
  }
  a_step.validate();
  shift.validate();
  if (final_energy_diff && !(*final_energy_diff > 0.0)) throw ConfigError("final energy difference must be positive");
  if (final_residual && !(*final_residual > 0.0)) throw ConfigError("final residual tolerance must be positive");
  if (!final_energy_diff && !reference_energy && !final_residual) {
    throw ConfigError("the final stage needs an energy-difference, reference or residual criterion");
  }
  if (!(reference_tol > 0.0)) throw ConfigError("reference tolerance must be positive");
  if (spectral_k < 1) throw ConfigError("spectral_k must be >= 1");
}

StoppingRule RunConfig::stage_rule(std::size_t i) const {
  StoppingRule rule;
  rule.max_iters = stages.at(i).max_iters;
  if (i + 1 < stages.size()) {
    rule.energy_diff_tol = stages[i].switch_tol;
    return rule;
  }
  rule.energy_diff_tol = final_energy_diff;
  rule.reference_energy = reference_energy;
  rule.reference_tol = reference_tol;
  rule.residual_tol = final_residual;
  return rule;
}

std::vector<StageConfig> parse_stages(std::string_view spec, int max_iters) {
  std::vector<StageConfig> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string item = trim(spec.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) throw ConfigError("empty entry in stage list '" + std::string(spec) + "'");
    StageConfig stage;
    stage.max_iters = max_iters;
    const std::size_t colon = item.find(':');
    const std::string head = trim(item.substr(0, colon));
    if (head.size() != 2 || (head[0] != 'A' && head[0] != 'J') || (head[1] != '1' && head[1] != '2')) {
      throw ConfigError("stage '" + head + "' must be one of A1, A2, J1, J2");
    }
    stage.method = head[0];
    stage.order = head[1] - '0';
    if (colon != std::string::npos) stage.switch_tol = parse_double("stage " + head, item.substr(colon + 1));
    out.push_back(stage);
    if (comma == spec.size()) break;
  }
  return out;
}

RunConfig parse_config(std::istream& in) {
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  static const std::set<std::string> sections = {"domain", "physics", "pipeline", "a_method",
                                                 "j_method", "stopping", "output"};
  for (const auto& [name, child] : root) {
    if (!sections.count(name) || child.empty()) throw ConfigError("unknown section or top-level key '" + name + "'");
  }

  RunConfig cfg;
  const Section domain(root, "domain", {"xmin", "xmax", "ymin", "ymax", "n_sub"});
  domain.read("xmin", cfg.domain.xmin);
  domain.read("xmax", cfg.domain.xmax);
  domain.read("ymin", cfg.domain.ymin);
  domain.read("ymax", cfg.domain.ymax);
  domain.read("n_sub", cfg.domain.n_sub);

  const Section physics(root, "physics", {"delta", "omega", "k0", "beta11", "beta12", "beta22", "potential_shift"});
  physics.read("delta", cfg.physics.delta);
  physics.read("omega", cfg.physics.omega);
  physics.read("k0", cfg.physics.k0);
  physics.read("beta11", cfg.physics.beta11);
  physics.read("beta12", cfg.physics.beta12);
  physics.read("beta22", cfg.physics.beta22);
  physics.read("potential_shift", cfg.physics.potential_shift_enabled);

  const Section pipeline(root, "pipeline", {"stages", "max_iters"});
  int max_iters = 10000;
  pipeline.read("max_iters", max_iters);
  cfg.stages = parse_stages(pipeline.text("stages").value_or("A2"), max_iters);

  const Section a(root, "a_method", {"tau_strategy", "tau", "tau_min", "tau_max", "line_search_evals"});
  if (auto s = a.text("tau_strategy")) {
    if (*s == "line_search") {
      cfg.a_step.strategy = AStepConfig::TauStrategy::LineSearch;
    } else if (*s == "fixed") {
      cfg.a_step.strategy = AStepConfig::TauStrategy::Fixed;
    } else {
      throw ConfigError("a_method.tau_strategy must be line_search or fixed");
    }
  }
  a.read("tau", cfg.a_step.tau);
  a.read("tau_min", cfg.a_step.tau_min);
  a.read("tau_max", cfg.a_step.tau_max);
  a.read("line_search_evals", cfg.a_step.line_search_evals);

  const Section j(root, "j_method", {"shift", "sigma", "freeze_after"});
  if (auto s = j.text("shift")) {
    if (*s == "adaptive") {
      cfg.shift.mode = ShiftPolicy::Mode::Adaptive;
    } else if (*s == "fixed") {
      cfg.shift.mode = ShiftPolicy::Mode::Fixed;
      if (!j.text("sigma")) throw ConfigError("j_method.shift = fixed needs j_method.sigma");
    } else {
      throw ConfigError("j_method.shift must be adaptive or fixed");
    }
  }
  j.read("sigma", cfg.shift.sigma);
  if (auto s = j.text("freeze_after")) {
    if (*s == "never") {
      cfg.shift.freeze_after.reset();
    } else {
      cfg.shift.freeze_after = parse_int("j_method.freeze_after", *s);
    }
  }

  const Section stop(root, "stopping", {"energy_diff", "reference_energy", "reference_tol", "residual"});
  if (stop.text("energy_diff") == "none") {
    cfg.final_energy_diff.reset();
  } else {
    stop.read("energy_diff", cfg.final_energy_diff);
  }
  stop.read("reference_energy", cfg.reference_energy);
  stop.read("reference_tol", cfg.reference_tol);
  stop.read("residual", cfg.final_residual);

  const Section out(root, "output", {"dir", "spectral", "spectral_k", "spectral_sigma"});
  if (auto d = out.text("dir")) cfg.output_dir = *d;
  out.read("spectral", cfg.spectral);
  out.read("spectral_k", cfg.spectral_k);
  out.read("spectral_sigma", cfg.spectral_sigma);

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open configuration file " + file.string());
  return parse_config(in);
}

}  // namespace sogpe
