#include "alam/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alam/env/environments.hpp"
#include "alam/rl/trainer.hpp"

namespace alam::harness {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: bad numeric value for '" + key + "': " + s);
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  const std::string body = trim(s);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']')
    throw std::invalid_argument("config: expected [list] for '" + key + "'");
  std::vector<double> out;
  std::stringstream ss(body.substr(1, body.size() - 2));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(parse_number(tok, key));
  }
  return out;
}

std::string parse_string(const std::string& s, const std::string& key) {
  const std::string body = trim(s);
  if (body.size() >= 2 && body.front() == '"' && body.back() == '"')
    return body.substr(1, body.size() - 2);
  if (body.find(' ') != std::string::npos)
    throw std::invalid_argument("config: unquoted string with spaces for '" + key + "'");
  return body;
}

std::vector<int> to_int_list(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) out.push_back(static_cast<int>(std::llround(x)));
  return out;
}

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& raw_value) {
  rl::AgentConfig& a = cfg.agent_config;
  if (key == "agent") cfg.agent = parse_string(raw_value, key);
  else if (key == "env") cfg.env = parse_string(raw_value, key);
  else if (key == "out") cfg.out_dir = parse_string(raw_value, key);
  else if (key == "seeds") {
    cfg.seeds.clear();
    for (double s : parse_list(raw_value, key))
      cfg.seeds.push_back(static_cast<std::uint64_t>(std::llround(s)));
  } else if (key == "seed") {
    cfg.seeds = {static_cast<std::uint64_t>(std::llround(parse_number(raw_value, key)))};
  } else if (key == "hazards") cfg.hazards = parse_list(raw_value, key);
  else if (key == "force") cfg.force = parse_string(raw_value, key) == "true";
  else if (key == "resume") cfg.resume = parse_string(raw_value, key) == "true";
  else if (key == "steps" || key == "total_steps")
    a.total_steps = static_cast<long>(parse_number(raw_value, key));
  else if (key == "gamma") a.gamma = parse_number(raw_value, key);
  else if (key == "hidden") a.hidden = to_int_list(parse_list(raw_value, key));
  else if (key == "lr") a.lr = parse_number(raw_value, key);
  else if (key == "multiplier_lr") a.multiplier_lr = parse_number(raw_value, key);
  else if (key == "buffer_capacity") a.buffer_capacity = static_cast<long>(parse_number(raw_value, key));
  else if (key == "batch_size") a.batch_size = static_cast<int>(parse_number(raw_value, key));
  else if (key == "target_entropy") a.target_entropy = parse_number(raw_value, key);
  else if (key == "multiplier_interval") a.multiplier_interval = static_cast<int>(parse_number(raw_value, key));
  else if (key == "mc_samples") a.mc_samples = static_cast<int>(parse_number(raw_value, key));
  else if (key == "dual_steps") a.dual_steps = static_cast<int>(parse_number(raw_value, key));
  else if (key == "rho_max") a.rho_max = parse_number(raw_value, key);
  else if (key == "sigma") a.sigma = parse_number(raw_value, key);
  else if (key == "rho0") a.rho0 = parse_number(raw_value, key);
  else if (key == "tolerance_d") a.tolerance_d = parse_number(raw_value, key);
  else if (key == "tau") a.tau = parse_number(raw_value, key);
  else if (key == "grad_steps_per_env_step") a.grad_steps_per_env_step = static_cast<int>(parse_number(raw_value, key));
  else if (key == "warmup_steps") a.warmup_steps = static_cast<long>(parse_number(raw_value, key));
  else if (key == "eval_interval") a.eval_interval = static_cast<long>(parse_number(raw_value, key));
  else if (key == "eval_episodes") a.eval_episodes = static_cast<int>(parse_number(raw_value, key));
  else if (key == "sac_lag_lr") a.sac_lag_lr = parse_number(raw_value, key);
  else if (key == "alpha_init") a.alpha_init = parse_number(raw_value, key);
  else if (key == "multiplier_init") a.multiplier_init = parse_number(raw_value, key);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside quotes
    bool in_quote = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at " + path + ":" +
                                  std::to_string(lineno));
    apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: seed list is empty");
  if (out_dir.empty()) throw std::invalid_argument("config: no output directory");
  rl::agent_from_name(agent);               // throws on unknown agent
  env::make_environment(env, hazards);      // throws on unknown env
  agent_config.validate();
}

std::string ExperimentConfig::snapshot() const {
  const rl::AgentConfig& a = agent_config;
  std::ostringstream os;
  os.precision(17);
  os << "agent = \"" << agent << "\"\n";
  os << "env = \"" << env << "\"\n";
  os << "seeds = [";
  for (size_t i = 0; i < seeds.size(); ++i) os << (i ? ", " : "") << seeds[i];
  os << "]\n";
  os << "out = \"" << out_dir << "\"\n";
  if (!hazards.empty()) {
    os << "hazards = [";
    for (size_t i = 0; i < hazards.size(); ++i) os << (i ? ", " : "") << hazards[i];
    os << "]\n";
  }
  os << "steps = " << a.total_steps << "\n";
  os << "gamma = " << a.gamma << "\n";
  os << "hidden = [";
  for (size_t i = 0; i < a.hidden.size(); ++i) os << (i ? ", " : "") << a.hidden[i];
  os << "]\n";
  os << "lr = " << a.lr << "\n";
  os << "multiplier_lr = " << a.multiplier_lr << "\n";
  os << "buffer_capacity = " << a.buffer_capacity << "\n";
  os << "batch_size = " << a.batch_size << "\n";
  if (!std::isnan(a.target_entropy)) os << "target_entropy = " << a.target_entropy << "\n";
  os << "multiplier_interval = " << a.multiplier_interval << "\n";
  os << "mc_samples = " << a.mc_samples << "\n";
  os << "dual_steps = " << a.dual_steps << "\n";
  os << "rho_max = " << a.rho_max << "\n";
  os << "sigma = " << a.sigma << "\n";
  os << "rho0 = " << a.rho0 << "\n";
  os << "tolerance_d = " << a.tolerance_d << "\n";
  os << "tau = " << a.tau << "\n";
  os << "grad_steps_per_env_step = " << a.grad_steps_per_env_step << "\n";
  os << "warmup_steps = " << a.warmup_steps << "\n";
  os << "eval_interval = " << a.eval_interval << "\n";
  os << "eval_episodes = " << a.eval_episodes << "\n";
  os << "sac_lag_lr = " << a.sac_lag_lr << "\n";
  os << "alpha_init = " << a.alpha_init << "\n";
  os << "multiplier_init = " << a.multiplier_init << "\n";
  return os.str();
}

}  // namespace alam::harness
