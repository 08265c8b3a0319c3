#include "remer/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "remer/solve.hpp"

namespace remer {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_real(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a real number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError(line, "expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<uint64_t> parse_seed_spec(std::string_view spec) {
  const std::string s = trim(spec);
  if (s.empty()) throw ConfigError("empty seed spec");
  std::vector<uint64_t> seeds;
  const size_t dots = s.find("..");
  if (dots != std::string::npos) {
    const long long lo = parse_int(trim(s.substr(0, dots)), 0);
    const long long hi = parse_int(trim(s.substr(dots + 2)), 0);
    if (lo < 0 || hi < lo) throw ConfigError("bad seed range '" + s + "'");
    for (long long x = lo; x <= hi; ++x) seeds.push_back(static_cast<uint64_t>(x));
    return seeds;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    const long long x = parse_int(t, 0);
    if (x < 0) throw ConfigError("negative seed");
    seeds.push_back(static_cast<uint64_t>(x));
  }
  if (seeds.empty()) throw ConfigError("empty seed spec");
  return seeds;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  int line_no = 0;
  std::string line;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, "expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    if (key.empty() || val.empty()) throw ParseError(line_no, "empty key or value");

    if (key == "run.id") cfg.id = val;
    else if (key == "run.seeds") {
      try {
        cfg.seeds = parse_seed_spec(val);
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
    }
    else if (key == "run.metric_every") cfg.metric_every = parse_int(val, line_no);
    else if (key == "env.name") cfg.env_name = val;
    else if (key == "env.grid_path") cfg.grid_path = val;
    else if (key == "env.max_episode_steps") cfg.max_episode_steps = static_cast<int>(parse_int(val, line_no));
    else if (key == "env.reward_noise_sigma") cfg.reward_noise_sigma = parse_real(val, line_no);
    else if (key == "env.gamma") cfg.gamma_override = parse_real(val, line_no);
    else if (key == "learner.mode") cfg.mode = val;
    else if (key == "learner.lr") cfg.lr = parse_real(val, line_no);
    else if (key == "learner.vi_iterations") cfg.vi_iterations = static_cast<int>(parse_int(val, line_no));
    else if (key == "learner.steps") cfg.steps = parse_int(val, line_no);
    else if (key == "learner.batch_size") cfg.batch_size = static_cast<int>(parse_int(val, line_no));
    else if (key == "learner.target_sync") cfg.target_sync = static_cast<int>(parse_int(val, line_no));
    else if (key == "learner.eps_start") cfg.eps_start = parse_real(val, line_no);
    else if (key == "learner.eps_end") cfg.eps_end = parse_real(val, line_no);
    else if (key == "learner.eps_anneal_frac") cfg.eps_anneal_frac = parse_real(val, line_no);
    else if (key == "learner.buffer_capacity") cfg.buffer_capacity = static_cast<int>(parse_int(val, line_no));
    else if (key == "learner.update_mode") cfg.update_mode = val;
    else if (key == "learner.lr_delta") cfg.lr_delta = parse_real(val, line_no);
    else if (key == "strategy.kind") cfg.strategy_kind = val;
    else if (key == "strategy.per_exponent") cfg.per_exponent = parse_real(val, line_no);
    else if (key == "strategy.temperature") cfg.temperature = parse_real(val, line_no);
    else if (key == "strategy.ratio_source") cfg.ratio_source = val;
    else if (key == "strategy.drop_policy_term") cfg.drop_policy_term = parse_bool(val, line_no);
    else if (key == "tce.c") {
      if (val == "oracle") {
        cfg.tce_c_oracle = true;
      } else {
        cfg.tce_c_oracle = false;
        cfg.tce_c = parse_real(val, line_no);
      }
    }
    else if (key == "tce.gamma") cfg.tce_gamma = parse_real(val, line_no);
    else if (key == "tce.b1_start") cfg.tce_b1_start = parse_real(val, line_no);
    else if (key == "tce.b1_end") cfg.tce_b1_end = parse_real(val, line_no);
    else if (key == "tce.b2_start") cfg.tce_b2_start = parse_real(val, line_no);
    else if (key == "tce.b2_end") cfg.tce_b2_end = parse_real(val, line_no);
    else if (key == "tce.censored") {
      if (val == "observed") cfg.censored_observed = true;
      else if (val == "missing") cfg.censored_observed = false;
      else throw ParseError(line_no, "tce.censored must be observed or missing");
    }
    else if (key == "buffer.h_record_len") cfg.h_record_len = static_cast<int>(parse_int(val, line_no));
    else if (key == "buffer.fast_fraction") cfg.fast_fraction = parse_real(val, line_no);
    else if (key == "lfiw.lr") cfg.lfiw_lr = parse_real(val, line_no);
    else if (key == "lfiw.batch") cfg.lfiw_batch = static_cast<int>(parse_int(val, line_no));
    else if (key == "lfiw.every") cfg.lfiw_every = static_cast<int>(parse_int(val, line_no));
    else if (key == "occupancy.gamma_d") cfg.gamma_d = parse_real(val, line_no);
    else throw ParseError(line_no, "unknown key '" + key + "'");
  }
  cfg.check();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::check() const {
  if (!parse_strategy_kind(strategy_kind))
    throw ConfigError("unknown strategy '" + strategy_kind + "'; valid: " + strategy_names());
  if (!parse_ratio_source(ratio_source))
    throw ConfigError("unknown ratio source '" + ratio_source + "'; valid: auto, unit, exact, lfiw");
  if (mode != "vi" && mode != "q") throw ConfigError("learner.mode must be vi or q");
  if (update_mode != "weighted" && update_mode != "prioritized")
    throw ConfigError("learner.update_mode must be weighted or prioritized");
  if (env_name != "chain" && env_name != "four_rooms" && env_name != "maze" &&
      env_name != "grid_file")
    throw ConfigError("unknown env '" + env_name + "'; valid: chain, four_rooms, maze, grid_file");
  if (env_name == "grid_file" && grid_path.empty())
    throw ConfigError("env.grid_path is required for env.name = grid_file");
  if (seeds.empty()) throw ConfigError("run.seeds is empty");
  if (!(lr > 0.0 && lr <= 1.0)) throw ConfigError("learner.lr must lie in (0,1]");
  if (!(gamma_d > 0.0 && gamma_d < 1.0)) throw ConfigError("occupancy.gamma_d must lie in (0,1)");
  if (batch_size <= 0 || buffer_capacity < batch_size)
    throw ConfigError("learner.batch_size must be positive and fit the buffer");
  if (metric_every <= 0) throw ConfigError("run.metric_every must be positive");
}

std::string ExperimentConfig::echo() const {
  std::map<std::string, std::string> kv;
  kv["run.id"] = id;
  {
    std::string s;
    for (size_t i = 0; i < seeds.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(seeds[i]);
    }
    kv["run.seeds"] = s;
  }
  kv["run.metric_every"] = std::to_string(metric_every);
  kv["env.name"] = env_name;
  if (!grid_path.empty()) kv["env.grid_path"] = grid_path;
  kv["env.max_episode_steps"] = std::to_string(max_episode_steps);
  kv["env.reward_noise_sigma"] = fmt(reward_noise_sigma);
  if (gamma_override >= 0.0) kv["env.gamma"] = fmt(gamma_override);
  kv["learner.mode"] = mode;
  kv["learner.lr"] = fmt(lr);
  kv["learner.vi_iterations"] = std::to_string(vi_iterations);
  kv["learner.steps"] = std::to_string(steps);
  kv["learner.batch_size"] = std::to_string(batch_size);
  kv["learner.target_sync"] = std::to_string(target_sync);
  kv["learner.eps_start"] = fmt(eps_start);
  kv["learner.eps_end"] = fmt(eps_end);
  kv["learner.eps_anneal_frac"] = fmt(eps_anneal_frac);
  kv["learner.buffer_capacity"] = std::to_string(buffer_capacity);
  kv["learner.update_mode"] = update_mode;
  kv["learner.lr_delta"] = fmt(lr_delta);
  kv["strategy.kind"] = strategy_kind;
  kv["strategy.per_exponent"] = fmt(per_exponent);
  kv["strategy.temperature"] = fmt(temperature);
  kv["strategy.ratio_source"] = ratio_source;
  kv["strategy.drop_policy_term"] = drop_policy_term ? "true" : "false";
  kv["tce.c"] = tce_c_oracle ? "oracle" : fmt(tce_c);
  kv["tce.gamma"] = fmt(tce_gamma);
  kv["tce.b1_start"] = fmt(tce_b1_start);
  kv["tce.b1_end"] = fmt(tce_b1_end);
  kv["tce.b2_start"] = fmt(tce_b2_start);
  kv["tce.b2_end"] = fmt(tce_b2_end);
  kv["tce.censored"] = censored_observed ? "observed" : "missing";
  kv["buffer.h_record_len"] = std::to_string(h_record_len);
  kv["buffer.fast_fraction"] = fmt(fast_fraction);
  kv["lfiw.lr"] = fmt(lfiw_lr);
  kv["lfiw.batch"] = std::to_string(lfiw_batch);
  kv["lfiw.every"] = std::to_string(lfiw_every);
  kv["occupancy.gamma_d"] = fmt(gamma_d);

  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

BuiltEnv build_env(const ExperimentConfig& cfg) {
  BuiltEnv env;
  env.name = cfg.env_name;
  const double grid_gamma = cfg.gamma_override >= 0.0 ? cfg.gamma_override : 0.99;
  if (cfg.env_name == "chain") {
    env.mdp = build_chain_mdp();
    if (cfg.gamma_override >= 0.0) {
      env.mdp.gamma = cfg.gamma_override;
      env.mdp.validate();
    }
  } else if (cfg.env_name == "four_rooms") {
    env.grid = build_gridworld(four_rooms_layout(), grid_gamma);
    env.mdp = env.grid.mdp;
    env.is_grid = true;
  } else if (cfg.env_name == "maze") {
    env.grid = build_gridworld(maze_layout(), grid_gamma);
    env.mdp = env.grid.mdp;
    env.is_grid = true;
  } else if (cfg.env_name == "grid_file") {
    env.grid = build_gridworld(load_grid(cfg.grid_path), grid_gamma);
    env.mdp = env.grid.mdp;
    env.is_grid = true;
  } else {
    throw ConfigError("unknown env '" + cfg.env_name + "'");
  }
  return env;
}

WeightingStrategy build_strategy(const ExperimentConfig& cfg, const TabularMdp& mdp,
                                 const QTable* q_star) {
  WeightingStrategy st;
  st.kind = *parse_strategy_kind(cfg.strategy_kind);
  st.per_exponent = cfg.per_exponent;
  st.temperature = cfg.temperature;
  st.ratio_source = *parse_ratio_source(cfg.ratio_source);
  st.drop_policy_term = cfg.drop_policy_term;
  st.censored_h_observed = cfg.censored_observed;
  st.tce.b1_start = cfg.tce_b1_start;
  st.tce.b1_end = cfg.tce_b1_end;
  st.tce.b2_start = cfg.tce_b2_start;
  st.tce.b2_end = cfg.tce_b2_end;
  st.tce.gamma = cfg.tce_gamma > 0.0 ? cfg.tce_gamma : (mdp.gamma < 1.0 ? mdp.gamma : 0.99);
  if (cfg.tce_c_oracle) {
    if (!q_star) throw ConfigError("tce.c = oracle requires a solved Q*");
    double c = 0.0;
    for (StateId s = 0; s < mdp.n_states; ++s) {
      if (mdp.is_terminal(s)) continue;
      const auto row = q_star->row(s);
      double mx = row[0];
      for (double v : row) mx = std::max(mx, v);
      for (double v : row) c = std::max(c, mx - v);
    }
    st.tce.c = c;
  } else {
    st.tce.c = cfg.tce_c;
  }
  return st;
}

QLearnConfig build_learner(const ExperimentConfig& cfg, uint64_t seed) {
  QLearnConfig lc;
  lc.lr = cfg.lr;
  lc.steps = cfg.steps;
  lc.batch_size = cfg.batch_size;
  lc.target_sync = cfg.target_sync;
  lc.eps_start = cfg.eps_start;
  lc.eps_end = cfg.eps_end;
  lc.eps_anneal_frac = cfg.eps_anneal_frac;
  lc.buffer_capacity = cfg.buffer_capacity;
  lc.h_record_len = cfg.h_record_len;
  lc.fast_fraction = cfg.fast_fraction;
  lc.lr_delta = cfg.lr_delta;
  lc.lfiw_lr = cfg.lfiw_lr;
  lc.lfiw_batch = cfg.lfiw_batch;
  lc.lfiw_every = cfg.lfiw_every;
  lc.max_episode_steps = cfg.max_episode_steps;
  lc.reward_noise_sigma = cfg.reward_noise_sigma;
  lc.metric_every = cfg.metric_every;
  lc.seed = seed;
  lc.gamma_d = cfg.gamma_d;
  lc.update_mode = cfg.update_mode == "prioritized" ? QLearnConfig::UpdateMode::kPrioritized
                                                    : QLearnConfig::UpdateMode::kWeighted;
  return lc;
}

}  // namespace remer
