#include "remer/environments.hpp"

#include <fstream>
#include <sstream>

namespace remer {

TabularMdp build_chain_mdp() {
  // States 0..3 plus terminal state 4.
  TabularMdp m = TabularMdp::with_shape(5, {2, 2, 2, 1, 0}, 1.0);
  m.terminal[4] = 1;
  m.initial_dist[0] = 1.0;
  for (StateId s = 0; s <= 2; ++s) {
    m.p(s, 0, 4) = 1.0;      // left: exit
    m.r(s, 0) = 2.0;
    m.p(s, 1, s + 1) = 1.0;  // right: advance
    m.r(s, 1) = 1.0;
  }
  m.p(3, 0, 4) = 1.0;
  m.r(3, 0) = 2.0;
  m.validate();
  return m;
}

GridSpec GridSpec::parse(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  lines.erase(lines.begin(), lines.begin() + first);
  if (lines.empty()) throw ParseError(1, "empty grid");

  GridSpec g;
  g.rows = static_cast<int>(lines.size());
  g.cols = static_cast<int>(lines[0].size());
  g.cells.reserve(static_cast<size_t>(g.rows) * g.cols);
  for (int r = 0; r < g.rows; ++r) {
    if (static_cast<int>(lines[r].size()) != g.cols)
      throw ParseError(r + 1, "ragged grid: row has " + std::to_string(lines[r].size()) +
                                  " columns, expected " + std::to_string(g.cols));
    for (int c = 0; c < g.cols; ++c) {
      const char ch = lines[r][c];
      switch (ch) {
        case '#':
        case '.':
          break;
        case 'S':
          if (g.start_r >= 0) throw ParseError(r + 1, "second start at column " + std::to_string(c + 1));
          g.start_r = r;
          g.start_c = c;
          break;
        case 'G':
          if (g.goal_r >= 0) throw ParseError(r + 1, "second goal at column " + std::to_string(c + 1));
          g.goal_r = r;
          g.goal_c = c;
          break;
        default:
          throw ParseError(r + 1, std::string("unexpected character '") + ch + "' at column " +
                                      std::to_string(c + 1));
      }
      g.cells.push_back(ch);
    }
  }
  if (g.start_r < 0) throw ParseError(g.rows, "grid has no start cell 'S'");
  if (g.goal_r < 0) throw ParseError(g.rows, "grid has no goal cell 'G'");
  return g;
}

namespace {

constexpr const char* kFourRooms = R"(#############
#S....#....G#
#.....#.....#
#...........#
#.....#.....#
#.....#.....#
###.#####.###
#.....#.....#
#.....#.....#
#...........#
#.....#.....#
#.....#.....#
#############)";

constexpr const char* kMaze = R"(#############
#S..#.......#
#.#.#.#####.#
#.#.#.#...#.#
#.#.#.#.#.#.#
#.#...#.#.#.#
#.#####.#.#.#
#.#.....#.#.#
#.#.#####.#.#
#...#...#.#.#
#.###.#.#.#.#
#.....#...#G#
#############)";

}  // namespace

GridSpec four_rooms_layout() { return GridSpec::parse(kFourRooms); }
GridSpec maze_layout() { return GridSpec::parse(kMaze); }

GridSpec load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return GridSpec::parse(ss.str());
}

Gridworld build_gridworld(const GridSpec& spec, double gamma) {
  Gridworld gw;
  gw.spec = spec;
  gw.cell_state.assign(static_cast<size_t>(spec.rows) * spec.cols, -1);

  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < spec.rows; ++r)
    for (int c = 0; c < spec.cols; ++c)
      if (spec.at(r, c) != '#') {
        gw.cell_state[static_cast<size_t>(r) * spec.cols + c] = static_cast<StateId>(cells.size());
        cells.emplace_back(r, c);
      }

  const int n = static_cast<int>(cells.size());
  gw.start = gw.state_at(spec.start_r, spec.start_c);
  gw.goal = gw.state_at(spec.goal_r, spec.goal_c);

  std::vector<int> n_actions(n, 4);
  n_actions[gw.goal] = 0;
  TabularMdp m = TabularMdp::with_shape(n, std::move(n_actions), gamma);
  m.terminal[gw.goal] = 1;
  m.initial_dist[gw.start] = 1.0;

  static constexpr int kDr[4] = {-1, 0, 1, 0};  // up, right, down, left
  static constexpr int kDc[4] = {0, 1, 0, -1};
  for (StateId s = 0; s < n; ++s) {
    if (s == gw.goal) continue;
    const auto [r, c] = cells[s];
    for (ActionId a = 0; a < 4; ++a) {
      const int nr = r + kDr[a], nc = c + kDc[a];
      const StateId next = spec.passable(nr, nc) ? gw.state_at(nr, nc) : s;
      m.p(s, a, next) = 1.0;
      if (next == gw.goal) m.r(s, a) = 1.0;
    }
  }
  m.validate();
  gw.mdp = std::move(m);
  return gw;
}

EpisodeDriver::EpisodeDriver(const TabularMdp& mdp, uint64_t seed, int max_episode_steps,
                             double reward_noise_sigma)
    : mdp_(&mdp),
      env_rng_(seed, 0),
      noise_rng_(seed, 1),
      sigma_(reward_noise_sigma),
      max_steps_(max_episode_steps) {
  if (max_episode_steps <= 0) throw ContractViolation("max_episode_steps must be positive");
  if (reward_noise_sigma < 0.0) throw ContractViolation("reward_noise_sigma must be >= 0");
}

StateId EpisodeDriver::reset() {
  state_ = env_rng_.categorical(mdp_->initial_dist);
  ++trajectory_;
  steps_ = 0;
  need_reset_ = false;
  return state_;
}

EpisodeDriver::StepResult EpisodeDriver::step(ActionId a) {
  if (need_reset_) throw ContractViolation("step() without a live episode; call reset()");
  const int sa = mdp_->sa_index(state_, a);

  const auto outs = mdp_->outcomes(sa);
  StateId next = outs.back().state;
  if (outs.size() > 1) {
    const double u = env_rng_.uniform01();
    double acc = 0.0;
    for (const auto& o : outs) {
      acc += o.prob;
      if (u < acc) {
        next = o.state;
        break;
      }
    }
  }

  double r = mdp_->reward[sa];
  if (sigma_ > 0.0) r += noise_rng_.normal(0.0, sigma_);

  StepResult res;
  res.tr.state = state_;
  res.tr.action = a;
  res.tr.reward = r;
  res.tr.next_state = next;
  res.tr.done = mdp_->is_terminal(next);
  res.tr.trajectory_id = trajectory_;
  res.tr.step_index = steps_;

  ++steps_;
  state_ = next;
  res.episode_over = res.tr.done || steps_ >= max_steps_;
  if (res.episode_over) need_reset_ = true;
  return res;
}

std::vector<Transition> EpisodeDriver::run_episode(const PolicyTable& pi) {
  std::vector<Transition> episode;
  StateId s = reset();
  while (true) {
    const ActionId a = env_rng_.categorical(pi.row(s));
    StepResult r = step(a);
    episode.push_back(r.tr);
    if (r.episode_over) {
      backfill_distances(episode, !r.tr.done);
      return episode;
    }
    s = r.tr.next_state;
  }
}

void backfill_distances(std::vector<Transition>& episode, bool truncated) {
  const int last = static_cast<int>(episode.size()) - 1;
  for (int i = 0; i <= last; ++i) {
    episode[i].distance_to_end = episode[last].step_index - episode[i].step_index;
    episode[i].censored = truncated;
  }
}

}  // namespace remer
