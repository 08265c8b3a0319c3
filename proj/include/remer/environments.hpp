#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "remer/mdp.hpp"
#include "remer/rng.hpp"

namespace remer {

/// One replay record. distance_to_end stays -1 until the episode finishes.
struct Transition {
  StateId state = -1;
  ActionId action = -1;
  double reward = 0.0;
  StateId next_state = -1;
  bool done = false;      // reached a terminal state
  bool censored = false;  // episode cut by the step limit; distance measured to the cut
  long long trajectory_id = -1;
  int step_index = -1;
  int distance_to_end = -1;
};

/**
 * The 5-state chain. Action 0 (left) jumps to the terminal state for +2,
 * action 1 (right) advances one state for +1; the last nonterminal state has
 * a single +2 action into the terminal state. gamma = 1, start at state 0.
 * Optimal return: three rights plus the forced exit, 5 in total.
 */
TabularMdp build_chain_mdp();

/// Character grid: '#' wall, '.' floor, 'S' start, 'G' goal. Rectangular,
/// exactly one S and one G.
struct GridSpec {
  int rows = 0;
  int cols = 0;
  std::string cells;  // rows * cols
  int start_r = -1, start_c = -1;
  int goal_r = -1, goal_c = -1;

  char at(int r, int c) const { return cells[static_cast<size_t>(r) * cols + c]; }
  bool passable(int r, int c) const {
    return r >= 0 && r < rows && c >= 0 && c < cols && at(r, c) != '#';
  }
  static GridSpec parse(std::string_view text);
};

GridSpec four_rooms_layout();
GridSpec maze_layout();
GridSpec load_grid(const std::filesystem::path& path);

/// Gridworld MDP plus the cell/state mapping the MDP itself forgets.
struct Gridworld {
  TabularMdp mdp;
  GridSpec spec;
  std::vector<StateId> cell_state;  // rows*cols, -1 on walls
  StateId start = -1;
  StateId goal = -1;

  StateId state_at(int r, int c) const { return cell_state[static_cast<size_t>(r) * spec.cols + c]; }
};

// Actions: 0 up, 1 right, 2 down, 3 left. Moves into walls or off the grid
// leave the state unchanged. Step reward 0, entering the goal pays +1 and
// terminates.
Gridworld build_gridworld(const GridSpec& spec, double gamma = 0.99);

/**
 * Episodic interaction driver. Keeps two independent RNG streams so reward
 * noise never perturbs the trajectory: the same seed produces the same
 * state-action sequence for every noise level.
 */
class EpisodeDriver {
 public:
  EpisodeDriver(const TabularMdp& mdp, uint64_t seed, int max_episode_steps,
                double reward_noise_sigma = 0.0);

  /// Starts a new trajectory and returns its initial state.
  StateId reset();

  struct StepResult {
    Transition tr;
    bool episode_over = false;
  };

  /// Advances one step; requires a live episode (reset() after episode_over).
  StepResult step(ActionId a);

  /// Runs one full episode under pi, with distances backfilled.
  std::vector<Transition> run_episode(const PolicyTable& pi);

  StateId state() const { return state_; }
  long long trajectory_id() const { return trajectory_; }
  int episode_steps() const { return steps_; }
  bool episode_live() const { return !need_reset_; }
  double reward_noise_sigma() const { return sigma_; }
  const TabularMdp& mdp() const { return *mdp_; }

 private:
  const TabularMdp* mdp_;
  Rng env_rng_;    // initial states, transitions, policy draws in run_episode
  Rng noise_rng_;  // reward noise only
  double sigma_;
  int max_steps_;
  StateId state_ = -1;
  long long trajectory_ = -1;
  int steps_ = 0;
  bool need_reset_ = true;
};

/// Backfills distance_to_end (and the censored flag) over one finished episode.
void backfill_distances(std::vector<Transition>& episode, bool truncated);

}  // namespace remer
