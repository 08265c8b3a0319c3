#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "remer/errors.hpp"

namespace remer {

using StateId = int;
using ActionId = int;

/**
 * Finite MDP with per-state legal action counts, dense transition rows and a
 * sparse outcome cache for sampling and backups. Terminal states carry zero
 * actions; backups bootstrap 0 through them.
 *
 * Construction is two-phase: with_shape() allocates zeroed tables, the caller
 * fills transition/reward/terminal/initial_dist, then validate() checks the
 * invariants and builds the caches. validate() must be re-run after any edit.
 */
struct TabularMdp {
  int n_states = 0;
  std::vector<int> n_actions;        // per state, 0 for terminal states
  std::vector<int> sa_offset;        // n_states + 1 prefix sums
  int n_sa = 0;
  std::vector<double> transition;    // [n_sa][n_states], row-major
  std::vector<double> reward;        // [n_sa]
  std::vector<char> terminal;        // [n_states]
  double gamma = 0.99;
  std::vector<double> initial_dist;  // [n_states]

  struct Outcome {
    StateId state;
    double prob;
  };

  static TabularMdp with_shape(int n_states, std::vector<int> n_actions, double gamma);

  int sa_index(StateId s, ActionId a) const {
    if (s < 0 || s >= n_states || a < 0 || a >= n_actions[s])
      throw ShapeError("illegal state-action (" + std::to_string(s) + "," + std::to_string(a) + ")");
    return sa_offset[s] + a;
  }
  StateId sa_state(int sa) const { return sa_state_[sa]; }
  ActionId sa_action(int sa) const { return sa_action_[sa]; }
  bool is_terminal(StateId s) const { return terminal[s] != 0; }

  double& p(StateId s, ActionId a, StateId next) { return transition[static_cast<size_t>(sa_index(s, a)) * n_states + next]; }
  double& r(StateId s, ActionId a) { return reward[sa_index(s, a)]; }

  std::span<const double> row(int sa) const {
    return {transition.data() + static_cast<size_t>(sa) * n_states, static_cast<size_t>(n_states)};
  }
  std::span<const Outcome> outcomes(int sa) const {
    return {outcome_pool_.data() + outcome_offset_[sa],
            static_cast<size_t>(outcome_offset_[sa + 1] - outcome_offset_[sa])};
  }

  void validate();

  // Topological order of nonterminal states along positive-probability edges;
  // nullopt when the reachability graph has a cycle. gamma = 1 is supported
  // only when this order exists.
  std::optional<std::vector<StateId>> topological_order() const;

  bool episodic() const { return topological_order().has_value(); }

 private:
  std::vector<StateId> sa_state_;
  std::vector<ActionId> sa_action_;
  std::vector<Outcome> outcome_pool_;
  std::vector<int> outcome_offset_;
};

/**
 * Flat real-valued table over the legal (s,a) pairs of one MDP shape. The tag
 * keeps Q tables, policies, distributions and estimator tables distinct types.
 */
template <typename Tag>
class SaArray {
 public:
  SaArray() = default;
  SaArray(const TabularMdp& mdp, double init)
      : offsets_(mdp.sa_offset), v_(static_cast<size_t>(mdp.n_sa), init) {}
  SaArray(std::vector<int> offsets, double init)
      : offsets_(std::move(offsets)),
        v_(offsets_.empty() ? 0 : static_cast<size_t>(offsets_.back()), init) {}

  double operator()(StateId s, ActionId a) const { return v_[index(s, a)]; }
  double& operator()(StateId s, ActionId a) { return v_[index(s, a)]; }
  double at_index(int sa) const { return v_[sa]; }
  double& at_index(int sa) { return v_[sa]; }

  std::span<const double> values() const { return v_; }
  std::span<double> values() { return v_; }
  std::span<const double> row(StateId s) const {
    return {v_.data() + offsets_[s], static_cast<size_t>(offsets_[s + 1] - offsets_[s])};
  }
  std::span<double> row(StateId s) {
    return {v_.data() + offsets_[s], static_cast<size_t>(offsets_[s + 1] - offsets_[s])};
  }

  int size() const { return static_cast<int>(v_.size()); }
  int n_states() const { return offsets_.empty() ? 0 : static_cast<int>(offsets_.size()) - 1; }
  int n_actions(StateId s) const { return offsets_[s + 1] - offsets_[s]; }
  bool empty() const { return v_.empty(); }

  bool same_shape(const TabularMdp& mdp) const { return offsets_ == mdp.sa_offset; }
  template <typename OtherTag>
  bool same_shape(const SaArray<OtherTag>& o) const { return offsets_ == o.offsets(); }
  const std::vector<int>& offsets() const { return offsets_; }

 private:
  int index(StateId s, ActionId a) const {
    if (s < 0 || s + 1 >= static_cast<int>(offsets_.size()) || a < 0 ||
        offsets_[s] + a >= offsets_[s + 1])
      throw ShapeError("table index out of shape (" + std::to_string(s) + "," + std::to_string(a) + ")");
    return offsets_[s] + a;
  }

  std::vector<int> offsets_;
  std::vector<double> v_;
};

struct QTag {};
struct PolicyTag {};
struct DistTag {};
struct DeltaTag {};
struct RatioTag {};
struct GapTag {};

using QTable = SaArray<QTag>;
using PolicyTable = SaArray<PolicyTag>;
using DistributionTable = SaArray<DistTag>;
using DeltaTable = SaArray<DeltaTag>;
using RatioTable = SaArray<RatioTag>;
using GapTable = SaArray<GapTag>;

template <typename Tag>
void check_shape(const SaArray<Tag>& t, const TabularMdp& mdp, const char* what) {
  if (!t.same_shape(mdp)) throw ShapeError(std::string(what) + ": table shape does not match MDP");
}

/// Table of a chosen tag with the same shape as `src`, filled with `init`.
template <typename Tag, typename SrcTag>
SaArray<Tag> make_like(const SaArray<SrcTag>& src, double init = 0.0) {
  return SaArray<Tag>(src.offsets(), init);
}

}  // namespace remer
