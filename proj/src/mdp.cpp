#include "remer/mdp.hpp"

#include <cmath>
#include <numeric>

namespace remer {

TabularMdp TabularMdp::with_shape(int n_states, std::vector<int> n_actions, double gamma) {
  if (n_states <= 0 || static_cast<int>(n_actions.size()) != n_states)
    throw ShapeError("with_shape: n_actions size must equal n_states");
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = std::move(n_actions);
  m.sa_offset.assign(n_states + 1, 0);
  for (int s = 0; s < n_states; ++s) m.sa_offset[s + 1] = m.sa_offset[s] + m.n_actions[s];
  m.n_sa = m.sa_offset[n_states];
  m.transition.assign(static_cast<size_t>(m.n_sa) * n_states, 0.0);
  m.reward.assign(m.n_sa, 0.0);
  m.terminal.assign(n_states, 0);
  m.initial_dist.assign(n_states, 0.0);
  m.gamma = gamma;
  return m;
}

void TabularMdp::validate() {
  if (n_states <= 0) throw ShapeError("MDP has no states");
  if (static_cast<int>(n_actions.size()) != n_states ||
      static_cast<int>(terminal.size()) != n_states ||
      static_cast<int>(initial_dist.size()) != n_states)
    throw ShapeError("MDP per-state arrays are misshapen");
  if (sa_offset.size() != static_cast<size_t>(n_states) + 1 || sa_offset[n_states] != n_sa)
    throw ShapeError("MDP sa_offset is inconsistent");
  if (static_cast<int>(reward.size()) != n_sa ||
      transition.size() != static_cast<size_t>(n_sa) * n_states)
    throw ShapeError("MDP transition/reward tables are misshapen");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw UnsupportedMdpError("gamma must lie in (0, 1]");

  for (int s = 0; s < n_states; ++s) {
    if (n_actions[s] < 0) throw ShapeError("negative action count");
    if (terminal[s] && n_actions[s] != 0)
      throw ShapeError("terminal state " + std::to_string(s) + " has outgoing actions");
    if (!terminal[s] && n_actions[s] == 0)
      throw ShapeError("nonterminal state " + std::to_string(s) + " has no actions");
    if (terminal[s] && initial_dist[s] != 0.0)
      throw ShapeError("initial distribution puts mass on terminal state " + std::to_string(s));
  }

  double rho_sum = 0.0;
  for (double p : initial_dist) {
    if (!(p >= 0.0)) throw ShapeError("initial distribution has a negative entry");
    rho_sum += p;
  }
  if (std::abs(rho_sum - 1.0) > 1e-9)
    throw ShapeError("initial distribution sums to " + std::to_string(rho_sum));

  sa_state_.assign(n_sa, 0);
  sa_action_.assign(n_sa, 0);
  for (int s = 0; s < n_states; ++s)
    for (ActionId a = 0; a < n_actions[s]; ++a) {
      sa_state_[sa_offset[s] + a] = s;
      sa_action_[sa_offset[s] + a] = a;
    }

  outcome_offset_.assign(n_sa + 1, 0);
  outcome_pool_.clear();
  for (int sa = 0; sa < n_sa; ++sa) {
    double psum = 0.0;
    for (StateId next = 0; next < n_states; ++next) {
      const double p = transition[static_cast<size_t>(sa) * n_states + next];
      if (p < 0.0)
        throw ShapeError("negative transition probability at sa=" + std::to_string(sa));
      if (p > 0.0) outcome_pool_.push_back({next, p});
      psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-12)
      throw ShapeError("transition row at sa=" + std::to_string(sa) + " sums to " +
                       std::to_string(psum));
    if (!std::isfinite(reward[sa])) throw ShapeError("non-finite reward at sa=" + std::to_string(sa));
    outcome_offset_[sa + 1] = static_cast<int>(outcome_pool_.size());
  }

  if (gamma == 1.0 && !topological_order().has_value())
    throw UnsupportedMdpError("gamma = 1 requires an episodic (acyclic) MDP");
}

std::optional<std::vector<StateId>> TabularMdp::topological_order() const {
  // Kahn's algorithm over nonterminal states.
  std::vector<int> indeg(n_states, 0);
  std::vector<std::vector<StateId>> out(n_states);
  for (int sa = 0; sa < n_sa; ++sa) {
    const StateId s = sa_state_[sa];
    for (const Outcome& o : outcomes(sa)) {
      if (terminal[o.state] || o.state == s) {
        if (o.state == s && !terminal[o.state]) return std::nullopt;  // self-loop
        continue;
      }
      out[s].push_back(o.state);
      ++indeg[o.state];
    }
  }
  std::vector<StateId> order;
  order.reserve(n_states);
  std::vector<StateId> queue;
  for (StateId s = 0; s < n_states; ++s)
    if (!terminal[s] && indeg[s] == 0) queue.push_back(s);
  while (!queue.empty()) {
    const StateId s = queue.back();
    queue.pop_back();
    order.push_back(s);
    for (StateId t : out[s])
      if (--indeg[t] == 0) queue.push_back(t);
  }
  int nonterminal = 0;
  for (StateId s = 0; s < n_states; ++s) nonterminal += terminal[s] ? 0 : 1;
  if (static_cast<int>(order.size()) != nonterminal) return std::nullopt;
  return order;
}

}  // namespace remer
