#pragma once

#include <span>
#include <vector>

#include "remer/mdp.hpp"

namespace remer {

/// One entry of the Bellman optimal operator: r(s,a) + gamma * E_s'[max_a' q].
double bellman_backup_entry(const QTable& q, const TabularMdp& mdp, int sa);

/// Full Bellman optimal backup B*q. Terminal next-states bootstrap 0.
QTable bellman_optimal_backup(const QTable& q, const TabularMdp& mdp);

/**
 * Fixed point of B*: value iteration for gamma < 1, backward induction over
 * the topological order for gamma = 1 (episodic MDPs only). The returned
 * table satisfies ||Q - B*Q||_inf <= tol.
 */
QTable solve_q_star(const TabularMdp& mdp, double tol = 1e-10);

/// Deterministic greedy policy; argmax ties break to the lowest action index.
PolicyTable greedy_policy(const QTable& q);

/// Row-wise softmax of q with max-subtraction.
PolicyTable softmax_policy(const QTable& q);

PolicyTable uniform_policy(const TabularMdp& mdp);

ActionId greedy_action(const QTable& q, StateId s);

void validate_policy(const PolicyTable& pi, const TabularMdp& mdp);

/// V^pi per state (0 at terminal states). gamma = 1 requires an episodic MDP.
std::vector<double> policy_state_values(const TabularMdp& mdp, const PolicyTable& pi);

/// eta(pi) = E_{rho0}[V^pi].
double expected_return(const TabularMdp& mdp, const PolicyTable& pi);

double optimal_return(const TabularMdp& mdp, const QTable& q_star);

double regret(const TabularMdp& mdp, const PolicyTable& pi, const QTable& q_star);
double regret(const TabularMdp& mdp, const PolicyTable& pi);

/**
 * Discounted state-action occupancy d(s,a) = (1-gamma_d) sum_t gamma_d^t
 * Pr(s_t = s) pi(a|s), solved from the linear flow system. Probability mass
 * entering a terminal state restarts from the initial distribution, so the
 * result is a proper distribution over nonterminal (s,a).
 */
DistributionTable discounted_occupancy(const TabularMdp& mdp, const PolicyTable& pi,
                                       double gamma_d);

/**
 * Recurring probability eps_pi = sup_{s,a} sum_{t>=1} gamma^t rho(s,a,t),
 * where rho is the first-return probability to s at time t starting from
 * (s,a). Computed by dynamic programming on the "not yet returned" chain,
 * iterated at most `horizon` times; the caller asserts gamma^horizon < 1e-12
 * or an episodic MDP. Exactly 0 on acyclic MDPs.
 */
double recurring_probability(const TabularMdp& mdp, const PolicyTable& pi, int horizon);

/// (P^pi f)(s,a) = E_{s'}[ E_{a'~pi} f(s',a') ]; terminal s' contributes 0.
std::vector<double> apply_transition_policy(const TabularMdp& mdp, const PolicyTable& pi,
                                            std::span<const double> f);

/**
 * E[gamma^h] per (s,a), where h is the number of steps remaining until
 * termination after taking (s,a) and then following pi. Entries whose
 * continuation never terminates get 0 (h = infinity).
 */
std::vector<double> expected_gamma_pow_h(const TabularMdp& mdp, const PolicyTable& pi,
                                         double gamma);

}  // namespace remer
