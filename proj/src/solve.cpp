#include "remer/solve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace remer {

namespace {

double row_max(const QTable& q, StateId s) {
  const auto row = q.row(s);
  double best = row[0];
  for (double v : row) best = std::max(best, v);
  return best;
}

// Solves A x = b by partial-pivot LU; reports a condition estimate on failure.
Eigen::VectorXd solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14) || !std::isfinite(rcond))
    throw NumericError(std::string(what) + ": singular linear system, rcond = " +
                       std::to_string(rcond));
  return lu.solve(b);
}

}  // namespace

double bellman_backup_entry(const QTable& q, const TabularMdp& mdp, int sa) {
  double acc = 0.0;
  for (const TabularMdp::Outcome& o : mdp.outcomes(sa))
    if (!mdp.is_terminal(o.state)) acc += o.prob * row_max(q, o.state);
  return mdp.reward[sa] + mdp.gamma * acc;
}

QTable bellman_optimal_backup(const QTable& q, const TabularMdp& mdp) {
  check_shape(q, mdp, "bellman_optimal_backup");
  QTable out(mdp, 0.0);
  for (int sa = 0; sa < mdp.n_sa; ++sa) out.at_index(sa) = bellman_backup_entry(q, mdp, sa);
  return out;
}

QTable solve_q_star(const TabularMdp& mdp, double tol) {
  if (mdp.gamma == 1.0) {
    const auto order = mdp.topological_order();
    if (!order) throw UnsupportedMdpError("solve_q_star: gamma = 1 on a cyclic MDP");
    QTable q(mdp, 0.0);
    // Downstream states first.
    for (auto it = order->rbegin(); it != order->rend(); ++it) {
      const StateId s = *it;
      for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
        const int sa = mdp.sa_index(s, a);
        q.at_index(sa) = bellman_backup_entry(q, mdp, sa);
      }
    }
    return q;
  }
  QTable q(mdp, 0.0);
  // The residual contracts by gamma per sweep; after assigning q = B*q the
  // residual of the stored table is bounded by gamma * r, so stop there.
  long long budget = -1;
  for (long long k = 0;; ++k) {
    QTable next = bellman_optimal_backup(q, mdp);
    double resid = 0.0;
    for (int sa = 0; sa < mdp.n_sa; ++sa)
      resid = std::max(resid, std::abs(next.at_index(sa) - q.at_index(sa)));
    q = std::move(next);
    if (mdp.gamma * resid <= tol) return q;
    if (budget < 0)
      budget = 64 + static_cast<long long>(
          std::ceil(std::log(tol / (mdp.gamma * resid)) / std::log(mdp.gamma)));
    if (k > budget) throw NumericError("solve_q_star: value iteration did not reach tolerance");
  }
}

ActionId greedy_action(const QTable& q, StateId s) {
  const auto row = q.row(s);
  ActionId best = 0;
  for (ActionId a = 1; a < static_cast<ActionId>(row.size()); ++a)
    if (row[a] > row[best]) best = a;
  return best;
}

PolicyTable greedy_policy(const QTable& q) {
  PolicyTable pi = make_like<PolicyTag>(q);
  for (StateId s = 0; s < q.n_states(); ++s) {
    if (q.n_actions(s) == 0) continue;
    pi.row(s)[greedy_action(q, s)] = 1.0;
  }
  return pi;
}

PolicyTable softmax_policy(const QTable& q) {
  PolicyTable pi = make_like<PolicyTag>(q);
  for (StateId s = 0; s < q.n_states(); ++s) {
    const auto src = q.row(s);
    if (src.empty()) continue;
    double mx = src[0];
    for (double v : src) mx = std::max(mx, v);
    auto dst = pi.row(s);
    double sum = 0.0;
    for (size_t a = 0; a < src.size(); ++a) {
      dst[a] = std::exp(src[a] - mx);
      sum += dst[a];
    }
    for (size_t a = 0; a < src.size(); ++a) dst[a] /= sum;
  }
  return pi;
}

PolicyTable uniform_policy(const TabularMdp& mdp) {
  PolicyTable pi(mdp, 0.0);
  for (StateId s = 0; s < mdp.n_states; ++s) {
    auto row = pi.row(s);
    for (auto& v : row) v = 1.0 / static_cast<double>(row.size());
  }
  return pi;
}

void validate_policy(const PolicyTable& pi, const TabularMdp& mdp) {
  check_shape(pi, mdp, "policy");
  for (StateId s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    double sum = 0.0;
    for (double p : pi.row(s)) {
      if (p < 0.0) throw ContractViolation("policy has a negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ContractViolation("policy row " + std::to_string(s) + " sums to " + std::to_string(sum));
  }
}

std::vector<double> policy_state_values(const TabularMdp& mdp, const PolicyTable& pi) {
  validate_policy(pi, mdp);
  std::vector<double> v(mdp.n_states, 0.0);
  // Expected one-step reward per state under pi.
  std::vector<double> r_pi(mdp.n_states, 0.0);
  for (int sa = 0; sa < mdp.n_sa; ++sa)
    r_pi[mdp.sa_state(sa)] += pi.at_index(sa) * mdp.reward[sa];

  if (mdp.gamma == 1.0) {
    const auto order = mdp.topological_order();
    if (!order) throw UnsupportedMdpError("policy evaluation: gamma = 1 on a cyclic MDP");
    for (auto it = order->rbegin(); it != order->rend(); ++it) {
      const StateId s = *it;
      double acc = r_pi[s];
      for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
        const int sa = mdp.sa_index(s, a);
        for (const auto& o : mdp.outcomes(sa))
          if (!mdp.is_terminal(o.state)) acc += pi.at_index(sa) * o.prob * v[o.state];
      }
      v[s] = acc;
    }
    return v;
  }

  // (I - gamma M_pi) V = r_pi over nonterminal states.
  std::vector<int> dense_id(mdp.n_states, -1);
  std::vector<StateId> states;
  for (StateId s = 0; s < mdp.n_states; ++s)
    if (!mdp.is_terminal(s)) {
      dense_id[s] = static_cast<int>(states.size());
      states.push_back(s);
    }
  const int n = static_cast<int>(states.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const StateId s = states[i];
    b(i) = r_pi[s];
    for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
      const int sa = mdp.sa_index(s, a);
      for (const auto& o : mdp.outcomes(sa))
        if (!mdp.is_terminal(o.state))
          A(i, dense_id[o.state]) -= mdp.gamma * pi.at_index(sa) * o.prob;
    }
  }
  const Eigen::VectorXd x = solve_dense(A, b, "policy evaluation");
  for (int i = 0; i < n; ++i) v[states[i]] = x(i);
  return v;
}

double expected_return(const TabularMdp& mdp, const PolicyTable& pi) {
  const auto v = policy_state_values(mdp, pi);
  double eta = 0.0;
  for (StateId s = 0; s < mdp.n_states; ++s) eta += mdp.initial_dist[s] * v[s];
  return eta;
}

double optimal_return(const TabularMdp& mdp, const QTable& q_star) {
  check_shape(q_star, mdp, "optimal_return");
  double eta = 0.0;
  for (StateId s = 0; s < mdp.n_states; ++s)
    if (mdp.initial_dist[s] > 0.0) eta += mdp.initial_dist[s] * row_max(q_star, s);
  return eta;
}

double regret(const TabularMdp& mdp, const PolicyTable& pi, const QTable& q_star) {
  return optimal_return(mdp, q_star) - expected_return(mdp, pi);
}

double regret(const TabularMdp& mdp, const PolicyTable& pi) {
  return regret(mdp, pi, solve_q_star(mdp));
}

DistributionTable discounted_occupancy(const TabularMdp& mdp, const PolicyTable& pi,
                                       double gamma_d) {
  validate_policy(pi, mdp);
  if (!(gamma_d > 0.0 && gamma_d < 1.0))
    throw ContractViolation("discounted_occupancy: gamma_d must lie in (0,1)");

  std::vector<int> dense_id(mdp.n_states, -1);
  std::vector<StateId> states;
  for (StateId s = 0; s < mdp.n_states; ++s)
    if (!mdp.is_terminal(s)) {
      dense_id[s] = static_cast<int>(states.size());
      states.push_back(s);
    }
  const int n = static_cast<int>(states.size());

  // nu = (1-gamma_d) rho0 + gamma_d Mt' nu, where Mt redirects terminal mass
  // back through rho0.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int j = 0; j < n; ++j) b(j) = (1.0 - gamma_d) * mdp.initial_dist[states[j]];
  for (int i = 0; i < n; ++i) {
    const StateId s = states[i];
    for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
      const int sa = mdp.sa_index(s, a);
      const double w = pi.at_index(sa);
      if (w == 0.0) continue;
      for (const auto& o : mdp.outcomes(sa)) {
        if (mdp.is_terminal(o.state)) {
          for (int j = 0; j < n; ++j)
            A(j, i) -= gamma_d * w * o.prob * mdp.initial_dist[states[j]];
        } else {
          A(dense_id[o.state], i) -= gamma_d * w * o.prob;
        }
      }
    }
  }
  const Eigen::VectorXd nu = solve_dense(A, b, "discounted_occupancy");

  DistributionTable d(mdp, 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const StateId s = states[i];
    for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
      const int sa = mdp.sa_index(s, a);
      d.at_index(sa) = nu(i) * pi.at_index(sa);
      total += d.at_index(sa);
    }
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw NumericError("discounted_occupancy: mass sums to " + std::to_string(total));
  return d;
}

double recurring_probability(const TabularMdp& mdp, const PolicyTable& pi, int horizon) {
  validate_policy(pi, mdp);
  if (horizon < 1) throw ContractViolation("recurring_probability: horizon must be positive");
  if (mdp.gamma < 1.0 && std::pow(mdp.gamma, horizon) >= 1e-12 && !mdp.episodic())
    throw ContractViolation("recurring_probability: horizon too short for this gamma");
  if (mdp.topological_order().has_value()) return 0.0;  // no state can recur

  // State transition kernel under pi (nonterminal rows only).
  const int ns = mdp.n_states;
  std::vector<std::vector<TabularMdp::Outcome>> kernel(ns);
  for (StateId s = 0; s < ns; ++s) {
    if (mdp.is_terminal(s)) continue;
    std::vector<double> row(ns, 0.0);
    for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
      const int sa = mdp.sa_index(s, a);
      const double w = pi.at_index(sa);
      if (w == 0.0) continue;
      for (const auto& o : mdp.outcomes(sa)) row[o.state] += w * o.prob;
    }
    for (StateId t = 0; t < ns; ++t)
      if (row[t] > 0.0) kernel[s].push_back({t, row[t]});
  }

  const double g = mdp.gamma;
  double best = 0.0;
  std::vector<double> w(ns), w_next(ns);
  for (StateId anchor = 0; anchor < ns; ++anchor) {
    if (mdp.is_terminal(anchor) || mdp.n_actions[anchor] == 0) continue;
    // w[x] accumulates E[gamma^(first hit time of anchor) | start x] while
    // avoiding anchor in between; terminal states never return.
    std::fill(w.begin(), w.end(), 0.0);
    for (int it = 0; it < horizon; ++it) {
      double delta = 0.0;
      for (StateId x = 0; x < ns; ++x) {
        if (mdp.is_terminal(x) || x == anchor) {
          w_next[x] = 0.0;
          continue;
        }
        double acc = 0.0;
        for (const auto& o : kernel[x])
          acc += o.prob * (o.state == anchor ? 1.0 : (mdp.is_terminal(o.state) ? 0.0 : w[o.state]));
        w_next[x] = g * acc;
        delta = std::max(delta, std::abs(w_next[x] - w[x]));
      }
      w.swap(w_next);
      if (delta < 1e-16) break;
    }
    for (ActionId a = 0; a < mdp.n_actions[anchor]; ++a) {
      const int sa = mdp.sa_index(anchor, a);
      double acc = 0.0;
      for (const auto& o : mdp.outcomes(sa))
        acc += o.prob * (o.state == anchor ? 1.0 : (mdp.is_terminal(o.state) ? 0.0 : w[o.state]));
      best = std::max(best, g * acc);
    }
  }
  return best;
}

std::vector<double> apply_transition_policy(const TabularMdp& mdp, const PolicyTable& pi,
                                            std::span<const double> f) {
  if (static_cast<int>(f.size()) != mdp.n_sa)
    throw ShapeError("apply_transition_policy: value vector shape mismatch");
  std::vector<double> fs(mdp.n_states, 0.0);  // E_{a~pi} f at each state
  for (int sa = 0; sa < mdp.n_sa; ++sa) fs[mdp.sa_state(sa)] += pi.at_index(sa) * f[sa];
  std::vector<double> out(mdp.n_sa, 0.0);
  for (int sa = 0; sa < mdp.n_sa; ++sa) {
    double acc = 0.0;
    for (const auto& o : mdp.outcomes(sa))
      if (!mdp.is_terminal(o.state)) acc += o.prob * fs[o.state];
    out[sa] = acc;
  }
  return out;
}

std::vector<double> expected_gamma_pow_h(const TabularMdp& mdp, const PolicyTable& pi,
                                         double gamma) {
  validate_policy(pi, mdp);
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw ContractViolation("expected_gamma_pow_h: gamma must lie in (0,1]");

  // u(s) = E_{a~pi}[G(s,a)], G(s,a) = sum_s' P(s'|s,a) (terminal ? 1 : gamma u(s')).
  std::vector<int> dense_id(mdp.n_states, -1);
  std::vector<StateId> states;
  for (StateId s = 0; s < mdp.n_states; ++s)
    if (!mdp.is_terminal(s)) {
      dense_id[s] = static_cast<int>(states.size());
      states.push_back(s);
    }
  const int n = static_cast<int>(states.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const StateId s = states[i];
    for (ActionId a = 0; a < mdp.n_actions[s]; ++a) {
      const int sa = mdp.sa_index(s, a);
      const double w = pi.at_index(sa);
      if (w == 0.0) continue;
      for (const auto& o : mdp.outcomes(sa)) {
        if (mdp.is_terminal(o.state))
          b(i) += w * o.prob;
        else
          A(i, dense_id[o.state]) -= gamma * w * o.prob;
      }
    }
  }
  Eigen::VectorXd u;
  if (n > 0) {
    // When no terminal state is reachable the system is still nonsingular for
    // gamma < 1; for gamma = 1 the MDP must be episodic (validated upstream).
    u = solve_dense(A, b, "expected_gamma_pow_h");
  }
  std::vector<double> out(mdp.n_sa, 0.0);
  for (int sa = 0; sa < mdp.n_sa; ++sa) {
    double acc = 0.0;
    for (const auto& o : mdp.outcomes(sa))
      acc += o.prob * (mdp.is_terminal(o.state) ? 1.0 : gamma * u(dense_id[o.state]));
    out[sa] = acc;
  }
  return out;
}

}  // namespace remer
