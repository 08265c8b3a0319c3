#include "remer/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace remer {

double raw_tce(int h, double gamma, double c, double mean_td_error) {
  if (h < 0) throw ContractViolation("raw_tce: h must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ContractViolation("raw_tce: gamma must lie in (0,1)");
  if (c < 0.0) throw ContractViolation("raw_tce: c must be >= 0");
  const double gh1 = std::pow(gamma, h + 1);
  const double f = (gamma - gh1) / (1.0 - gamma);
  return f * (mean_td_error + c) + gh1 * c;
}

double tce(int h, const TceConfig& cfg, double mean_td_error) {
  return std::clamp(raw_tce(h, cfg.gamma, cfg.c, mean_td_error), cfg.lower(), cfg.upper());
}

double expected_tce(std::span<const ReplayBuffer::HEntry> record, const TceConfig& cfg,
                    double mean_td_error, bool include_censored) {
  double sum = 0.0;
  int n = 0;
  for (const auto& e : record) {
    if (e.censored && !include_censored) continue;
    sum += raw_tce(e.h, cfg.gamma, cfg.c, mean_td_error);
    ++n;
  }
  if (n == 0) return cfg.midpoint();
  return std::clamp(sum / n, cfg.lower(), cfg.upper());
}

double expected_tce(const ReplayBuffer& buffer, StateId s, ActionId a, const TceConfig& cfg,
                    double mean_td_error, bool include_censored) {
  double sum = 0.0;
  int n = 0;
  buffer.for_each_h(s, a, [&](const ReplayBuffer::HEntry& e) {
    if (e.censored && !include_censored) return;
    sum += raw_tce(e.h, cfg.gamma, cfg.c, mean_td_error);
    ++n;
  });
  if (n == 0) return cfg.midpoint();
  return std::clamp(sum / n, cfg.lower(), cfg.upper());
}

GapTable oracle_q_gap(const QTable& q, const QTable& q_star) {
  if (!q.same_shape(q_star)) throw ShapeError("oracle_q_gap: shape mismatch");
  GapTable g = make_like<GapTag>(q);
  for (int i = 0; i < q.size(); ++i)
    g.at_index(i) = std::abs(q.at_index(i) - q_star.at_index(i));
  return g;
}

double DeltaEstimator::bootstrap_target(double q_value, double y, const DeltaTable& delta,
                                        StateId s_next, ActionId a_hat, double gamma,
                                        bool next_terminal) {
  const double boot = next_terminal ? 0.0 : delta(s_next, a_hat);
  return std::abs(q_value - y) + gamma * boot;
}

void DeltaEstimator::update(StateId s, ActionId a, double target) {
  if (target < 0.0) throw ContractViolation("Delta target must be nonnegative");
  double& v = table_(s, a);
  v += lr_ * (target - v);
  v = std::max(v, 0.0);
}

void DeltaEstimator::exact_sweep(const QTable& q_new, const QTable& bstar_prev,
                                 const PolicyTable& pi_prev, const TabularMdp& mdp) {
  check_shape(q_new, mdp, "exact_sweep");
  check_shape(bstar_prev, mdp, "exact_sweep");
  const std::vector<double> propagated =
      apply_transition_policy(mdp, pi_prev, table_.values());
  DeltaTable next(mdp, 0.0);
  for (int sa = 0; sa < mdp.n_sa; ++sa)
    next.at_index(sa) =
        std::abs(q_new.at_index(sa) - bstar_prev.at_index(sa)) + mdp.gamma * propagated[sa];
  table_ = std::move(next);
}

double DeltaEstimator::sample_penalty(StateId s_next, ActionId a_hat, double gamma,
                                      bool next_terminal) const {
  return next_terminal ? 0.0 : gamma * table_(s_next, a_hat);
}

double DeltaEstimator::exact_penalty(const TabularMdp& mdp, const PolicyTable& pi, StateId s,
                                     ActionId a) const {
  const int sa = mdp.sa_index(s, a);
  double acc = 0.0;
  for (const auto& o : mdp.outcomes(sa)) {
    if (mdp.is_terminal(o.state)) continue;
    double ev = 0.0;
    for (ActionId ap = 0; ap < mdp.n_actions[o.state]; ++ap)
      ev += pi(o.state, ap) * table_(o.state, ap);
    acc += o.prob * ev;
  }
  return mdp.gamma * acc;
}

std::vector<double> DeltaEstimator::exact_penalties(const TabularMdp& mdp,
                                                    const PolicyTable& pi) const {
  std::vector<double> out = apply_transition_policy(mdp, pi, table_.values());
  for (double& v : out) v *= mdp.gamma;
  return out;
}

void LfiwEstimator::update(std::span<const int> fast_sa, std::span<const int> slow_sa,
                           double lr) {
  if (fast_sa.empty() || slow_sa.empty())
    throw ContractViolation("lfiw update needs nonempty fast and slow batches");
  // d/dtheta E_slow[e^theta] = e^theta on slow samples;
  // d/dtheta E_fast[theta + 1] = 1 on fast samples.
  const double ws = lr / static_cast<double>(slow_sa.size());
  const double wf = lr / static_cast<double>(fast_sa.size());
  for (int sa : slow_sa) theta_.at_index(sa) -= ws * std::exp(theta_.at_index(sa));
  for (int sa : fast_sa) theta_.at_index(sa) += wf;
}

RatioTable LfiwEstimator::ratios() const {
  RatioTable out = theta_;
  for (int i = 0; i < out.size(); ++i) out.at_index(i) = std::exp(out.at_index(i));
  return out;
}

void normalize_ratios(std::span<double> ratios, double temperature) {
  if (ratios.empty()) return;
  if (!(temperature > 0.0)) throw ContractViolation("ratio temperature must be positive");
  double sum = 0.0;
  for (double& v : ratios) {
    if (v < 0.0) throw ContractViolation("ratios must be nonnegative");
    v = std::pow(v, 1.0 / temperature);
    sum += v;
  }
  const double mean = sum / static_cast<double>(ratios.size());
  if (mean <= 0.0) {
    for (double& v : ratios) v = 1.0;
    return;
  }
  for (double& v : ratios) v /= mean;
}

}  // namespace remer
