#include "remer/learner.hpp"

#include <algorithm>
#include <cmath>

#include "remer/estimators.hpp"
#include "remer/solve.hpp"

namespace remer {

namespace {

double mean_abs_residual(const QTable& q, const TabularMdp& mdp) {
  const QTable b = bellman_optimal_backup(q, mdp);
  double acc = 0.0;
  for (int sa = 0; sa < mdp.n_sa; ++sa) acc += std::abs(b.at_index(sa) - q.at_index(sa));
  return mdp.n_sa > 0 ? acc / mdp.n_sa : 0.0;
}

TracePoint make_trace_point(long long iteration, const QTable& q, const QTable& q_star,
                            const TabularMdp& mdp, double entropy) {
  TracePoint p;
  p.iteration = iteration;
  p.td_error_l1 = mean_abs_residual(q, mdp);
  double linf = 0.0, l1 = 0.0;
  for (int sa = 0; sa < mdp.n_sa; ++sa) {
    const double d = std::abs(q.at_index(sa) - q_star.at_index(sa));
    linf = std::max(linf, d);
    l1 += d;
  }
  p.q_gap_linf = linf;
  p.q_gap_l1 = mdp.n_sa > 0 ? l1 / mdp.n_sa : 0.0;
  p.greedy_return = expected_return(mdp, greedy_policy(q));
  p.regret = optimal_return(mdp, q_star) - p.greedy_return;
  p.weight_entropy = entropy;
  return p;
}

// E_tau[raw TCE] under pi, exactly: TCE(h) is affine in gamma^h, so the
// expectation needs only E[gamma^h] from the first-passage system.
std::vector<double> exact_expected_tce(const TabularMdp& mdp, const PolicyTable& pi,
                                       const TceConfig& cfg, double mean_td) {
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
    throw ContractViolation("TCE requires gamma in (0,1); configure tce.gamma");
  const std::vector<double> g_pow_h = expected_gamma_pow_h(mdp, pi, cfg.gamma);
  const double a = cfg.gamma * (mean_td + cfg.c) / (1.0 - cfg.gamma);
  const double b = a - cfg.gamma * cfg.c;
  std::vector<double> out(g_pow_h.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(a - g_pow_h[i] * b, cfg.lower(), cfg.upper());
  return out;
}

}  // namespace

ViResult weighted_value_iteration(const TabularMdp& mdp, const WeightingStrategy& strategy,
                                  double alpha, int iterations, const ViOptions& opts) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ContractViolation("alpha must lie in (0,1]");
  if (iterations < 0) throw ContractViolation("iterations must be >= 0");

  const QTable q_star = opts.q_star ? *opts.q_star : solve_q_star(mdp);
  const double eta_star = optimal_return(mdp, q_star);

  QTable q(mdp, 0.0);
  DeltaEstimator delta(mdp);
  EmaTracker mean_td_tracker(0.01);
  // Hindsight errors |Q_k - B*Q_{k-1}| of the previous iteration; the first
  // iteration falls back to the current residual.
  std::vector<double> hindsight_prev;

  ViResult result;
  result.trace.reserve(iterations / std::max(1, opts.metric_every) + 1);

  for (int k = 1; k <= iterations; ++k) {
    const QTable backup = bellman_optimal_backup(q, mdp);
    std::vector<double> residual(mdp.n_sa);
    for (int sa = 0; sa < mdp.n_sa; ++sa)
      residual[sa] = std::abs(backup.at_index(sa) - q.at_index(sa));

    const PolicyTable pi_prev = softmax_policy(q);

    WeightContext ctx;
    ctx.batch = mdp.n_sa;
    ctx.penalty_divisor = mean_td_tracker.value(1.0);
    if (strategy.kind == StrategyKind::kPer) {
      ctx.td_error_abs = residual;
    } else if (strategy.kind == StrategyKind::kFullTheorem) {
      ctx.td_error_abs = hindsight_prev.empty() ? residual : hindsight_prev;
    }
    if (strategy.needs_ratio() && strategy.ratio_source != RatioSource::kUnit) {
      const DistributionTable d = discounted_occupancy(mdp, pi_prev, opts.gamma_d);
      ctx.ratio.resize(mdp.n_sa);
      for (int sa = 0; sa < mdp.n_sa; ++sa)
        ctx.ratio[sa] = d.at_index(sa) * static_cast<double>(mdp.n_sa);
    }
    if (strategy.needs_delta()) ctx.discor_penalty = delta.exact_penalties(mdp, pi_prev);
    if (strategy.needs_tce()) {
      TceConfig tc = strategy.tce;
      tc.progress = iterations > 0 ? static_cast<double>(k) / iterations : 0.0;
      ctx.expected_tce = exact_expected_tce(mdp, pi_prev, tc, mean_td_tracker.value(0.0));
    }
    if (strategy.needs_q_star()) {
      ctx.q_gap.resize(mdp.n_sa);
      for (int sa = 0; sa < mdp.n_sa; ++sa)
        ctx.q_gap[sa] = std::abs(q.at_index(sa) - q_star.at_index(sa));
    }
    if (strategy.kind == StrategyKind::kFullTheorem && !strategy.drop_policy_term) {
      ctx.policy_prob.resize(mdp.n_sa);
      for (int sa = 0; sa < mdp.n_sa; ++sa) ctx.policy_prob[sa] = pi_prev.at_index(sa);
    }

    const std::vector<double> weights = compute_weights(strategy, ctx);

    QTable q_new = q;
    for (int sa = 0; sa < mdp.n_sa; ++sa) {
      const double step = std::min(alpha * weights[sa], 1.0);
      q_new.at_index(sa) += step * (backup.at_index(sa) - q.at_index(sa));
    }

    // Synchronous Delta recursion keyed to the same pi_{k-1}.
    if (strategy.needs_delta()) delta.exact_sweep(q_new, backup, pi_prev, mdp);

    std::vector<double> hindsight(mdp.n_sa);
    double hind_mean = 0.0;
    for (int sa = 0; sa < mdp.n_sa; ++sa) {
      hindsight[sa] = std::abs(q_new.at_index(sa) - backup.at_index(sa));
      hind_mean += hindsight[sa];
    }
    mean_td_tracker.observe(mdp.n_sa > 0 ? hind_mean / mdp.n_sa : 0.0);
    hindsight_prev = std::move(hindsight);
    q = std::move(q_new);

    const double greedy_eta = expected_return(mdp, greedy_policy(q));
    if (result.iterations_to_optimal < 0 && eta_star - greedy_eta <= 1e-9)
      result.iterations_to_optimal = k;

    if (k % std::max(1, opts.metric_every) == 0) {
      TracePoint p = make_trace_point(k, q, q_star, mdp, weight_entropy(weights));
      p.greedy_return = greedy_eta;
      p.regret = eta_star - greedy_eta;
      result.trace.push_back(p);
    }
  }
  result.q = std::move(q);
  return result;
}

QLearnResult weighted_q_learning(const TabularMdp& mdp, const WeightingStrategy& strategy,
                                 const QLearnConfig& cfg, const QLearnHooks& hooks) {
  if (!(cfg.lr > 0.0 && cfg.lr <= 1.0)) throw ContractViolation("lr must lie in (0,1]");
  if (cfg.batch_size <= 0 || cfg.batch_size > cfg.buffer_capacity)
    throw ContractViolation("batch size must be positive and fit the buffer");
  if (strategy.needs_tce() && !(strategy.tce.gamma > 0.0 && strategy.tce.gamma < 1.0))
    throw ContractViolation("TCE requires tce.gamma in (0,1)");

  const RatioSource ratio_source =
      strategy.ratio_source == RatioSource::kAuto ? RatioSource::kExact : strategy.ratio_source;

  const QTable q_star = solve_q_star(mdp);

  EpisodeDriver driver(mdp, cfg.seed, cfg.max_episode_steps, cfg.reward_noise_sigma);
  ReplayBuffer buffer(mdp, cfg.buffer_capacity, cfg.h_record_len);
  FastSlowView fast_slow(buffer, cfg.fast_fraction);
  DeltaEstimator delta(mdp, cfg.lr_delta);
  LfiwEstimator lfiw(mdp);
  EmaTracker mean_td_tracker(0.01);

  Rng action_rng(cfg.seed, 2);
  Rng sample_rng(cfg.seed, 3);
  Rng lfiw_rng(cfg.seed, 4);

  QTable q(mdp, 0.0);
  QTable target = q;

  std::vector<double> exact_ratio;
  const auto refresh_exact_ratio = [&] {
    if (!strategy.needs_ratio() || ratio_source != RatioSource::kExact) return;
    if (buffer.size() == 0) return;
    const DistributionTable d = discounted_occupancy(mdp, softmax_policy(q), cfg.gamma_d);
    const double mu_floor = 1.0 / (2.0 * buffer.size());
    exact_ratio.assign(mdp.n_sa, 1.0);
    for (int sa = 0; sa < mdp.n_sa; ++sa) {
      const double mu = std::max(
          static_cast<double>(buffer.visit_count(mdp.sa_state(sa), mdp.sa_action(sa))) /
              buffer.size(),
          mu_floor);
      exact_ratio[sa] = d.at_index(sa) / mu;
    }
  };

  QLearnResult result;
  result.trace.reserve(static_cast<size_t>(cfg.steps / std::max<long long>(1, cfg.metric_every)) + 1);

  std::vector<Transition> episode;
  episode.reserve(cfg.max_episode_steps);

  double entropy_acc = 0.0;
  long long entropy_batches = 0;

  std::vector<SampledTransition> batch;
  std::vector<double> ys, tds, delta_targets;

  for (long long step = 1; step <= cfg.steps; ++step) {
    if (!driver.episode_live()) {
      driver.reset();
      episode.clear();
    }
    const StateId s = driver.state();
    const double frac = static_cast<double>(step) / static_cast<double>(cfg.steps);
    const double eps =
        cfg.eps_start +
        (cfg.eps_end - cfg.eps_start) * std::min(1.0, frac / std::max(1e-12, cfg.eps_anneal_frac));
    ActionId a;
    if (action_rng.uniform01() < eps)
      a = action_rng.uniform_int(mdp.n_actions[s]);
    else
      a = greedy_action(q, s);

    const EpisodeDriver::StepResult res = driver.step(a);
    buffer.push(res.tr);
    episode.push_back(res.tr);
    if (res.episode_over) {
      const bool truncated = !res.tr.done;
      buffer.on_episode_end(res.tr.trajectory_id, truncated);
      backfill_distances(episode, truncated);
      fast_slow.refresh();
      ++result.episodes;
      if (hooks.on_episode_end) hooks.on_episode_end(step, episode);
    }

    if (buffer.size() < cfg.batch_size) {
      ++result.warmup_skips;
    } else {
      // Sample: iid uniform in weighted mode, proportional stratified draws in
      // prioritized mode.
      batch.clear();
      if (cfg.update_mode == QLearnConfig::UpdateMode::kWeighted) {
        for (int i = 0; i < cfg.batch_size; ++i) {
          const long long seq = buffer.first_seq() + sample_rng.uniform_index(buffer.size());
          const int slot = buffer.slot_of_seq(seq);
          batch.push_back({slot, buffer.priority(slot), buffer.at(slot)});
        }
      } else {
        batch = buffer.sample(cfg.batch_size, sample_rng);
      }

      const int n = cfg.batch_size;
      ys.assign(n, 0.0);
      tds.assign(n, 0.0);
      for (int i = 0; i < n; ++i) {
        const Transition& t = batch[i].tr;
        const double boot =
            t.done ? 0.0 : *std::max_element(target.row(t.next_state).begin(),
                                             target.row(t.next_state).end());
        ys[i] = t.reward + mdp.gamma * boot;
        tds[i] = std::abs(q(t.state, t.action) - ys[i]);
      }

      WeightContext ctx;
      ctx.batch = n;
      ctx.penalty_divisor = mean_td_tracker.value(1.0);
      TceConfig tc = strategy.tce;
      tc.progress = frac;

      if (strategy.kind == StrategyKind::kPer || strategy.kind == StrategyKind::kFullTheorem)
        ctx.td_error_abs = tds;
      if (strategy.needs_delta()) {
        ctx.discor_penalty.resize(n);
        for (int i = 0; i < n; ++i) {
          const Transition& t = batch[i].tr;
          const ActionId a_hat = t.done ? 0 : greedy_action(target, t.next_state);
          ctx.discor_penalty[i] =
              delta.sample_penalty(t.next_state, a_hat, mdp.gamma, t.done);
        }
      }
      if (strategy.needs_tce()) {
        ctx.expected_tce.resize(n);
        const double mean_td = mean_td_tracker.value(0.0);
        for (int i = 0; i < n; ++i)
          ctx.expected_tce[i] =
              expected_tce(buffer, batch[i].tr.state, batch[i].tr.action, tc, mean_td,
                           strategy.censored_h_observed);
      }
      if (strategy.needs_q_star()) {
        ctx.q_gap.resize(n);
        for (int i = 0; i < n; ++i) {
          const Transition& t = batch[i].tr;
          const double gap = std::abs(ys[i] - q_star(t.state, t.action));
          // The Oracle arm shares TCE's stabilization pipeline; the raw
          // theorem term is kept for FullTheorem.
          ctx.q_gap[i] = strategy.kind == StrategyKind::kOracle
                             ? std::clamp(gap, tc.lower(), tc.upper())
                             : gap;
        }
      }
      if (strategy.kind == StrategyKind::kFullTheorem && !strategy.drop_policy_term) {
        ctx.policy_prob.resize(n);
        for (int i = 0; i < n; ++i) {
          const Transition& t = batch[i].tr;
          const auto row = q.row(t.state);
          double mx = row[0];
          for (double v : row) mx = std::max(mx, v);
          double sum = 0.0;
          for (double v : row) sum += std::exp(v - mx);
          ctx.policy_prob[i] = std::exp(row[t.action] - mx) / sum;
        }
      }
      if (strategy.needs_ratio() && ratio_source != RatioSource::kUnit) {
        ctx.ratio.resize(n);
        if (ratio_source == RatioSource::kExact) {
          if (exact_ratio.empty()) refresh_exact_ratio();
          for (int i = 0; i < n; ++i)
            ctx.ratio[i] = exact_ratio[mdp.sa_index(batch[i].tr.state, batch[i].tr.action)];
        } else {
          for (int i = 0; i < n; ++i)
            ctx.ratio[i] = lfiw.kappa(batch[i].tr.state, batch[i].tr.action);
          normalize_ratios(ctx.ratio, strategy.temperature);
        }
      }

      std::vector<double> weights;
      if (cfg.update_mode == QLearnConfig::UpdateMode::kWeighted) {
        weights = compute_weights(strategy, ctx);
      } else {
        weights.assign(n, 1.0);  // prioritized sampling replaces the weighting
      }

      if (strategy.needs_delta()) {
        delta_targets.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
          const Transition& t = batch[i].tr;
          const ActionId a_hat = t.done ? 0 : greedy_action(target, t.next_state);
          delta_targets[i] = DeltaEstimator::bootstrap_target(
              q(t.state, t.action), ys[i], delta.table(), t.next_state, a_hat, mdp.gamma, t.done);
        }
      }

      for (int i = 0; i < n; ++i) {
        const Transition& t = batch[i].tr;
        const double step_size = std::min(cfg.lr * weights[i], 1.0);
        q(t.state, t.action) += step_size * (ys[i] - q(t.state, t.action));
      }
      if (strategy.needs_delta())
        for (int i = 0; i < n; ++i)
          delta.update(batch[i].tr.state, batch[i].tr.action, delta_targets[i]);

      if (strategy.needs_lfiw() && step % std::max(1, cfg.lfiw_every) == 0 &&
          fast_slow.fast_size() > 0) {
        const auto fast = fast_slow.sample_fast(cfg.lfiw_batch, lfiw_rng);
        const auto slow = fast_slow.sample_slow(cfg.lfiw_batch, lfiw_rng);
        std::vector<int> fast_sa(fast.size()), slow_sa(slow.size());
        for (size_t i = 0; i < fast.size(); ++i)
          fast_sa[i] = mdp.sa_index(fast[i].tr.state, fast[i].tr.action);
        for (size_t i = 0; i < slow.size(); ++i)
          slow_sa[i] = mdp.sa_index(slow[i].tr.state, slow[i].tr.action);
        lfiw.update(fast_sa, slow_sa, cfg.lfiw_lr);
      }

      if (cfg.update_mode == QLearnConfig::UpdateMode::kPrioritized) {
        // Refresh the used samples' priorities with the strategy's raw scores,
        // reconstructed from the post-update TD error for PER and the
        // unnormalized context terms otherwise.
        for (int i = 0; i < n; ++i) {
          const Transition& t = batch[i].tr;
          double raw = 1.0;
          switch (strategy.kind) {
            case StrategyKind::kUniform:
              raw = 1.0;
              break;
            case StrategyKind::kPer:
              raw = std::pow(std::abs(q(t.state, t.action) - ys[i]), strategy.per_exponent);
              break;
            case StrategyKind::kDisCor:
              raw = std::exp(-ctx.discor_penalty[i] / std::max(ctx.penalty_divisor, 1e-12));
              break;
            case StrategyKind::kReMern:
              raw = (ctx.ratio.empty() ? 1.0 : ctx.ratio[i]) *
                    std::exp(-ctx.discor_penalty[i] / std::max(ctx.penalty_divisor, 1e-12));
              break;
            case StrategyKind::kReMert:
              raw = (ctx.ratio.empty() ? 1.0 : ctx.ratio[i]) * std::exp(-ctx.expected_tce[i]);
              break;
            case StrategyKind::kOracle:
              raw = (ctx.ratio.empty() ? 1.0 : ctx.ratio[i]) * std::exp(-ctx.q_gap[i]);
              break;
            case StrategyKind::kFullTheorem:
              raw = (ctx.ratio.empty() ? 1.0 : ctx.ratio[i]) *
                    (strategy.drop_policy_term ? 2.0 : 2.0 - ctx.policy_prob[i]) *
                    std::exp(-ctx.q_gap[i]) * ctx.td_error_abs[i];
              break;
          }
          buffer.set_priority(batch[i].slot, raw);
        }
      }

      double mean_td = 0.0;
      for (double v : tds) mean_td += v;
      mean_td_tracker.observe(mean_td / n);

      entropy_acc += weight_entropy(weights);
      ++entropy_batches;

      if (hooks.on_batch) hooks.on_batch(step, batch, weights, ctx);
    }

    if (step % cfg.target_sync == 0) {
      target = q;
      refresh_exact_ratio();
    }

    if (cfg.metric_every > 0 && step % cfg.metric_every == 0) {
      const double entropy = entropy_batches > 0 ? entropy_acc / entropy_batches : 0.0;
      TracePoint p = make_trace_point(step, q, q_star, mdp, entropy);
      result.trace.push_back(p);
      entropy_acc = 0.0;
      entropy_batches = 0;
      if (hooks.on_checkpoint) hooks.on_checkpoint(step, q, buffer);
    }
  }

  result.q = std::move(q);
  return result;
}

}  // namespace remer
