#pragma once

#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "remer/environments.hpp"
#include "remer/mdp.hpp"
#include "remer/rng.hpp"
#include "remer/sum_tree.hpp"

namespace remer {

struct SampledTransition {
  int slot = -1;
  double priority = 0.0;
  Transition tr;
};

/**
 * Episodic FIFO replay buffer with sum-tree priorities, per-(s,a) visit
 * counts (the empirical buffer distribution mu) and a bounded ring of the
 * most recent distance-to-end observations per (s,a).
 *
 * Single writer; transitions of an open trajectory are tracked until
 * on_episode_end() backfills their distances and feeds the h-records.
 */
class ReplayBuffer {
 public:
  static constexpr double kPriorityFloor = 1e-6;

  ReplayBuffer(const TabularMdp& mdp, int capacity, int h_record_len = 16);

  /// Stores a transition (FIFO eviction at capacity) and returns its slot.
  int push(const Transition& tr);

  /// Backfills distances for the trajectory's stored transitions and appends
  /// its distance-to-end observations to the per-(s,a) records.
  void on_episode_end(long long trajectory_id, bool truncated);

  /// Stratified proportional sampling: total priority mass is split into
  /// `batch` equal segments with one uniform draw each.
  std::vector<SampledTransition> sample(int batch, Rng& rng) const;

  void set_priority(int slot, double raw);  // stores raw + kPriorityFloor
  double priority(int slot) const;

  int size() const { return size_; }
  int capacity() const { return capacity_; }
  long long pushed() const { return pushed_; }
  const Transition& at(int slot) const;

  /// Oldest live sequence number; slot(seq) = seq % capacity.
  long long first_seq() const { return pushed_ - size_; }
  int slot_of_seq(long long seq) const { return static_cast<int>(seq % capacity_); }

  int visit_count(StateId s, ActionId a) const;
  /// Empirical mu(s,a) = visits / stored size (0 on an empty buffer).
  double mu(StateId s, ActionId a) const;
  DistributionTable empirical_mu() const;

  struct HEntry {
    int h = 0;
    bool censored = false;
  };
  int h_count(StateId s, ActionId a) const;
  /// Chronological copies of the record (oldest first).
  std::vector<HEntry> h_record(StateId s, ActionId a) const;
  template <typename F>
  void for_each_h(StateId s, ActionId a, F&& fn) const {
    const int sa = sa_index(s, a);
    const int len = hrec_len_[sa];
    for (int i = 0; i < len; ++i)
      fn(hrec_[static_cast<size_t>(sa) * h_cap_ + (hrec_head_[sa] + i) % h_cap_]);
  }

  /// One transition per row; documented in the README.
  void dump_csv(std::ostream& os) const;

 private:
  int sa_index(StateId s, ActionId a) const;
  void evict(int slot);
  void record_h(StateId s, ActionId a, int h, bool censored);

  std::vector<int> offsets_;
  int n_states_ = 0;
  int capacity_ = 0;
  int h_cap_ = 0;

  std::vector<Transition> slots_;
  std::vector<char> occupied_;
  int size_ = 0;
  long long pushed_ = 0;
  SumTree tree_;
  std::vector<int> counts_;

  std::vector<HEntry> hrec_;
  std::vector<int> hrec_len_;
  std::vector<int> hrec_head_;

  struct PendingStep {
    long long seq;
    StateId s;
    ActionId a;
    int step_index;
  };
  std::unordered_map<long long, std::vector<PendingStep>> open_;
};

/**
 * Chronological fast/slow windows over one buffer: the fast window covers the
 * newest fast_fraction of capacity, the slow window everything stored.
 * refresh() snapshots the bounds (typically once per episode); the two
 * sampling calls take independent RNG streams.
 */
class FastSlowView {
 public:
  FastSlowView(const ReplayBuffer& buffer, double fast_fraction);

  void refresh();
  std::vector<SampledTransition> sample_fast(int batch, Rng& rng) const;
  std::vector<SampledTransition> sample_slow(int batch, Rng& rng) const;
  long long fast_size() const { return hi_ - fast_lo_; }
  long long slow_size() const { return hi_ - slow_lo_; }

 private:
  std::vector<SampledTransition> sample_range(long long lo, long long hi, int batch,
                                              Rng& rng) const;
  const ReplayBuffer* buf_;
  double frac_;
  long long fast_lo_ = 0, slow_lo_ = 0, hi_ = 0;
};

/// Per-sample weighted squared errors w_i * e_i^2; negative weights are a
/// contract violation.
std::vector<double> weighted_squared_errors(std::span<const double> errors,
                                            std::span<const double> weights);

}  // namespace remer
