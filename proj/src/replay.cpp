#include "remer/replay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace remer {

ReplayBuffer::ReplayBuffer(const TabularMdp& mdp, int capacity, int h_record_len)
    : offsets_(mdp.sa_offset),
      n_states_(mdp.n_states),
      capacity_(capacity),
      h_cap_(h_record_len),
      slots_(capacity > 0 ? capacity : 0),
      occupied_(capacity > 0 ? capacity : 0, 0),
      tree_(capacity),
      counts_(mdp.n_sa, 0),
      hrec_(static_cast<size_t>(mdp.n_sa) * std::max(h_record_len, 1)),
      hrec_len_(mdp.n_sa, 0),
      hrec_head_(mdp.n_sa, 0) {
  if (capacity <= 0) throw ContractViolation("replay capacity must be positive");
  if (h_record_len <= 0) throw ContractViolation("h_record_len must be positive");
}

int ReplayBuffer::sa_index(StateId s, ActionId a) const {
  if (s < 0 || s >= n_states_ || a < 0 || offsets_[s] + a >= offsets_[s + 1])
    throw ShapeError("replay: transition carries an illegal state-action pair");
  return offsets_[s] + a;
}

void ReplayBuffer::evict(int slot) {
  const Transition& old = slots_[slot];
  --counts_[sa_index(old.state, old.action)];
  occupied_[slot] = 0;
  --size_;
}

int ReplayBuffer::push(const Transition& tr) {
  const int sa = sa_index(tr.state, tr.action);
  const int slot = static_cast<int>(pushed_ % capacity_);
  if (occupied_[slot]) evict(slot);
  slots_[slot] = tr;
  occupied_[slot] = 1;
  ++counts_[sa];
  ++size_;
  tree_.set(slot, 1.0 + kPriorityFloor);
  open_[tr.trajectory_id].push_back({pushed_, tr.state, tr.action, tr.step_index});
  ++pushed_;
  return slot;
}

void ReplayBuffer::on_episode_end(long long trajectory_id, bool truncated) {
  const auto it = open_.find(trajectory_id);
  if (it == open_.end()) return;
  const auto& steps = it->second;
  const int last_step = steps.back().step_index;
  for (const PendingStep& ps : steps) {
    const int h = last_step - ps.step_index;
    record_h(ps.s, ps.a, h, truncated);
    if (ps.seq >= first_seq()) {
      Transition& tr = slots_[slot_of_seq(ps.seq)];
      // The slot may have been reused by a later trajectory after eviction.
      if (tr.trajectory_id == trajectory_id && tr.step_index == ps.step_index) {
        tr.distance_to_end = h;
        tr.censored = truncated;
      }
    }
  }
  open_.erase(it);
}

void ReplayBuffer::record_h(StateId s, ActionId a, int h, bool censored) {
  const int sa = sa_index(s, a);
  const size_t base = static_cast<size_t>(sa) * h_cap_;
  if (hrec_len_[sa] < h_cap_) {
    hrec_[base + (hrec_head_[sa] + hrec_len_[sa]) % h_cap_] = {h, censored};
    ++hrec_len_[sa];
  } else {
    hrec_[base + hrec_head_[sa]] = {h, censored};
    hrec_head_[sa] = (hrec_head_[sa] + 1) % h_cap_;
  }
}

std::vector<SampledTransition> ReplayBuffer::sample(int batch, Rng& rng) const {
  if (size_ == 0) throw EmptyBufferError("sample() on an empty replay buffer");
  if (batch <= 0) throw ContractViolation("sample batch must be positive");
  const double total = tree_.total();
  if (!(total > 0.0)) throw EmptyBufferError("sample() with zero total priority");

  std::vector<SampledTransition> out;
  out.reserve(batch);
  const double seg = total / batch;
  for (int i = 0; i < batch; ++i) {
    const double mass = seg * (i + rng.uniform01());
    const int slot = tree_.find_prefix(mass);
    out.push_back({slot, tree_.get(slot), slots_[slot]});
  }
  return out;
}

void ReplayBuffer::set_priority(int slot, double raw) {
  if (slot < 0 || slot >= capacity_ || !occupied_[slot])
    throw ContractViolation("set_priority on an empty slot");
  if (!(raw >= 0.0)) throw ContractViolation("priorities must be nonnegative");
  tree_.set(slot, raw + kPriorityFloor);
}

double ReplayBuffer::priority(int slot) const { return tree_.get(slot); }

const Transition& ReplayBuffer::at(int slot) const {
  if (slot < 0 || slot >= capacity_ || !occupied_[slot])
    throw ContractViolation("at() on an empty slot");
  return slots_[slot];
}

int ReplayBuffer::visit_count(StateId s, ActionId a) const { return counts_[sa_index(s, a)]; }

double ReplayBuffer::mu(StateId s, ActionId a) const {
  return size_ == 0 ? 0.0 : static_cast<double>(visit_count(s, a)) / size_;
}

DistributionTable ReplayBuffer::empirical_mu() const {
  DistributionTable d(offsets_, 0.0);
  if (size_ == 0) return d;
  for (size_t sa = 0; sa < counts_.size(); ++sa)
    d.at_index(static_cast<int>(sa)) = static_cast<double>(counts_[sa]) / size_;
  return d;
}

int ReplayBuffer::h_count(StateId s, ActionId a) const { return hrec_len_[sa_index(s, a)]; }

std::vector<ReplayBuffer::HEntry> ReplayBuffer::h_record(StateId s, ActionId a) const {
  std::vector<HEntry> out;
  out.reserve(h_count(s, a));
  for_each_h(s, a, [&](const HEntry& e) { out.push_back(e); });
  return out;
}

void ReplayBuffer::dump_csv(std::ostream& os) const {
  os << "seq,state,action,reward,next_state,done,censored,trajectory_id,step_index,"
        "distance_to_end,priority\n";
  for (long long seq = first_seq(); seq < pushed_; ++seq) {
    const int slot = slot_of_seq(seq);
    const Transition& t = slots_[slot];
    os << seq << ',' << t.state << ',' << t.action << ',' << t.reward << ',' << t.next_state
       << ',' << (t.done ? 1 : 0) << ',' << (t.censored ? 1 : 0) << ',' << t.trajectory_id << ','
       << t.step_index << ',' << t.distance_to_end << ',' << tree_.get(slot) << '\n';
  }
}

FastSlowView::FastSlowView(const ReplayBuffer& buffer, double fast_fraction)
    : buf_(&buffer), frac_(fast_fraction) {
  if (!(fast_fraction > 0.0 && fast_fraction <= 1.0))
    throw ContractViolation("fast_fraction must lie in (0,1]");
  refresh();
}

void FastSlowView::refresh() {
  hi_ = buf_->pushed();
  slow_lo_ = buf_->first_seq();
  const long long fast_cap =
      std::max<long long>(1, static_cast<long long>(frac_ * buf_->capacity()));
  fast_lo_ = std::max(slow_lo_, hi_ - fast_cap);
}

std::vector<SampledTransition> FastSlowView::sample_range(long long lo, long long hi, int batch,
                                                          Rng& rng) const {
  if (hi <= lo) throw EmptyBufferError("fast/slow window is empty");
  // The window can only have shrunk from below since refresh().
  lo = std::max(lo, buf_->first_seq());
  std::vector<SampledTransition> out;
  out.reserve(batch);
  for (int i = 0; i < batch; ++i) {
    const long long seq = lo + rng.uniform_index(hi - lo);
    const int slot = buf_->slot_of_seq(seq);
    out.push_back({slot, buf_->priority(slot), buf_->at(slot)});
  }
  return out;
}

std::vector<SampledTransition> FastSlowView::sample_fast(int batch, Rng& rng) const {
  return sample_range(fast_lo_, hi_, batch, rng);
}

std::vector<SampledTransition> FastSlowView::sample_slow(int batch, Rng& rng) const {
  return sample_range(slow_lo_, hi_, batch, rng);
}

std::vector<double> weighted_squared_errors(std::span<const double> errors,
                                            std::span<const double> weights) {
  if (errors.size() != weights.size())
    throw ShapeError("weighted_squared_errors: size mismatch");
  std::vector<double> out(errors.size());
  for (size_t i = 0; i < errors.size(); ++i) {
    if (weights[i] < 0.0) throw ContractViolation("negative loss weight");
    out[i] = weights[i] * errors[i] * errors[i];
  }
  return out;
}

}  // namespace remer
