#pragma once

#include <vector>

#include "remer/errors.hpp"

namespace remer {

/**
 * Complete binary tree over `capacity` leaves; internal nodes hold partial
 * sums, so proportional prefix lookup is O(log n). Priorities must be
 * nonnegative.
 */
class SumTree {
 public:
  explicit SumTree(int capacity);

  void set(int leaf, double priority);
  double get(int leaf) const { return node_[base_ + leaf]; }
  double total() const { return node_[1]; }
  int capacity() const { return capacity_; }

  /// Leaf whose cumulative interval contains `mass` (clamped into [0,total)).
  int find_prefix(double mass) const;

  /// Largest |node - (left child + right child)| over internal nodes.
  double max_subtree_error() const;

 private:
  int capacity_;
  int base_;  // index of first leaf; node_[1] is the root
  std::vector<double> node_;
};

}  // namespace remer
