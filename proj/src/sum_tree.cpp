#include "remer/sum_tree.hpp"

#include <algorithm>
#include <cmath>

namespace remer {

SumTree::SumTree(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ContractViolation("SumTree capacity must be positive");
  base_ = 1;
  while (base_ < capacity) base_ <<= 1;
  node_.assign(static_cast<size_t>(base_) * 2, 0.0);
}

void SumTree::set(int leaf, double priority) {
  if (leaf < 0 || leaf >= capacity_) throw ContractViolation("SumTree leaf out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority))
    throw ContractViolation("SumTree priorities must be finite and nonnegative");
  int i = base_ + leaf;
  node_[i] = priority;
  for (i >>= 1; i >= 1; i >>= 1) node_[i] = node_[2 * i] + node_[2 * i + 1];
}

int SumTree::find_prefix(double mass) const {
  const double top = total();
  mass = std::clamp(mass, 0.0, std::nextafter(top, 0.0));
  int i = 1;
  while (i < base_) {
    const double left = node_[2 * i];
    if (mass < left) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return std::min(i - base_, capacity_ - 1);
}

double SumTree::max_subtree_error() const {
  double worst = 0.0;
  for (int i = 1; i < base_; ++i)
    worst = std::max(worst, std::abs(node_[i] - (node_[2 * i] + node_[2 * i + 1])));
  return worst;
}

}  // namespace remer
