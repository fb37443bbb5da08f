#pragma once

#include <vector>

namespace wpan {

/// Stationary M/M/1/K state. K counts every frame in the node, including
/// the one at the head of the line.
struct QueueState {
  double rho = 0.0;
  std::vector<double> p;  // p[i], i = 0..K
  double p0 = 1.0;
  double p_blocking = 0.0;

  int capacity() const { return static_cast<int>(p.size()) - 1; }
  /// Mean number of frames in the node.
  double mean_occupancy() const;
};

/// rho = lambda * et_s and p_i = rho^i / sum_j rho^j.
QueueState stationary(double lambda, double et_s, int capacity);

}  // namespace wpan
