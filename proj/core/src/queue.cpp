#include "wpan/queue.hpp"

#include <cmath>
#include <stdexcept>

namespace wpan {

double QueueState::mean_occupancy() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) acc += static_cast<double>(i) * p[i];
  return acc;
}

QueueState stationary(double lambda, double et_s, int capacity) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("stationary: lambda must be >= 0");
  }
  if (!(et_s > 0.0) || !std::isfinite(et_s)) {
    throw std::invalid_argument("stationary: et_s must be > 0");
  }
  if (capacity < 1) throw std::invalid_argument("stationary: capacity must be >= 1");

  QueueState q;
  q.rho = lambda * et_s;
  const auto k = static_cast<std::size_t>(capacity);
  q.p.assign(k + 1, 0.0);

  if (q.rho == 1.0) {
    for (auto& v : q.p) v = 1.0 / static_cast<double>(k + 1);
  } else if (q.rho < 1.0) {
    // Unnormalized weights rho^i, summed directly (no 1 - rho division).
    double w = 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      q.p[i] = w;
      total += w;
      w *= q.rho;
    }
    for (auto& v : q.p) v /= total;
  } else {
    // Scale by rho^-K to stay finite for heavy loads.
    const double r = 1.0 / q.rho;
    double w = 1.0;
    double total = 0.0;
    for (std::size_t i = k + 1; i-- > 0;) {
      q.p[i] = w;
      total += w;
      w *= r;
    }
    for (auto& v : q.p) v /= total;
  }
  q.p0 = q.p.front();
  q.p_blocking = q.p.back();
  return q;
}

}  // namespace wpan
