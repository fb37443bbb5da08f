#pragma once

#include <cstdint>
#include <span>

#include "wpan/driver.hpp"

namespace wpan::sim {

struct SimConfig {
  std::int64_t horizon_slots = 1'000'000;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  /// When set, an ACK that overlaps another node's data is lost and the
  /// attempt counts as failed. Off by default. With two CCAs and a
  /// turnaround shorter than one slot no data can start under an ACK, so
  /// the flag only matters for altered timing.
  bool ack_collisions = false;
  int batches = 20;
};

/// Sample mean with a 95% half-width from batch means.
struct Estimate {
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  /// False when the half-width exceeds 20% of the estimate.
  bool stable = true;

  bool operator==(const Estimate&) const = default;
};

/// Pools estimates from independent replications: mean of means, with
/// half-widths combined as independent errors.
Estimate pool(std::span<const Estimate> runs);

struct SimStats {
  // Whole-run frame accounting (warmup included).
  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t cf_discarded = 0;
  std::int64_t cr_discarded = 0;
  std::int64_t blocked = 0;
  std::int64_t in_system_at_end = 0;
  // Whole-run attempt accounting.
  std::int64_t attempts = 0;
  std::int64_t collided = 0;
  std::int64_t phy_lost = 0;
  std::int64_t ack_lost = 0;

  // Measurement window (after warmup), per node averages.
  Estimate reliability;
  Estimate p_blocking;
  Estimate service_s;
  Estimate sojourn_s;
  Estimate occupancy;  // time-average frames in a node
  Estimate tau;        // CCA1 starts per slot while holding a frame
  Estimate alpha;      // busy fraction at CCA1
  Estimate beta;       // busy fraction at CCA2 given CCA1 was clear
  double admitted_rate = 0.0;  // admitted frames/s per node
  std::int64_t measured_frames = 0;
  double window_s = 0.0;

  bool operator==(const SimStats&) const = default;
};

/// Slot-level Monte Carlo of the N-node slotted CSMA/CA star network with
/// Poisson arrivals, finite buffers, i.i.d. Bernoulli(phy_pe) frame loss
/// and no capture. Reproducible per seed.
SimStats run(const Scenario& scenario, const SimConfig& config);

}  // namespace wpan::sim
