#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wpan/metrics.hpp"
#include "wpan/phy.hpp"
#include "wpan/sim.hpp"

namespace wpan {

struct SweepSpec {
  double lambda_start = 0.5;
  double lambda_end = 25.0;
  double lambda_step = 0.5;
  std::vector<int> node_counts{5, 10, 50};
  std::vector<Mode> modes{Mode::kMacOnly, Mode::kPhyMac};
  bool sim = false;
  std::int64_t sim_slots = 1'000'000;
  std::uint64_t seed = 1;
  /// Per-scenario driver traces are written here when non-empty.
  std::filesystem::path trace_dir;
  unsigned workers = 0;
  ConvergeOptions converge;

  static SweepSpec from_traffic(const TrafficSpec& traffic);
  void validate() const;
};

/// start, start + step, ... up to end (inclusive, with a 1e-9 relative slack).
std::vector<double> lambda_grid(double start, double end, double step);

struct SweepRow {
  PerformanceReport report;
  std::optional<sim::SimStats> sim;
};

struct SweepResult {
  PeEstimate pe;
  std::vector<SweepRow> rows;  // ordered by (mode, N, lambda)
  bool all_converged = true;
};

/// Evaluates every (mode, N, lambda) point. The link loss is computed by the
/// caller once and shared by all phy_mac rows. Row order does not depend
/// on the worker count.
SweepResult run_sweep(const Config& config, const SweepSpec& spec, const PeEstimate& pe);

struct DelayGap {
  int n_nodes = 0;
  double lambda = 0.0;
  double gap_s = 0.0;
};

/// Largest phy_mac minus mac_only delay over the grid, one entry per N
/// that has both modes.
std::vector<DelayGap> max_delay_gaps(const SweepResult& result);

void write_csv(std::ostream& out, const SweepResult& result);
std::string summary(const SweepResult& result);

}  // namespace wpan
