#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wpan/mac_chain.hpp"
#include "wpan/params.hpp"
#include "wpan/queue.hpp"

namespace wpan {

enum class Mode { kMacOnly, kPhyMac };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// One (N, lambda, mode) operating point. phy_pe must be 0 in MAC-only mode.
struct Scenario {
  MacParams mac;
  double phy_pe = 0.0;
  double lambda = 1.0;
  Mode mode = Mode::kPhyMac;

  /// Builds a scenario; MAC-only mode forces phy_pe to 0.
  static Scenario make(const MacParams& mac, double lambda, Mode mode, double phy_pe);
  void validate() const;
};

enum class ConvergeStatus { kConverged, kNoConvergence, kOscillation, kInnerFailure };

std::string to_string(ConvergeStatus status);

struct ConvergeOptions {
  double tolerance = 1e-6;
  int max_iterations = 1000;
  double damping = 0.5;
  double initial_p0 = 1.0;
  bool record_trace = false;
};

struct DriverTraceRow {
  int iteration = 0;
  double p0 = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double et_s = 0.0;
};

struct ConvergedPoint {
  ChainSolution chain;
  QueueState queue;
  int iterations = 0;
  std::vector<double> p0_history;
  ConvergeStatus status = ConvergeStatus::kNoConvergence;
  /// p0 of the final queue lies inside the envelope spanned by the
  /// worst-case service time (every round reached).
  bool within_envelope = true;
  std::vector<DriverTraceRow> trace;

  bool converged() const { return status == ConvergeStatus::kConverged; }
};

/// Outer loop: chain(p0) -> ET -> M/M/1/K -> new p0, damped, starting idle.
ConvergedPoint converge(const Scenario& scenario, const ConvergeOptions& options = {});

/// Service time with every retry round reached (y -> 1) at the given
/// busy probability x, used as the upper end of the p0 sanity envelope.
double worst_case_service_time(const ChainInputs& in, double x, double alpha);

void write_driver_trace_csv(std::ostream& out, const std::vector<DriverTraceRow>& trace);

}  // namespace wpan
