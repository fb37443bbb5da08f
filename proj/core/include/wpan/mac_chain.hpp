#pragma once

#include <array>
#include <ostream>
#include <vector>

#include "wpan/params.hpp"

namespace wpan {

/// Everything one node's CSMA/CA chain needs at a given idle probability.
struct ChainInputs {
  int n_nodes = 10;
  int m = 4;  // max CSMA backoffs
  int n = 3;  // max retries
  double l_slots = 11.0;
  double l_ack_slots = 2.0;
  double p0 = 1.0;
  double p_e = 0.0;
  int mac_min_be = 3;
  int mac_max_be = 5;
  double slot_duration_s = 80.0 / 19200.0;
  double ifs_s = 640e-6;
  double turnaround_s = 192e-6;

  static ChainInputs from(const MacParams& mac, double p0, double p_e);
  void validate() const;

  /// Backoff window of stage i: 2^min(macMinBE + i, macMaxBE).
  int window(int stage) const;
  /// Slots one transmission attempt holds the node: frame, ACK wait
  /// (turnaround + ACK) and IFS. Sub-slot times stay fractional.
  double attempt_slots() const;
};

/// Probability that a node in the busy chain starts CCA1, and busy
/// probabilities at CCA1 and CCA2.
struct ChainPoint {
  double tau = 0.1;
  double alpha = 0.1;
  double beta = 0.1;
};

struct Residuals {
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double inf_norm() const;
};

/// Whether the normalization of the chain includes the idle state. With
/// the (1 - p0) scaling applied to tau in the contention terms, tau is the
/// CCA1 probability conditioned on the node holding a frame, so the idle
/// state is excluded by default.
enum class IdleBranch { kExcluded, kIncluded };

/// Sum_{i=0..k} z^i, evaluated by Horner so z -> 1 needs no special case.
double geometric_partial_sum(double z, int k);

/// Stationary probability of state (stage 0, counter 0, retry 0), from the
/// normalization of the backoff / CCA / transmission / retry states.
double compute_b000(const ChainInputs& in, double x, double y, double alpha,
                    IdleBranch idle = IdleBranch::kExcluded);

/// (tau - RHS1, alpha - RHS2, beta - RHS3) for the three coupled equations.
/// Arguments must lie in (0, 1).
Residuals residuals(const ChainPoint& point, const ChainInputs& in);

double collision_probability(double tau, const ChainInputs& in);
double failure_probability(double p_col, double p_e);

struct DiscardProbabilities {
  double p_cf = 0.0;  // channel access failure
  double p_cr = 0.0;  // retry limit
};
DiscardProbabilities discard_probabilities(double x, double y, int m, int n);

/// Mean head-of-line time (s) until a frame leaves the MAC by success,
/// access failure or retry exhaustion.
double expected_service_time(const ChainInputs& in, double tau, double alpha, double beta);

struct ChainTraceRow {
  int iteration = 0;
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;
};

enum class SolveStatus { kConverged, kNoConvergence };

struct SolveOptions {
  ChainPoint initial{0.1, 0.1, 0.1};
  ChainPoint second_start{0.01, 0.5, 0.5};
  bool check_multiple_roots = true;
  double tolerance = 1e-9;
  int max_newton_iterations = 200;
  int max_substitution_iterations = 200000;
  bool record_trace = false;
};

struct ChainSolution {
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double x = 0.0;
  double y = 0.0;
  double b000 = 0.0;
  double p_col = 0.0;
  double p_fail = 0.0;
  double p_cf = 0.0;
  double p_cr = 0.0;
  double et_s = 0.0;
  double residual_norm = 0.0;
  SolveStatus status = SolveStatus::kNoConvergence;
  bool used_fallback = false;
  bool multiple_roots = false;
  int iterations = 0;
  std::vector<ChainTraceRow> trace;
};

/// Damped Newton with a central-difference Jacobian, iterates projected
/// into [1e-12, 1 - 1e-12]; damped successive substitution if Newton
/// stalls. Deterministic for identical inputs and options.
ChainSolution solve_chain(const ChainInputs& in, const SolveOptions& options = {});

void write_chain_trace_csv(std::ostream& out, const std::vector<ChainTraceRow>& trace);

}  // namespace wpan
