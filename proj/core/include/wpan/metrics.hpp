#pragma once

#include <string>

#include "wpan/driver.hpp"

namespace wpan {

/// Per-(N, lambda, mode) outputs plus the diagnostics behind them.
struct PerformanceReport {
  Mode mode = Mode::kPhyMac;
  int n_nodes = 0;
  double lambda = 0.0;
  double p0 = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double p_e = 0.0;
  double p_col = 0.0;
  double p_fail = 0.0;
  double p_cf = 0.0;
  double p_cr = 0.0;
  double p_blocking = 0.0;
  double et_s = 0.0;
  double delay_s = 0.0;
  double reliability = 0.0;
  double throughput_bps = 0.0;
  ConvergeStatus status = ConvergeStatus::kNoConvergence;

  bool operator==(const PerformanceReport&) const = default;
};

/// Mean time a frame spends in the node, by Little's law:
/// mean occupancy over the admitted arrival rate lambda * (1 - p_K).
double delay(const QueueState& queue, double lambda);

double reliability(double p_blocking, double p_cf, double p_cr);
double reliability(const QueueState& queue, const ChainSolution& chain);

double throughput(double lambda, double reliability, double payload_bits);

PerformanceReport make_report(const Scenario& scenario, const ConvergedPoint& point);

/// mode,n_nodes,lambda_fps,p0,tau,alpha,beta,p_e,p_col,p_fail,p_cf,p_cr,
/// p_blocking,et_s,delay_s,reliability,throughput_bps
std::string csv_header();
std::string to_csv_row(const PerformanceReport& report);

}  // namespace wpan
