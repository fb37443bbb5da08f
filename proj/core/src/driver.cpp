#include "wpan/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wpan {

std::string to_string(Mode mode) {
  return mode == Mode::kMacOnly ? "mac_only" : "phy_mac";
}

Mode parse_mode(const std::string& text) {
  if (text == "mac_only" || text == "mac-only") return Mode::kMacOnly;
  if (text == "phy_mac" || text == "phy-mac") return Mode::kPhyMac;
  throw std::invalid_argument("unknown mode: " + text);
}

std::string to_string(ConvergeStatus status) {
  switch (status) {
    case ConvergeStatus::kConverged: return "converged";
    case ConvergeStatus::kNoConvergence: return "no_convergence";
    case ConvergeStatus::kOscillation: return "oscillation";
    case ConvergeStatus::kInnerFailure: return "inner_failure";
  }
  return "unknown";
}

Scenario Scenario::make(const MacParams& mac, double lambda, Mode mode, double phy_pe) {
  Scenario s;
  s.mac = mac;
  s.lambda = lambda;
  s.mode = mode;
  s.phy_pe = mode == Mode::kMacOnly ? 0.0 : phy_pe;
  return s;
}

void Scenario::validate() const {
  mac.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("Scenario: lambda must be > 0");
  }
  if (!(phy_pe >= 0.0 && phy_pe <= 1.0)) throw std::invalid_argument("Scenario: phy_pe outside [0,1]");
  if (mode == Mode::kMacOnly && phy_pe != 0.0) {
    throw std::invalid_argument("Scenario: phy_pe must be 0 in mac_only mode");
  }
}

double worst_case_service_time(const ChainInputs& in, double x, double alpha) {
  const double slot = in.slot_duration_s;
  double round_s = 0.0;
  double reach = 1.0;
  for (int i = 0; i <= in.m; ++i) {
    round_s += reach * (0.5 * (in.window(i) - 1) + 2.0 - alpha) * slot;
    reach *= x;
  }
  round_s += (1.0 - reach) * in.attempt_slots() * slot;
  return (in.n + 1) * round_s;
}

ConvergedPoint converge(const Scenario& scenario, const ConvergeOptions& opt) {
  scenario.validate();
  if (!(opt.tolerance > 0.0)) throw std::invalid_argument("converge: tolerance must be > 0");
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) {
    throw std::invalid_argument("converge: damping must be in (0,1]");
  }
  if (!(opt.initial_p0 >= 0.0 && opt.initial_p0 <= 1.0)) {
    throw std::invalid_argument("converge: initial_p0 outside [0,1]");
  }

  ConvergedPoint out;
  const int capacity = scenario.mac.queue_capacity;
  double p0 = opt.initial_p0;
  out.p0_history.push_back(p0);

  SolveOptions inner;
  inner.check_multiple_roots = false;

  ChainInputs in = ChainInputs::from(scenario.mac, p0, scenario.phy_pe);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    in.p0 = p0;
    ChainSolution sol = solve_chain(in, inner);
    out.iterations = it;
    if (sol.status != SolveStatus::kConverged) {
      out.chain = std::move(sol);
      out.queue = stationary(scenario.lambda, out.chain.et_s, capacity);
      out.status = ConvergeStatus::kInnerFailure;
      return out;
    }
    inner.initial = {sol.tau, sol.alpha, sol.beta};
    QueueState q = stationary(scenario.lambda, sol.et_s, capacity);
    if (opt.record_trace) {
      out.trace.push_back({it, p0, sol.tau, sol.alpha, sol.beta, sol.et_s});
    }

    const double delta = q.p0 - p0;
    out.chain = std::move(sol);
    out.queue = std::move(q);
    p0 += opt.damping * delta;
    out.p0_history.push_back(p0);
    if (std::abs(delta) < opt.tolerance) {
      out.status = ConvergeStatus::kConverged;
      break;
    }
  }

  if (out.status != ConvergeStatus::kConverged) {
    const auto& h = out.p0_history;
    const std::size_t k = h.size() - 1;
    if (k >= 4 && std::abs(h[k] - h[k - 2]) < opt.tolerance &&
        std::abs(h[k] - h[k - 1]) >= opt.tolerance) {
      out.status = ConvergeStatus::kOscillation;
    }
  }

  // Best-effort check for a second root at the final idle probability.
  SolveOptions alt;
  alt.initial = alt.second_start;
  alt.check_multiple_roots = false;
  const ChainSolution other = solve_chain(in, alt);
  if (other.status == SolveStatus::kConverged) {
    const double gap = std::max({std::abs(other.tau - out.chain.tau),
                                 std::abs(other.alpha - out.chain.alpha),
                                 std::abs(other.beta - out.chain.beta)});
    out.chain.multiple_roots = gap > 1e-6;
  }

  const double et_max = worst_case_service_time(in, out.chain.x, out.chain.alpha);
  const QueueState worst = stationary(scenario.lambda, et_max, capacity);
  out.within_envelope = out.queue.p0 >= worst.p0 - 1e-12 && out.queue.p0 <= 1.0;
  return out;
}

void write_driver_trace_csv(std::ostream& out, const std::vector<DriverTraceRow>& trace) {
  out << "iteration,p0,tau,alpha,beta,et_s\n";
  char buf[192];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.p0, r.tau,
                  r.alpha, r.beta, r.et_s);
    out << buf;
  }
}

}  // namespace wpan
