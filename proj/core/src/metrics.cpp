#include "wpan/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace wpan {

double delay(const QueueState& queue, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("delay: lambda must be > 0");
  if (queue.p_blocking >= 1.0) throw std::domain_error("delay: queue fully blocked (p_K = 1)");
  return queue.mean_occupancy() / (lambda * (1.0 - queue.p_blocking));
}

double reliability(double p_blocking, double p_cf, double p_cr) {
  return (1.0 - p_blocking) * (1.0 - p_cf) * (1.0 - p_cr);
}

double reliability(const QueueState& queue, const ChainSolution& chain) {
  return reliability(queue.p_blocking, chain.p_cf, chain.p_cr);
}

double throughput(double lambda, double r, double payload_bits) { return lambda * r * payload_bits; }

PerformanceReport make_report(const Scenario& s, const ConvergedPoint& pt) {
  PerformanceReport r;
  r.mode = s.mode;
  r.n_nodes = s.mac.n_nodes;
  r.lambda = s.lambda;
  r.p0 = pt.queue.p0;
  r.tau = pt.chain.tau;
  r.alpha = pt.chain.alpha;
  r.beta = pt.chain.beta;
  r.p_e = s.phy_pe;
  r.p_col = pt.chain.p_col;
  r.p_fail = pt.chain.p_fail;
  r.p_cf = pt.chain.p_cf;
  r.p_cr = pt.chain.p_cr;
  r.p_blocking = pt.queue.p_blocking;
  r.et_s = pt.chain.et_s;
  r.delay_s = delay(pt.queue, s.lambda);
  r.reliability = reliability(pt.queue, pt.chain);
  r.throughput_bps = throughput(s.lambda, r.reliability, s.mac.frame_payload_bits);
  r.status = pt.status;
  return r;
}

std::string csv_header() {
  return "mode,n_nodes,lambda_fps,p0,tau,alpha,beta,p_e,p_col,p_fail,p_cf,p_cr,p_blocking,et_s,"
         "delay_s,reliability,throughput_bps";
}

std::string to_csv_row(const PerformanceReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s,%d,%.6g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                "%.12g,%.12g,%.12g",
                to_string(r.mode).c_str(), r.n_nodes, r.lambda, r.p0, r.tau, r.alpha, r.beta,
                r.p_e, r.p_col, r.p_fail, r.p_cf, r.p_cr, r.p_blocking, r.et_s, r.delay_s,
                r.reliability, r.throughput_bps);
  return buf;
}

}  // namespace wpan
