#include "wpan/mac_chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace wpan {
namespace {

constexpr double kLower = 1e-12;
constexpr double kUpper = 1.0 - 1e-12;

using Vec3 = std::array<double, 3>;

double project(double v) { return std::clamp(v, kLower, kUpper); }

// (1 - t)^k for t in [0, 1], accurate for small t.
double survive_pow(double t, int k) {
  if (k == 0) return 1.0;
  if (t >= 1.0) return 0.0;
  return std::exp(k * std::log1p(-t));
}

// 1 - (1 - t)^k
double any_pow(double t, int k) {
  if (k == 0) return 0.0;
  if (t >= 1.0) return 1.0;
  return -std::expm1(k * std::log1p(-t));
}

struct Derived {
  double active = 0.0;  // (1 - p0) * tau
  double x = 0.0;
  double p_col = 0.0;
  double p_fail = 0.0;
  double y = 0.0;
};

Derived derive(double tau, double alpha, double beta, const ChainInputs& in) {
  Derived d;
  d.active = (1.0 - in.p0) * tau;
  d.x = alpha + (1.0 - alpha) * beta;
  d.p_col = any_pow(d.active, in.n_nodes - 1);
  d.p_fail = failure_probability(d.p_col, in.p_e);
  d.y = d.p_fail * (1.0 - std::pow(d.x, in.m + 1));
  return d;
}

// Expected slots spent in one retry round: backoff, CCA1, CCA2 at each
// stage reached, plus one attempt if the channel was found clear.
double round_slots(const ChainInputs& in, double x, double alpha) {
  double acc = 0.0;
  double reach = 1.0;
  for (int i = 0; i <= in.m; ++i) {
    acc += reach * (0.5 * (in.window(i) + 1) + (1.0 - alpha));
    reach *= x;
  }
  return acc + (1.0 - reach) * in.attempt_slots();
}

Vec3 rhs(const Vec3& v, const ChainInputs& in) {
  const double tau = v[0];
  const double alpha = v[1];
  const double beta = v[2];
  const Derived d = derive(tau, alpha, beta, in);
  const int n_nodes = in.n_nodes;

  const double tau_rhs = geometric_partial_sum(d.x, in.m) * geometric_partial_sum(d.y, in.n) *
                         compute_b000(in, d.x, d.y, alpha);

  // Probability that an ongoing transmission is a lone (acknowledged) one.
  const double any_all = any_pow(d.active, n_nodes);
  const double lone_all = n_nodes * d.active * survive_pow(d.active, n_nodes - 1);
  const double success_share = any_all > 0.0 ? lone_all / any_all : 1.0;
  const double occupancy = in.l_slots + success_share * in.l_ack_slots;
  const double alpha_rhs = occupancy * any_pow(d.active, n_nodes - 1) * (1.0 - alpha) * (1.0 - beta);

  const double dv = 2.0 - survive_pow(d.active, n_nodes) + lone_all;
  const double beta_rhs = (any_pow(d.active, n_nodes - 1) + lone_all) / dv;
  return {tau_rhs, alpha_rhs, beta_rhs};
}

Vec3 residual_vec(const Vec3& v, const ChainInputs& in) {
  const Vec3 r = rhs(v, in);
  return {v[0] - r[0], v[1] - r[1], v[2] - r[2]};
}

double inf_norm(const Vec3& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

// Gaussian elimination with partial pivoting; false if singular.
bool solve3(std::array<Vec3, 3> a, Vec3 b, Vec3& out) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < 3; ++c) s -= a[r][c] * out[c];
    out[r] = s / a[r][r];
  }
  return std::isfinite(out[0]) && std::isfinite(out[1]) && std::isfinite(out[2]);
}

struct Attempt {
  Vec3 v{};
  double norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool used_fallback = false;
  int iterations = 0;
};

Attempt newton(const ChainInputs& in, const Vec3& start, const SolveOptions& opt,
               std::vector<ChainTraceRow>* trace) {
  Attempt at;
  Vec3 v{project(start[0]), project(start[1]), project(start[2])};
  Vec3 f = residual_vec(v, in);
  double norm = inf_norm(f);
  const auto record = [&](int it) {
    if (trace) trace->push_back({it, v[0], v[1], v[2], norm});
  };
  record(0);

  int it = 0;
  for (; it < opt.max_newton_iterations && norm >= opt.tolerance; ++it) {
    std::array<Vec3, 3> jac{};
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-7 * std::max(std::abs(v[k]), 1e-4);
      Vec3 vp = v;
      Vec3 vm = v;
      vp[k] += h;
      vm[k] -= h;
      const Vec3 fp = residual_vec(vp, in);
      const Vec3 fm = residual_vec(vm, in);
      for (int r = 0; r < 3; ++r) jac[r][k] = (fp[r] - fm[r]) / (2.0 * h);
    }
    Vec3 step{};
    if (!solve3(jac, {-f[0], -f[1], -f[2]}, step)) break;

    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving <= 60; ++halving) {
      const Vec3 trial{project(v[0] + lambda * step[0]), project(v[1] + lambda * step[1]),
                       project(v[2] + lambda * step[2])};
      const Vec3 ft = residual_vec(trial, in);
      const double nt = inf_norm(ft);
      if (nt < norm) {
        v = trial;
        f = ft;
        norm = nt;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    record(it + 1);
    if (!improved) break;
  }
  at.v = v;
  at.norm = norm;
  at.converged = norm < opt.tolerance;
  at.iterations = it;
  return at;
}

Attempt substitution(const ChainInputs& in, const Vec3& start, const SolveOptions& opt,
                     std::vector<ChainTraceRow>* trace, int first_index) {
  Attempt at;
  Vec3 v{project(start[0]), project(start[1]), project(start[2])};
  Vec3 best = v;
  double best_norm = inf_norm(residual_vec(v, in));
  int it = 0;
  for (; it < opt.max_substitution_iterations && best_norm >= opt.tolerance; ++it) {
    const Vec3 r = rhs(v, in);
    for (int k = 0; k < 3; ++k) v[k] = project(0.5 * v[k] + 0.5 * r[k]);
    const double norm = inf_norm(residual_vec(v, in));
    if (norm < best_norm) {
      best_norm = norm;
      best = v;
    }
    if (trace && (it % 100 == 0)) trace->push_back({first_index + it, v[0], v[1], v[2], norm});
  }
  at.v = best;
  at.norm = best_norm;
  at.converged = best_norm < opt.tolerance;
  at.used_fallback = true;
  at.iterations = it;
  return at;
}

Attempt solve_from(const ChainInputs& in, const Vec3& start, const SolveOptions& opt,
                   std::vector<ChainTraceRow>* trace) {
  Attempt at = newton(in, start, opt, trace);
  if (at.converged) return at;
  Attempt fb = substitution(in, at.v, opt, trace, at.iterations + 1);
  fb.iterations += at.iterations;
  if (fb.norm < at.norm) return fb;
  return at;
}

}  // namespace

ChainInputs ChainInputs::from(const MacParams& mac, double p0, double p_e) {
  const DerivedFrame f = derive_frame(mac);
  ChainInputs in;
  in.n_nodes = mac.n_nodes;
  in.m = mac.max_csma_backoffs;
  in.n = mac.max_retries;
  in.l_slots = f.l_slots;
  in.l_ack_slots = f.l_ack_slots;
  in.p0 = p0;
  in.p_e = p_e;
  in.mac_min_be = mac.mac_min_be;
  in.mac_max_be = mac.mac_max_be;
  in.slot_duration_s = f.slot_duration_s;
  in.ifs_s = mac.ifs_s;
  in.turnaround_s = mac.turnaround_s;
  return in;
}

void ChainInputs::validate() const {
  if (n_nodes < 1) throw std::invalid_argument("ChainInputs: n_nodes must be >= 1");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("ChainInputs: p0 outside [0,1]");
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw std::invalid_argument("ChainInputs: p_e outside [0,1]");
  if (m < 0 || n < 0) throw std::invalid_argument("ChainInputs: m and n must be >= 0");
  if (mac_max_be < mac_min_be || mac_min_be < 0 || mac_max_be > 30) {
    throw std::invalid_argument("ChainInputs: invalid backoff exponents");
  }
  if (!(slot_duration_s > 0.0) || !(l_slots >= 1.0) || !(l_ack_slots >= 0.0)) {
    throw std::invalid_argument("ChainInputs: invalid frame timing");
  }
}

int ChainInputs::window(int stage) const {
  return 1 << std::min(mac_min_be + stage, mac_max_be);
}

double ChainInputs::attempt_slots() const {
  return l_slots + l_ack_slots + (turnaround_s + ifs_s) / slot_duration_s;
}

double Residuals::inf_norm() const {
  return std::max({std::abs(tau), std::abs(alpha), std::abs(beta)});
}

double geometric_partial_sum(double z, int k) {
  double s = 1.0;
  for (int i = 0; i < k; ++i) s = 1.0 + z * s;
  return s;
}

double compute_b000(const ChainInputs& in, double x, double y, double alpha, IdleBranch idle) {
  for (int i = 0; i <= in.m; ++i) {
    if (in.window(i) <= 0) throw std::invalid_argument("compute_b000: degenerate window");
  }
  // Per retry round: stage i is reached with weight x^i and contributes
  // (W_i + 1) / 2 backoff+CCA1 states and (1 - alpha) CCA2 states; an
  // attempt follows with weight 1 - x^(m+1). Round j has weight y^j.
  const double busy = geometric_partial_sum(y, in.n) * round_slots(in, x, alpha);
  if (idle == IdleBranch::kIncluded) return (1.0 - in.p0) / busy;
  return 1.0 / busy;
}

Residuals residuals(const ChainPoint& p, const ChainInputs& in) {
  in.validate();
  for (double v : {p.tau, p.alpha, p.beta}) {
    if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("residuals: arguments must be in (0,1)");
  }
  const Vec3 r = residual_vec({p.tau, p.alpha, p.beta}, in);
  return {r[0], r[1], r[2]};
}

double collision_probability(double tau, const ChainInputs& in) {
  return any_pow((1.0 - in.p0) * tau, in.n_nodes - 1);
}

// Expanded form of 1 - (1 - p_col)(1 - p_e); exact when either term is 0.
double failure_probability(double p_col, double p_e) { return p_col + (1.0 - p_col) * p_e; }

DiscardProbabilities discard_probabilities(double x, double y, int m, int n) {
  DiscardProbabilities d;
  d.p_cf = std::pow(x, m + 1) * geometric_partial_sum(y, n);
  d.p_cr = std::pow(y, n + 1);
  return d;
}

double expected_service_time(const ChainInputs& in, double tau, double alpha, double beta) {
  const Derived d = derive(tau, alpha, beta, in);
  const double slot = in.slot_duration_s;
  // One round: every stage reached costs its mean backoff (W_i - 1) / 2,
  // one CCA slot and a second one when CCA1 was clear.
  double round_s = 0.0;
  double reach = 1.0;
  for (int i = 0; i <= in.m; ++i) {
    const double backoff = 0.5 * (in.window(i) - 1);
    const double cca = alpha * 1.0 + (1.0 - alpha) * 2.0;
    round_s += reach * (backoff + cca) * slot;
    reach *= d.x;
  }
  const double attempt_s =
      in.l_slots * slot + in.turnaround_s + in.l_ack_slots * slot + in.ifs_s;
  round_s += (1.0 - reach) * attempt_s;
  // Round j+1 happens only after an attempt in round j failed.
  return geometric_partial_sum(d.y, in.n) * round_s;
}

ChainSolution solve_chain(const ChainInputs& in, const SolveOptions& opt) {
  in.validate();
  ChainSolution sol;
  std::vector<ChainTraceRow>* trace = opt.record_trace ? &sol.trace : nullptr;

  const Attempt primary =
      solve_from(in, {opt.initial.tau, opt.initial.alpha, opt.initial.beta}, opt, trace);

  if (opt.check_multiple_roots) {
    const Attempt other = solve_from(
        in, {opt.second_start.tau, opt.second_start.alpha, opt.second_start.beta}, opt, nullptr);
    if (primary.converged && other.converged) {
      const double gap = std::max({std::abs(primary.v[0] - other.v[0]),
                                   std::abs(primary.v[1] - other.v[1]),
                                   std::abs(primary.v[2] - other.v[2])});
      sol.multiple_roots = gap > 1e-6;
    }
  }

  const auto& v = primary.v;
  sol.tau = v[0];
  sol.alpha = v[1];
  sol.beta = v[2];
  const Derived d = derive(sol.tau, sol.alpha, sol.beta, in);
  sol.x = d.x;
  sol.y = d.y;
  sol.p_col = d.p_col;
  sol.p_fail = d.p_fail;
  sol.b000 = compute_b000(in, d.x, d.y, sol.alpha);
  const DiscardProbabilities disc = discard_probabilities(d.x, d.y, in.m, in.n);
  sol.p_cf = disc.p_cf;
  sol.p_cr = disc.p_cr;
  sol.et_s = expected_service_time(in, sol.tau, sol.alpha, sol.beta);
  sol.residual_norm = primary.norm;
  sol.status = primary.converged ? SolveStatus::kConverged : SolveStatus::kNoConvergence;
  sol.used_fallback = primary.used_fallback;
  sol.iterations = primary.iterations;
  return sol;
}

void write_chain_trace_csv(std::ostream& out, const std::vector<ChainTraceRow>& trace) {
  out << "iteration,tau,alpha,beta,residual\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.tau, r.alpha,
                  r.beta, r.residual);
    out << buf;
  }
}

}  // namespace wpan
