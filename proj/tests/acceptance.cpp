// Acceptance gate: one PASS/FAIL line per criterion.
// Usage: wpan_acceptance [--criterion K]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wpan/metrics.hpp"
#include "wpan/phy.hpp"
#include "wpan/queue.hpp"
#include "wpan/sim.hpp"
#include "wpan/sweep.hpp"

using namespace wpan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const PeEstimate& link_loss() {
  static const PeEstimate pe = expected_pe(default_config().phy, default_config().sampler);
  return pe;
}

ConvergedPoint solve(int n, double lambda, Mode mode, double pe, const ConvergeOptions& opt = {}) {
  MacParams mac = default_config().mac;
  mac.n_nodes = n;
  return converge(Scenario::make(mac, lambda, mode, pe), opt);
}

PerformanceReport report(int n, double lambda, Mode mode, double pe) {
  MacParams mac = default_config().mac;
  mac.n_nodes = n;
  const Scenario s = Scenario::make(mac, lambda, mode, pe);
  return make_report(s, converge(s));
}

const std::vector<double>& grid() {
  static const std::vector<double> g = lambda_grid(0.5, 25.0, 0.5);
  return g;
}

// 1. Link loss degrades every output at N=10.
Outcome mode_degradation() {
  const double pe = link_loss().p_e;
  int bad = 0;
  std::string first;
  for (double lambda : grid()) {
    const PerformanceReport m = report(10, lambda, Mode::kMacOnly, 0.0);
    const PerformanceReport p = report(10, lambda, Mode::kPhyMac, pe);
    const bool ok = p.p_fail > m.p_fail && p.delay_s > m.delay_s &&
                    p.reliability < m.reliability && p.throughput_bps < m.throughput_bps;
    if (!ok && bad++ == 0) first = fmt(" first at lambda=%g", lambda);
  }
  return {bad == 0, fmt("P_e=%.4f, %d of %zu points violate strict ordering%s", pe, bad,
                        grid().size(), first.c_str())};
}

// 2. Location and size of the largest delay gap at N=10.
Outcome delay_gap() {
  const double pe = link_loss().p_e;
  double best_gap = -1.0, best_lambda = 0.0;
  for (double lambda : grid()) {
    const double gap = report(10, lambda, Mode::kPhyMac, pe).delay_s -
                       report(10, lambda, Mode::kMacOnly, 0.0).delay_s;
    if (gap > best_gap) {
      best_gap = gap;
      best_lambda = lambda;
    }
  }
  const bool ok = best_gap >= 0.020 && best_gap <= 0.060 && std::abs(best_lambda - 11.0) <= 3.0;
  std::string detail = fmt("max gap %.1f ms at lambda=%g (target 20..60 ms at 8..14)",
                           best_gap * 1e3, best_lambda);

  // Simulator delays at the reported maximum and at lambda=11.
  for (double lambda : {best_lambda, 11.0}) {
    const PerformanceReport m = report(10, lambda, Mode::kMacOnly, 0.0);
    const PerformanceReport p = report(10, lambda, Mode::kPhyMac, pe);
    MacParams mac = default_config().mac;
    sim::SimConfig cfg;
    const auto sm = sim::run(Scenario::make(mac, lambda, Mode::kMacOnly, 0.0), cfg);
    const auto sp = sim::run(Scenario::make(mac, lambda, Mode::kPhyMac, pe), cfg);
    detail += fmt("\n      lambda=%g: analytic D %.1f / %.1f ms, simulated D %.1f / %.1f ms "
                  "(mac_only / phy_mac), simulated gap %.1f ms",
                  lambda, m.delay_s * 1e3, p.delay_s * 1e3, sm.sojourn_s.mean * 1e3,
                  sp.sojourn_s.mean * 1e3, (sp.sojourn_s.mean - sm.sojourn_s.mean) * 1e3);
  }
  return {ok, detail};
}

// 3. Denser networks never perform better.
Outcome density_trends() {
  const double pe = link_loss().p_e;
  constexpr double tol = 1e-6;
  int bad = 0, checked = 0;
  for (Mode mode : {Mode::kMacOnly, Mode::kPhyMac}) {
    const double e = mode == Mode::kPhyMac ? pe : 0.0;
    for (double lambda : grid()) {
      std::optional<PerformanceReport> prev;
      for (int n : {5, 10, 50}) {
        const PerformanceReport r = report(n, lambda, mode, e);
        if (prev) {
          ++checked;
          if (r.delay_s < prev->delay_s - tol || r.p_fail < prev->p_fail - tol ||
              r.reliability > prev->reliability + tol) {
            ++bad;
          }
        }
        prev = r;
      }
    }
  }
  return {bad == 0, fmt("%d of %d (N, N') pairs violate the ordering", bad, checked)};
}

// 4. Closed-form queue against the balance equations.
Outcome queue_oracle() {
  double worst = 0.0;
  for (int k : {1, 2, 5, 51}) {
    for (double rho : {0.1, 0.5, 1.0, 2.0}) {
      const QueueState q = stationary(rho, 1.0, k);
      const auto pi = oracle::birth_death_stationary(rho, k);
      for (int i = 0; i <= k; ++i) worst = std::max(worst, std::abs(pi[i] - q.p[i]));
    }
  }
  return {worst < 1e-10, fmt("max |closed form - balance solution| = %.2e", worst)};
}

// 5. Analytical reliability and service time against the simulator.
Outcome simulator_agreement() {
  int bad = 0, checked = 0;
  std::string lines;
  for (int n : {2, 5, 10}) {
    for (double lambda : {1.0, 5.0, 10.0}) {
      for (double pe : {0.0, 0.1}) {
        const Mode mode = pe > 0.0 ? Mode::kPhyMac : Mode::kMacOnly;
        const PerformanceReport a = report(n, lambda, mode, pe);
        MacParams mac = default_config().mac;
        mac.n_nodes = n;
        const Scenario s = Scenario::make(mac, lambda, mode, pe);
        std::vector<sim::Estimate> rel, et;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
          sim::SimConfig cfg;
          cfg.seed = seed;
          const auto st = sim::run(s, cfg);
          rel.push_back(st.reliability);
          et.push_back(st.service_s);
        }
        const sim::Estimate r = sim::pool(rel);
        const sim::Estimate t = sim::pool(et);
        const auto agrees = [](double analytic, const sim::Estimate& e) {
          const double diff = std::abs(analytic - e.mean);
          return diff <= std::max(0.10 * std::abs(e.mean), e.ci_halfwidth);
        };
        const bool ok_r = agrees(a.reliability, r);
        const bool ok_t = agrees(a.et_s, t);
        checked += 2;
        bad += !ok_r + !ok_t;
        lines += fmt("\n      N=%-2d lambda=%-4g P_e=%.1f  R %.4f vs %.4f+-%.4f (%+.1f%%)%s  "
                     "ET %.2f vs %.2f+-%.2f ms (%+.1f%%)%s",
                     n, lambda, pe, a.reliability, r.mean, r.ci_halfwidth,
                     100.0 * (a.reliability - r.mean) / r.mean, ok_r ? "" : " X", a.et_s * 1e3,
                     t.mean * 1e3, t.ci_halfwidth * 1e3, 100.0 * (a.et_s - t.mean) / t.mean,
                     ok_t ? "" : " X");
      }
    }
  }
  return {bad == 0, fmt("%d of %d comparisons outside max(10%%, 95%% CI)", bad, checked) + lines};
}

// 6. Bit error and frame reception curves against bit-level simulation.
Outcome phy_oracle() {
  const PhyParams phy = default_config().phy;
  const std::size_t n = 1'000'000;
  const auto bits = static_cast<std::size_t>(encoded_frame_bits(phy));
  int bad = 0;
  std::string lines;
  for (double snr : {0.0, 5.0, 10.0, 15.0}) {
    const double ebn0 = std::pow(10.0, snr / 10.0) * phy.bandwidth_hz / phy.data_rate_bps;
    const double pb = bit_error_prob(snr, phy);
    const double ber = static_cast<double>(oracle::simulate_bit_errors(
                           phy.modulation, ebn0, n, 100 + static_cast<std::uint64_t>(snr))) / n;
    const double se_b = std::sqrt(pb * (1.0 - pb) / n);
    const double prr = packet_reception_rate(snr, phy);
    const double clean = static_cast<double>(oracle::simulate_clean_frames(
                             pb, bits, n, 200 + static_cast<std::uint64_t>(snr))) / n;
    const double se_f = std::sqrt(prr * (1.0 - prr) / n);
    const bool ok = std::abs(ber - pb) <= 3.0 * se_b && std::abs(clean - prr) <= 3.0 * se_f;
    bad += !ok;
    lines += fmt("\n      SNR %4.1f dB: BER %.4e vs %.4e (%.1f SE), PRR %.6f vs %.6f (%.1f SE)%s",
                 snr, pb, ber, se_b > 0 ? std::abs(ber - pb) / se_b : 0.0, prr, clean,
                 se_f > 0 ? std::abs(clean - prr) / se_f : 0.0, ok ? "" : " X");
  }
  return {bad == 0, fmt("%d of 4 SNR points outside 3 standard errors", bad) + lines};
}

// 7. Outer loop convergence and damping invariance on the full grid.
Outcome fixed_point_robustness() {
  const double pe = link_loss().p_e;
  int bad = 0, scenarios = 0, max_iter = 0;
  double worst_shift = 0.0;
  for (Mode mode : {Mode::kMacOnly, Mode::kPhyMac}) {
    const double e = mode == Mode::kPhyMac ? pe : 0.0;
    for (int n : {5, 10, 50}) {
      for (double lambda : grid()) {
        ++scenarios;
        const ConvergedPoint pt = solve(n, lambda, mode, e);
        const auto& h = pt.p0_history;
        const bool ok = pt.converged() && pt.iterations <= 1000 && pt.chain.residual_norm < 1e-9 &&
                        std::abs(h.back() - h[h.size() - 2]) < 1e-6;
        bad += !ok;
        max_iter = std::max(max_iter, pt.iterations);
        for (double w : {0.25, 0.75}) {
          ConvergeOptions opt;
          opt.damping = w;
          const ConvergedPoint other = solve(n, lambda, mode, e, opt);
          if (!other.converged()) ++bad;
          worst_shift = std::max(worst_shift, std::abs(other.queue.p0 - pt.queue.p0));
        }
      }
    }
  }
  return {bad == 0 && worst_shift < 1e-5,
          fmt("%d of %d scenarios failed, max %d iterations, max damping shift in p0 %.2e", bad,
              scenarios, max_iter, worst_shift)};
}

// 8. Without link loss both modes are the same model.
Outcome reduction_identity() {
  int bad = 0, checked = 0;
  for (int n : {5, 10, 50}) {
    for (double lambda : grid()) {
      PerformanceReport m = report(n, lambda, Mode::kMacOnly, 0.0);
      const PerformanceReport p = report(n, lambda, Mode::kPhyMac, 0.0);
      m.mode = Mode::kPhyMac;
      ++checked;
      bad += !(m == p);
    }
  }
  return {bad == 0, fmt("%d of %d reports differ", bad, checked)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double budget_s;  // runtime limit; 0 when none
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion K]\n", argv[0]);
      return 64;
    }
  }

  const std::vector<Criterion> criteria{
      {"mode degradation at N=10", mode_degradation, 60.0},
      {"delay gap near lambda=11", delay_gap, 0.0},
      {"density trends", density_trends, 0.0},
      {"M/M/1/K oracle", queue_oracle, 1.0},
      {"analytic vs simulator", simulator_agreement, 300.0},
      {"PHY oracle", phy_oracle, 30.0},
      {"fixed-point robustness", fixed_point_robustness, 0.0},
      {"reduction identity", reduction_identity, 0.0},
  };
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 64;
  }

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only && static_cast<int>(k) + 1 != only) continue;
    const auto& c = criteria[k];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = c.run();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.2f s", dt);
    if (c.budget_s > 0.0) {
      timing += fmt(" of %.0f s", c.budget_s);
      if (dt > c.budget_s) {
        o.pass = false;
        o.detail += " [over time budget]";
      }
    }
    std::printf("%s C%zu %-26s (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, c.name,
                timing.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
