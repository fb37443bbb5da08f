#include "wpan/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wpan {
namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double rel_diff(double analytic, double simulated) {
  if (simulated == 0.0) return analytic == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (analytic - simulated) / simulated;
}

}  // namespace

SweepSpec SweepSpec::from_traffic(const TrafficSpec& traffic) {
  SweepSpec s;
  s.lambda_start = traffic.lambda_start;
  s.lambda_end = traffic.lambda_end;
  s.lambda_step = traffic.lambda_step;
  s.node_counts = traffic.node_counts;
  return s;
}

void SweepSpec::validate() const {
  if (!(lambda_step > 0.0)) throw std::invalid_argument("sweep: lambda step must be > 0");
  if (!(lambda_start > 0.0)) throw std::invalid_argument("sweep: lambda start must be > 0");
  if (lambda_start > lambda_end) throw std::invalid_argument("sweep: lambda start exceeds end");
  if (node_counts.empty()) throw std::invalid_argument("sweep: node count list is empty");
  if (modes.empty()) throw std::invalid_argument("sweep: mode list is empty");
  for (int n : node_counts) {
    if (n < 1) throw std::invalid_argument("sweep: node counts must be >= 1");
  }
}

std::vector<double> lambda_grid(double start, double end, double step) {
  std::vector<double> grid;
  const auto count = static_cast<std::int64_t>(std::floor((end - start) / step * (1.0 + 1e-9) + 1e-9));
  for (std::int64_t k = 0; k <= count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

SweepResult run_sweep(const Config& config, const SweepSpec& spec, const PeEstimate& pe) {
  spec.validate();
  const std::vector<double> grid = lambda_grid(spec.lambda_start, spec.lambda_end, spec.lambda_step);

  std::vector<Scenario> scenarios;
  for (Mode mode : spec.modes) {
    for (int n : spec.node_counts) {
      MacParams mac = config.mac;
      mac.n_nodes = n;
      for (double lambda : grid) scenarios.push_back(Scenario::make(mac, lambda, mode, pe.p_e));
    }
  }

  SweepResult result;
  result.pe = pe;
  result.rows.resize(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());

  if (!spec.trace_dir.empty()) std::filesystem::create_directories(spec.trace_dir);

  const auto evaluate = [&](std::size_t i) {
    try {
      const Scenario& sc = scenarios[i];
      ConvergeOptions opt = spec.converge;
      opt.record_trace = !spec.trace_dir.empty();
      const ConvergedPoint pt = converge(sc, opt);
      SweepRow row;
      row.report = make_report(sc, pt);
      if (opt.record_trace) {
        char name[96];
        std::snprintf(name, sizeof name, "trace_%s_n%d_l%s.csv", to_string(sc.mode).c_str(),
                      sc.mac.n_nodes, num(sc.lambda).c_str());
        std::ofstream out(spec.trace_dir / name);
        write_driver_trace_csv(out, pt.trace);
      }
      if (spec.sim) {
        sim::SimConfig sc_cfg;
        sc_cfg.horizon_slots = spec.sim_slots;
        sc_cfg.seed = spec.seed;
        row.sim = sim::run(sc, sc_cfg);
      }
      result.rows[i] = std::move(row);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, scenarios.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) evaluate(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& row : result.rows) {
    if (row.report.status != ConvergeStatus::kConverged) result.all_converged = false;
  }
  return result;
}

std::vector<DelayGap> max_delay_gaps(const SweepResult& result) {
  // (N, lambda) -> delay for each mode
  std::map<std::pair<int, double>, std::pair<std::optional<double>, std::optional<double>>> by_point;
  for (const auto& row : result.rows) {
    auto& slot = by_point[{row.report.n_nodes, row.report.lambda}];
    (row.report.mode == Mode::kMacOnly ? slot.first : slot.second) = row.report.delay_s;
  }
  std::map<int, DelayGap> best;
  for (const auto& [key, delays] : by_point) {
    if (!delays.first || !delays.second) continue;
    const double gap = *delays.second - *delays.first;
    auto it = best.find(key.first);
    if (it == best.end() || gap > it->second.gap_s) best[key.first] = {key.first, key.second, gap};
  }
  std::vector<DelayGap> out;
  for (const auto& [n, g] : best) out.push_back(g);
  return out;
}

void write_csv(std::ostream& out, const SweepResult& result) {
  const bool with_sim = !result.rows.empty() && result.rows.front().sim.has_value();
  out << csv_header() << ",status";
  if (with_sim) {
    out << ",sim_reliability,sim_reliability_ci,sim_et_s,sim_et_ci,sim_delay_s,sim_delay_ci,"
           "sim_tau,sim_alpha,sim_beta,rel_diff_reliability,rel_diff_et,rel_diff_delay";
  }
  out << '\n';
  for (const auto& row : result.rows) {
    out << to_csv_row(row.report) << ',' << to_string(row.report.status);
    if (with_sim && row.sim) {
      const auto& s = *row.sim;
      out << ',' << num(s.reliability.mean) << ',' << num(s.reliability.ci_halfwidth) << ','
          << num(s.service_s.mean) << ',' << num(s.service_s.ci_halfwidth) << ','
          << num(s.sojourn_s.mean) << ',' << num(s.sojourn_s.ci_halfwidth) << ','
          << num(s.tau.mean) << ',' << num(s.alpha.mean) << ',' << num(s.beta.mean) << ','
          << num(rel_diff(row.report.reliability, s.reliability.mean)) << ','
          << num(rel_diff(row.report.et_s, s.service_s.mean)) << ','
          << num(rel_diff(row.report.delay_s, s.sojourn_s.mean));
    }
    out << '\n';
  }
}

std::string summary(const SweepResult& result) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "link loss P_e = %.6f (std error %.2e, %zu samples)\n",
                result.pe.p_e, result.pe.std_error, result.pe.n_samples);
  out << buf;
  std::size_t failed = 0;
  for (const auto& r : result.rows) failed += r.report.status != ConvergeStatus::kConverged;
  std::snprintf(buf, sizeof buf, "scenarios: %zu, not converged: %zu\n", result.rows.size(), failed);
  out << buf;
  for (const auto& g : max_delay_gaps(result)) {
    std::snprintf(buf, sizeof buf,
                  "N=%d: max delay gap phy_mac - mac_only = %.3f ms at lambda = %g frames/s\n",
                  g.n_nodes, g.gap_s * 1e3, g.lambda);
    out << buf;
  }
  return out.str();
}

}  // namespace wpan
