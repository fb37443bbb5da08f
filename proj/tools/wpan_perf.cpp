// wpan-perf: sweeps offered load and node count for both model variants
// and writes one CSV row per operating point.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wpan/params.hpp"
#include "wpan/phy.hpp"
#include "wpan/sweep.hpp"

namespace {

// START:END:STEP
bool parse_lambda(const std::string& text, wpan::SweepSpec& spec) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  if (parts.size() != 3) return false;
  spec.lambda_start = parts[0];
  spec.lambda_end = parts[1];
  spec.lambda_step = parts[2];
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-node delay, failure, reliability and throughput of a slotted CSMA/CA star network"};

  std::string config_path;
  std::vector<int> nodes;
  std::string lambda_text;
  std::string mode = "both";
  std::string out_path = "-";
  bool with_sim = false;
  std::int64_t sim_slots = 1'000'000;
  std::optional<std::uint64_t> seed;
  std::string trace_dir;
  std::string pe_cache;
  unsigned workers = 0;

  app.add_option("--config", config_path, "Parameter document (key = value)")->check(CLI::ExistingFile);
  app.add_option("--nodes", nodes, "Node counts, e.g. 5,10,50")->delimiter(',');
  app.add_option("--lambda", lambda_text, "Offered load grid START:END:STEP in frames/s");
  app.add_option("--mode", mode, "mac-only, phy-mac or both")
      ->check(CLI::IsMember({"mac-only", "phy-mac", "both", "mac_only", "phy_mac"}));
  app.add_option("--out", out_path, "CSV output path, '-' for stdout");
  app.add_flag("--sim", with_sim, "Also run the slot-level simulator at every point");
  app.add_option("--sim-slots", sim_slots, "Simulator horizon in slots")->check(CLI::Range(1000, 2'000'000'000));
  app.add_option("--seed", seed, "Seed for the simulator and the link-loss sampler");
  app.add_option("--trace", trace_dir, "Directory for per-scenario convergence traces");
  app.add_option("--pe-cache", pe_cache, "CSV sidecar caching the link-loss estimate");
  app.add_option("--workers", workers, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  wpan::Config config;
  wpan::SweepSpec spec;
  try {
    config = config_path.empty() ? wpan::default_config() : wpan::load_config(config_path);
    if (seed) config.sampler.seed = *seed;
    spec = wpan::SweepSpec::from_traffic(config.traffic);
    if (!nodes.empty()) spec.node_counts = nodes;
    if (!lambda_text.empty() && !parse_lambda(lambda_text, spec)) {
      std::cerr << "error: --lambda expects START:END:STEP, got '" << lambda_text << "'\n";
      return 1;
    }
    if (mode == "both") {
      spec.modes = {wpan::Mode::kMacOnly, wpan::Mode::kPhyMac};
    } else {
      spec.modes = {wpan::parse_mode(mode)};
    }
    spec.sim = with_sim;
    spec.sim_slots = sim_slots;
    if (seed) spec.seed = *seed;
    spec.trace_dir = trace_dir;
    spec.workers = workers;
    spec.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  wpan::PeEstimate pe;
  std::optional<wpan::PeEstimate> cached;
  if (!pe_cache.empty()) cached = wpan::read_pe_cache(pe_cache, config.sampler);
  if (cached) {
    pe = *cached;
  } else {
    pe = wpan::expected_pe(config.phy, config.sampler, workers);
    if (!pe_cache.empty()) wpan::write_pe_cache(pe_cache, config.sampler, pe);
  }

  wpan::SweepResult result;
  try {
    result = wpan::run_sweep(config, spec, pe);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  if (out_path == "-") {
    wpan::write_csv(std::cout, result);
    std::cerr << wpan::summary(result);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return 1;
    }
    wpan::write_csv(out, result);
    std::cout << wpan::summary(result);
  }
  return result.all_converged ? 0 : 2;
}
