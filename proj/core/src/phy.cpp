#include "wpan/phy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "wpan/rng.hpp"

namespace wpan {
namespace {

constexpr double kThermalNoiseDbmPerHz = -174.0;
constexpr std::size_t kChunkSamples = 2048;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Roots of P_n by Newton iteration from the Chebyshev-like initial guess.
GaussLegendre gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z_prev = z;
      z = z_prev - p1 / dp;
      if (std::abs(z - z_prev) < 1e-15) break;
    }
    gl.nodes[i] = -z;
    gl.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  return gl;
}

struct DistanceGrid {
  std::vector<double> base_snr_db;  // deterministic link budget at each node
  std::vector<double> weights;      // normalized so they sum to 1
};

DistanceGrid make_grid(const PhyParams& phy, int panels, int order) {
  const GaussLegendre gl = gauss_legendre(order);
  DistanceGrid g;
  const double span = phy.d_max_m - phy.d_min_m;
  const double width = span / panels;
  const double noise = mean_noise_floor_dbm(phy);
  for (int p = 0; p < panels; ++p) {
    const double a = phy.d_min_m + p * width;
    for (int k = 0; k < order; ++k) {
      const double d = a + 0.5 * width * (gl.nodes[k] + 1.0);
      g.base_snr_db.push_back(phy.tx_power_dbm - path_loss_db(d, phy) - noise);
      g.weights.push_back(0.5 * width * gl.weights[k] / span);
    }
  }
  return g;
}

double grid_average(const DistanceGrid& g, const PhyParams& phy, double offset_db) {
  double acc = 0.0;
  for (std::size_t k = 0; k < g.weights.size(); ++k) {
    acc += g.weights[k] * packet_reception_rate(g.base_snr_db[k] + offset_db, phy);
  }
  return acc;
}

}  // namespace

double path_loss_db(double distance_m, const PhyParams& phy) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss_db: distance must be > 0");
  return phy.ref_loss_db + 10.0 * phy.path_loss_exp * std::log10(distance_m / phy.ref_distance_m);
}

double mean_noise_floor_dbm(const PhyParams& phy) {
  return kThermalNoiseDbmPerHz + 10.0 * std::log10(phy.bandwidth_hz) + phy.noise_figure_db;
}

double snr_db(const LinkSample& s, const PhyParams& phy) {
  return s.tx_power_dbm - path_loss_db(s.distance_m, phy) - s.shadowing_db - s.noise_floor_dbm;
}

double bit_error_prob(double snr, const PhyParams& phy) {
  if (snr == -std::numeric_limits<double>::infinity()) return 0.5;
  const double gamma = db_to_linear(snr);
  const double ratio = phy.bandwidth_hz / phy.data_rate_bps;
  switch (phy.modulation) {
    case Modulation::kNcfsk: return 0.5 * std::exp(-0.5 * gamma * ratio);
    case Modulation::kBpsk: return 0.5 * std::erfc(std::sqrt(gamma * ratio));
  }
  return 0.5;
}

double encoded_frame_bits(const PhyParams& phy) {
  return phy.preamble_bits + phy.encoding_factor * (phy.frame_bits - phy.preamble_bits);
}

double packet_reception_rate_from_ber(double ber, const PhyParams& phy) {
  if (ber <= 0.0) return 1.0;
  if (ber >= 1.0) return 0.0;
  return std::exp(encoded_frame_bits(phy) * std::log1p(-ber));
}

double packet_reception_rate(double snr, const PhyParams& phy) {
  return packet_reception_rate_from_ber(bit_error_prob(snr, phy), phy);
}

double distance_averaged_prr(const PhyParams& phy, double snr_offset_db, int panels, int order) {
  return grid_average(make_grid(phy, panels, order), phy, snr_offset_db);
}

PeEstimate expected_pe(const PhyParams& phy, const PeSamplerConfig& sampler, unsigned workers) {
  phy.validate();
  sampler.validate();
  const DistanceGrid grid = make_grid(phy, sampler.gl_panels, sampler.gl_order);

  const bool random = phy.shadowing_std_db > 0.0 || phy.tx_power_std_db > 0.0 ||
                      phy.noise_param_db > 0.0;
  if (!random) {
    const double prr = grid_average(grid, phy, 0.0);
    return {std::clamp(1.0 - prr, 0.0, 1.0), 0.0, 0};
  }

  // Fixed-size chunks, each with its own derived stream, reduced in index
  // order: the sum is identical for any worker count.
  const std::size_t n = sampler.n_samples;
  const std::size_t n_chunks = (n + kChunkSamples - 1) / kChunkSamples;
  std::vector<double> sums(n_chunks, 0.0);
  std::vector<double> sq_sums(n_chunks, 0.0);

  const auto run_chunk = [&](std::size_t c) {
    auto rng = make_stream(sampler.seed, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t begin = c * kChunkSamples;
    const std::size_t end = std::min(n, begin + kChunkSamples);
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double shadow = phy.shadowing_std_db * normal(rng);
      const double tx_dev = phy.tx_power_std_db * normal(rng);
      const double noise_dev = phy.noise_param_db * normal(rng);
      const double prr = grid_average(grid, phy, tx_dev - shadow - noise_dev);
      if (!std::isfinite(prr)) throw std::runtime_error("expected_pe: non-finite PRR sample");
      s += prr;
      s2 += prr * prr;
    }
    sums[c] = s;
    sq_sums[c] = s2;
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = w; c < n_chunks; c += workers) run_chunk(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    s += sums[c];
    s2 += sq_sums[c];
  }
  const double mean = s / n;
  const double var = n > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1)) : 0.0;
  return {std::clamp(1.0 - mean, 0.0, 1.0), std::sqrt(var / n), n};
}

void write_pe_cache(const std::filesystem::path& path, const PeSamplerConfig& sampler,
                    const PeEstimate& estimate) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write P_e cache: " + path.string());
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g", estimate.p_e, estimate.std_error);
  out << "seed,n_samples,p_e,std_error\n"
      << sampler.seed << ',' << estimate.n_samples << ',' << buf << '\n';
}

std::optional<PeEstimate> read_pe_cache(const std::filesystem::path& path,
                                        const PeSamplerConfig& sampler) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string header;
  std::string row;
  if (!std::getline(in, header) || header != "seed,n_samples,p_e,std_error") return std::nullopt;
  if (!std::getline(in, row)) return std::nullopt;
  std::istringstream ss(row);
  std::uint64_t seed = 0;
  std::size_t n = 0;
  PeEstimate e;
  char c1 = 0, c2 = 0, c3 = 0;
  if (!(ss >> seed >> c1 >> n >> c2 >> e.p_e >> c3 >> e.std_error)) return std::nullopt;
  if (seed != sampler.seed) return std::nullopt;
  // n_samples is 0 for the pure quadrature path.
  if (n != 0 && n != sampler.n_samples) return std::nullopt;
  e.n_samples = n;
  return e;
}

}  // namespace wpan
