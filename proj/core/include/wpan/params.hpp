#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpan {

/// Thrown when a configuration document is malformed or a parameter
/// violates one of its invariants. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bit error curve used by the radio reception model.
enum class Modulation {
  kNcfsk,  ///< non-coherent FSK: 0.5 * exp(-(snr/2) * B/R)
  kBpsk,   ///< coherent BPSK: 0.5 * erfc(sqrt(snr * B/R))
};

/// Radio and channel constants for the link-loss model.
struct PhyParams {
  double tx_power_dbm = 0.0;
  double tx_power_std_db = 5.0;
  double noise_figure_db = 23.0;
  /// Standard deviation of the per-node noise floor (hardware asymmetry).
  double noise_param_db = 15.0;
  double bandwidth_hz = 30e3;
  double path_loss_exp = 4.0;
  double shadowing_std_db = 4.0;
  double ref_distance_m = 1.0;
  double ref_loss_db = 55.0;
  double d_min_m = 1.0;
  double d_max_m = 20.0;
  int preamble_bits = 40;
  int frame_bits = 888;
  double data_rate_bps = 19200.0;
  double encoding_factor = 1.0;
  Modulation modulation = Modulation::kNcfsk;

  void validate() const;
  bool operator==(const PhyParams&) const = default;
};

/// Slotted CSMA/CA, frame and buffer constants.
struct MacParams {
  int n_nodes = 10;
  int mac_min_be = 3;
  int mac_max_be = 5;
  int max_csma_backoffs = 4;  // m
  int max_retries = 3;        // n
  int w0 = 8;
  int frame_payload_bits = 800;
  int mac_overhead_bits = 48;
  int ack_bits = 88;
  int slot_bits = 80;
  double data_rate_bps = 19200.0;
  int queue_capacity = 51;
  double ifs_s = 640e-6;
  double turnaround_s = 192e-6;

  void validate() const;
  bool operator==(const MacParams&) const = default;
};

/// Frame lengths expressed in slots.
struct DerivedFrame {
  int l_slots = 0;
  int l_ack_slots = 0;
  double slot_duration_s = 0.0;
};

DerivedFrame derive_frame(const MacParams& mac);

/// Offered-load grid and node counts for a sweep.
struct TrafficSpec {
  double lambda_start = 0.5;
  double lambda_end = 25.0;
  double lambda_step = 0.5;
  std::vector<int> node_counts{5, 10, 50};

  void validate() const;
  bool operator==(const TrafficSpec&) const = default;
};

/// Monte Carlo settings for averaging the link loss over the Gaussian
/// dimensions (shadowing, tx power and noise floor asymmetry).
struct PeSamplerConfig {
  std::uint64_t seed = 1;
  std::size_t n_samples = 100000;
  int gl_panels = 8;
  int gl_order = 16;

  void validate() const;
  bool operator==(const PeSamplerConfig&) const = default;
};

struct Config {
  PhyParams phy;
  MacParams mac;
  TrafficSpec traffic;
  PeSamplerConfig sampler;

  bool operator==(const Config&) const = default;
};

/// Built-in parameter set. ref_loss_db has no standard value; 55 dB at 1 m
/// is used here and documented in configs/defaults.conf.
Config default_config();

/// Parses a flat `key = value` document (`#` starts a comment). Keys that
/// are absent keep their built-in default, except `ref_loss_db`, which
/// must be given explicitly when `require_ref_loss` is set.
Config parse_config(std::istream& in, bool require_ref_loss = true);
Config parse_config_text(const std::string& text, bool require_ref_loss = true);
Config load_config(const std::filesystem::path& path);

/// Serializes every key so that parse_config(to_config_text(c)) == c.
std::string to_config_text(const Config& config);

std::string to_string(Modulation m);

}  // namespace wpan
