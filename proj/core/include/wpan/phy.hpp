#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "wpan/params.hpp"

namespace wpan {

/// One realization of a sender/receiver pair.
struct LinkSample {
  double distance_m = 1.0;
  double tx_power_dbm = 0.0;
  double noise_floor_dbm = -100.0;
  double shadowing_db = 0.0;
};

/// Averaged link loss. std_error is zero when no Gaussian dimension is
/// active and the estimate is a pure quadrature.
struct PeEstimate {
  double p_e = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Log-distance path loss without the shadowing term.
double path_loss_db(double distance_m, const PhyParams& phy);

/// Thermal noise over the receiver bandwidth plus the noise figure.
double mean_noise_floor_dbm(const PhyParams& phy);

double snr_db(const LinkSample& sample, const PhyParams& phy);

/// Bit error probability of the configured modulation at the given SNR.
/// Strictly decreasing in snr_db, range (0, 0.5].
double bit_error_prob(double snr_db, const PhyParams& phy);

/// Frame success probability for a given bit error probability:
/// preamble bits are sent raw, the rest is expanded by encoding_factor.
double packet_reception_rate_from_ber(double ber, const PhyParams& phy);

double packet_reception_rate(double snr_db, const PhyParams& phy);

/// Number of channel bits one frame occupies (preamble + encoded body).
double encoded_frame_bits(const PhyParams& phy);

/// Mean PRR over distance uniform on [d_min_m, d_max_m] at a fixed SNR
/// offset (dB) added to the deterministic link budget. Composite
/// Gauss-Legendre with `panels` x `order` nodes.
double distance_averaged_prr(const PhyParams& phy, double snr_offset_db, int panels, int order);

/// Link loss probability 1 - E[PRR]: quadrature over distance, Monte Carlo
/// over shadowing, tx power and noise floor. The result depends only on
/// (phy, sampler) and not on the number of worker threads.
PeEstimate expected_pe(const PhyParams& phy, const PeSamplerConfig& sampler, unsigned workers = 0);

/// CSV sidecar with columns seed,n_samples,p_e,std_error.
void write_pe_cache(const std::filesystem::path& path, const PeSamplerConfig& sampler,
                    const PeEstimate& estimate);
/// Returns the cached estimate when the file matches seed and sample count.
std::optional<PeEstimate> read_pe_cache(const std::filesystem::path& path,
                                        const PeSamplerConfig& sampler);

}  // namespace wpan
