#include "wpan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "wpan/rng.hpp"

namespace wpan::sim {
namespace {

double student_t975(int dof) {
  static constexpr double kTable[] = {0.0,   12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                      2.306, 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
                                      2.120, 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
                                      2.064, 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof <= 0) return std::numeric_limits<double>::infinity();
  if (dof <= 30) return kTable[dof];
  return 1.96;
}

enum class Phase { kIdle, kWait, kBackoff, kCca2, kTx, kAckWait };

struct Frame {
  double arrival_s = 0.0;
  double service_start_s = 0.0;
};

struct Node {
  std::deque<Frame> frames;
  std::mt19937_64 rng;
  double next_arrival_s = 0.0;
  Phase phase = Phase::kIdle;
  int stage = 0;
  int counter = 0;
  int retry = 0;
  std::int64_t resume_slot = 0;
  bool fresh_frame = false;
  std::int64_t tx_start = 0;
  std::int64_t tx_end = 0;  // first slot after the data
  bool tx_ok = false;
  std::int64_t ack_first = 0;
  std::int64_t ack_last = -1;
  double done_s = 0.0;
};

struct Cell {
  std::int64_t slot = -1;
  int data = 0;
  int ack = 0;
};

// Slot-indexed channel occupancy. Entries are stamped with their slot so
// stale cells read as empty.
class Channel {
 public:
  explicit Channel(std::size_t size) : cells_(size) {}

  Cell& at(std::int64_t slot) {
    Cell& c = cells_[static_cast<std::size_t>(slot) % cells_.size()];
    if (c.slot != slot) c = Cell{slot, 0, 0};
    return c;
  }
  bool busy(std::int64_t slot) {
    const Cell& c = at(slot);
    return c.data > 0 || c.ack > 0;
  }

 private:
  std::vector<Cell> cells_;
};

// Per-batch accumulators; estimates are ratio-of-totals with batch-means
// half-widths.
struct Batch {
  double generated = 0;
  double delivered = 0;
  double blocked = 0;
  double service_sum = 0;
  double sojourn_sum = 0;
  double exits = 0;
  double occupancy_sum = 0;
  double node_slots = 0;
  double busy_node_slots = 0;
  double cca1 = 0;
  double busy1 = 0;
  double cca2 = 0;
  double busy2 = 0;
};

template <typename Num, typename Den>
Estimate ratio_estimate(const std::vector<Batch>& batches, Num num, Den den) {
  double tn = 0.0;
  double td = 0.0;
  std::vector<double> per;
  for (const auto& b : batches) {
    tn += num(b);
    td += den(b);
    if (den(b) > 0) per.push_back(num(b) / den(b));
  }
  Estimate e;
  e.mean = td > 0 ? tn / td : 0.0;
  if (per.size() >= 2) {
    double mu = 0.0;
    for (double v : per) mu += v;
    mu /= static_cast<double>(per.size());
    double var = 0.0;
    for (double v : per) var += (v - mu) * (v - mu);
    var /= static_cast<double>(per.size() - 1);
    e.ci_halfwidth = student_t975(static_cast<int>(per.size()) - 1) *
                     std::sqrt(var / static_cast<double>(per.size()));
  } else {
    e.ci_halfwidth = std::numeric_limits<double>::infinity();
  }
  e.stable = e.ci_halfwidth <= 0.2 * std::abs(e.mean);
  return e;
}

}  // namespace

Estimate pool(std::span<const Estimate> runs) {
  Estimate e;
  if (runs.empty()) return e;
  double var = 0.0;
  for (const auto& r : runs) {
    e.mean += r.mean;
    var += r.ci_halfwidth * r.ci_halfwidth;
  }
  const double k = static_cast<double>(runs.size());
  e.mean /= k;
  e.ci_halfwidth = std::sqrt(var) / k;
  e.stable = e.ci_halfwidth <= 0.2 * std::abs(e.mean);
  return e;
}

SimStats run(const Scenario& scenario, const SimConfig& cfg) {
  scenario.validate();
  if (cfg.horizon_slots < 1000) throw std::invalid_argument("sim::run: horizon must be >= 1000 slots");
  if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0)) {
    throw std::invalid_argument("sim::run: warmup fraction must be in [0,1)");
  }
  if (cfg.batches < 2) throw std::invalid_argument("sim::run: need at least 2 batches");

  const MacParams& mac = scenario.mac;
  const DerivedFrame frame = derive_frame(mac);
  const double slot_s = frame.slot_duration_s;
  const int n_nodes = mac.n_nodes;
  const int capacity = mac.queue_capacity;
  const int max_stage = mac.max_csma_backoffs;
  const int max_retry = mac.max_retries;
  const double pe = scenario.phy_pe;
  const double lambda = scenario.lambda;
  const auto window = [&](int stage) { return 1 << std::min(mac.mac_min_be + stage, mac.mac_max_be); };
  // ACK wait (turnaround + ACK) and IFS, in seconds after the data ends.
  const double post_tx_s = mac.turnaround_s + frame.l_ack_slots * slot_s + mac.ifs_s;

  const std::int64_t horizon = cfg.horizon_slots;
  const std::int64_t warm_slot = static_cast<std::int64_t>(std::floor(horizon * cfg.warmup_fraction));
  const double warm_s = warm_slot * slot_s;
  const std::int64_t window_slots = horizon - warm_slot;
  const int n_batches = cfg.batches;
  const auto batch_of_slot = [&](std::int64_t s) -> int {
    if (s < warm_slot) return -1;
    return static_cast<int>(std::min<std::int64_t>(n_batches - 1, (s - warm_slot) * n_batches / window_slots));
  };
  const auto batch_of_time = [&](double t) -> int {
    if (t < warm_s) return -1;
    return batch_of_slot(static_cast<std::int64_t>(std::floor(t / slot_s)));
  };

  SimStats st;
  std::vector<Batch> batches(static_cast<std::size_t>(n_batches));
  Channel channel(4096);

  std::vector<Node> nodes(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    auto& nd = nodes[static_cast<std::size_t>(i)];
    nd.rng = make_stream(cfg.seed, static_cast<std::uint64_t>(i));
  }
  const auto exp_gap = [lambda](std::mt19937_64& rng) {
    return -std::log1p(-uniform01(rng)) / lambda;
  };
  const auto draw_backoff = [&](Node& nd, int stage) {
    return static_cast<int>(nd.rng() % static_cast<std::uint64_t>(window(stage)));
  };
  for (auto& nd : nodes) nd.next_arrival_s = exp_gap(nd.rng);

  // A frame leaves the MAC at time t; the next one (if any) starts its
  // backoff at the first slot boundary not before t.
  const auto finish_frame = [&](Node& nd, double t, bool delivered) {
    const Frame f = nd.frames.front();
    nd.frames.pop_front();
    if (const int b = batch_of_time(t); b >= 0) {
      auto& bt = batches[static_cast<std::size_t>(b)];
      bt.exits += 1;
      bt.service_sum += t - f.service_start_s;
      bt.sojourn_sum += t - f.arrival_s;
      if (delivered) bt.delivered += 1;
    }
    if (nd.frames.empty()) {
      nd.phase = Phase::kIdle;
    } else {
      nd.phase = Phase::kWait;
      nd.fresh_frame = true;
      nd.resume_slot = static_cast<std::int64_t>(std::ceil(t / slot_s - 1e-9));
    }
  };

  const auto complete_attempt = [&](Node& nd) {
    bool ok = nd.tx_ok;
    if (ok && cfg.ack_collisions) {
      for (std::int64_t k = nd.ack_first; k <= nd.ack_last; ++k) {
        if (channel.at(k).data > 0) {
          ok = false;
          ++st.ack_lost;
          break;
        }
      }
    }
    if (ok) {
      ++st.delivered;
      finish_frame(nd, nd.done_s, true);
      return;
    }
    ++nd.retry;
    if (nd.retry > max_retry) {
      ++st.cr_discarded;
      finish_frame(nd, nd.done_s, false);
      return;
    }
    nd.phase = Phase::kWait;
    nd.fresh_frame = false;
    nd.stage = 0;
    nd.counter = draw_backoff(nd, 0);
    nd.resume_slot = static_cast<std::int64_t>(std::ceil(nd.done_s / slot_s - 1e-9));
  };

  const auto on_busy = [&](Node& nd, std::int64_t s) {
    ++nd.stage;
    if (nd.stage > max_stage) {
      ++st.cf_discarded;
      finish_frame(nd, (s + 1) * slot_s, false);
      return;
    }
    nd.phase = Phase::kBackoff;
    nd.counter = draw_backoff(nd, nd.stage);
  };

  for (std::int64_t s = 0; s < horizon; ++s) {
    const double t = s * slot_s;
    const int b = batch_of_slot(s);
    Batch* bt = b >= 0 ? &batches[static_cast<std::size_t>(b)] : nullptr;
    const bool busy_now = channel.busy(s);

    for (auto& nd : nodes) {
      // Arrivals and ACK-wait completions up to this boundary, in time order.
      for (;;) {
        const bool pending_done = nd.phase == Phase::kAckWait && nd.done_s <= t;
        const bool pending_arrival = nd.next_arrival_s <= t;
        if (!pending_done && !pending_arrival) break;
        if (pending_done && (!pending_arrival || nd.done_s <= nd.next_arrival_s)) {
          complete_attempt(nd);
          continue;
        }
        const double a = nd.next_arrival_s;
        ++st.generated;
        const int ab = batch_of_time(a);
        if (ab >= 0) batches[static_cast<std::size_t>(ab)].generated += 1;
        if (static_cast<int>(nd.frames.size()) >= capacity) {
          ++st.blocked;
          if (ab >= 0) batches[static_cast<std::size_t>(ab)].blocked += 1;
        } else {
          nd.frames.push_back({a, 0.0});
        }
        nd.next_arrival_s = a + exp_gap(nd.rng);
      }

      if (nd.phase == Phase::kIdle && !nd.frames.empty()) {
        nd.phase = Phase::kWait;
        nd.fresh_frame = true;
        nd.resume_slot = s;
      }
      if (nd.phase == Phase::kWait && s >= nd.resume_slot) {
        if (nd.fresh_frame) {
          nd.frames.front().service_start_s = t;
          nd.stage = 0;
          nd.retry = 0;
          nd.counter = draw_backoff(nd, 0);
        }
        nd.phase = Phase::kBackoff;
      }

      if (bt) {
        bt->node_slots += 1;
        bt->occupancy_sum += static_cast<double>(nd.frames.size());
        if (!nd.frames.empty()) bt->busy_node_slots += 1;
      }

      switch (nd.phase) {
        case Phase::kBackoff:
          if (nd.counter > 0) {
            --nd.counter;
            break;
          }
          if (bt) bt->cca1 += 1;
          if (busy_now) {
            if (bt) bt->busy1 += 1;
            on_busy(nd, s);
          } else {
            nd.phase = Phase::kCca2;
          }
          break;
        case Phase::kCca2:
          if (bt) bt->cca2 += 1;
          if (busy_now) {
            if (bt) bt->busy2 += 1;
            on_busy(nd, s);
          } else {
            nd.phase = Phase::kTx;
            nd.tx_start = s + 1;
            nd.tx_end = s + 1 + frame.l_slots;
            for (std::int64_t k = nd.tx_start; k < nd.tx_end; ++k) ++channel.at(k).data;
          }
          break;
        case Phase::kTx:
          // Decide the outcome during the last data slot: every overlapping
          // transmission has been registered by now, and the ACK slots are
          // still in the future for every node.
          if (s == nd.tx_end - 1) {
            ++st.attempts;
            bool collided = false;
            for (std::int64_t k = nd.tx_start; k < nd.tx_end; ++k) {
              if (channel.at(k).data > 1) {
                collided = true;
                break;
              }
            }
            bool lost = false;
            if (collided) {
              ++st.collided;
            } else if (pe > 0.0 && uniform01(nd.rng) < pe) {
              lost = true;
              ++st.phy_lost;
            }
            nd.tx_ok = !collided && !lost;
            const double end_s = nd.tx_end * slot_s;
            if (nd.tx_ok) {
              // The ACK covers every slot boundary inside its airtime.
              const double ack_begin = end_s + mac.turnaround_s;
              const double ack_end = ack_begin + frame.l_ack_slots * slot_s;
              nd.ack_first = static_cast<std::int64_t>(std::ceil(ack_begin / slot_s - 1e-9));
              nd.ack_last = static_cast<std::int64_t>(std::ceil(ack_end / slot_s - 1e-9)) - 1;
              for (std::int64_t k = nd.ack_first; k <= nd.ack_last; ++k) ++channel.at(k).ack;
            }
            nd.done_s = end_s + post_tx_s;
            nd.phase = Phase::kAckWait;
          }
          break;
        case Phase::kIdle:
        case Phase::kWait:
        case Phase::kAckWait:
          break;
      }
    }
  }

  for (const auto& nd : nodes) st.in_system_at_end += static_cast<std::int64_t>(nd.frames.size());

  st.window_s = window_slots * slot_s;
  st.reliability = ratio_estimate(batches, [](const Batch& b) { return b.delivered; },
                                  [](const Batch& b) { return b.generated; });
  st.p_blocking = ratio_estimate(batches, [](const Batch& b) { return b.blocked; },
                                 [](const Batch& b) { return b.generated; });
  st.service_s = ratio_estimate(batches, [](const Batch& b) { return b.service_sum; },
                                [](const Batch& b) { return b.exits; });
  st.sojourn_s = ratio_estimate(batches, [](const Batch& b) { return b.sojourn_sum; },
                                [](const Batch& b) { return b.exits; });
  st.occupancy = ratio_estimate(batches, [](const Batch& b) { return b.occupancy_sum; },
                                [](const Batch& b) { return b.node_slots; });
  st.tau = ratio_estimate(batches, [](const Batch& b) { return b.cca1; },
                          [](const Batch& b) { return b.busy_node_slots; });
  st.alpha = ratio_estimate(batches, [](const Batch& b) { return b.busy1; },
                            [](const Batch& b) { return b.cca1; });
  st.beta = ratio_estimate(batches, [](const Batch& b) { return b.busy2; },
                           [](const Batch& b) { return b.cca2; });
  double admitted = 0.0;
  double exits = 0.0;
  for (const auto& b : batches) {
    admitted += b.generated - b.blocked;
    exits += b.exits;
  }
  st.admitted_rate = admitted / (n_nodes * st.window_s);
  st.measured_frames = static_cast<std::int64_t>(exits);
  return st;
}

}  // namespace wpan::sim
