#include "wpan/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wpan {
namespace {

[[noreturn]] void violation(const std::string& key, const std::string& value,
                            const std::string& rule) {
  throw ConfigError("invariant violation: " + key + " = " + value + " (" + rule + ")");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void require(bool ok, const std::string& key, T value, const std::string& rule) {
  if (!ok) {
    if constexpr (std::is_floating_point_v<T>) {
      violation(key, fmt_double(value), rule);
    } else {
      violation(key, std::to_string(value), rule);
    }
  }
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("malformed value for " + key + ": '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || v < INT32_MIN || v > INT32_MAX) {
    throw ConfigError("malformed integer for " + key + ": '" + text + "'");
  }
  return static_cast<int>(v);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_int(key, trim(item)));
  }
  return out;
}

Modulation parse_modulation(const std::string& text) {
  if (text == "ncfsk") return Modulation::kNcfsk;
  if (text == "bpsk") return Modulation::kBpsk;
  throw ConfigError("malformed value for modulation: '" + text + "'");
}

}  // namespace

std::string to_string(Modulation m) {
  switch (m) {
    case Modulation::kNcfsk: return "ncfsk";
    case Modulation::kBpsk: return "bpsk";
  }
  return "ncfsk";
}

void PhyParams::validate() const {
  require(d_min_m > 0.0, "d_min_m", d_min_m, "must be > 0");
  require(d_max_m > d_min_m, "d_max_m", d_max_m, "must exceed d_min_m");
  require(shadowing_std_db >= 0.0, "shadowing_std_db", shadowing_std_db, "must be >= 0");
  require(tx_power_std_db >= 0.0, "tx_power_std_db", tx_power_std_db, "must be >= 0");
  require(noise_param_db >= 0.0, "noise_param_db", noise_param_db, "must be >= 0");
  require(bandwidth_hz > 0.0, "bandwidth_hz", bandwidth_hz, "must be > 0");
  require(data_rate_bps > 0.0, "data_rate_bps", data_rate_bps, "must be > 0");
  require(encoding_factor >= 1.0, "encoding_factor", encoding_factor, "must be >= 1");
  require(ref_distance_m > 0.0, "ref_distance_m", ref_distance_m, "must be > 0");
  require(preamble_bits >= 0, "preamble_bits", preamble_bits, "must be >= 0");
  require(frame_bits > 0, "frame_bits", frame_bits, "must be > 0");
  require(frame_bits >= preamble_bits, "frame_bits", frame_bits, "must include the preamble");
}

void MacParams::validate() const {
  require(n_nodes >= 1, "n_nodes", n_nodes, "must be >= 1");
  require(mac_min_be >= 0 && mac_min_be <= 30, "macMinBE", mac_min_be, "must be in [0,30]");
  require(mac_max_be >= mac_min_be && mac_max_be <= 30, "macMaxBE", mac_max_be,
          "must be in [macMinBE,30]");
  require(w0 == (1 << mac_min_be), "w0", w0, "must equal 2^macMinBE");
  require(max_csma_backoffs >= 0, "m_max_csma_backoffs", max_csma_backoffs, "must be >= 0");
  require(max_retries >= 0, "n_max_retries", max_retries, "must be >= 0");
  require(queue_capacity >= 1, "queue_capacity", queue_capacity, "must be >= 1");
  require(slot_bits > 0, "slot_bits", slot_bits, "must be > 0");
  require(frame_payload_bits >= 0, "frame_payload_bits", frame_payload_bits, "must be >= 0");
  require(mac_overhead_bits >= 0, "mac_overhead_bits", mac_overhead_bits, "must be >= 0");
  require(frame_payload_bits + mac_overhead_bits > 0, "frame_payload_bits", frame_payload_bits,
          "frame must be non-empty");
  require(ack_bits > 0, "ack_bits", ack_bits, "must be > 0");
  require(data_rate_bps > 0.0, "data_rate_bps", data_rate_bps, "must be > 0");
  require(ifs_s >= 0.0, "ifs_s", ifs_s, "must be >= 0");
  require(turnaround_s >= 0.0, "turnaround_s", turnaround_s, "must be >= 0");
}

void TrafficSpec::validate() const {
  require(lambda_step > 0.0, "lambda_step", lambda_step, "must be > 0");
  require(lambda_start > 0.0, "lambda_start", lambda_start, "must be > 0");
  require(lambda_start <= lambda_end, "lambda_end", lambda_end, "must be >= lambda_start");
  if (node_counts.empty()) violation("node_counts", "", "must be non-empty");
  for (int n : node_counts) require(n >= 1, "node_counts", n, "entries must be >= 1");
}

void PeSamplerConfig::validate() const {
  require(n_samples >= 1, "pe_samples", n_samples, "must be >= 1");
  require(gl_panels >= 1, "pe_gl_panels", gl_panels, "must be >= 1");
  require(gl_order >= 2 && gl_order <= 64, "pe_gl_order", gl_order, "must be in [2,64]");
}

DerivedFrame derive_frame(const MacParams& mac) {
  mac.validate();
  const auto ceil_div = [](int a, int b) { return (a + b - 1) / b; };
  DerivedFrame f;
  f.l_slots = ceil_div(mac.frame_payload_bits + mac.mac_overhead_bits, mac.slot_bits);
  f.l_ack_slots = ceil_div(mac.ack_bits, mac.slot_bits);
  f.slot_duration_s = static_cast<double>(mac.slot_bits) / mac.data_rate_bps;
  return f;
}

Config default_config() { return Config{}; }

Config parse_config(std::istream& in, bool require_ref_loss) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
    }
  }

  Config c = default_config();
  PhyParams& phy = c.phy;
  MacParams& mac = c.mac;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const auto dbl = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_double(k, v); };
  };
  const auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_int(k, v); };
  };

  const std::map<std::string, Setter> setters{
      {"tx_power_dbm", dbl(phy.tx_power_dbm)},
      {"tx_power_std_db", dbl(phy.tx_power_std_db)},
      {"noise_figure_db", dbl(phy.noise_figure_db)},
      {"noise_param_db", dbl(phy.noise_param_db)},
      {"bandwidth_hz", dbl(phy.bandwidth_hz)},
      {"path_loss_exp", dbl(phy.path_loss_exp)},
      {"shadowing_std_db", dbl(phy.shadowing_std_db)},
      {"ref_distance_m", dbl(phy.ref_distance_m)},
      {"ref_loss_db", dbl(phy.ref_loss_db)},
      {"d_min_m", dbl(phy.d_min_m)},
      {"d_max_m", dbl(phy.d_max_m)},
      {"preamble_bits", integer(phy.preamble_bits)},
      {"frame_bits", integer(phy.frame_bits)},
      {"encoding_factor", dbl(phy.encoding_factor)},
      {"modulation",
       [&phy](const std::string&, const std::string& v) { phy.modulation = parse_modulation(v); }},
      {"data_rate_bps",
       [&](const std::string& k, const std::string& v) {
         mac.data_rate_bps = phy.data_rate_bps = parse_double(k, v);
       }},
      {"phy_data_rate_bps", dbl(phy.data_rate_bps)},
      {"n_nodes", integer(mac.n_nodes)},
      {"macMinBE", integer(mac.mac_min_be)},
      {"macMaxBE", integer(mac.mac_max_be)},
      {"m_max_csma_backoffs", integer(mac.max_csma_backoffs)},
      {"n_max_retries", integer(mac.max_retries)},
      {"w0", integer(mac.w0)},
      {"frame_payload_bits", integer(mac.frame_payload_bits)},
      {"mac_overhead_bits", integer(mac.mac_overhead_bits)},
      {"ack_bits", integer(mac.ack_bits)},
      {"slot_bits", integer(mac.slot_bits)},
      {"queue_capacity", integer(mac.queue_capacity)},
      {"ifs_s", dbl(mac.ifs_s)},
      {"turnaround_s", dbl(mac.turnaround_s)},
      {"lambda_start", dbl(c.traffic.lambda_start)},
      {"lambda_end", dbl(c.traffic.lambda_end)},
      {"lambda_step", dbl(c.traffic.lambda_step)},
      {"node_counts",
       [&c](const std::string& k, const std::string& v) {
         c.traffic.node_counts = parse_int_list(k, v);
       }},
      {"pe_seed",
       [&c](const std::string& k, const std::string& v) {
         const auto* end = v.data() + v.size();
         auto [ptr, ec] = std::from_chars(v.data(), end, c.sampler.seed);
         if (ec != std::errc() || ptr != end) throw ConfigError("malformed integer for " + k);
       }},
      {"pe_samples",
       [&c](const std::string& k, const std::string& v) {
         const auto* end = v.data() + v.size();
         auto [ptr, ec] = std::from_chars(v.data(), end, c.sampler.n_samples);
         if (ec != std::errc() || ptr != end) throw ConfigError("malformed integer for " + k);
       }},
      {"pe_gl_panels", integer(c.sampler.gl_panels)},
      {"pe_gl_order", integer(c.sampler.gl_order)},
  };

  for (const auto& [key, value] : kv) {
    if (key == "data_rate_bps") setters.at(key)(key, value);
  }
  for (const auto& [key, value] : kv) {
    if (key == "data_rate_bps") continue;
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key: " + key);
    it->second(key, value);
  }

  if (require_ref_loss && !kv.contains("ref_loss_db")) {
    throw ConfigError("missing required key: ref_loss_db");
  }
  if (!kv.contains("w0")) mac.w0 = 1 << std::clamp(mac.mac_min_be, 0, 30);
  if (!kv.contains("frame_bits")) {
    phy.frame_bits = phy.preamble_bits + mac.frame_payload_bits + mac.mac_overhead_bits;
  }

  phy.validate();
  mac.validate();
  c.traffic.validate();
  c.sampler.validate();
  return c;
}

Config parse_config_text(const std::string& text, bool require_ref_loss) {
  std::istringstream in(text);
  return parse_config(in, require_ref_loss);
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse_config(in, true);
}

std::string to_config_text(const Config& c) {
  std::ostringstream out;
  const auto put = [&out](const char* key, const std::string& v) {
    out << key << " = " << v << '\n';
  };
  const auto d = [](double v) { return fmt_double(v); };
  const auto i = [](auto v) { return std::to_string(v); };

  out << "# PHY\n";
  put("tx_power_dbm", d(c.phy.tx_power_dbm));
  put("tx_power_std_db", d(c.phy.tx_power_std_db));
  put("noise_figure_db", d(c.phy.noise_figure_db));
  put("noise_param_db", d(c.phy.noise_param_db));
  put("bandwidth_hz", d(c.phy.bandwidth_hz));
  put("path_loss_exp", d(c.phy.path_loss_exp));
  put("shadowing_std_db", d(c.phy.shadowing_std_db));
  put("ref_distance_m", d(c.phy.ref_distance_m));
  put("ref_loss_db", d(c.phy.ref_loss_db));
  put("d_min_m", d(c.phy.d_min_m));
  put("d_max_m", d(c.phy.d_max_m));
  put("preamble_bits", i(c.phy.preamble_bits));
  put("frame_bits", i(c.phy.frame_bits));
  put("encoding_factor", d(c.phy.encoding_factor));
  put("modulation", to_string(c.phy.modulation));
  put("data_rate_bps", d(c.mac.data_rate_bps));
  put("phy_data_rate_bps", d(c.phy.data_rate_bps));
  out << "# MAC\n";
  put("n_nodes", i(c.mac.n_nodes));
  put("macMinBE", i(c.mac.mac_min_be));
  put("macMaxBE", i(c.mac.mac_max_be));
  put("m_max_csma_backoffs", i(c.mac.max_csma_backoffs));
  put("n_max_retries", i(c.mac.max_retries));
  put("w0", i(c.mac.w0));
  put("frame_payload_bits", i(c.mac.frame_payload_bits));
  put("mac_overhead_bits", i(c.mac.mac_overhead_bits));
  put("ack_bits", i(c.mac.ack_bits));
  put("slot_bits", i(c.mac.slot_bits));
  put("queue_capacity", i(c.mac.queue_capacity));
  put("ifs_s", d(c.mac.ifs_s));
  put("turnaround_s", d(c.mac.turnaround_s));
  out << "# Traffic\n";
  put("lambda_start", d(c.traffic.lambda_start));
  put("lambda_end", d(c.traffic.lambda_end));
  put("lambda_step", d(c.traffic.lambda_step));
  std::string nodes;
  for (std::size_t k = 0; k < c.traffic.node_counts.size(); ++k) {
    if (k) nodes += ",";
    nodes += std::to_string(c.traffic.node_counts[k]);
  }
  put("node_counts", nodes);
  out << "# Link loss sampler\n";
  put("pe_seed", i(c.sampler.seed));
  put("pe_samples", i(c.sampler.n_samples));
  put("pe_gl_panels", i(c.sampler.gl_panels));
  put("pe_gl_order", i(c.sampler.gl_order));
  return out.str();
}

}  // namespace wpan
