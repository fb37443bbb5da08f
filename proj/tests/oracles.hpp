#pragma once
// Independent reference computations used by the unit and acceptance
// tests. Nothing here calls into the library except for plain inputs.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "wpan/params.hpp"

namespace oracle {

/// Counts bit errors over n bits sent through an AWGN channel at the given
/// Eb/N0 (linear). NCFSK: energy detection on two orthogonal tones with
/// complex noise. BPSK: coherent sign decision.
inline std::size_t simulate_bit_errors(wpan::Modulation mod, double ebn0, std::size_t n,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Unit bit energy, noise N0/2 per real dimension.
  const double sigma = std::sqrt(0.5 / ebn0);
  std::normal_distribution<double> noise(0.0, sigma);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mod == wpan::Modulation::kBpsk) {
      errors += (1.0 + noise(rng)) < 0.0;
    } else {
      const double i1 = 1.0 + noise(rng);
      const double q1 = noise(rng);
      const double i2 = noise(rng);
      const double q2 = noise(rng);
      errors += (i2 * i2 + q2 * q2) > (i1 * i1 + q1 * q1);
    }
  }
  return errors;
}

/// Sends n frames of `bits` bits, each bit flipped independently with
/// probability pb, and counts frames that arrive without a bit error.
inline std::size_t simulate_clean_frames(double pb, std::size_t bits, std::size_t n,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Compare raw 64-bit draws against pb * 2^64.
  const double scaled = std::ldexp(pb, 64);
  const std::uint64_t threshold =
      scaled >= 18446744073709551615.0 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(scaled);
  std::size_t clean = 0;
  for (std::size_t f = 0; f < n; ++f) {
    bool ok = true;
    for (std::size_t b = 0; b < bits && ok; ++b) ok = rng() >= threshold;
    clean += ok;
  }
  return clean;
}

/// Composite Simpson average of f over [a, b] with an even panel count.
inline double simpson_distance_average(const std::function<double(double)>& f, double a, double b,
                                       int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0 / (b - a);
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    if (a[c][c] == 0.0) throw std::runtime_error("singular system");
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Stationary distribution of a finite DTMC with transition matrix p.
inline std::vector<double> dtmc_stationary(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  // Rows of (P^T - I), the last one replaced by the normalization.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[j][i] = p[i][j];
    a[i][i] -= 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  b[n - 1] = 1.0;
  return solve_linear(a, b);
}

/// Explicit per-slot chain of one node that always holds a frame:
/// backoff counters, CCA1 (counter 0), CCA2, transmission+ACK slots, and
/// retry rounds. Returns the stationary mass of (stage 0, counter 0,
/// round 0). Windows are 2^min(min_be + i, max_be).
inline double enumerated_b000(int m, int n, int min_be, int max_be, int tx_slots, double alpha,
                              double beta, double p_fail) {
  auto window = [&](int i) { return 1 << std::min(min_be + i, max_be); };
  // Index layout per round: backoff states of every stage, CCA2 per stage,
  // then tx_slots transmission states.
  std::vector<int> stage_base(m + 1);
  int per_round = 0;
  for (int i = 0; i <= m; ++i) {
    stage_base[i] = per_round;
    per_round += window(i);
  }
  const int cca2_base = per_round;
  per_round += m + 1;
  const int tx_base = per_round;
  per_round += tx_slots;
  const int total = per_round * (n + 1);
  auto backoff = [&](int j, int i, int k) { return j * per_round + stage_base[i] + k; };
  auto cca2 = [&](int j, int i) { return j * per_round + cca2_base + i; };
  auto tx = [&](int j, int l) { return j * per_round + tx_base + l; };

  std::vector<std::vector<double>> p(total, std::vector<double>(total, 0.0));
  auto enter_stage = [&](int from, int j, int i, double w) {
    for (int k = 0; k < window(i); ++k) p[from][backoff(j, i, k)] += w / window(i);
  };
  auto restart = [&](int from, double w) { enter_stage(from, 0, 0, w); };
  auto busy = [&](int from, int j, int i, double w) {
    if (i < m) {
      enter_stage(from, j, i + 1, w);
    } else {
      restart(from, w);  // access failure
    }
  };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= m; ++i) {
      for (int k = 1; k < window(i); ++k) p[backoff(j, i, k)][backoff(j, i, k - 1)] = 1.0;
      const int c1 = backoff(j, i, 0);
      busy(c1, j, i, alpha);
      p[c1][cca2(j, i)] += 1.0 - alpha;
      const int c2 = cca2(j, i);
      busy(c2, j, i, beta);
      p[c2][tx(j, 0)] += 1.0 - beta;
    }
    for (int l = 0; l + 1 < tx_slots; ++l) p[tx(j, l)][tx(j, l + 1)] = 1.0;
    const int last = tx(j, tx_slots - 1);
    restart(last, 1.0 - p_fail);
    if (j < n) {
      enter_stage(last, j + 1, 0, p_fail);
    } else {
      restart(last, p_fail);  // retry limit
    }
  }
  return dtmc_stationary(p)[backoff(0, 0, 0)];
}

/// Straight transcription of the three coupled equations with std::pow,
/// given an externally supplied b000.
struct EquationInputs {
  int n_nodes;
  int m;
  int n;
  double l;
  double l_ack;
  double p0;
  double p_e;
};

inline std::array<double, 3> transcribed_residuals(double tau, double alpha, double beta,
                                                   const EquationInputs& q, double b000) {
  const double N = q.n_nodes;
  const double t = (1.0 - q.p0) * tau;
  const double x = alpha + (1.0 - alpha) * beta;
  const double p_col = 1.0 - std::pow(1.0 - tau * (1.0 - q.p0), N - 1.0);
  const double p_fail = 1.0 - (1.0 - p_col) * (1.0 - q.p_e);
  const double y = p_fail * (1.0 - std::pow(x, q.m + 1));
  const double rhs1 = ((1.0 - std::pow(x, q.m + 1)) / (1.0 - x)) *
                      ((1.0 - std::pow(y, q.n + 1)) / (1.0 - y)) * b000;
  const double rhs2 =
      (q.l + N * t * std::pow(1.0 - t, N - 1.0) / (1.0 - std::pow(1.0 - t, N)) * q.l_ack) *
      (1.0 - std::pow(1.0 - t, N - 1.0)) * (1.0 - alpha) * (1.0 - beta);
  const double dv = 2.0 - std::pow(1.0 - t, N) + N * t * std::pow(1.0 - t, N - 1.0);
  const double rhs3 = (1.0 - std::pow(1.0 - t, N - 1.0)) / dv + N * t * std::pow(1.0 - t, N - 1.0) / dv;
  return {tau - rhs1, alpha - rhs2, beta - rhs3};
}

/// Per-frame walk through the retry/backoff automaton: every stage is busy
/// with probability x, every attempt fails with probability p_fail.
struct DiscardCounts {
  std::size_t access_failures = 0;
  std::size_t retry_failures = 0;
  std::size_t frames = 0;
};

inline DiscardCounts simulate_discards(double x, double p_fail, int m, int n, std::size_t frames,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiscardCounts c;
  c.frames = frames;
  for (std::size_t f = 0; f < frames; ++f) {
    for (int j = 0; j <= n; ++j) {
      int i = 0;
      while (i <= m && u(rng) < x) ++i;
      if (i > m) {
        ++c.access_failures;
        break;
      }
      if (u(rng) >= p_fail) break;  // delivered
      if (j == n) ++c.retry_failures;
    }
  }
  return c;
}

/// M/M/1/K stationary distribution from the birth-death generator
/// (arrival rate rho, service rate 1), solved numerically.
inline std::vector<double> birth_death_stationary(double rho, int k) {
  const int n = k + 1;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  // Columns of the generator become rows of Q^T.
  for (int i = 0; i < n; ++i) {
    if (i < k) {
      a[i + 1][i] += rho;
      a[i][i] -= rho;
    }
    if (i > 0) {
      a[i - 1][i] += 1.0;
      a[i][i] -= 1.0;
    }
  }
  for (int j = 0; j < n; ++j) a[k][j] = 1.0;
  b[k] = 1.0;
  return solve_linear(a, b);
}

/// Same chain by uniformized power iteration.
inline std::vector<double> birth_death_power(double rho, int k, int iterations) {
  const int n = k + 1;
  const double rate = rho + 1.0;
  std::vector<double> pi(n, 1.0 / n);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double stay = 1.0;
      if (i < k) {
        next[i + 1] += pi[i] * rho / rate;
        stay -= rho / rate;
      }
      if (i > 0) {
        next[i - 1] += pi[i] / rate;
        stay -= 1.0 / rate;
      }
      next[i] += pi[i] * stay;
    }
    pi = next;
  }
  return pi;
}

}  // namespace oracle
