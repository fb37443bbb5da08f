#include <cmath>
#include <vector>

#include "doctest.h"
#include "wpan/metrics.hpp"
#include "wpan/sim.hpp"

using namespace wpan;

namespace {

Scenario make(int n, double lambda, double pe) {
  MacParams mac;
  mac.n_nodes = n;
  return Scenario::make(mac, lambda, pe > 0.0 ? Mode::kPhyMac : Mode::kMacOnly, pe);
}

sim::SimConfig config(std::int64_t slots, std::uint64_t seed = 1) {
  sim::SimConfig c;
  c.horizon_slots = slots;
  c.seed = seed;
  return c;
}

double rel(double analytic, double simulated) { return std::abs(analytic - simulated) / simulated; }

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("single node follows the uncontended path") {
  const Scenario s = make(1, 0.5, 0.0);
  const sim::SimStats st = sim::run(s, config(1'000'000));
  CHECK(st.collided == 0);
  CHECK(st.cf_discarded == 0);
  CHECK(st.cr_discarded == 0);
  CHECK(st.blocked == 0);
  const ChainInputs in = ChainInputs::from(s.mac, 0.5, 0.0);
  const double slot = in.slot_duration_s;
  const double single_path = (0.5 * (in.window(0) - 1) + 2.0) * slot + in.l_slots * slot +
                             in.turnaround_s + in.l_ack_slots * slot + in.ifs_s;
  CHECK(std::abs(st.service_s.mean - single_path) <= slot);
  CHECK(st.reliability.mean == doctest::Approx(1.0));
}

TEST_CASE("dead link delivers nothing") {
  for (int n : {1, 5}) {
    const sim::SimStats st = sim::run(make(n, 2.0, 1.0), config(200'000));
    CHECK(st.delivered == 0);
    CHECK(st.cr_discarded > 0);
    CHECK(st.phy_lost + st.collided == st.attempts);
    if (n == 1) CHECK(st.cf_discarded == 0);
  }
}

TEST_CASE("every generated frame is accounted for once") {
  for (double pe : {0.0, 0.3}) {
    for (double lambda : {1.0, 5.0, 20.0}) {
      sim::SimConfig c = config(300'000);
      c.ack_collisions = lambda > 10.0;
      const sim::SimStats st = sim::run(make(10, lambda, pe), c);
      CHECK(st.generated ==
            st.delivered + st.cf_discarded + st.cr_discarded + st.blocked + st.in_system_at_end);
      CHECK(st.delivered + st.collided + st.phy_lost <= st.attempts);
      for (const auto* e : {&st.reliability, &st.p_blocking, &st.tau, &st.alpha, &st.beta}) {
        CHECK(e->mean >= 0.0);
        CHECK(e->mean <= 1.0);
      }
    }
  }
}

TEST_CASE("Little's law holds inside the simulator") {
  for (double lambda : {1.0, 5.0}) {
    const sim::SimStats st = sim::run(make(10, lambda, 0.1), config(1'000'000, 3));
    const double lhs = st.occupancy.mean;
    const double rhs = st.admitted_rate * st.sojourn_s.mean;
    const double ci = st.occupancy.ci_halfwidth + st.admitted_rate * st.sojourn_s.ci_halfwidth;
    INFO("lambda " << lambda << ": " << lhs << " vs " << rhs << " ci " << ci);
    CHECK(std::abs(lhs - rhs) <= ci);
  }
}

TEST_CASE("runs are reproducible per seed") {
  const Scenario s = make(10, 5.0, 0.1);
  const sim::SimStats a = sim::run(s, config(200'000, 17));
  const sim::SimStats b = sim::run(s, config(200'000, 17));
  CHECK(a == b);
  const sim::SimStats c = sim::run(s, config(200'000, 18));
  CHECK_FALSE(a == c);
}

TEST_CASE("different seeds agree within their confidence intervals") {
  const Scenario s = make(10, 3.0, 0.1);
  const sim::SimStats a = sim::run(s, config(1'000'000, 1));
  const sim::SimStats b = sim::run(s, config(1'000'000, 2));
  CHECK(std::abs(a.reliability.mean - b.reliability.mean) <=
        std::hypot(a.reliability.ci_halfwidth, b.reliability.ci_halfwidth));
}

TEST_CASE("reliability matches the analytical prediction at N=10, lambda=5") {
  const Scenario s = make(10, 5.0, 0.0);
  const PerformanceReport r = make_report(s, converge(s));
  const sim::SimStats st = sim::run(s, config(1'000'000));
  INFO("analytic " << r.reliability << ", simulated " << st.reliability.mean);
  CHECK(rel(r.reliability, st.reliability.mean) <= 0.10);
}

TEST_CASE("chain probabilities, service time and delay match the simulator at N=10, lambda=5") {
  const Scenario s = make(10, 5.0, 0.0);
  const ConvergedPoint pt = converge(s);
  const PerformanceReport r = make_report(s, pt);
  const sim::SimStats st = sim::run(s, config(1'000'000));
  INFO("tau " << pt.chain.tau << "/" << st.tau.mean << ", alpha " << pt.chain.alpha << "/"
              << st.alpha.mean << ", beta " << pt.chain.beta << "/" << st.beta.mean << ", ET "
              << pt.chain.et_s << "/" << st.service_s.mean << ", D " << r.delay_s << "/"
              << st.sojourn_s.mean);
  CHECK(rel(pt.chain.tau, st.tau.mean) <= 0.10);
  CHECK(rel(pt.chain.alpha, st.alpha.mean) <= 0.10);
  CHECK(rel(pt.chain.beta, st.beta.mean) <= 0.10);
  CHECK(rel(pt.chain.et_s, st.service_s.mean) <= 0.10);
  CHECK(rel(r.delay_s, st.sojourn_s.mean) <= 0.10);
}

TEST_CASE("ACKs are shielded by the two clear channel assessments") {
  // A sender needs two clear boundaries before its data, and the boundary
  // right before an ACK still carries the acknowledged data, so no data
  // can overlap an ACK. Enabling ACK loss must not change anything.
  for (int n : {2, 10, 50}) {
    const Scenario s = make(n, 8.0, 0.0);
    sim::SimConfig off = config(300'000);
    sim::SimConfig on = off;
    on.ack_collisions = true;
    const sim::SimStats a = sim::run(s, off);
    const sim::SimStats b = sim::run(s, on);
    CHECK(b.ack_lost == 0);
    CHECK(a == b);
  }
}

TEST_CASE("pooling replications") {
  const std::vector<sim::Estimate> runs{{1.0, 0.3, true}, {2.0, 0.4, true}};
  const sim::Estimate p = sim::pool(runs);
  CHECK(p.mean == doctest::Approx(1.5));
  CHECK(p.ci_halfwidth == doctest::Approx(0.25));
}

TEST_CASE("invalid run settings") {
  const Scenario s = make(10, 5.0, 0.0);
  CHECK_THROWS_AS(sim::run(s, config(10)), std::invalid_argument);
  sim::SimConfig c = config(10'000);
  c.batches = 1;
  CHECK_THROWS_AS(sim::run(s, c), std::invalid_argument);
}

}  // TEST_SUITE
