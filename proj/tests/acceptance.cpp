// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "async_check.hpp"
#include "gradcheck.hpp"
#include "oracle_check.hpp"
#include "qrouting_check.hpp"
#include "reach_check.hpp"
#include "rmarl/cli/experiment.hpp"
#include "sim_scenarios.hpp"

namespace rmarl {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Verdict within(Verdict v, double seconds, double limit) {
  if (seconds >= limit) {
    v.pass = false;
    v.detail += "; over the " + num(limit, 0) + " s budget";
  }
  return v;
}

Verdict gradient_suite() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  std::string worst_op;
  int ops = 0;
  for (const auto& c : testing::gradient_cases()) {
    ++ops;
    for (int trial = 0; trial < 100; ++trial) {
      const double e = c.trial(rng);
      if (e > worst) {
        worst = e;
        worst_op = c.name;
      }
    }
  }
  std::ostringstream d;
  d << ops << " ops x 100 trials, worst rel err " << worst << " (" << worst_op << ")";
  return {worst < 1e-4, d.str()};
}

Verdict oracle_suite() {
  const auto s = testing::check_static_oracle(200, 2);
  const auto i = testing::check_intra_oracle(200, 3);
  std::ostringstream d;
  d << "static " << s.checked - s.mismatches << "/" << s.checked << ", intra " << i.checked - i.mismatches << "/"
    << i.checked;
  if (s.mismatches) d << "; " << s.first_failure;
  if (i.mismatches) d << "; " << i.first_failure;
  return {s.mismatches == 0 && i.mismatches == 0, d.str()};
}

Verdict reachability_suite() {
  const auto r = testing::check_reach_trips(500, 99);
  std::string d = std::to_string(r.trips) + " trips, " + std::to_string(r.failures) + " failures";
  if (r.failures) d += "; " + r.first_failure;
  return {r.trips == 500 && r.failures == 0, d};
}

Verdict asynchrony_suite() {
  const auto replay = testing::replay_fig2();
  int vehicles = 0, violations = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = testing::check_telescoping(seed);
    vehicles += t.vehicles_checked;
    if (t.violations && first.empty()) first = t.first_failure;
    violations += t.violations;
  }
  std::string d = std::string("worked example ") + (replay.ok ? "matches" : "differs: " + replay.why) + "; " +
                  std::to_string(vehicles) + " vehicle chains over 5 episodes, " + std::to_string(violations) +
                  " violations";
  if (!first.empty()) d += "; " + first;
  return {replay.ok && violations == 0 && vehicles > 0, d};
}

Verdict simulator_suite() {
  int ok = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = testing::run_checked_scenario(seed);
    const auto b = testing::run_checked_scenario(seed);
    const bool same = metrics_json(a.metrics) == metrics_json(b.metrics) && a.arrive_times == b.arrive_times;
    if (a.ok && same) {
      ++ok;
    } else if (first.empty()) {
      first = "seed " + std::to_string(seed) + ": " + (a.ok ? "not deterministic" : a.why);
    }
  }
  // Speed never rises with load.
  std::mt19937_64 rng(4);
  bool monotone = true;
  for (int k = 0; k < 200; ++k) {
    const Edge e{0, 0, 1, 100.0, std::uniform_real_distribution<double>(5.0, 30.0)(rng),
                 std::uniform_int_distribution<int>(1, 20)(rng)};
    for (CongestionModel m :
         {CongestionModel::kPaperDef, CongestionModel::kExperiment, CongestionModel::kExperimentSubtractive}) {
      double prev = effective_speed(e, 0, m, 0.1);
      for (int n = 1; n <= 100; ++n) {
        const double s = effective_speed(e, n, m, 0.1);
        monotone &= s <= prev && s > 0.0;
        prev = s;
      }
    }
  }
  std::string d = std::to_string(ok) + "/20 scenarios conserve vehicles and replay identically; congestion " +
                  (monotone ? "monotone" : "NOT monotone");
  if (!first.empty()) d += "; " + first;
  return {ok == 20 && monotone, d};
}

// Desk-scale grid: 2x2 regions of 5x5 nodes, 100 vehicles kept in the network,
// T = 300 s, 2.5 vehicles/s from region 0 to region 3, 10 evaluation seeds.
ExperimentConfig desk_scenario(const std::string& policy) {
  ExperimentConfig c;
  c.episode_len = 300;
  c.max_vehicles = 100;
  c.injection_rate = 2.5;
  c.reinject = true;
  c.od_mode = "region";
  c.od_from = 0;
  c.od_to = 3;
  c.eval_seeds = 10;
  c.seed = 1;
  c.policy = policy;
  c.rl.episodes = 100;
  c.rl.actor_lr = 1e-3;
  c.rl.critic_lr = 1e-3;
  c.rl.normalize_advantages = true;
  return c;
}

// Reports shared by criteria 6 to 8.
struct DeskRuns {
  std::map<std::string, Report> reports;
  const Report& get(const std::string& policy) {
    auto it = reports.find(policy);
    if (it == reports.end()) it = reports.emplace(policy, run_experiment(desk_scenario(policy))).first;
    return it->second;
  }
};

Verdict baseline_ordering(DeskRuns& runs) {
  const double spfr = runs.get("spfr").throughput.mean;
  const double sp = runs.get("sp").throughput.mean;
  const double rnd = runs.get("random").throughput.mean;
  const std::string d = "SPFR " + num(spfr) + ", SP " + num(sp) + ", Random " + num(rnd) + " (" +
                        num(100.0 * rnd / sp, 1) + "% of SP)";
  return {spfr >= sp && sp > rnd && rnd <= 0.6 * sp, d};
}

Verdict learning(DeskRuns& runs) {
  const Report& sp = runs.get("sp");
  const Report& marl = runs.get("asyn_marl");
  const Report& open = runs.get("asyn_marl_unmasked");
  int wins = 0;
  for (std::size_t i = 0; i < sp.eval.size(); ++i) {
    const auto& a = marl.eval[i];
    const auto& b = sp.eval[i];
    const bool thr = a.throughput >= 1.05 * static_cast<double>(b.throughput);
    const bool avtt = a.avtt_s && b.avtt_s && *a.avtt_s <= 0.95 * *b.avtt_s;
    wins += thr && avtt;
  }
  const bool ablation = marl.throughput.mean > open.throughput.mean;
  const std::string d = "asyn-MARL " + num(marl.throughput.mean) + " thr / " + num(marl.avtt_s.mean) + " s vs SP " +
                        num(sp.throughput.mean) + " / " + num(sp.avtt_s.mean) + " s; " + std::to_string(wins) +
                        "/10 seeds at least 5% better on both; masked " + num(marl.throughput.mean) +
                        (ablation ? " > " : " <= ") + "unmasked " + num(open.throughput.mean);
  return {wins >= 7 && ablation, d};
}

double max_cut_load(const Report& r) {
  double worst = 0.0;
  for (std::size_t c = 0; c < r.cutting_edges.size(); ++c) {
    double total = 0.0;
    for (const auto& row : r.load) total += row[c];
    worst = std::max(worst, total);
  }
  return worst;
}

Verdict load_balance(DeskRuns& runs) {
  const double marl = max_cut_load(runs.get("asyn_marl"));
  const double sp = max_cut_load(runs.get("sp"));
  return {marl <= sp, "busiest cutting edge per episode: asyn-MARL " + num(marl, 1) + ", SP " + num(sp, 1)};
}

Verdict qrouting_convergence() {
  const auto r = testing::check_qrouting(500, 3);
  return {r.max_rel_error < 0.01, "8-node network, 500 episodes, max rel err " + num(100.0 * r.max_rel_error, 3) + "%"};
}

}  // namespace
}  // namespace rmarl

int main(int argc, char** argv) {
  using namespace rmarl;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  DeskRuns runs;

  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no limit stated
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient suite", 10, gradient_suite},
      {2, "oracle suite", 30, oracle_suite},
      {3, "reachability suite", 60, reachability_suite},
      {4, "asynchrony suite", 0, asynchrony_suite},
      {5, "simulator suite", 30, simulator_suite},
      {6, "baseline ordering", 120, [&] { return baseline_ordering(runs); }},
      {7, "learning acceptance", 1800, [&] { return learning(runs); }},
      {8, "load balance", 0, [&] { return load_balance(runs); }},
      {9, "q-routing convergence", 60, qrouting_convergence},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0) v = within(v, secs, c.budget_s);
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << v.detail << " ["
              << num(secs, 1) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
