#include "rmarl/train/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "rmarl/reach/reachability.hpp"

namespace rmarl {

namespace {

long count_revisits(const Simulator& sim) {
  long n = 0;
  for (const Vehicle& v : sim.vehicles()) {
    auto regions = v.regions_visited;
    std::sort(regions.begin(), regions.end());
    if (std::adjacent_find(regions.begin(), regions.end()) != regions.end()) ++n;
  }
  return n;
}

bool leaves_region(const Partition& part, const RoadNetwork& net, RegionId region, EdgeId e) {
  return e != kNoEdge && e >= 0 && static_cast<std::size_t>(e) < net.num_edges() && part.is_cutting(e) &&
         part.region_of(net.edge(e).from) == region;
}

}  // namespace

EpisodeStats run_episode(const Scenario& scenario, RoutingPolicy& policy, std::uint64_t seed) {
  const RoadNetwork& net = *scenario.net;
  const Partition& part = *scenario.part;
  Simulator sim(net, part, scenario.sim, dynamic_intra_planner());
  sim.set_injector(Injector(scenario.injection, scenario.sampler, seed));

  DistanceOracle dist(net);
  std::unordered_map<VehicleId, ReachabilityGraph> graphs;
  EpisodeStats stats;

  while (!sim.done()) {
    const auto requests = sim.begin_step();
    std::vector<PlanRequest> sorted = requests;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PlanRequest& a, const PlanRequest& b) { return a.region < b.region; });
    for (std::size_t lo = 0; lo < sorted.size();) {
      std::size_t hi = lo;
      while (hi < sorted.size() && sorted[hi].region == sorted[lo].region) ++hi;
      const RegionId region = sorted[lo].region;
      std::span<const PlanRequest> group(sorted.data() + lo, hi - lo);

      std::vector<std::vector<EdgeId>> valid;
      for (const PlanRequest& req : group) {
        auto it = graphs.find(req.vehicle);
        if (it == graphs.end()) {
          it = graphs.emplace(req.vehicle, dag_convert(build_connection_graph(net, part, dist, req.current_node,
                                                                               req.dest_node)))
                   .first;
        }
        valid.push_back(valid_actions(it->second, part, region, req.current_node));
      }
      std::vector<EdgeId> choice = policy.decide(sim, region, group, valid);
      if (choice.size() != group.size()) throw std::logic_error(policy.name() + " returned the wrong number of actions");
      for (std::size_t k = 0; k < group.size(); ++k) {
        EdgeId e = choice[k];
        if (!leaves_region(part, net, region, e)) {
          e = sp_action(net, part, dist, group[k].current_node, group[k].dest_node);
          ++stats.fallbacks;
        }
        sim.assign(group[k].vehicle, e);
        ++stats.decisions;
      }
      lo = hi;
    }
    const auto events = sim.finish_step();
    policy.observe(sim, events);
    for (const SimEvent& ev : events) {
      if (ev.type == SimEventType::kArrived) graphs.erase(ev.vehicle);
    }
  }
  stats.metrics = sim.metrics();
  stats.cut_entries = sim.cut_entries();
  stats.region_revisits = count_revisits(sim);
  return stats;
}

EpisodeStats run_qrouting_episode(const Scenario& scenario, QRouter& router, std::uint64_t seed) {
  Simulator sim(*scenario.net, *scenario.part, scenario.sim, dynamic_intra_planner());
  sim.set_injector(Injector(scenario.injection, scenario.sampler, seed));
  sim.set_next_hop(router.next_hop());
  while (!sim.done()) {
    sim.begin_step();
    const auto events = sim.finish_step();
    router.observe(sim, events);
  }
  EpisodeStats stats;
  stats.metrics = sim.metrics();
  stats.cut_entries = sim.cut_entries();
  stats.region_revisits = count_revisits(sim);
  return stats;
}

MarlPolicy::MarlPolicy(AgentSet& agents, ObservationBuilder& obs, SelectMode mode, std::uint64_t seed, bool masked)
    : agents_(&agents), obs_(&obs), mode_(mode), rng_(seed), masked_(masked) {}

std::vector<EdgeId> MarlPolicy::decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                                       std::span<const std::vector<EdgeId>> valid) {
  std::vector<EdgeId> out(requests.size(), kNoEdge);
  ActorNet* actor = agents_->actors.at(static_cast<std::size_t>(region)).get();
  if (actor == nullptr || requests.empty()) return out;
  const Partition& part = sim.partition();
  const auto& cuts = part.cutting_edges(region);

  const RoadObservation road = obs_->road_observation(sim, region);
  std::vector<std::vector<double>> reqs;
  for (const PlanRequest& r : requests) reqs.push_back(obs_->request_observation(sim, r));
  if (collector_ && global_clock_ != sim.clock()) {
    global_ = obs_->global_state(sim);
    global_clock_ = sim.clock();
  }

  for (std::size_t k = 0; k < requests.size(); ++k) {
    std::vector<bool> mask = masked_ ? action_mask(part, region, valid[k]) : std::vector<bool>(cuts.size(), true);
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) continue;  // dead end: caller falls back
    const auto probs = actor->probabilities(road, reqs, static_cast<int>(k), mask);
    const int a = select_action(probs, mode_, rng_);
    out[k] = cuts[static_cast<std::size_t>(a)];
    if (collector_) {
      Transition tr;
      tr.region = region;
      tr.vehicle = requests[k].vehicle;
      tr.decided_at = requests[k].issued_at;
      tr.road = road;
      tr.requests = reqs;
      tr.focal = static_cast<int>(k);
      tr.mask = std::move(mask);
      tr.action = a;
      tr.logprob = std::log(probs[static_cast<std::size_t>(a)]);
      tr.local_state = obs_->local_state(global_, reqs[k]);
      collector_->on_decision(std::move(tr));
    }
  }
  return out;
}

void MarlPolicy::observe(const Simulator&, std::span<const SimEvent> events) {
  if (!collector_) return;
  for (const SimEvent& ev : events) {
    if (ev.type == SimEventType::kArrived) collector_->on_arrival(ev.vehicle, ev.time);
  }
}

std::vector<EpisodeLog> train_loop(const Scenario& scenario, AgentSet& agents, const TrainConfig& config,
                                   const std::function<void(const EpisodeLog&)>& on_episode) {
  if (config.episodes < 0 || config.epochs < 1 || !(config.gamma > 0.0) || !(config.clip > 0.0) ||
      !(config.actor_lr > 0.0) || !(config.critic_lr > 0.0)) {
    throw std::invalid_argument("invalid training configuration");
  }
  const Partition& part = *scenario.part;
  ObsScales scales;
  scales.time = static_cast<double>(scenario.sim.episode_len);
  scales.count = static_cast<double>(scenario.injection.max_vehicles);
  ObservationBuilder obs(*scenario.net, part, scales);

  std::vector<nn::Adam> actor_opts(agents.actors.size(), nn::Adam(config.actor_lr));
  nn::Adam critic_opt(config.critic_lr);
  TrajectoryCollector collector(part.num_regions());
  std::vector<EpisodeLog> logs;

  for (int ep = 0; ep < config.episodes; ++ep) {
    try {
      collector.clear();
      MarlPolicy policy(agents, obs, SelectMode::kSample, config.seed * 7919 + static_cast<std::uint64_t>(ep),
                        config.masked);
      policy.set_collector(&collector);
      const EpisodeStats stats = run_episode(scenario, policy, config.seed * 104729 + static_cast<std::uint64_t>(ep));
      collector.end_episode();

      EpisodeLog log;
      log.episode = ep;
      log.metrics = stats.metrics;
      log.transitions = collector.completed();

      // Targets from the critic as it stands before this episode's updates.
      std::vector<const std::vector<double>*> states;
      std::vector<double> targets;
      std::vector<std::vector<double>> advs(static_cast<std::size_t>(part.num_regions()));
      for (RegionId r = 0; r < part.num_regions(); ++r) {
        for (const Transition& tr : collector.buffer(r).transitions()) {
          advs[static_cast<std::size_t>(r)].push_back(advantage(tr, *agents.critic, config.gamma));
          states.push_back(&tr.local_state);
          targets.push_back(discounted_return(tr, *agents.critic, config.gamma));
        }
      }

      double loss_sum = 0.0;
      int updated = 0;
      for (RegionId r = 0; r < part.num_regions(); ++r) {
        const auto& trs = collector.buffer(r).transitions();
        if (trs.empty() || !agents.actors[static_cast<std::size_t>(r)]) continue;
        std::vector<const Transition*> batch;
        for (const Transition& tr : trs) batch.push_back(&tr);
        auto& adv = advs[static_cast<std::size_t>(r)];
        if (config.normalize_advantages && adv.size() > 1) {
          const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
          double var = 0.0;
          for (double a : adv) var += (a - mean) * (a - mean);
          const double sd = std::sqrt(var / static_cast<double>(adv.size())) + 1e-8;
          for (double& a : adv) a = (a - mean) / sd;
        }
        loss_sum += ppo_actor_update(*agents.actors[static_cast<std::size_t>(r)], batch, adv, config.epochs,
                                     config.clip, actor_opts[static_cast<std::size_t>(r)]);
        ++updated;
      }
      log.actor_loss_mean = updated > 0 ? loss_sum / updated : 0.0;
      log.critic_loss = critic_update(*agents.critic, states, targets, config.epochs, critic_opt);

      logs.push_back(log);
      if (on_episode) on_episode(log);
    } catch (const std::exception& e) {
      throw std::runtime_error("episode " + std::to_string(ep) + ": " + e.what());
    }
  }
  return logs;
}

std::string episodes_csv(const std::vector<EpisodeLog>& logs) {
  std::ostringstream out;
  out.precision(10);
  out << "episode,throughput,avtt_s,co2_kg,actor_loss_mean,critic_loss\n";
  for (const EpisodeLog& l : logs) {
    out << l.episode << ',' << l.metrics.throughput << ',';
    if (l.metrics.avtt_s) out << *l.metrics.avtt_s;
    out << ',' << l.metrics.co2_kg << ',' << l.actor_loss_mean << ',' << l.critic_loss << '\n';
  }
  return out.str();
}

}  // namespace rmarl
