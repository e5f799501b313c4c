#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rmarl/agent/networks.hpp"
#include "rmarl/baselines/policies.hpp"
#include "rmarl/train/trajectory.hpp"

namespace rmarl {

/// Everything that defines an episode except the policy and the seed.
struct Scenario {
  const RoadNetwork* net = nullptr;
  const Partition* part = nullptr;
  SimConfig sim;
  InjectionSpec injection;
  OdSampler sampler;
};

struct EpisodeStats {
  EpisodeMetrics metrics;
  std::vector<std::pair<long, EdgeId>> cut_entries;
  long decisions = 0;
  long fallbacks = 0;        // requests routed by the static shortest path instead
  long region_revisits = 0;  // vehicles that entered some region twice
};

/// Runs one episode under `policy`. Each vehicle's reachability graph is
/// built at its first plan request; valid actions are handed to the policy,
/// and any missing or foreign choice falls back to sp_action.
EpisodeStats run_episode(const Scenario& scenario, RoutingPolicy& policy, std::uint64_t seed);

/// Node-level Q-routing episode.
EpisodeStats run_qrouting_episode(const Scenario& scenario, QRouter& router, std::uint64_t seed);

/// Region actors driving the simulator. With a collector attached every
/// decision is recorded for training.
class MarlPolicy : public RoutingPolicy {
 public:
  MarlPolicy(AgentSet& agents, ObservationBuilder& obs, SelectMode mode, std::uint64_t seed, bool masked = true);

  void set_collector(TrajectoryCollector* collector) { collector_ = collector; }
  std::string name() const override { return masked_ ? "asyn_marl" : "asyn_marl_unmasked"; }
  std::vector<EdgeId> decide(const Simulator& sim, RegionId region, std::span<const PlanRequest> requests,
                             std::span<const std::vector<EdgeId>> valid) override;
  void observe(const Simulator& sim, std::span<const SimEvent> events) override;

 private:
  AgentSet* agents_;
  ObservationBuilder* obs_;
  SelectMode mode_;
  std::mt19937_64 rng_;
  bool masked_;
  TrajectoryCollector* collector_ = nullptr;
  long global_clock_ = -1;
  std::vector<double> global_;
};

struct TrainConfig {
  int episodes = 200;
  double gamma = 0.99;
  double clip = 0.2;
  int epochs = 15;
  double actor_lr = 1e-5;
  double critic_lr = 1e-5;
  bool normalize_advantages = false;
  bool masked = true;
  std::uint64_t seed = 0;
};

struct EpisodeLog {
  int episode = 0;
  EpisodeMetrics metrics;
  double actor_loss_mean = 0.0;
  double critic_loss = 0.0;
  std::size_t transitions = 0;
};

/// Collect with sampled actions, then update each actor on its own buffer
/// and the critic on the merged buffers. Advantages and returns use the
/// critic as it stands after the rollout.
std::vector<EpisodeLog> train_loop(const Scenario& scenario, AgentSet& agents, const TrainConfig& config,
                                   const std::function<void(const EpisodeLog&)>& on_episode = {});

/// episode,throughput,avtt_s,co2_kg,actor_loss_mean,critic_loss
std::string episodes_csv(const std::vector<EpisodeLog>& logs);

}  // namespace rmarl
