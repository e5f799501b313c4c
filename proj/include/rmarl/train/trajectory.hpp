#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "rmarl/agent/networks.hpp"
#include "rmarl/obs/observation.hpp"

namespace rmarl {

/// One routing decision of a region agent. The head (observation, action,
/// log-prob, local state) is filled at decision time; reward and next state
/// arrive when the vehicle makes its next decision or reaches its destination.
struct Transition {
  RegionId region = kNoRegion;
  VehicleId vehicle = -1;
  double decided_at = 0.0;

  RoadObservation road;
  std::vector<std::vector<double>> requests;  // every request of the step, ascending vehicle id
  int focal = 0;
  std::vector<bool> mask;
  int action = 0;
  double logprob = 0.0;  // under the behaviour policy
  std::vector<double> local_state;

  bool complete = false;
  double completed_at = 0.0;
  double reward = 0.0;
  bool terminal = false;
  std::vector<double> next_local_state;  // empty when terminal
};

/// r = -(t_next - t_action).
double reward_of(double t_action, double t_next);

/// Per-region buffer D_i: completed transitions plus at most one pending head per vehicle.
class AgentBuffer {
 public:
  explicit AgentBuffer(RegionId region) : region_(region) {}

  void record(Transition head);
  /// Fills the pending head of `vehicle` and moves it to the completed list.
  const Transition& complete(VehicleId vehicle, double now, std::vector<double> next_local_state, bool terminal);
  bool has_pending(VehicleId vehicle) const { return pending_.count(vehicle) > 0; }

  RegionId region() const { return region_; }
  const std::vector<Transition>& transitions() const { return done_; }
  std::size_t pending_count() const { return pending_.size(); }
  void discard_pending() { pending_.clear(); }
  void clear();

 private:
  RegionId region_;
  std::vector<Transition> done_;
  std::map<VehicleId, Transition> pending_;
};

/// Routes decisions and arrivals to the right buffer. A vehicle's pending
/// transition completes at its next decision (next state = that decision's
/// local state) or at arrival (terminal).
class TrajectoryCollector {
 public:
  explicit TrajectoryCollector(int num_regions);

  void on_decision(Transition head);
  void on_arrival(VehicleId vehicle, double time);
  /// Drops transitions of vehicles still travelling.
  void end_episode();
  void clear();

  const AgentBuffer& buffer(RegionId r) const { return buffers_.at(static_cast<std::size_t>(r)); }
  int num_regions() const { return static_cast<int>(buffers_.size()); }
  std::size_t completed() const;

 private:
  std::vector<AgentBuffer> buffers_;
  std::map<VehicleId, RegionId> pending_region_;
};

/// Â = r + gamma * V(s') - V(s), with V(terminal) = 0. Throws for pending transitions.
double advantage(const Transition& tr, const CriticNet& critic, double gamma);
/// Ĝ = r + gamma * V(s').
double discounted_return(const Transition& tr, const CriticNet& critic, double gamma);

/// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A).
double clipped_surrogate(double rho, double adv, double eps);

/// Raised when a loss turns non-finite; parameters are left untouched.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full-batch PPO epochs on one actor. Returns the mean surrogate loss
/// (negated objective) of the first epoch.
double ppo_actor_update(ActorNet& actor, const std::vector<const Transition*>& batch,
                        const std::vector<double>& advantages, int epochs, double clip, nn::Adam& opt);

/// Full-batch Adam epochs on mean (V(s) - target)^2. Returns the first-epoch loss.
double critic_update(CriticNet& critic, const std::vector<const std::vector<double>*>& states,
                     const std::vector<double>& targets, int epochs, nn::Adam& opt);

}  // namespace rmarl
