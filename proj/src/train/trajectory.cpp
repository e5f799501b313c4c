#include "rmarl/train/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rmarl {

double reward_of(double t_action, double t_next) {
  if (t_next < t_action) throw std::invalid_argument("reward_of: next time precedes action time");
  return -(t_next - t_action);
}

void AgentBuffer::record(Transition head) {
  if (head.region != region_) throw std::invalid_argument("transition recorded in another region's buffer");
  if (pending_.count(head.vehicle)) {
    throw std::logic_error("vehicle " + std::to_string(head.vehicle) + " already has a pending transition");
  }
  head.complete = false;
  pending_.emplace(head.vehicle, std::move(head));
}

const Transition& AgentBuffer::complete(VehicleId vehicle, double now, std::vector<double> next_local_state,
                                        bool terminal) {
  auto it = pending_.find(vehicle);
  if (it == pending_.end()) {
    throw std::logic_error("vehicle " + std::to_string(vehicle) + " has no pending transition");
  }
  Transition tr = std::move(it->second);
  pending_.erase(it);
  tr.reward = reward_of(tr.decided_at, now);
  tr.completed_at = now;
  tr.terminal = terminal;
  tr.next_local_state = terminal ? std::vector<double>{} : std::move(next_local_state);
  tr.complete = true;
  done_.push_back(std::move(tr));
  return done_.back();
}

void AgentBuffer::clear() {
  done_.clear();
  pending_.clear();
}

TrajectoryCollector::TrajectoryCollector(int num_regions) {
  for (RegionId r = 0; r < num_regions; ++r) buffers_.emplace_back(r);
}

void TrajectoryCollector::on_decision(Transition head) {
  const VehicleId v = head.vehicle;
  if (auto it = pending_region_.find(v); it != pending_region_.end()) {
    buffers_.at(static_cast<std::size_t>(it->second)).complete(v, head.decided_at, head.local_state, false);
    pending_region_.erase(it);
  }
  const RegionId r = head.region;
  buffers_.at(static_cast<std::size_t>(r)).record(std::move(head));
  pending_region_[v] = r;
}

void TrajectoryCollector::on_arrival(VehicleId vehicle, double time) {
  auto it = pending_region_.find(vehicle);
  if (it == pending_region_.end()) return;  // trip never needed an inter-region decision
  buffers_.at(static_cast<std::size_t>(it->second)).complete(vehicle, time, {}, true);
  pending_region_.erase(it);
}

void TrajectoryCollector::end_episode() {
  for (auto& b : buffers_) b.discard_pending();
  pending_region_.clear();
}

void TrajectoryCollector::clear() {
  for (auto& b : buffers_) b.clear();
  pending_region_.clear();
}

std::size_t TrajectoryCollector::completed() const {
  std::size_t n = 0;
  for (const auto& b : buffers_) n += b.transitions().size();
  return n;
}

namespace {

double next_value(const Transition& tr, const CriticNet& critic) {
  if (!tr.complete) throw std::logic_error("transition is still pending");
  return tr.terminal ? 0.0 : critic.value(tr.next_local_state);
}

}  // namespace

double advantage(const Transition& tr, const CriticNet& critic, double gamma) {
  return tr.reward + gamma * next_value(tr, critic) - critic.value(tr.local_state);
}

double discounted_return(const Transition& tr, const CriticNet& critic, double gamma) {
  return tr.reward + gamma * next_value(tr, critic);
}

double clipped_surrogate(double rho, double adv, double eps) {
  return std::min(rho * adv, std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv);
}

double ppo_actor_update(ActorNet& actor, const std::vector<const Transition*>& batch,
                        const std::vector<double>& advantages, int epochs, double clip, nn::Adam& opt) {
  if (batch.size() != advantages.size()) throw std::invalid_argument("one advantage per transition required");
  if (batch.empty()) return 0.0;
  nn::ParamSet& ps = actor.params();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double first_loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition& tr = *batch[i];
      const double adv = advantages[i];
      nn::Tape tape;
      const nn::Var logp = actor.forward(tape, tr.road, tr.requests, tr.focal, tr.mask);
      const double lp = tape.value(logp)[static_cast<std::size_t>(tr.action)];
      const double rho = std::exp(lp - tr.logprob);
      const double obj = clipped_surrogate(rho, adv, clip);
      loss -= obj * inv_n;
      // d obj / d logp is rho * A on the unclipped branch and 0 once clipped.
      const double dobj = (rho * adv <= std::clamp(rho, 1.0 - clip, 1.0 + clip) * adv) ? rho * adv : 0.0;
      std::vector<double> upstream(tape.value(logp).size(), 0.0);
      upstream[static_cast<std::size_t>(tr.action)] = -dobj * inv_n;
      tape.backward(logp, upstream);
    }
    if (!std::isfinite(loss)) {
      ps.zero_grad();
      throw NumericError("non-finite actor loss for region " + std::to_string(actor.region()));
    }
    if (epoch == 0) first_loss = loss;
    opt.step(ps);
  }
  return first_loss;
}

double critic_update(CriticNet& critic, const std::vector<const std::vector<double>*>& states,
                     const std::vector<double>& targets, int epochs, nn::Adam& opt) {
  if (states.size() != targets.size()) throw std::invalid_argument("one target per state required");
  if (states.empty()) return 0.0;
  nn::ParamSet& ps = critic.params();
  const double inv_n = 1.0 / static_cast<double>(states.size());
  double first_loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      nn::Tape tape;
      const nn::Var v = critic.forward(tape, *states[i]);
      const double err = tape.value(v)[0] - targets[i];
      loss += err * err * inv_n;
      tape.backward(v, {2.0 * err * inv_n});
    }
    if (!std::isfinite(loss)) {
      ps.zero_grad();
      throw NumericError("non-finite critic loss");
    }
    if (epoch == 0) first_loss = loss;
    opt.step(ps);
  }
  return first_loss;
}

}  // namespace rmarl
