#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmarl/nn/modules.hpp"
#include "rmarl/obs/observation.hpp"

namespace rmarl {

/// Raised when every action of a request is masked.
class DeadEndError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActorDims {
  int num_actions = 4;  // |E_i^c|
  int road_features = kRoadFeatures;
  int request_features = 12;
  int hidden = 32;  // D_h
};

/// Per-region actor. Each cutting-edge row goes through the edge encoder; the
/// encodings are concatenated. The focal request goes through the request
/// encoder and all of the step's requests, in ascending vehicle id, are summarised
/// by a GRU. The score MLP maps the three embeddings to one logit per action.
///
/// Holds its own ParamSet; not copyable or movable because the submodules
/// reference it.
class ActorNet {
 public:
  ActorNet(RegionId region, ActorDims dims, std::uint64_t seed);
  ActorNet(const ActorNet&) = delete;
  ActorNet& operator=(const ActorNet&) = delete;

  /// Masked log-probabilities over the region's actions, recorded on `tape`.
  nn::Var forward(nn::Tape& tape, const RoadObservation& road, const std::vector<std::vector<double>>& requests,
                  int focal, const std::vector<bool>& mask);
  /// Probabilities (exact zeros on masked actions). Throws DeadEndError if all are masked.
  std::vector<double> probabilities(const RoadObservation& road, const std::vector<std::vector<double>>& requests,
                                    int focal, const std::vector<bool>& mask);

  RegionId region() const { return region_; }
  const ActorDims& dims() const { return dims_; }
  nn::ParamSet& params() { return ps_; }
  const nn::ParamSet& params() const { return ps_; }
  nn::Mlp& score_net() { return score_; }

 private:
  RegionId region_;
  ActorDims dims_;
  nn::ParamSet ps_;
  nn::Mlp edge_enc_;
  nn::Mlp req_enc_;
  nn::GruCell gru_;
  nn::Mlp score_;
};

/// Centralised critic: MLP over the local state, scalar output.
class CriticNet {
 public:
  CriticNet(int input_size, std::uint64_t seed, std::vector<int> hidden = {64, 64});
  CriticNet(const CriticNet&) = delete;
  CriticNet& operator=(const CriticNet&) = delete;

  double value(const std::vector<double>& local_state) const;
  nn::Var forward(nn::Tape& tape, const std::vector<double>& local_state);

  int input_size() const { return net_.in_size(); }
  nn::ParamSet& params() { return ps_; }
  const nn::ParamSet& params() const { return ps_; }
  nn::Mlp& mlp() { return net_; }

 private:
  nn::ParamSet ps_;
  nn::Mlp net_;
};

enum class SelectMode { kArgmax, kSample };

/// Argmax (smallest index on ties) or a categorical draw from `rng`.
int select_action(const std::vector<double>& probs, SelectMode mode, std::mt19937_64& rng);

struct AgentSet {
  std::vector<std::unique_ptr<ActorNet>> actors;  // indexed by region
  std::unique_ptr<CriticNet> critic;
  int hidden = 32;
  int road_features = kRoadFeatures;
  int request_features = 0;
  int max_actions = 0;
};

/// One actor per region sized to |E_i^c| and a critic sized to the local state.
AgentSet make_agents(const Partition& part, const ObservationBuilder& obs, int hidden, std::uint64_t seed);

/// Writes actor_<i>.params, critic.params and manifest.json into `dir`.
void save_agents(const AgentSet& agents, const std::string& dir);
/// Loads parameters into an AgentSet built for the same network and partition.
/// Throws if the manifest disagrees with the set's dimensions.
void load_agents(AgentSet& agents, const std::string& dir);

}  // namespace rmarl
