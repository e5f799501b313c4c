#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "rmarl/graph/partition.hpp"
#include "rmarl/sim/congestion.hpp"

namespace rmarl {

/// Validation failure; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RlConfig {
  double gamma = 0.99;
  double clip = 0.2;
  double actor_lr = 1e-5;
  double critic_lr = 1e-5;
  int epochs = 15;
  int episodes = 200;
  int hidden = 32;
  bool normalize_advantages = false;
  bool masked = true;
};

struct QRoutingConfig {
  double eta = 0.5;
  int episodes = 200;
  double eps_start = 0.5;
  double eps_end = 0.05;
};

struct ExperimentConfig {
  // Network: "grid" or "file".
  std::string network_source = "grid";
  GridSpec grid;
  std::string network_file;
  // Partition: "grid" (generator regions), "file" or "auto" (partitioner).
  std::string partition_source = "grid";
  std::string partition_file;
  int regions = 4;

  CongestionModel congestion = CongestionModel::kExperiment;
  double alpha = 0.1;
  long episode_len = 600;
  int max_vehicles = 200;
  double injection_rate = 1.0;  // vehicles per second
  bool reinject = true;
  // Origin-destination sampling: "uniform" or "region".
  std::string od_mode = "uniform";
  RegionId od_from = 0;
  RegionId od_to = 0;
  double idle_g = 1.0;
  double drive_g = 0.12;

  // random | random_masked | sp | spfr | qrouting | asyn_marl | asyn_marl_unmasked
  std::string policy = "sp";
  RlConfig rl;
  QRoutingConfig qrouting;
  int eval_seeds = 10;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

/// Parses JSON; missing keys keep their defaults, unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);
std::string to_json(const ExperimentConfig& cfg);
/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& cfg);

bool is_known_policy(const std::string& policy);

}  // namespace rmarl
