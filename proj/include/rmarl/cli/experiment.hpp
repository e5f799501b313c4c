#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rmarl/cli/config.hpp"
#include "rmarl/train/runner.hpp"

namespace rmarl {

/// Owns the network and partition a Scenario points into. Not movable.
struct ScenarioBundle {
  RoadNetwork net;
  Partition part;
  Scenario scenario;

  ScenarioBundle() = default;
  ScenarioBundle(const ScenarioBundle&) = delete;
  ScenarioBundle& operator=(const ScenarioBundle&) = delete;
};

std::unique_ptr<ScenarioBundle> build_scenario(const ExperimentConfig& cfg);

/// Injection seed of evaluation episode `i`.
std::uint64_t eval_seed(const ExperimentConfig& cfg, int i);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& xs);

struct Report {
  std::string policy;
  std::string scenario;  // fingerprint of the scenario settings
  std::vector<EpisodeMetrics> eval;
  MeanStd throughput;
  MeanStd avtt_s;  // over episodes with arrivals
  MeanStd co2_kg;
  /// Mean vehicles entering each cutting edge per 5-minute slot; rows are slots,
  /// columns follow part.all_cutting_edges().
  std::vector<std::vector<double>> load;
  std::vector<EdgeId> cutting_edges;
  std::vector<EpisodeLog> training;
};

/// Summary statistics plus the load matrix of a set of evaluation episodes.
Report summarize(const std::string& policy, const std::string& scenario, const Partition& part, long episode_len,
                 const std::vector<EpisodeStats>& episodes);

/// Learned state produced by run_experiment.
struct TrainedModels {
  std::unique_ptr<AgentSet> agents;
  std::unique_ptr<QRouter> router;
};

/// Trains when the policy learns, then runs cfg.eval_seeds deterministic
/// evaluation episodes. `models`, when given, receives what was trained.
Report run_experiment(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& progress = {},
                      TrainedModels* models = nullptr);

/// Saves trained actors (agent bundle) or the Q-table (qtable.bin) into `dir`.
void save_models(const TrainedModels& models, const std::string& dir);

/// Evaluation only, with actors loaded from a checkpoint directory for learned policies.
Report evaluate_checkpoint(const ExperimentConfig& cfg, const std::string& checkpoint_dir);

inline constexpr long kLoadSlotSeconds = 300;

std::string report_json(const Report& r);
Report parse_report_json(const std::string& text);
std::string load_matrix_csv(const Report& r);

/// Writes metrics.json, episodes.csv, load_matrix.csv and config.json into `dir`.
void write_report(const Report& r, const ExperimentConfig& cfg, const std::string& dir);

struct Comparison {
  std::string text;
  std::string csv;
  bool mixed_scenarios = false;
};
Comparison compare(const std::vector<Report>& reports);

/// Output root: $RMARL_OUT when set, else `fallback`.
std::string output_root(const std::string& fallback);

}  // namespace rmarl
