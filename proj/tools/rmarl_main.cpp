// Command-line front end: gen-net, partition, train, eval, compare.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmarl/cli/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::string> policy;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> eval_seeds;
  std::optional<int> max_vehicles;
  std::optional<long> episode_len;
  std::optional<double> actor_lr;
  std::optional<double> critic_lr;
  std::optional<std::string> output_dir;
};

void add_overrides(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("-c,--config", config_path, "JSON experiment config (defaults when omitted)");
  cmd->add_option("--policy", o.policy, "random|random_masked|sp|spfr|qrouting|asyn_marl|asyn_marl_unmasked");
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--episodes", o.episodes, "training episodes (rl and qrouting)");
  cmd->add_option("--eval-seeds", o.eval_seeds);
  cmd->add_option("--max-vehicles", o.max_vehicles);
  cmd->add_option("--episode-len", o.episode_len);
  cmd->add_option("--actor-lr", o.actor_lr);
  cmd->add_option("--critic-lr", o.critic_lr);
  cmd->add_option("-o,--output-dir", o.output_dir);
}

rmarl::ExperimentConfig resolve(const std::string& path, const Overrides& o) {
  rmarl::ExperimentConfig c = path.empty() ? rmarl::ExperimentConfig{} : rmarl::load_config_file(path);
  if (o.policy) c.policy = *o.policy;
  if (o.seed) c.seed = *o.seed;
  if (o.episodes) c.rl.episodes = c.qrouting.episodes = *o.episodes;
  if (o.eval_seeds) c.eval_seeds = *o.eval_seeds;
  if (o.max_vehicles) c.max_vehicles = *o.max_vehicles;
  if (o.episode_len) c.episode_len = *o.episode_len;
  if (o.actor_lr) c.rl.actor_lr = *o.actor_lr;
  if (o.critic_lr) c.rl.critic_lr = *o.critic_lr;
  if (o.output_dir) c.output_dir = *o.output_dir;
  rmarl::validate(c);
  return c;
}

// Relative output dirs live under $RMARL_OUT when it is set.
std::string output_dir(const std::string& dir) {
  const fs::path p(dir);
  if (p.is_absolute()) return dir;
  return (fs::path(rmarl::output_root(".")) / p).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-level multi-agent vehicle routing experiments"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-net", "Generate a grid network and its region partition");
  rmarl::GridSpec grid;
  std::string net_out = "grid.net", part_out;
  gen->add_option("--regions-per-side", grid.regions_per_side);
  gen->add_option("--nodes-per-region-side", grid.nodes_per_region_side);
  gen->add_option("--edge-length", grid.edge_length);
  gen->add_option("--max-speed", grid.max_speed);
  gen->add_option("--capacity", grid.capacity);
  gen->add_option("-o,--out", net_out, "edge-list output file");
  gen->add_option("--partition-out", part_out, "partition output file");

  auto* part = app.add_subcommand("partition", "Partition a network file into regions");
  std::string part_net, part_file = "regions.part";
  int regions = 0;
  long agent_capacity = 0;
  std::uint64_t part_seed = 0;
  part->add_option("network", part_net, "edge-list file")->required();
  part->add_option("-m,--regions", regions, "number of regions");
  part->add_option("--agent-capacity", agent_capacity, "edges per agent; sets the region count when --regions is absent");
  part->add_option("--seed", part_seed);
  part->add_option("-o,--out", part_file);

  std::string train_cfg, eval_cfg, checkpoint;
  Overrides train_o, eval_o;
  auto* train = app.add_subcommand("train", "Train (when the policy learns) and evaluate");
  add_overrides(train, train_cfg, train_o);
  auto* eval = app.add_subcommand("eval", "Evaluate a policy, optionally from a checkpoint");
  add_overrides(eval, eval_cfg, eval_o);
  eval->add_option("--checkpoint", checkpoint, "checkpoint directory for learned policies");

  auto* cmp = app.add_subcommand("compare", "Summarise metrics.json reports in one table");
  std::vector<std::string> reports;
  std::string cmp_out;
  cmp->add_option("reports", reports, "metrics.json files")->required();
  cmp->add_option("-o,--out", cmp_out, "directory for summary.txt and summary.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const rmarl::GridNetwork g = rmarl::generate_grid(grid);
      rmarl::save_network_file(g.network, net_out);
      if (!part_out.empty()) rmarl::write_text_file(part_out, rmarl::to_partition_text(g.partition));
      std::cout << g.network.num_nodes() << " nodes, " << g.network.num_edges() << " edges, "
                << g.partition.all_cutting_edges().size() << " cutting edges\n";
    } else if (part->parsed()) {
      const rmarl::RoadNetwork net = rmarl::load_network_file(part_net);
      if (regions <= 0) {
        if (agent_capacity <= 0) throw std::invalid_argument("give --regions or --agent-capacity");
        regions = static_cast<int>(rmarl::estimate_region_count(static_cast<long>(net.num_edges()), agent_capacity));
      }
      const rmarl::Partition p = rmarl::partition_network(net, regions, part_seed);
      rmarl::write_text_file(part_file, rmarl::to_partition_text(p));
      std::cout << p.num_regions() << " regions, " << p.all_cutting_edges().size() << " cutting edges\n";
    } else if (train->parsed() || eval->parsed()) {
      const bool training = train->parsed();
      const rmarl::ExperimentConfig cfg = training ? resolve(train_cfg, train_o) : resolve(eval_cfg, eval_o);
      const std::string dir = output_dir(cfg.output_dir);
      rmarl::Report report;
      if (training) {
        rmarl::TrainedModels models;
        report = rmarl::run_experiment(cfg, [](const std::string& msg) { std::cerr << msg << '\n'; }, &models);
        rmarl::save_models(models, (fs::path(dir) / "checkpoint").string());
      } else if (!checkpoint.empty()) {
        report = rmarl::evaluate_checkpoint(cfg, checkpoint);
      } else {
        auto c = cfg;
        c.rl.episodes = 0;
        c.qrouting.episodes = 0;
        report = rmarl::run_experiment(c);
      }
      rmarl::write_report(report, cfg, dir);
      std::cout << rmarl::compare({report}).text << "reports written to " << dir << '\n';
    } else if (cmp->parsed()) {
      std::vector<rmarl::Report> loaded;
      for (const auto& path : reports) loaded.push_back(rmarl::parse_report_json(rmarl::read_text_file(path)));
      const rmarl::Comparison c = rmarl::compare(loaded);
      std::cout << c.text;
      if (!cmp_out.empty()) {
        const std::string dir = output_dir(cmp_out);
        fs::create_directories(dir);
        rmarl::write_text_file((fs::path(dir) / "summary.txt").string(), c.text);
        rmarl::write_text_file((fs::path(dir) / "summary.csv").string(), c.csv);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
