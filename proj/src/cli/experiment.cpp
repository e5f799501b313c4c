#include "rmarl/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "json.hpp"

namespace rmarl {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string scenario_key(const ExperimentConfig& c) {
  std::ostringstream s;
  if (c.network_source == "grid") {
    s << "grid" << c.grid.regions_per_side << "x" << c.grid.nodes_per_region_side << "/L" << c.grid.edge_length
      << "/v" << c.grid.max_speed << "/c" << c.grid.capacity;
  } else {
    s << "file:" << c.network_file;
  }
  s << ";part=" << c.partition_source;
  if (c.partition_source == "file") s << ":" << c.partition_file;
  if (c.partition_source == "auto") s << ":" << c.regions;
  s << ";model=" << to_string(c.congestion) << "/a" << c.alpha << ";T=" << c.episode_len << ";veh=" << c.max_vehicles
    << ";rate=" << c.injection_rate << ";reinject=" << (c.reinject ? 1 : 0) << ";od=" << c.od_mode;
  if (c.od_mode == "region") s << ":" << c.od_from << "-" << c.od_to;
  s << ";seed=" << c.seed << ";evals=" << c.eval_seeds;
  return s.str();
}

nlohmann::json ms_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }
MeanStd ms_parse(const nlohmann::json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

}  // namespace

std::unique_ptr<ScenarioBundle> build_scenario(const ExperimentConfig& cfg) {
  validate(cfg);
  auto b = std::make_unique<ScenarioBundle>();
  if (cfg.network_source == "grid") {
    GridNetwork g = generate_grid(cfg.grid);
    b->net = std::move(g.network);
    if (cfg.partition_source == "grid") b->part = Partition(b->net, g.partition.assignment());
  } else {
    b->net = load_network_file(cfg.network_file);
  }
  if (cfg.partition_source == "file") {
    b->part = load_partition_file(cfg.partition_file, b->net);
  } else if (cfg.partition_source == "auto") {
    b->part = partition_network(b->net, cfg.regions, cfg.seed);
  }

  Scenario& s = b->scenario;
  s.net = &b->net;
  s.part = &b->part;
  s.sim.model = cfg.congestion;
  s.sim.alpha = cfg.alpha;
  s.sim.episode_len = cfg.episode_len;
  s.sim.idle_g = cfg.idle_g;
  s.sim.drive_g = cfg.drive_g;
  s.injection.vehicles_per_second = cfg.injection_rate;
  s.injection.max_vehicles = cfg.max_vehicles;
  s.injection.reinject = cfg.reinject;
  if (cfg.od_mode == "region") {
    if (cfg.od_from >= b->part.num_regions() || cfg.od_to >= b->part.num_regions()) {
      throw ConfigError("simulation.od: region id out of range");
    }
    s.sampler = OdSampler::region_to_region(b->part, cfg.od_from, cfg.od_to);
  } else {
    s.sampler = OdSampler::uniform(b->net);
  }
  return b;
}

std::uint64_t eval_seed(const ExperimentConfig& cfg, int i) {
  return cfg.seed * 1000003ULL + 500000ULL + static_cast<std::uint64_t>(i);
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
  return m;
}

Report summarize(const std::string& policy, const std::string& scenario, const Partition& part, long episode_len,
                 const std::vector<EpisodeStats>& episodes) {
  Report r;
  r.policy = policy;
  r.scenario = scenario;
  r.cutting_edges = part.all_cutting_edges();
  std::vector<double> thr, avtt, co2;
  for (const EpisodeStats& e : episodes) {
    r.eval.push_back(e.metrics);
    thr.push_back(static_cast<double>(e.metrics.throughput));
    if (e.metrics.avtt_s) avtt.push_back(*e.metrics.avtt_s);
    co2.push_back(e.metrics.co2_kg);
  }
  r.throughput = mean_std(thr);
  r.avtt_s = mean_std(avtt);
  r.co2_kg = mean_std(co2);

  const long slots = std::max<long>(1, (episode_len + kLoadSlotSeconds - 1) / kLoadSlotSeconds);
  r.load.assign(static_cast<std::size_t>(slots), std::vector<double>(r.cutting_edges.size(), 0.0));
  for (const EpisodeStats& e : episodes) {
    for (const auto& [t, edge] : e.cut_entries) {
      const auto it = std::lower_bound(r.cutting_edges.begin(), r.cutting_edges.end(), edge);
      const std::size_t col = static_cast<std::size_t>(it - r.cutting_edges.begin());
      const std::size_t slot = static_cast<std::size_t>(std::min(slots - 1, t / kLoadSlotSeconds));
      r.load[slot][col] += 1.0;
    }
  }
  if (!episodes.empty()) {
    for (auto& row : r.load) {
      for (double& v : row) v /= static_cast<double>(episodes.size());
    }
  }
  return r;
}

namespace {

std::vector<EpisodeStats> evaluate(const ExperimentConfig& cfg, const ScenarioBundle& b, AgentSet* agents,
                                   QRouter* router) {
  std::vector<EpisodeStats> out;
  for (int i = 0; i < cfg.eval_seeds; ++i) {
    const std::uint64_t seed = eval_seed(cfg, i);
    const Scenario& s = b.scenario;
    if (cfg.policy == "random" || cfg.policy == "random_masked") {
      RandomPolicy p(seed, cfg.policy == "random_masked");
      out.push_back(run_episode(s, p, seed));
    } else if (cfg.policy == "sp") {
      ShortestPathPolicy p(b.net);
      out.push_back(run_episode(s, p, seed));
    } else if (cfg.policy == "spfr") {
      DynamicShortestPathPolicy p;
      out.push_back(run_episode(s, p, seed));
    } else if (cfg.policy == "qrouting") {
      router->set_epsilon(0.0);
      out.push_back(run_qrouting_episode(s, *router, seed));
    } else {
      ObsScales scales;
      scales.time = static_cast<double>(cfg.episode_len);
      scales.count = static_cast<double>(cfg.max_vehicles);
      ObservationBuilder obs(b.net, b.part, scales);
      MarlPolicy p(*agents, obs, SelectMode::kArgmax, seed, cfg.policy == "asyn_marl" && cfg.rl.masked);
      out.push_back(run_episode(s, p, seed));
    }
  }
  return out;
}

bool is_marl(const std::string& policy) { return policy == "asyn_marl" || policy == "asyn_marl_unmasked"; }

TrainConfig train_config(const ExperimentConfig& cfg) {
  TrainConfig t;
  t.episodes = cfg.rl.episodes;
  t.gamma = cfg.rl.gamma;
  t.clip = cfg.rl.clip;
  t.epochs = cfg.rl.epochs;
  t.actor_lr = cfg.rl.actor_lr;
  t.critic_lr = cfg.rl.critic_lr;
  t.normalize_advantages = cfg.rl.normalize_advantages;
  t.masked = cfg.policy == "asyn_marl" && cfg.rl.masked;
  t.seed = cfg.seed;
  return t;
}

std::unique_ptr<AgentSet> new_agents(const ExperimentConfig& cfg, const ScenarioBundle& b) {
  ObsScales scales;
  scales.time = static_cast<double>(cfg.episode_len);
  scales.count = static_cast<double>(cfg.max_vehicles);
  ObservationBuilder obs(b.net, b.part, scales);
  return std::make_unique<AgentSet>(make_agents(b.part, obs, cfg.rl.hidden, cfg.seed));
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& progress,
                      TrainedModels* models) {
  const auto bundle = build_scenario(cfg);
  std::unique_ptr<AgentSet> agents;
  std::unique_ptr<QRouter> router;
  std::vector<EpisodeLog> training;

  if (is_marl(cfg.policy)) {
    agents = new_agents(cfg, *bundle);
    training = train_loop(bundle->scenario, *agents, train_config(cfg), [&](const EpisodeLog& l) {
      if (progress) {
        progress("episode " + std::to_string(l.episode) + " throughput " + std::to_string(l.metrics.throughput));
      }
    });
  } else if (cfg.policy == "qrouting") {
    router = std::make_unique<QRouter>(cfg.qrouting.eta, cfg.seed);
    for (int ep = 0; ep < cfg.qrouting.episodes; ++ep) {
      router->set_epsilon(
          annealed_epsilon(ep, cfg.qrouting.episodes, cfg.qrouting.eps_start, cfg.qrouting.eps_end));
      const auto stats = run_qrouting_episode(bundle->scenario, *router, cfg.seed * 104729 + static_cast<std::uint64_t>(ep));
      EpisodeLog l;
      l.episode = ep;
      l.metrics = stats.metrics;
      training.push_back(l);
      if (progress) progress("episode " + std::to_string(ep) + " throughput " + std::to_string(l.metrics.throughput));
    }
  }

  Report r = summarize(cfg.policy, scenario_key(cfg), bundle->part, cfg.episode_len,
                       evaluate(cfg, *bundle, agents.get(), router.get()));
  r.training = std::move(training);
  if (models) {
    models->agents = std::move(agents);
    models->router = std::move(router);
  }
  return r;
}

void save_models(const TrainedModels& models, const std::string& dir) {
  if (models.agents) save_agents(*models.agents, dir);
  if (models.router) {
    std::filesystem::create_directories(dir);
    write_text_file((std::filesystem::path(dir) / "qtable.bin").string(), models.router->table().serialize());
  }
}

Report evaluate_checkpoint(const ExperimentConfig& cfg, const std::string& checkpoint_dir) {
  const auto bundle = build_scenario(cfg);
  std::unique_ptr<AgentSet> agents;
  std::unique_ptr<QRouter> router;
  if (is_marl(cfg.policy)) {
    agents = new_agents(cfg, *bundle);
    load_agents(*agents, checkpoint_dir);
  } else if (cfg.policy == "qrouting") {
    router = std::make_unique<QRouter>(cfg.qrouting.eta, cfg.seed);
    const auto path = std::filesystem::path(checkpoint_dir) / "qtable.bin";
    router->table() = QTable::deserialize(read_text_file(path.string()));
  }
  return summarize(cfg.policy, scenario_key(cfg), bundle->part, cfg.episode_len,
                   evaluate(cfg, *bundle, agents.get(), router.get()));
}

std::string report_json(const Report& r) {
  nlohmann::json j;
  j["policy"] = r.policy;
  j["scenario"] = r.scenario;
  j["throughput"] = ms_json(r.throughput);
  j["avtt_s"] = ms_json(r.avtt_s);
  j["co2_kg"] = ms_json(r.co2_kg);
  nlohmann::json eps = nlohmann::json::array();
  for (const EpisodeMetrics& m : r.eval) eps.push_back(nlohmann::json::parse(metrics_json(m)));
  j["episodes"] = eps;
  j["cutting_edges"] = r.cutting_edges;
  j["load_slot_seconds"] = kLoadSlotSeconds;
  j["load"] = r.load;
  return j.dump(2) + "\n";
}

Report parse_report_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Report r;
  r.policy = j.at("policy").get<std::string>();
  r.scenario = j.at("scenario").get<std::string>();
  r.throughput = ms_parse(j.at("throughput"));
  r.avtt_s = ms_parse(j.at("avtt_s"));
  r.co2_kg = ms_parse(j.at("co2_kg"));
  for (const auto& e : j.at("episodes")) {
    EpisodeMetrics m;
    m.throughput = e.at("throughput").get<long>();
    if (!e.at("avtt_s").is_null()) m.avtt_s = e.at("avtt_s").get<double>();
    m.co2_kg = e.at("co2_kg").get<double>();
    m.episode_len = e.at("episode_len").get<long>();
    m.injected = e.at("injected").get<long>();
    r.eval.push_back(m);
  }
  r.cutting_edges = j.at("cutting_edges").get<std::vector<EdgeId>>();
  r.load = j.at("load").get<std::vector<std::vector<double>>>();
  return r;
}

std::string load_matrix_csv(const Report& r) {
  std::ostringstream out;
  out << "slot_start_s";
  for (EdgeId e : r.cutting_edges) out << ",edge_" << e;
  out << '\n';
  for (std::size_t s = 0; s < r.load.size(); ++s) {
    out << static_cast<long>(s) * kLoadSlotSeconds;
    for (double v : r.load[s]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

void write_report(const Report& r, const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_text_file((fs::path(dir) / "metrics.json").string(), report_json(r));
  write_text_file((fs::path(dir) / "load_matrix.csv").string(), load_matrix_csv(r));
  write_text_file((fs::path(dir) / "config.json").string(), to_json(cfg));
  std::vector<EpisodeLog> rows = r.training;
  if (rows.empty()) {
    for (std::size_t i = 0; i < r.eval.size(); ++i) {
      EpisodeLog l;
      l.episode = static_cast<int>(i);
      l.metrics = r.eval[i];
      rows.push_back(l);
    }
  }
  write_text_file((fs::path(dir) / "episodes.csv").string(), episodes_csv(rows));
}

Comparison compare(const std::vector<Report>& reports) {
  if (reports.empty()) throw std::invalid_argument("compare needs at least one report");
  Comparison c;
  for (const Report& r : reports) c.mixed_scenarios |= r.scenario != reports.front().scenario;

  std::ostringstream text, csv;
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %22s %22s %20s\n", "policy", "throughput", "avtt_s", "co2_kg");
  text << line;
  csv << "policy,scenario,throughput_mean,throughput_std,avtt_s_mean,avtt_s_std,co2_kg_mean,co2_kg_std\n";
  for (const Report& r : reports) {
    const std::string thr = fmt("%.2f", r.throughput.mean) + " +/- " + fmt("%.2f", r.throughput.std);
    const std::string avtt = fmt("%.3f", r.avtt_s.mean) + " +/- " + fmt("%.3f", r.avtt_s.std);
    const std::string co2 = fmt("%.4f", r.co2_kg.mean) + " +/- " + fmt("%.4f", r.co2_kg.std);
    std::snprintf(line, sizeof(line), "%-20s %22s %22s %20s\n", r.policy.c_str(), thr.c_str(), avtt.c_str(),
                  co2.c_str());
    text << line;
    csv << r.policy << ",\"" << r.scenario << "\"," << fmt("%.6f", r.throughput.mean) << ','
        << fmt("%.6f", r.throughput.std) << ',' << fmt("%.6f", r.avtt_s.mean) << ',' << fmt("%.6f", r.avtt_s.std)
        << ',' << fmt("%.8f", r.co2_kg.mean) << ',' << fmt("%.8f", r.co2_kg.std) << '\n';
  }
  if (c.mixed_scenarios) text << "warning: reports come from different scenarios\n";
  c.text = text.str();
  c.csv = csv.str();
  return c;
}

std::string output_root(const std::string& fallback) {
  const char* env = std::getenv("RMARL_OUT");
  return (env && *env) ? std::string(env) : fallback;
}

}  // namespace rmarl
