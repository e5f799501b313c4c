#include "rmarl/cli/config.hpp"

#include <set>

#include "json.hpp"
#include "rmarl/graph/road_network.hpp"

namespace rmarl {

namespace {

using nlohmann::json;

// Reads known keys from one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return ObjectReader(j_.contains(key) ? j_.at(key) : kEmpty, field(key));
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(field(k.c_str()) + ": unknown key");
    }
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

bool is_known_policy(const std::string& p) {
  static const std::set<std::string> kPolicies{"random", "random_masked", "sp", "spfr",
                                               "qrouting", "asyn_marl", "asyn_marl_unmasked"};
  return kPolicies.count(p) > 0;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader r(root, "");

  auto net = r.child("network");
  net.read("source", c.network_source);
  net.read("file", c.network_file);
  auto grid = net.child("grid");
  grid.read("regions_per_side", c.grid.regions_per_side);
  grid.read("nodes_per_region_side", c.grid.nodes_per_region_side);
  grid.read("edge_length", c.grid.edge_length);
  grid.read("max_speed", c.grid.max_speed);
  grid.read("capacity", c.grid.capacity);
  grid.finish();
  net.finish();

  auto part = r.child("partition");
  part.read("source", c.partition_source);
  part.read("file", c.partition_file);
  part.read("regions", c.regions);
  part.finish();

  auto sim = r.child("simulation");
  std::string model = to_string(c.congestion);
  sim.read("congestion_model", model);
  try {
    c.congestion = parse_congestion_model(model);
  } catch (const std::exception&) {
    throw ConfigError(sim.field("congestion_model") + ": unknown model '" + model + "'");
  }
  sim.read("alpha", c.alpha);
  sim.read("episode_len", c.episode_len);
  sim.read("max_vehicles", c.max_vehicles);
  sim.read("injection_rate", c.injection_rate);
  sim.read("reinject", c.reinject);
  auto od = sim.child("od");
  od.read("mode", c.od_mode);
  od.read("from", c.od_from);
  od.read("to", c.od_to);
  od.finish();
  auto co2 = sim.child("co2");
  co2.read("idle_g", c.idle_g);
  co2.read("drive_g", c.drive_g);
  co2.finish();
  sim.finish();

  r.read("policy", c.policy);

  auto rl = r.child("rl");
  rl.read("gamma", c.rl.gamma);
  rl.read("clip", c.rl.clip);
  rl.read("actor_lr", c.rl.actor_lr);
  rl.read("critic_lr", c.rl.critic_lr);
  rl.read("epochs", c.rl.epochs);
  rl.read("episodes", c.rl.episodes);
  rl.read("hidden", c.rl.hidden);
  rl.read("normalize_advantages", c.rl.normalize_advantages);
  rl.read("masked", c.rl.masked);
  rl.finish();

  auto q = r.child("qrouting");
  q.read("eta", c.qrouting.eta);
  q.read("episodes", c.qrouting.episodes);
  q.read("eps_start", c.qrouting.eps_start);
  q.read("eps_end", c.qrouting.eps_end);
  q.finish();

  r.read("eval_seeds", c.eval_seeds);
  r.read("seed", c.seed);
  r.read("output_dir", c.output_dir);
  r.finish();

  validate(c);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) { return parse_config(read_text_file(path)); }

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["network"] = {{"source", c.network_source},
                  {"file", c.network_file},
                  {"grid",
                   {{"regions_per_side", c.grid.regions_per_side},
                    {"nodes_per_region_side", c.grid.nodes_per_region_side},
                    {"edge_length", c.grid.edge_length},
                    {"max_speed", c.grid.max_speed},
                    {"capacity", c.grid.capacity}}}};
  j["partition"] = {{"source", c.partition_source}, {"file", c.partition_file}, {"regions", c.regions}};
  j["simulation"] = {{"congestion_model", to_string(c.congestion)},
                     {"alpha", c.alpha},
                     {"episode_len", c.episode_len},
                     {"max_vehicles", c.max_vehicles},
                     {"injection_rate", c.injection_rate},
                     {"reinject", c.reinject},
                     {"od", {{"mode", c.od_mode}, {"from", c.od_from}, {"to", c.od_to}}},
                     {"co2", {{"idle_g", c.idle_g}, {"drive_g", c.drive_g}}}};
  j["policy"] = c.policy;
  j["rl"] = {{"gamma", c.rl.gamma},
             {"clip", c.rl.clip},
             {"actor_lr", c.rl.actor_lr},
             {"critic_lr", c.rl.critic_lr},
             {"epochs", c.rl.epochs},
             {"episodes", c.rl.episodes},
             {"hidden", c.rl.hidden},
             {"normalize_advantages", c.rl.normalize_advantages},
             {"masked", c.rl.masked}};
  j["qrouting"] = {{"eta", c.qrouting.eta},
                   {"episodes", c.qrouting.episodes},
                   {"eps_start", c.qrouting.eps_start},
                   {"eps_end", c.qrouting.eps_end}};
  j["eval_seeds"] = c.eval_seeds;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
  };
  require(c.network_source == "grid" || c.network_source == "file", "network.source", "must be grid or file");
  if (c.network_source == "file") require(!c.network_file.empty(), "network.file", "required for file networks");
  require(c.grid.regions_per_side > 0, "network.grid.regions_per_side", "must be positive");
  require(c.grid.nodes_per_region_side > 0, "network.grid.nodes_per_region_side", "must be positive");
  require(c.grid.edge_length > 0, "network.grid.edge_length", "must be positive");
  require(c.grid.max_speed > 0, "network.grid.max_speed", "must be positive");
  require(c.grid.capacity > 0, "network.grid.capacity", "must be positive");
  require(c.partition_source == "grid" || c.partition_source == "file" || c.partition_source == "auto",
          "partition.source", "must be grid, file or auto");
  if (c.partition_source == "grid") {
    require(c.network_source == "grid", "partition.source", "grid partitions need a generated grid network");
  }
  if (c.partition_source == "file") require(!c.partition_file.empty(), "partition.file", "required");
  require(c.regions > 0, "partition.regions", "must be positive");
  require(c.alpha > 0 && c.alpha < 1, "simulation.alpha", "must lie in (0, 1)");
  require(c.episode_len > 0, "simulation.episode_len", "must be positive");
  require(c.max_vehicles > 0, "simulation.max_vehicles", "must be positive");
  require(c.injection_rate > 0, "simulation.injection_rate", "must be positive");
  require(c.od_mode == "uniform" || c.od_mode == "region", "simulation.od.mode", "must be uniform or region");
  if (c.od_mode == "region") {
    require(c.od_from >= 0, "simulation.od.from", "must be a region id");
    require(c.od_to >= 0, "simulation.od.to", "must be a region id");
  }
  require(c.idle_g >= 0, "simulation.co2.idle_g", "must be non-negative");
  require(c.drive_g >= 0, "simulation.co2.drive_g", "must be non-negative");
  require(is_known_policy(c.policy), "policy", "unknown policy '" + c.policy + "'");
  require(c.rl.gamma > 0 && c.rl.gamma <= 1, "rl.gamma", "must lie in (0, 1]");
  require(c.rl.clip > 0, "rl.clip", "must be positive");
  require(c.rl.actor_lr > 0, "rl.actor_lr", "must be positive");
  require(c.rl.critic_lr > 0, "rl.critic_lr", "must be positive");
  require(c.rl.epochs > 0, "rl.epochs", "must be positive");
  require(c.rl.episodes >= 0, "rl.episodes", "must be non-negative");
  require(c.rl.hidden > 0, "rl.hidden", "must be positive");
  require(c.qrouting.eta >= 0 && c.qrouting.eta <= 1, "qrouting.eta", "must lie in [0, 1]");
  require(c.qrouting.episodes >= 0, "qrouting.episodes", "must be non-negative");
  require(c.qrouting.eps_start >= 0 && c.qrouting.eps_start <= 1, "qrouting.eps_start", "must lie in [0, 1]");
  require(c.qrouting.eps_end >= 0 && c.qrouting.eps_end <= 1, "qrouting.eps_end", "must lie in [0, 1]");
  require(c.eval_seeds > 0, "eval_seeds", "must be positive");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
}

}  // namespace rmarl
