#include "rmarl/agent/networks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "json.hpp"
#include "rmarl/graph/road_network.hpp"

namespace rmarl {

ActorNet::ActorNet(RegionId region, ActorDims dims, std::uint64_t seed) : region_(region), dims_(dims) {
  if (dims.num_actions < 1 || dims.hidden < 1) throw std::invalid_argument("actor dimensions must be positive");
  const int h = dims.hidden;
  edge_enc_ = nn::Mlp(ps_, "edge_enc", {dims.road_features, h, h});
  req_enc_ = nn::Mlp(ps_, "req_enc", {dims.request_features, h, h});
  gru_ = nn::GruCell(ps_, "gru", dims.request_features, h);
  score_ = nn::Mlp(ps_, "score", {dims.num_actions * h + 2 * h, 64, dims.num_actions});
  ps_.init_uniform(seed);
}

nn::Var ActorNet::forward(nn::Tape& tape, const RoadObservation& road, const std::vector<std::vector<double>>& requests,
                          int focal, const std::vector<bool>& mask) {
  if (road.rows != dims_.num_actions) throw std::invalid_argument("road observation rows do not match actions");
  if (requests.empty() || focal < 0 || focal >= static_cast<int>(requests.size())) {
    throw std::invalid_argument("focal request out of range");
  }
  if (static_cast<int>(mask.size()) != dims_.num_actions) throw std::invalid_argument("mask size mismatch");
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw DeadEndError("every action of region " + std::to_string(region_) + " is masked");
  }

  std::vector<nn::Var> parts;
  for (int r = 0; r < road.rows; ++r) parts.push_back(edge_enc_.forward(tape, tape.input(road.row(r))));

  nn::Var h = tape.input(std::vector<double>(static_cast<std::size_t>(dims_.hidden), 0.0));
  nn::Var focal_in{};
  for (std::size_t k = 0; k < requests.size(); ++k) {
    const nn::Var x = tape.input(requests[k]);
    if (static_cast<int>(k) == focal) focal_in = x;
    h = gru_.forward(tape, x, h);
  }
  parts.push_back(req_enc_.forward(tape, focal_in));
  parts.push_back(h);

  const nn::Var scores = score_.forward(tape, tape.concat(parts));
  return tape.masked_log_softmax(scores, mask);
}

std::vector<double> ActorNet::probabilities(const RoadObservation& road,
                                            const std::vector<std::vector<double>>& requests, int focal,
                                            const std::vector<bool>& mask) {
  nn::Tape tape;
  const nn::Var logp = forward(tape, road, requests, focal, mask);
  std::vector<double> p = tape.value(logp);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = mask[i] ? std::exp(p[i]) : 0.0;
  return p;
}

CriticNet::CriticNet(int input_size, std::uint64_t seed, std::vector<int> hidden) {
  std::vector<int> sizes{input_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = nn::Mlp(ps_, "critic", sizes);
  ps_.init_uniform(seed);
}

double CriticNet::value(const std::vector<double>& local_state) const { return net_.eval(local_state)[0]; }

nn::Var CriticNet::forward(nn::Tape& tape, const std::vector<double>& local_state) {
  return net_.forward(tape, tape.input(local_state));
}

int select_action(const std::vector<double>& probs, SelectMode mode, std::mt19937_64& rng) {
  if (probs.empty()) throw std::invalid_argument("select_action: empty distribution");
  if (mode == SelectMode::kArgmax) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.size()); ++i) {
      if (probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
  }
  std::discrete_distribution<int> dist(probs.begin(), probs.end());
  return dist(rng);
}

AgentSet make_agents(const Partition& part, const ObservationBuilder& obs, int hidden, std::uint64_t seed) {
  AgentSet set;
  set.hidden = hidden;
  set.request_features = obs.request_features();
  set.max_actions = obs.max_actions();
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(part.num_regions()) + 1);
  std::mt19937_64 gen(seed);
  for (auto& s : seeds) s = gen();
  for (RegionId r = 0; r < part.num_regions(); ++r) {
    ActorDims d;
    d.num_actions = static_cast<int>(part.cutting_edges(r).size());
    d.request_features = obs.request_features();
    d.hidden = hidden;
    if (d.num_actions == 0) {
      set.actors.push_back(nullptr);  // region without exits never decides
      continue;
    }
    set.actors.push_back(std::make_unique<ActorNet>(r, d, seeds[static_cast<std::size_t>(r)]));
  }
  set.critic = std::make_unique<CriticNet>(obs.local_size(), seeds.back());
  return set;
}

void save_agents(const AgentSet& agents, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["D_h"] = agents.hidden;
  manifest["F"] = agents.road_features;
  manifest["F_prime"] = agents.request_features;
  manifest["K_max"] = agents.max_actions;
  manifest["critic"] = "critic.params";
  nlohmann::json actors = nlohmann::json::object();
  for (std::size_t r = 0; r < agents.actors.size(); ++r) {
    if (!agents.actors[r]) continue;
    const std::string file = "actor_" + std::to_string(r) + ".params";
    agents.actors[r]->params().save((fs::path(dir) / file).string());
    actors[std::to_string(r)] = file;
  }
  manifest["actors"] = actors;
  agents.critic->params().save((fs::path(dir) / "critic.params").string());
  write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void load_agents(AgentSet& agents, const std::string& dir) {
  namespace fs = std::filesystem;
  const auto manifest = nlohmann::json::parse(read_text_file((fs::path(dir) / "manifest.json").string()));
  if (manifest.at("D_h").get<int>() != agents.hidden || manifest.at("F").get<int>() != agents.road_features ||
      manifest.at("F_prime").get<int>() != agents.request_features ||
      manifest.at("K_max").get<int>() != agents.max_actions) {
    throw std::runtime_error("checkpoint manifest does not match the scenario dimensions");
  }
  const auto& actors = manifest.at("actors");
  for (std::size_t r = 0; r < agents.actors.size(); ++r) {
    if (!agents.actors[r]) continue;
    const std::string key = std::to_string(r);
    if (!actors.contains(key)) throw std::runtime_error("checkpoint has no actor for region " + key);
    agents.actors[r]->params().load((fs::path(dir) / actors.at(key).get<std::string>()).string());
  }
  agents.critic->params().load((fs::path(dir) / manifest.at("critic").get<std::string>()).string());
}

}  // namespace rmarl
