#include "rmarl/sim/injection.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rmarl {

OdSampler::OdSampler(std::vector<NodeId> sources, std::vector<NodeId> dests)
    : sources_(std::move(sources)), dests_(std::move(dests)) {
  if (sources_.empty() || dests_.empty()) throw std::invalid_argument("OD sampler needs sources and destinations");
}

OdSampler OdSampler::uniform(const RoadNetwork& net) {
  std::vector<NodeId> all(net.num_nodes());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
  return OdSampler(all, all);
}

OdSampler OdSampler::region_to_region(const Partition& part, RegionId from, RegionId to) {
  if (from < 0 || to < 0 || from >= part.num_regions() || to >= part.num_regions()) {
    throw std::invalid_argument("OD region out of range");
  }
  return OdSampler(part.nodes_in(from), part.nodes_in(to));
}

std::pair<NodeId, NodeId> OdSampler::sample(std::mt19937_64& rng) const {
  if (sources_.empty() || dests_.empty()) throw std::logic_error("OD sampler has no candidates");
  std::uniform_int_distribution<std::size_t> ps(0, sources_.size() - 1);
  std::uniform_int_distribution<std::size_t> pd(0, dests_.size() - 1);
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const NodeId s = sources_[ps(rng)];
    const NodeId d = dests_[pd(rng)];
    if (s != d) return {s, d};
  }
  throw std::runtime_error("OD sampler drew source == dest " + std::to_string(kMaxRetries) + " times");
}

int batch_size(double vehicles_per_second, long t) {
  const auto upto = [&](long s) { return static_cast<long>(std::floor(vehicles_per_second * static_cast<double>(s) + 1e-9)); };
  return static_cast<int>(upto(t + 1) - upto(t));
}

std::vector<Trip> inject_schedule(const InjectionSpec& spec, const OdSampler& sampler, std::uint64_t seed) {
  if (spec.max_vehicles < 1) throw std::invalid_argument("max_vehicles must be >= 1");
  if (!(spec.vehicles_per_second > 0.0)) throw std::invalid_argument("vehicles_per_second must be positive");
  InjectionSpec once = spec;
  once.reinject = false;
  Injector inj(once, sampler, seed);
  std::vector<Trip> out;
  for (long t = 0; inj.injected() < spec.max_vehicles; ++t) {
    auto batch = inj.release(t, 0);
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

Injector::Injector(InjectionSpec spec, OdSampler sampler, std::uint64_t seed)
    : spec_(spec), sampler_(std::move(sampler)), rng_(seed) {
  if (spec_.max_vehicles < 0) throw std::invalid_argument("max_vehicles must be >= 0");
  if (!(spec_.vehicles_per_second > 0.0)) throw std::invalid_argument("vehicles_per_second must be positive");
}

std::vector<Trip> Injector::release(long t, int running) {
  int n = batch_size(spec_.vehicles_per_second, t);
  if (spec_.reinject) {
    n = std::min(n, spec_.max_vehicles - running);
  } else {
    n = std::min(n, spec_.max_vehicles - next_id_);
  }
  std::vector<Trip> out;
  for (int i = 0; i < n; ++i) {
    const auto [s, d] = sampler_.sample(rng_);
    out.push_back(Trip{next_id_++, s, d, static_cast<double>(t)});
  }
  return out;
}

}  // namespace rmarl
