#pragma once

#include <string>
#include <string_view>

#include "rmarl/graph/road_network.hpp"

namespace rmarl {

/// Speed reduction applied once an edge carries more vehicles than its capacity.
enum class CongestionModel {
  kPaperDef,               // V_max * alpha * c / n
  kExperiment,             // alpha * V_max
  kExperimentSubtractive,  // (1 - alpha) * V_max
};

CongestionModel parse_congestion_model(std::string_view name);
std::string to_string(CongestionModel model);

/// Speed on `edge` with `n` vehicles on it. Equals edge.max_speed while n <= capacity.
double effective_speed(const Edge& edge, int n, CongestionModel model, double alpha);

}  // namespace rmarl
