#include "rmarl/sim/congestion.hpp"

#include <stdexcept>

namespace rmarl {

CongestionModel parse_congestion_model(std::string_view name) {
  if (name == "paper_def") return CongestionModel::kPaperDef;
  if (name == "experiment") return CongestionModel::kExperiment;
  if (name == "experiment_subtractive") return CongestionModel::kExperimentSubtractive;
  throw std::invalid_argument("unknown congestion model '" + std::string(name) + "'");
}

std::string to_string(CongestionModel model) {
  switch (model) {
    case CongestionModel::kPaperDef:
      return "paper_def";
    case CongestionModel::kExperiment:
      return "experiment";
    case CongestionModel::kExperimentSubtractive:
      return "experiment_subtractive";
  }
  return "experiment";
}

double effective_speed(const Edge& edge, int n, CongestionModel model, double alpha) {
  if (n <= edge.capacity) return edge.max_speed;
  switch (model) {
    case CongestionModel::kPaperDef:
      return edge.max_speed * alpha * static_cast<double>(edge.capacity) / static_cast<double>(n);
    case CongestionModel::kExperiment:
      return alpha * edge.max_speed;
    case CongestionModel::kExperimentSubtractive:
      return (1.0 - alpha) * edge.max_speed;
  }
  return edge.max_speed;
}

}  // namespace rmarl
