#pragma once

#include "flowssl/prediction.hpp"
#include "flowssl/subgraph.hpp"

#include <json.hpp>

namespace flowssl::detail {

nlohmann::json weights_json(const WeightVector& weights,
                            const std::vector<NodeId>& label_nodes);
nlohmann::json subgraph_json(const FlowSubgraph& subgraph);
nlohmann::json report_json(const PredictionReport& report);

}  // namespace flowssl::detail
