#include "flowssl/service.hpp"

#include "flowssl/error.hpp"
#include "json_support.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <variant>

namespace flowssl {

using nlohmann::json;

namespace {

ServiceReply reply(int status, const json& body) { return {status, body.dump() + "\n"}; }

ServiceReply error_reply(int status, const std::string& message) {
  return reply(status, {{"error", message}});
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<NodeId> parse_node(const std::string& text) {
  NodeId value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Validated lambda from the query, or an error reply.
std::variant<double, ServiceReply> lambda_param(const QueryParams& params) {
  const auto it = params.find("lambda");
  if (it == params.end()) return error_reply(422, "missing lambda parameter");
  const auto lambda = parse_number(it->second);
  if (!lambda) return error_reply(422, "lambda is not a number: " + it->second);
  if (*lambda < 0.0) return error_reply(422, "lambda must be non-negative");
  return ApiService::cache_lambda(*lambda);
}

long long lambda_key(double lambda) { return std::llround(lambda * 1e4); }

}  // namespace

double ApiService::cache_lambda(double lambda) {
  return static_cast<double>(lambda_key(lambda)) / 1e4;
}

ApiService::ApiService(ServiceOptions options) : options_(std::move(options)) {}

ApiService::ApiService(Graph graph, ServiceOptions options) : options_(std::move(options)) {
  load(std::move(graph));
}

void ApiService::load(Graph graph) {
  auto engine = std::make_shared<const FlowEngine>(std::move(graph), options_.solve);
  if (engine->graph().unlabeled_count() > 0) {
    engine->admm_cache();
    if (!engine->graph().directed()) engine->exact_cache();
  }
  std::lock_guard lock(mutex_);
  engine_ = std::move(engine);
  flow_cache_.clear();
  prediction_cache_.clear();
}

bool ApiService::loaded() const { return engine() != nullptr; }

std::shared_ptr<const FlowEngine> ApiService::engine() const {
  std::lock_guard lock(mutex_);
  return engine_;
}

ServiceReply ApiService::health() const {
  return reply(200, {{"status", "ok"}, {"loaded", loaded()}});
}

ServiceReply ApiService::meta() const {
  const auto engine = this->engine();
  if (!engine) return error_reply(503, "no graph loaded");
  const Graph& g = engine->graph();
  return reply(200, {{"n", g.node_count()},
                     {"m", g.edge_count()},
                     {"n_l", g.labeled_count()},
                     {"directed", g.directed()},
                     {"lambda_grid", options_.lambda_grid}});
}

ServiceReply ApiService::nodes() const {
  const auto engine = this->engine();
  if (!engine) return error_reply(503, "no graph loaded");
  const Graph& g = engine->graph();
  json out = json::array();
  for (NodeId v = 0; v < g.node_count(); ++v) {
    json node = {{"id", v}, {"labeled", g.is_labeled(v)}};
    if (auto slot = g.label_slot(v)) node["value"] = g.labels()[*slot].value;
    out.push_back(std::move(node));
  }
  return reply(200, out);
}

ServiceReply ApiService::flow(const QueryParams& params) {
  const auto engine = this->engine();
  if (!engine) return error_reply(503, "no graph loaded");
  const auto node_it = params.find("node");
  if (node_it == params.end()) return error_reply(422, "missing node parameter");
  const auto node = parse_node(node_it->second);
  if (!node || *node >= engine->graph().node_count()) {
    return error_reply(404, "unknown node " + node_it->second);
  }
  if (engine->graph().is_labeled(*node)) {
    return error_reply(422, "node " + node_it->second + " is labeled");
  }
  const auto lambda = lambda_param(params);
  if (auto* bad = std::get_if<ServiceReply>(&lambda)) return *bad;
  const double lam = std::get<double>(lambda);

  const Key key{*node, lambda_key(lam)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = flow_cache_.find(key); it != flow_cache_.end()) return *it->second;
  }

  ServiceReply result;
  try {
    const FlowSolution solution = engine->solve(*node, lam);
    if (!solution.converged) {
      result = error_reply(500, "solver did not converge: " + solution.diagnostics());
    } else {
      const IncidenceSystem& system = engine->system();
      const WeightVector weights = weights_from_flow(solution, system);
      const FlowSubgraph subgraph = extract_support(solution, system, options_.support_eps);
      result = reply(200, {{"node", *node},
                           {"lambda", lam},
                           {"converged", true},
                           {"iterations", solution.iterations},
                           {"value", predict(weights, system.label_values())},
                           {"entropy", weight_entropy(weights)},
                           {"weights", detail::weights_json(weights, system.labeled_nodes())},
                           {"subgraph", detail::subgraph_json(subgraph)}});
    }
  } catch (const std::exception& err) {
    result = error_reply(500, err.what());
  }
  std::lock_guard lock(mutex_);
  // Another request may have raced us here; the first entry stays.
  const auto [it, inserted] =
      flow_cache_.emplace(key, std::make_shared<const ServiceReply>(std::move(result)));
  return *it->second;
}

ServiceReply ApiService::predictions(const QueryParams& params) {
  const auto engine = this->engine();
  if (!engine) return error_reply(503, "no graph loaded");
  const auto lambda = lambda_param(params);
  if (auto* bad = std::get_if<ServiceReply>(&lambda)) return *bad;
  const double lam = std::get<double>(lambda);
  const long long key = lambda_key(lam);
  {
    std::lock_guard lock(mutex_);
    if (auto it = prediction_cache_.find(key); it != prediction_cache_.end()) {
      return *it->second;
    }
  }
  ServiceReply result;
  try {
    result = reply(200, detail::report_json(predict_all(*engine, lam)));
  } catch (const std::exception& err) {
    result = error_reply(500, err.what());
  }
  std::lock_guard lock(mutex_);
  const auto [it, inserted] =
      prediction_cache_.emplace(key, std::make_shared<const ServiceReply>(std::move(result)));
  return *it->second;
}

ServiceReply ApiService::handle(const std::string& path, const QueryParams& params) {
  if (path == "/health") return health();
  if (path == "/graph/meta") return meta();
  if (path == "/nodes") return nodes();
  if (path == "/flow") return flow(params);
  if (path == "/predictions") return predictions(params);
  return error_reply(404, "no such endpoint: " + path);
}

// ---------------------------------------------------------------------------

ApiServer::ApiServer(ApiService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [key, value] : req.params) params.emplace(key, value);
    const ServiceReply r = service_.handle(req.path, params);
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host.c_str());
    if (bound < 0) throw DataError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host.c_str(), port)) {
    throw DataError("cannot bind " + host + ":" + std::to_string(port) +
                    " (port busy?)");
  }
  return port;
}

void ApiServer::run() { server_->listen_after_bind(); }

void ApiServer::stop() {
  if (server_) server_->stop();
}

}  // namespace flowssl
