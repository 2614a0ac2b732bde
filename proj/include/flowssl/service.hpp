#pragma once

#include "flowssl/prediction.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace httplib {
class Server;
}

namespace flowssl {

struct ServiceOptions {
  SolveOptions solve;
  std::vector<double> lambda_grid = kDefaultLambdaGrid;
  double support_eps = kDefaultSupportEps;
};

struct ServiceReply {
  int status = 200;
  std::string body;  // JSON
};

using QueryParams = std::map<std::string, std::string>;

// JSON facade over a loaded graph:
//   GET /health, /graph/meta, /nodes, /flow?node=&lambda=, /predictions?lambda=
//
// The graph and factorization are shared read-only. Solves are cached under
// lambda rounded to 1e-4, and the cached lambda is the one actually solved,
// so a cache key fully determines its response. Handlers may run
// concurrently.
class ApiService {
 public:
  explicit ApiService(ServiceOptions options = {});
  ApiService(Graph graph, ServiceOptions options = {});

  // Replaces the session; builds the factorization eagerly.
  void load(Graph graph);
  bool loaded() const;

  ServiceReply health() const;
  ServiceReply meta() const;
  ServiceReply nodes() const;
  ServiceReply flow(const QueryParams& params);
  ServiceReply predictions(const QueryParams& params);

  // Dispatch by path for GET requests; unknown paths give 404.
  ServiceReply handle(const std::string& path, const QueryParams& params);

  static double cache_lambda(double lambda);

 private:
  using Key = std::pair<NodeId, long long>;

  ServiceOptions options_;
  std::shared_ptr<const FlowEngine> engine_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const ServiceReply>> flow_cache_;
  std::map<long long, std::shared_ptr<const ServiceReply>> prediction_cache_;

  std::shared_ptr<const FlowEngine> engine() const;
};

// Binds an ApiService to an HTTP listener with CORS enabled.
class ApiServer {
 public:
  explicit ApiServer(ApiService& service);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws DataError
  // when the address is unavailable.
  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void stop();

 private:
  ApiService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace flowssl
