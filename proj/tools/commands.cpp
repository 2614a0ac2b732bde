#include "commands.hpp"

#include "flowssl/error.hpp"
#include "flowssl/graph_io.hpp"
#include "flowssl/prediction.hpp"
#include "flowssl/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>

namespace flowssl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_lambda(double lambda) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, lambda);
  return std::string(buffer, result.ptr);
}

namespace {

struct SolverFlags {
  double rho = AdmmOptions{}.rho;
  double tol = AdmmOptions{}.tol;
  int max_iter = AdmmOptions{}.max_iter;
  std::optional<double> mu;
  bool directed = false;
  double eps = kDefaultSupportEps;

  SolveOptions options() const {
    SolveOptions o;
    o.admm = {rho, tol, max_iter};
    return o;
  }
};

void add_solver_flags(CLI::App& cmd, SolverFlags& flags) {
  cmd.add_option("--rho", flags.rho, "ADMM penalty parameter")->capture_default_str();
  cmd.add_option("--tol", flags.tol, "ADMM convergence threshold")->capture_default_str();
  cmd.add_option("--max-iter", flags.max_iter, "ADMM iteration cap")->capture_default_str();
  cmd.add_option("--mu", flags.mu, "attach anchor nodes (soft labels) with this strength");
  cmd.add_flag("--directed", flags.directed, "double every edge into two directed edges");
  cmd.add_option("--eps", flags.eps, "support threshold for flow subgraphs")
      ->capture_default_str();
}

// Graph file plus the optional anchor / directed transforms.
Graph load_graph(const std::string& path, const SolverFlags& flags) {
  Graph graph = read_graph_file(path);
  if (flags.mu) graph = add_anchor_nodes(graph, *flags.mu);
  if (flags.directed && !graph.directed()) graph = to_directed(graph);
  return graph;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string points;
  std::string labels;
  std::size_t k = 20;
  std::string normalization = "sym";
  std::string out;
};

int cmd_build(const BuildArgs& args, std::ostream& out) {
  const Eigen::MatrixXd points = read_points_csv(fs::path(args.points));
  std::vector<Label> labels;
  if (!args.labels.empty()) labels = read_labels_csv(fs::path(args.labels));
  const Graph knn = build_knn_graph(points, args.k);
  const Laplacian l = laplacian(knn, parse_normalization(args.normalization));
  const Graph graph =
      knn.with_costs(costs_from_laplacian(l, knn)).with_labels(std::move(labels));
  emit(graph_to_json(graph), args.out, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string graph;
  double lambda = 0.0;
  std::vector<double> grid = kDefaultLambdaGrid;
  std::optional<double> validate;
  bool classify = false;
  std::string truth;
  std::uint64_t seed = 0;
  SolverFlags solver;
  std::string out;
};

double held_out_error(const PredictionReport& report, const std::vector<Label>& held,
                      bool classification) {
  if (classification) return misclassification_rate(report, held);
  double sum = 0.0;
  for (const Label& h : held) {
    const auto it = std::find_if(report.nodes.begin(), report.nodes.end(),
                                 [&](const NodePrediction& p) { return p.node == h.node; });
    if (it == report.nodes.end() || !it->error.empty()) {
      return std::numeric_limits<double>::infinity();
    }
    sum += (it->value - h.value) * (it->value - h.value);
  }
  return sum / static_cast<double>(held.size());
}

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err) {
  Graph graph = load_graph(args.graph, args.solver);
  const SolveOptions options = args.solver.options();
  double lambda = args.lambda;
  json validation;

  if (args.validate) {
    const double fraction = *args.validate;
    if (!(fraction > 0.0 && fraction < 1.0)) {
      throw DataError("--validate expects a fraction in (0, 1)");
    }
    std::vector<Label> labels = graph.labels();
    std::mt19937_64 rng(args.seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto held_count = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(labels.size())));
    if (held_count == 0 || held_count >= labels.size()) {
      throw DataError("validation split leaves no training or no held-out labels");
    }
    const std::vector<Label> held(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(held_count));
    std::vector<Label> train(labels.begin() + static_cast<std::ptrdiff_t>(held_count), labels.end());
    // Keep the original label order for the training graph.
    std::sort(train.begin(), train.end(), [&](const Label& a, const Label& b) {
      return *graph.label_slot(a.node) < *graph.label_slot(b.node);
    });
    graph = graph.with_labels(std::move(train));

    const FlowEngine engine(graph, options);
    json scores = json::array();
    double best = std::numeric_limits<double>::infinity();
    for (double candidate : args.grid) {
      const double error = held_out_error(predict_all(engine, candidate), held, args.classify);
      scores.push_back({{"lambda", candidate}, {"held_out_error", error}});
      if (error < best) {
        best = error;
        lambda = candidate;
      }
    }
    json held_nodes = json::array();
    for (const Label& h : held) held_nodes.push_back(h.node);
    validation = {{"fraction", fraction},
                  {"held_out", held_nodes},
                  {"metric", args.classify ? "misclassification" : "mse"},
                  {"scores", scores},
                  {"selected_lambda", lambda},
                  {"held_out_error", best}};
  }

  const PredictionReport report = predict_all(graph, lambda, options);
  json doc = json::parse(report_to_json(report));
  if (!validation.is_null()) doc["validation"] = validation;
  if (args.classify) {
    for (auto& node : doc["nodes"]) {
      if (node["value"].is_number()) node["class"] = classify(node["value"].get<double>());
    }
  }
  if (!args.truth.empty()) {
    std::vector<Label> truth;
    for (const Label& t : read_labels_csv(fs::path(args.truth))) {
      if (!graph.is_labeled(t.node)) truth.push_back(t);
    }
    doc["misclassification"] = misclassification_rate(report, truth);
  }
  emit(doc.dump(1) + "\n", args.out, out);

  if (const std::size_t failed = report.failures(); failed > 0) {
    err << failed << " of " << report.nodes.size() << " nodes failed to solve\n";
    for (const NodePrediction& p : report.nodes) {
      if (!p.error.empty()) err << "  node " << p.node << ": " << p.error << "\n";
    }
    return kSolverFailure;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct ExplainArgs {
  std::string graph;
  NodeId node = 0;
  std::vector<double> grid = kDefaultLambdaGrid;
  SolverFlags solver;
  std::string out = ".";
};

int cmd_explain(ExplainArgs args, std::ostream& out) {
  const Graph graph = load_graph(args.graph, args.solver);
  if (args.node >= graph.node_count()) {
    throw DataError("unknown node " + std::to_string(args.node));
  }
  std::sort(args.grid.begin(), args.grid.end());
  const FlowEngine engine(graph, args.solver.options());
  const auto path = regularization_path(engine, args.node, args.grid, args.solver.eps);
  fs::create_directories(args.out);
  for (const PathEntry& entry : path) {
    const std::string stem =
        "flow_" + std::to_string(args.node) + "_" + format_lambda(entry.lambda);
    DotOptions dot;
    dot.graph_name = stem;
    write_text_file(fs::path(args.out) / (stem + ".dot"), export_dot(entry.subgraph, dot));
    write_text_file(fs::path(args.out) / (stem + ".json"), export_json(entry.subgraph));
    out << stem << ": " << entry.subgraph.edges.size() << " edges, "
        << entry.subgraph.sources.size() << " sources\n";
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string graph;
  std::string host = "127.0.0.1";
  int port = 8080;
  SolverFlags solver;
};

int cmd_serve(const ServeArgs& args, std::ostream& out) {
  ServiceOptions options;
  options.solve = args.solver.options();
  options.support_eps = args.solver.eps;
  ApiService service(load_graph(args.graph, args.solver), options);
  ApiServer server(service);
  const int port = server.bind(args.host, args.port);
  out << "serving on http://" << args.host << ":" << port << "\n" << std::flush;
  server.run();
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow-based semi-supervised learning on graphs"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "build a kNN graph with flow costs");
  build_cmd->add_option("points", build.points, "points CSV")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("labels", build.labels, "labels CSV (row_index, value)")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--k", build.k, "neighbors per point")->capture_default_str();
  build_cmd->add_option("--normalization", build.normalization, "unnorm, sym or markov")
      ->check(CLI::IsMember({"unnorm", "sym", "markov"}))
      ->capture_default_str();
  build_cmd->add_option("--out", build.out, "output graph JSON (default stdout)");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "predict values at unlabeled nodes");
  predict_cmd->add_option("graph", predict.graph, "graph JSON")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--lambda", predict.lambda, "sparsity trade-off")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  predict_cmd->add_option("--lambda-grid", predict.grid, "candidate lambdas for --validate")
      ->delimiter(',');
  predict_cmd->add_option("--validate", predict.validate,
                          "hold out this fraction of labels and pick lambda from the grid");
  predict_cmd->add_flag("--classify", predict.classify, "threshold values at 0 for +-1 labels");
  predict_cmd->add_option("--truth", predict.truth, "ground-truth labels CSV for scoring")
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--seed", predict.seed, "seed for the validation split")
      ->capture_default_str();
  predict_cmd->add_option("--out", predict.out, "output predictions JSON (default stdout)");
  add_solver_flags(*predict_cmd, predict.solver);

  ExplainArgs explain;
  auto* explain_cmd = app.add_subcommand("explain", "export flow subgraphs along a lambda path");
  explain_cmd->add_option("graph", explain.graph, "graph JSON")->required()->check(CLI::ExistingFile);
  explain_cmd->add_option("--node", explain.node, "unlabeled node to explain")->required();
  explain_cmd->add_option("--lambda-grid", explain.grid, "lambdas to export")->delimiter(',');
  explain_cmd->add_option("--out", explain.out, "output directory")->capture_default_str();
  add_solver_flags(*explain_cmd, explain.solver);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "serve the HTTP API");
  serve_cmd->add_option("graph", serve.graph, "graph JSON")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "TCP port")->capture_default_str();
  serve_cmd->add_option("--host", serve.host, "bind address")->capture_default_str();
  add_solver_flags(*serve_cmd, serve.solver);

  std::vector<std::string> argv_storage{"flowssl"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*build_cmd) return cmd_build(build, out);
    if (*predict_cmd) return cmd_predict(predict, out, err);
    if (*explain_cmd) return cmd_explain(explain, out);
    if (*serve_cmd) return cmd_serve(serve, out);
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace flowssl::cli
