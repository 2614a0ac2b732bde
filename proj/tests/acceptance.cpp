// Acceptance checks. One line per criterion; non-zero exit if any fails.

#include "flowssl/datasets.hpp"
#include "flowssl/error.hpp"
#include "flowssl/oracles.hpp"
#include "flowssl/prediction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace flowssl;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

SolveOptions admm_options(double tol, double rho = 1.0) {
  SolveOptions opts;
  opts.admm.tol = tol;
  opts.admm.rho = rho;
  opts.admm.max_iter = 1000000;
  return opts;
}

// n <= 50, costs uniform in [0.1, 10].
Graph random_graph(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(10, 50)(rng);
  const std::size_t extra = std::uniform_int_distribution<std::size_t>(0, n)(rng);
  const std::size_t labeled = std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(8, n / 3))(rng);
  return random_connected_graph(n, extra, labeled, 0.1, 10.0, seed * 7919 + 1);
}

// ADMM penalty on the scale of the edge costs.
double median_cost(const Graph& g) {
  std::vector<double> costs;
  for (const Edge& e : g.edges()) costs.push_back(e.cost);
  std::nth_element(costs.begin(), costs.begin() + static_cast<std::ptrdiff_t>(costs.size() / 2), costs.end());
  return costs[costs.size() / 2];
}

double label_min(const Graph& g) {
  const auto v = g.label_values();
  return *std::min_element(v.begin(), v.end());
}

double label_max(const Graph& g) {
  const auto v = g.label_values();
  return *std::max_element(v.begin(), v.end());
}

// ---------------------------------------------------------------------------

Outcome harmonic_equivalence() {
  const auto start = Clock::now();
  double closed_err = 0.0, admm_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Graph g = random_graph(seed);
    const auto hf = hf_solve(laplacian(g, Normalization::unnormalized), g.labels());
    const PredictionReport closed = predict_all(g, 0.0);
    SolveOptions opts = admm_options(1e-7);
    opts.exact_at_zero = false;
    const PredictionReport admm = predict_all(g, 0.0, opts);
    for (std::size_t i = 0; i < hf.unlabeled.size(); ++i) {
      const double ref = hf.solution[static_cast<Eigen::Index>(i)];
      closed_err = std::max(closed_err, std::abs(closed.nodes[i].value - ref));
      admm_err = std::max(admm_err, std::abs(admm.nodes[i].value - ref));
    }
  }
  const double elapsed = seconds_since(start);
  return {closed_err <= 1e-8 && admm_err <= 1e-5 && elapsed < 10.0,
          "closed-form max err " + fmt(closed_err) + ", ADMM max err " + fmt(admm_err) +
              ", " + fmt(elapsed) + " s"};
}

Outcome normalized_costs_match_harmonic() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mix = two_gaussian_mixture(40, 4, 1.0, 4, seed);
    const Graph knn = build_knn_graph(mix.points, 8);
    for (Normalization norm : {Normalization::symmetric, Normalization::markov}) {
      const Laplacian l = laplacian(knn, norm);
      const Graph g = knn.with_costs(costs_from_laplacian(l, knn)).with_labels(mix.labeled);
      const auto hf = hf_solve(l, mix.labeled);
      const PredictionReport r = predict_all(g, 0.0);
      for (std::size_t i = 0; i < hf.unlabeled.size(); ++i) {
        worst = std::max(worst, std::abs(r.nodes[i].value - hf.solution[static_cast<Eigen::Index>(i)]));
      }
    }
  }
  return {worst <= 1e-8, "sym/markov max err " + fmt(worst)};
}

Outcome large_lambda_nearest_label() {
  const double lambda = 1e4;
  std::size_t checked = 0, failed = 0;
  double min_weight = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = random_graph(100 + seed);
    const FlowEngine engine(g, admm_options(1e-8, lambda));
    for (NodeId sink : engine.system().unlabeled_nodes()) {
      std::vector<double> dist = labeled_distances(g, sink);
      std::sort(dist.begin(), dist.end());
      if (dist.size() > 1 && dist[1] <= 1.01 * dist[0]) continue;
      const NearestLabel nearest = nearest_labeled(g, sink);
      const WeightVector w = weights_from_flow(engine.solve(sink, lambda), engine.system());
      const double weight = w.weights[static_cast<Eigen::Index>(*g.label_slot(nearest.node))];
      min_weight = std::min(min_weight, weight);
      ++checked;
      if (weight < 0.99) ++failed;
    }
  }
  return {checked > 0 && failed == 0,
          std::to_string(checked) + " sinks, min weight on nearest label " + fmt(min_weight)};
}

const std::vector<double> kSweep = {0.0, 0.025, 0.05, 0.1, 0.2, 1.0};
const double kSweepTol = 1e-8;

Outcome supports_are_dags() {
  std::size_t pairs = 0;
  std::string failure;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = random_graph(200 + seed);
    const FlowEngine engine(g, admm_options(kSweepTol));
    for (NodeId sink : engine.system().unlabeled_nodes()) {
      try {
        const auto path = regularization_path(engine, sink, kSweep, 1e-8);
        for (const PathEntry& entry : path) {
          verify_dag(entry.subgraph);
          ++pairs;
        }
      } catch (const std::exception& e) {
        if (failure.empty()) failure = e.what();
      }
    }
  }
  return {failure.empty(), std::to_string(pairs) + " (sink, lambda) pairs acyclic" +
                               (failure.empty() ? "" : "; " + failure)};
}

Outcome weights_form_distributions() {
  double most_negative = 0.0, sum_err = 0.0, range_violation = 0.0;
  std::size_t solves = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = random_graph(200 + seed);
    const FlowEngine engine(g, admm_options(kSweepTol));
    const IncidenceSystem& sys = engine.system();
    const double lo = label_min(g), hi = label_max(g);
    for (NodeId sink : sys.unlabeled_nodes()) {
      for (double lambda : kSweep) {
        const FlowSolution s = engine.solve(sink, lambda);
        const Eigen::VectorXd raw = sys.labeled_block() * s.z;
        most_negative = std::min(most_negative, raw.minCoeff());
        sum_err = std::max(sum_err, std::abs(raw.sum() - 1.0));
        const double f = predict(weights_from_flow(s, sys), g.label_values());
        range_violation = std::max({range_violation, lo - f, f - hi});
        ++solves;
      }
    }
  }
  return {most_negative >= -1e-8 && sum_err <= 1e-6 && range_violation <= 1e-6,
          std::to_string(solves) + " solves, min raw weight " + fmt(most_negative) +
              ", max |sum-1| " + fmt(sum_err) + ", max range excess " + fmt(range_violation)};
}

Outcome admm_matches_oracle() {
  double worst = 0.0;
  std::size_t problems = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = random_connected_graph(12, 12, 3, 0.1, 10.0, 300 + seed);  // m = 23
    const IncidenceSystem sys(g);
    const CholeskyCache cache = factorize(sys, 1.0);
    AdmmOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 1000000;
    for (NodeId sink : sys.unlabeled_nodes()) {
      for (double lambda : {0.0, 0.05, 0.2}) {
        const FlowProblem problem(sys, sink, lambda);
        const FlowSolution admm = admm_solve(problem, cache, opts);
        const FlowSolution oracle = brute_force_oracle(problem);
        worst = std::max(worst, std::abs(admm.objective - oracle.objective) / oracle.objective);
        ++problems;
      }
    }
  }
  return {worst <= 1e-6, std::to_string(problems) + " problems, max relative gap " + fmt(worst)};
}

Outcome analytic_path_fixture() {
  const Graph g(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}, {{0, -1.0}, {3, 1.0}});
  const FlowEngine engine(g);
  const std::vector<std::pair<double, Eigen::Vector2d>> expected = {
      {0.0, {2.0 / 3, 1.0 / 3}}, {1.0, {5.0 / 6, 1.0 / 6}}, {2.0, {1.0, 0.0}}};
  double worst = 0.0;
  for (const auto& [lambda, w] : expected) {
    const WeightVector got = weights_from_flow(engine.solve(1, lambda), engine.system());
    worst = std::max(worst, (got.weights - w).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "max weight err " + fmt(worst)};
}

Outcome anchors_match_label_regularization() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = random_graph(400 + seed);
    const Laplacian l = laplacian(g, Normalization::unnormalized);
    for (double mu : {0.1, 1.0, 10.0}) {
      const PredictionReport r = predict_all(add_anchor_nodes(g, mu), 0.0);
      const Eigen::VectorXd lr = lr_solve(l, g.labels(), mu);
      for (const NodePrediction& p : r.nodes) {
        worst = std::max(worst, std::abs(p.value - lr[static_cast<Eigen::Index>(p.node)]));
      }
    }
  }
  return {worst <= 1e-8, "max err " + fmt(worst)};
}

Outcome directed_consistency() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = random_graph(500 + seed);
    const FlowEngine undirected(g, admm_options(1e-10));
    const FlowEngine directed(to_directed(g), admm_options(1e-10));
    for (NodeId sink : undirected.system().unlabeled_nodes()) {
      for (double lambda : {0.0, 0.1, 1.0}) {
        const auto a = weights_from_flow(undirected.solve(sink, lambda), undirected.system());
        const auto b = weights_from_flow(directed.solve(sink, lambda), directed.system());
        worst = std::max(worst, (a.weights - b.weights).cwiseAbs().maxCoeff());
      }
    }
  }
  bool infeasible = false;
  const Graph reversed(3, {{0, 1, 1.0}, {2, 1, 1.0}}, {{1, 1.0}}, true);
  try {
    const FlowEngine engine(reversed);
    engine.solve(0, 0.0);
  } catch (const InfeasibleError&) {
    infeasible = true;
  }
  return {worst <= 1e-6 && infeasible,
          "max weight diff " + fmt(worst) +
              (infeasible ? ", reversed edge infeasible" : ", reversed edge NOT flagged")};
}

// Two-Gaussian experiments: n = 200, d = 10, 25 labels per class, 10 seeds.
struct MixtureRun {
  std::vector<double> entropy;  // mean over unlabeled nodes, per lambda
  std::vector<double> error;    // misclassification, per lambda
};

const std::vector<double> kMixtureGrid = {0.0, 0.025, 0.05, 0.1, 0.2};

std::vector<MixtureRun> mixture_runs() {
  static const std::vector<MixtureRun> runs = [] {
    std::vector<MixtureRun> out;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto mix = two_gaussian_mixture(100, 10, 1.5, 25, seed);
      const Graph g = learning_graph(mix.points, 20, Normalization::symmetric, mix.labeled);
      std::vector<Label> truth;
      for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!g.is_labeled(v)) truth.push_back({v, mix.classes[v]});
      }
      SolveOptions opts;
      opts.admm.rho = median_cost(g);
      const FlowEngine engine(g, opts);
      MixtureRun run;
      for (double lambda : kMixtureGrid) {
        const PredictionReport r = predict_all(engine, lambda);
        double h = 0.0;
        for (const NodePrediction& p : r.nodes) h += p.entropy;
        run.entropy.push_back(h / static_cast<double>(r.nodes.size()));
        run.error.push_back(misclassification_rate(r, truth));
      }
      out.push_back(std::move(run));
    }
    return out;
  }();
  return runs;
}

double mean_error(const std::vector<MixtureRun>& runs, std::size_t i) {
  double sum = 0.0;
  for (const MixtureRun& r : runs) sum += r.error[i];
  return sum / static_cast<double>(runs.size());
}

Outcome entropy_drops_with_sparsity() {
  const auto runs = mixture_runs();
  const std::size_t at0 = 0, at01 = 3;
  int lower = 0;
  double h0 = 0.0, h1 = 0.0;
  for (const MixtureRun& r : runs) {
    if (r.entropy[at01] < r.entropy[at0]) ++lower;
    h0 += r.entropy[at0] / static_cast<double>(runs.size());
    h1 += r.entropy[at01] / static_cast<double>(runs.size());
  }
  const double e0 = mean_error(runs, at0), e1 = mean_error(runs, at01);
  return {lower >= 9 && e1 <= e0,
          "entropy lower in " + std::to_string(lower) + "/10 seeds (mean " + fmt(h0) + " -> " +
              fmt(h1) + "), error " + fmt(e0) + " -> " + fmt(e1)};
}

Outcome sparse_never_worse_than_harmonic() {
  const auto runs = mixture_runs();
  const double base = mean_error(runs, 0);
  bool ok = true;
  std::ostringstream detail;
  detail << "mean error lambda=0: " << fmt(base);
  for (std::size_t i = 1; i < kMixtureGrid.size(); ++i) {
    const double e = mean_error(runs, i);
    ok = ok && e <= base;
    detail << ", " << kMixtureGrid[i] << ": " << fmt(e);
  }
  return {ok, detail.str()};
}

Outcome cached_factorization_reuse() {
  const auto mix = two_gaussian_mixture(250, 10, 1.5, 25, 42);
  const Graph g = learning_graph(mix.points, 10, Normalization::symmetric, mix.labeled);
  const IncidenceSystem sys(g);
  const auto& sinks = sys.unlabeled_nodes();
  std::ostringstream detail;
  bool ok = true;
  for (double lambda : {0.0, 0.1}) {
    AdmmOptions opts;
    opts.rho = median_cost(g);
    auto solve = [&](const CholeskyCache& cache, NodeId sink) {
      const FlowProblem problem(sys, sink, lambda);
      return lambda == 0.0 ? solve_exact_lambda0(problem, cache) : admm_solve(problem, cache, opts);
    };
    auto make = [&] { return lambda == 0.0 ? factorize_exact(sys) : factorize(sys, opts.rho); };

    auto start = Clock::now();
    const CholeskyCache shared = make();
    std::vector<Eigen::VectorXd> cached;
    for (NodeId sink : sinks) cached.push_back(solve(shared, sink).z);
    const double t_cached = seconds_since(start);

    start = Clock::now();
    bool identical = true;
    for (std::size_t i = 0; i < sinks.size(); ++i) {
      const CholeskyCache fresh = make();
      identical = identical && solve(fresh, sinks[i]).z == cached[i];
    }
    const double t_fresh = seconds_since(start);
    const double speedup = t_fresh / t_cached;
    // The speedup gate applies to the default batch (lambda = 0). With ADMM
    // the per-node iterations dominate and the ratio is reported only.
    ok = ok && identical && (lambda != 0.0 || speedup >= 2.0);
    detail << (lambda == 0.0 ? "" : "; ") << "lambda=" << lambda << ": "
           << (identical ? "bitwise identical" : "MISMATCH") << ", " << fmt(t_cached) << " s vs "
           << fmt(t_fresh) << " s (" << fmt(speedup) << "x)";
  }
  return {ok, std::to_string(g.node_count()) + " nodes; " + detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"lambda=0 flow equals harmonic solution", harmonic_equivalence},
      {"normalized-Laplacian costs reproduce harmonic solution", normalized_costs_match_harmonic},
      {"large lambda concentrates on nearest label", large_lambda_nearest_label},
      {"flow supports are acyclic", supports_are_dags},
      {"weights form a distribution, predictions in label range", weights_form_distributions},
      {"ADMM objective matches brute-force oracle", admm_matches_oracle},
      {"G2 analytic weights", analytic_path_fixture},
      {"anchor transform matches label regularization", anchors_match_label_regularization},
      {"directed doubling consistency and infeasibility", directed_consistency},
      {"sparser flows have lower weight entropy (two Gaussians)", entropy_drops_with_sparsity},
      {"sparse flows never worse than harmonic (two Gaussians)", sparse_never_worse_than_harmonic},
      {"cached factorization reuse", cached_factorization_reuse},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    const auto start = Clock::now();
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s  %s: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                outcome.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
