#include "fixtures.hpp"

#include "commands.hpp"
#include "flowssl/graph_io.hpp"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <random>
#include <sstream>

using namespace flowssl;
using namespace flowssl::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("flowssl_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("format_lambda") {
  CHECK(cli::format_lambda(0.0) == "0");
  CHECK(cli::format_lambda(0.025) == "0.025");
  CHECK(cli::format_lambda(1.0) == "1");
  CHECK(cli::format_lambda(0.1) == "0.1");
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"predict"}).code == cli::kUsage);
  CHECK(run({"predict", "/does/not/exist.json"}).code == cli::kUsage);
}

TEST_CASE("build then predict") {
  TempDir tmp;
  write_text_file(tmp.file("points.csv"), "x,y\n0,0\n1,0\n2,0\n3,0\n0,1.5\n1,1.5\n2,1.5\n3,1.5\n");
  write_text_file(tmp.file("labels.csv"), "row_index,value\n0,-1\n7,1\n");
  const Result built = run({"build", tmp.file("points.csv"), tmp.file("labels.csv"), "--k", "3",
                            "--out", tmp.file("graph.json")});
  REQUIRE(built.code == cli::kSuccess);
  const Graph g = read_graph_file(tmp.file("graph.json"));
  CHECK(g.node_count() == 8);
  CHECK(g.labeled_count() == 2);

  const Result predicted = run({"predict", tmp.file("graph.json"), "--lambda", "0.05"});
  REQUIRE(predicted.code == cli::kSuccess);
  const json doc = json::parse(predicted.out);
  CHECK(doc["lambda"] == 0.05);
  CHECK(doc["nodes"].size() == 6);
}

TEST_CASE("build data errors exit 2") {
  TempDir tmp;
  write_text_file(tmp.file("bad.csv"), "0,0\n1,x\n");
  const Result r = run({"build", tmp.file("bad.csv"), "--k", "1"});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("row 2") != std::string::npos);

  write_text_file(tmp.file("points.csv"), "0\n1\n2\n");
  write_text_file(tmp.file("labels.csv"), "5,1\n");
  CHECK(run({"build", tmp.file("points.csv"), tmp.file("labels.csv"), "--k", "1"}).code ==
        cli::kDataError);
  CHECK(run({"build", tmp.file("points.csv"), "--k", "1", "--normalization", "weird"}).code !=
        cli::kSuccess);
}

TEST_CASE("predict on G2 with classification, truth and solver flags") {
  TempDir tmp;
  write_graph_file(g2(), tmp.file("g2.json"));
  write_text_file(tmp.file("truth.csv"), "1,-1\n2,-1\n");
  const Result r = run({"predict", tmp.file("g2.json"), "--lambda", "1", "--classify", "--truth",
                        tmp.file("truth.csv"), "--rho", "2", "--tol", "1e-9"});
  REQUIRE(r.code == cli::kSuccess);
  const json doc = json::parse(r.out);
  CHECK(doc["nodes"][0]["value"].get<double>() == doctest::Approx(-2.0 / 3).epsilon(1e-6));
  CHECK(doc["nodes"][0]["class"] == -1);
  CHECK(doc["nodes"][1]["class"] == 1);
  CHECK(doc["misclassification"] == 0.5);
}

TEST_CASE("predict with validation picks a lambda from the grid") {
  TempDir tmp;
  const Graph g = random_graph(4, 40, 60, 12);
  write_graph_file(g, tmp.file("g.json"));
  const Result r = run({"predict", tmp.file("g.json"), "--validate", "0.25", "--seed", "3",
                        "--lambda-grid", "0,0.1,0.5"});
  REQUIRE(r.code == cli::kSuccess);
  const json doc = json::parse(r.out);
  const json& v = doc["validation"];
  CHECK(v["held_out"].size() == 3);
  CHECK(v["scores"].size() == 3);
  CHECK(doc["lambda"] == v["selected_lambda"]);
  CHECK(run({"predict", tmp.file("g.json"), "--validate", "1.5"}).code == cli::kDataError);
}

TEST_CASE("anchors and directed flags") {
  TempDir tmp;
  write_graph_file(g2(), tmp.file("g2.json"));
  const Result anchored = run({"predict", tmp.file("g2.json"), "--mu", "0.5"});
  REQUIRE(anchored.code == cli::kSuccess);
  CHECK(json::parse(anchored.out)["nodes"].size() == 4);
  const Result directed = run({"predict", tmp.file("g2.json"), "--directed", "--tol", "1e-9"});
  REQUIRE(directed.code == cli::kSuccess);
  CHECK(json::parse(directed.out)["nodes"][0]["value"].get<double>() ==
        doctest::Approx(-1.0 / 3).epsilon(1e-6));
}

TEST_CASE("solver failures exit 3") {
  TempDir tmp;
  const Graph split(5, {{0, 1, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}}, {{0, 1.0}});
  write_graph_file(split, tmp.file("split.json"));
  const Result r = run({"predict", tmp.file("split.json")});
  CHECK(r.code == cli::kSolverFailure);
  CHECK_FALSE(r.err.empty());

  const Graph d(4, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 2, 1.0}}, {{0, 1.0}, {2, -1.0}}, true);
  write_graph_file(d, tmp.file("d.json"));
  const Result partial = run({"predict", tmp.file("d.json")});
  CHECK(partial.code == cli::kSolverFailure);
  CHECK(json::parse(partial.out)["nodes"][1]["value"].is_null());
}

TEST_CASE("explain writes one DOT and JSON file per lambda") {
  TempDir tmp;
  write_graph_file(g2(), tmp.file("g2.json"));
  const Result r = run({"explain", tmp.file("g2.json"), "--node", "1", "--lambda-grid", "2,0,1",
                        "--out", tmp.file("out")});
  REQUIRE(r.code == cli::kSuccess);
  for (const std::string lam : {"0", "1", "2"}) {
    CHECK(fs::exists(tmp.file("out/flow_1_" + lam + ".dot")));
    CHECK(fs::exists(tmp.file("out/flow_1_" + lam + ".json")));
  }
  const std::string dot = read_text_file(tmp.file("out/flow_1_0.dot"));
  CHECK(dot.find("0 -> 1 [label=\"67\"]") != std::string::npos);
  const json sparse = json::parse(read_text_file(tmp.file("out/flow_1_2.json")));
  CHECK(sparse["edges"].size() == 1);

  CHECK(run({"explain", tmp.file("g2.json"), "--node", "0", "--out", tmp.file("o")}).code ==
        cli::kDataError);
  CHECK(run({"explain", tmp.file("g2.json"), "--node", "7", "--out", tmp.file("o")}).code ==
        cli::kDataError);
}

TEST_CASE("serve reports a busy port as a data error") {
  TempDir tmp;
  write_graph_file(g2(), tmp.file("g2.json"));
  CHECK(run({"serve", tmp.file("g2.json"), "--host", "256.1.1.1", "--port", "1"}).code ==
        cli::kDataError);
}
