#include "flowssl/graph_io.hpp"

#include "flowssl/error.hpp"

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace flowssl {

using nlohmann::json;

std::string graph_to_json(const Graph& graph) {
  json edges = json::array();
  for (const Edge& e : graph.edges()) {
    edges.push_back({{"tail", e.tail}, {"head", e.head}, {"cost", e.cost}});
  }
  json labels = json::array();
  for (const Label& label : graph.labels()) {
    labels.push_back({{"node", label.node}, {"value", label.value}});
  }
  json doc = {{"nodes", graph.node_count()},
              {"directed", graph.directed()},
              {"edges", std::move(edges)},
              {"labels", std::move(labels)}};
  return doc.dump(1) + "\n";
}

Graph graph_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const auto n = doc.at("nodes").get<std::size_t>();
    const bool directed = doc.value("directed", false);
    std::vector<Edge> edges;
    for (const json& e : doc.at("edges")) {
      edges.push_back({e.at("tail").get<NodeId>(), e.at("head").get<NodeId>(),
                       e.at("cost").get<double>()});
    }
    std::vector<Label> labels;
    for (const json& l : doc.value("labels", json::array())) {
      labels.push_back({l.at("node").get<NodeId>(), l.at("value").get<double>()});
    }
    return Graph(n, std::move(edges), std::move(labels), directed);
  } catch (const json::exception& err) {
    throw DataError(std::string("malformed graph JSON: ") + err.what());
  }
}

Graph read_graph_file(const std::filesystem::path& path) {
  return graph_from_json(read_text_file(path));
}

void write_graph_file(const Graph& graph, const std::filesystem::path& path) {
  write_text_file(path, graph_to_json(graph));
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos
                         ? std::string()
                         : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size() && std::isfinite(out);
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Numeric rows of a CSV stream; skips a non-numeric header line.
std::vector<std::vector<double>> read_numeric_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double value = 0.0;
      if (!parse_double(fields[c], value)) {
        if (first && c == 0) break;
        throw DataError("row " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + ": '" + fields[c] +
                        "' is not a finite number");
      }
      row.push_back(value);
    }
    const bool header = first && row.empty();
    first = false;
    if (header) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError("row " + std::to_string(line_no) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

Eigen::MatrixXd read_points_csv(std::istream& in) {
  const auto rows = read_numeric_rows(in);
  if (rows.empty()) throw DataError("points file has no data rows");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i][c];
    }
  }
  return points;
}

Eigen::MatrixXd read_points_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_points_csv(in);
}

std::vector<Label> read_labels_csv(std::istream& in) {
  std::vector<Label> labels;
  for (const auto& row : read_numeric_rows(in)) {
    if (row.size() != 2) {
      throw DataError("labels file needs exactly 2 columns (row_index, value)");
    }
    if (row[0] < 0 || row[0] != std::floor(row[0])) {
      throw DataError("label row index " + std::to_string(row[0]) +
                      " is not a non-negative integer");
    }
    labels.push_back({static_cast<NodeId>(row[0]), row[1]});
  }
  return labels;
}

std::vector<Label> read_labels_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_labels_csv(in);
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace flowssl
