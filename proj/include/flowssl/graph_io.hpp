#pragma once

#include "flowssl/graph.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace flowssl {

// Graph file schema:
//   {"nodes": n, "directed": bool,
//    "edges": [{"tail": i, "head": j, "cost": d}, ...],
//    "labels": [{"node": i, "value": f}, ...]}
std::string graph_to_json(const Graph& graph);
Graph graph_from_json(const std::string& text);

Graph read_graph_file(const std::filesystem::path& path);
void write_graph_file(const Graph& graph, const std::filesystem::path& path);

// One point per row, numeric columns only. An optional header row is
// skipped when its first field is not numeric. Errors name the row and
// column of the offending field.
Eigen::MatrixXd read_points_csv(std::istream& in);
Eigen::MatrixXd read_points_csv(const std::filesystem::path& path);

// Rows of (row_index, value); same header rule as the points file.
std::vector<Label> read_labels_csv(std::istream& in);
std::vector<Label> read_labels_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace flowssl
