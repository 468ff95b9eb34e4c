#pragma once

#include <optional>
#include <string>

#include "rgnn/graph.hpp"

namespace rgnn {

// Loads a graph from text files:
//   edges:    one edge per line "u v" (whitespace separated), '#' comments
//   labels:   one line per node "node_id<TAB>class_id"
//   features: one line per node "node_id<TAB>v1,v2,...,vd" (optional)
// Node ids may be arbitrary non-negative integers; they are remapped to
// 0..n-1 preserving numeric order. Without a feature file x is the n x n
// identity. Malformed lines raise std::runtime_error naming the line number.
Graph load_graph(const std::string& edge_path, const std::optional<std::string>& feature_path,
                 const std::string& label_path);

}  // namespace rgnn
