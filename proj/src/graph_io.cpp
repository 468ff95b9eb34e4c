#include "rgnn/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rgnn {

namespace {

[[noreturn]] void parse_error(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

bool skip_line(const std::string& s) {
    for (char c : s) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;  // blank
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

}  // namespace

Graph load_graph(const std::string& edge_path, const std::optional<std::string>& feature_path,
                 const std::string& label_path) {
    std::vector<std::pair<long, long>> raw_edges;
    {
        std::ifstream in = open_or_throw(edge_path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (skip_line(line)) continue;
            std::istringstream ss(line);
            long u, v;
            if (!(ss >> u >> v) || u < 0 || v < 0)
                parse_error(edge_path, lineno, "expected two non-negative node ids");
            raw_edges.emplace_back(u, v);
        }
    }

    std::map<long, int> labels_raw;
    int y_count = 0;
    {
        std::ifstream in = open_or_throw(label_path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (skip_line(line)) continue;
            std::istringstream ss(line);
            long id;
            int y;
            if (!(ss >> id >> y) || id < 0)
                parse_error(label_path, lineno, "expected 'node_id<TAB>class_id'");
            if (y < 0) parse_error(label_path, lineno, "negative class id");
            labels_raw[id] = y;
            y_count = std::max(y_count, y + 1);
        }
        if (labels_raw.empty()) throw std::runtime_error(label_path + ": no labels");
    }

    // Node set: union of ids seen anywhere; remap preserves numeric order.
    std::map<long, int> remap;
    for (auto& [id, y] : labels_raw) remap.emplace(id, 0);
    for (auto& [u, v] : raw_edges) {
        remap.emplace(u, 0);
        remap.emplace(v, 0);
    }
    int next = 0;
    for (auto& [id, nid] : remap) nid = next++;
    const int n = next;

    std::vector<int> labels(n, -1);
    for (auto& [id, y] : labels_raw) labels[remap[id]] = y;
    for (int v = 0; v < n; ++v)
        if (labels[v] == -1)
            throw std::runtime_error(label_path + ": missing label for a node present in " +
                                     edge_path);

    std::vector<std::pair<int, int>> edges;
    edges.reserve(raw_edges.size());
    for (auto& [u, v] : raw_edges) edges.emplace_back(remap[u], remap[v]);

    Tensor x;
    if (feature_path) {
        std::ifstream in = open_or_throw(*feature_path);
        std::string line;
        int lineno = 0;
        int dim = -1;
        std::vector<std::vector<double>> rows(n);
        while (std::getline(in, line)) {
            ++lineno;
            if (skip_line(line)) continue;
            std::istringstream ss(line);
            long id;
            if (!(ss >> id)) parse_error(*feature_path, lineno, "expected node id");
            auto it = remap.find(id);
            if (it == remap.end())
                parse_error(*feature_path, lineno, "unknown node id " + std::to_string(id));
            std::string rest;
            std::getline(ss, rest);
            std::vector<double> vals;
            std::stringstream fs(rest);
            std::string tok;
            while (std::getline(fs, tok, ',')) {
                try {
                    vals.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    parse_error(*feature_path, lineno, "bad feature value '" + tok + "'");
                }
            }
            if (vals.empty()) parse_error(*feature_path, lineno, "no feature values");
            if (dim == -1) dim = static_cast<int>(vals.size());
            if (static_cast<int>(vals.size()) != dim)
                parse_error(*feature_path, lineno,
                            "feature width " + std::to_string(vals.size()) + " != " +
                                std::to_string(dim));
            rows[it->second] = std::move(vals);
        }
        if (dim <= 0) throw std::runtime_error(*feature_path + ": no feature rows");
        x = Tensor(n, dim);
        for (int v = 0; v < n; ++v) {
            if (rows[v].empty())
                throw std::runtime_error(*feature_path + ": missing feature row for a node");
            std::copy(rows[v].begin(), rows[v].end(), x.row_ptr(v));
        }
    } else {
        x = Tensor::identity(n);
    }

    return Graph::build(n, edges, std::move(x), std::move(labels), y_count);
}

}  // namespace rgnn
