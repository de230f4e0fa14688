#include "gamm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>

#include "gamm/error.hpp"

namespace gamm {

bool ColumnSplit::is_observed(int col) const {
  return std::binary_search(observed_columns.begin(), observed_columns.end(), col);
}

std::vector<int> normalize_columns(std::vector<int> columns) {
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  return columns;
}

std::vector<int> ColumnSplit::missable_columns(std::size_t d) const {
  std::vector<int> out;
  if (observed_columns.size() < d) out.reserve(d - observed_columns.size());
  auto it = observed_columns.begin();
  for (int j = 0; j < static_cast<int>(d); ++j) {
    if (it != observed_columns.end() && *it == j) {
      ++it;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

std::vector<std::uint8_t> ColumnSplit::observed_flags(std::size_t d) const {
  std::vector<std::uint8_t> flags(d, 0);
  for (int j : observed_columns) flags[static_cast<std::size_t>(j)] = 1;
  return flags;
}

void ColumnSplit::validate(std::size_t d) const {
  int prev = -1;
  for (int j : observed_columns) {
    if (j < 0 || j >= static_cast<int>(d)) {
      throw ConfigError("observed column " + std::to_string(j) + " out of range for d=" +
                        std::to_string(d));
    }
    if (j <= prev) throw ConfigError("observed columns must be sorted and unique");
    prev = j;
  }
}

AttributedGraph AttributedGraph::build(std::string name, std::size_t num_nodes,
                                       std::vector<std::pair<NodeId, NodeId>> edges,
                                       Matrix features,
                                       std::optional<std::vector<int>> labels) {
  if (features.rows() != num_nodes) {
    throw DataError("feature matrix has " + std::to_string(features.rows()) +
                    " rows but graph has " + std::to_string(num_nodes) + " nodes");
  }
  for (double v : features.storage()) {
    if (!std::isfinite(v)) throw DataError("feature matrix contains a non-finite entry");
  }
  if (labels) {
    if (labels->size() != num_nodes) {
      throw DataError("label vector has " + std::to_string(labels->size()) +
                      " entries but graph has " + std::to_string(num_nodes) + " nodes");
    }
    for (int c : *labels) {
      if (c < 0) throw DataError("labels must be non-negative class ids");
    }
  }

  AttributedGraph g;
  g.name_ = std::move(name);
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);

  // Canonicalize: (min, max) orientation, drop self-loops, dedup.
  std::vector<std::pair<NodeId, NodeId>> canon;
  canon.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= static_cast<NodeId>(num_nodes) ||
        v >= static_cast<NodeId>(num_nodes)) {
      throw DataError("edge endpoint (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") out of range for n=" + std::to_string(num_nodes));
    }
    if (u == v) {
      ++g.dropped_self_loops_;
      continue;
    }
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  auto last = std::unique(canon.begin(), canon.end());
  g.merged_duplicates_ = static_cast<std::size_t>(canon.end() - last);
  canon.erase(last, canon.end());
  g.num_edges_ = canon.size();

  std::vector<std::size_t> deg(num_nodes, 0);
  for (auto [u, v] : canon) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  g.row_ptr_.assign(num_nodes + 1, 0);
  for (std::size_t i = 0; i < num_nodes; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + deg[i];
  g.col_idx_.resize(2 * canon.size());
  std::vector<std::size_t> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
  for (auto [u, v] : canon) {
    g.col_idx_[cursor[static_cast<std::size_t>(u)]++] = v;
    g.col_idx_[cursor[static_cast<std::size_t>(v)]++] = u;
  }
  // Rows come out sorted because canon is sorted lexicographically, except
  // the v-side inserts; sort each row to make the invariant unconditional.
  for (std::size_t i = 0; i < num_nodes; ++i) {
    std::sort(g.col_idx_.begin() + g.row_ptr_[i], g.col_idx_.begin() + g.row_ptr_[i + 1]);
  }
  return g;
}

std::span<const NodeId> AttributedGraph::neighbors(NodeId node) const {
  if (node < 0 || node >= static_cast<NodeId>(num_nodes())) {
    throw Error("node " + std::to_string(node) + " out of range");
  }
  auto i = static_cast<std::size_t>(node);
  return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

int AttributedGraph::degree(NodeId node) const {
  return static_cast<int>(neighbors(node).size());
}

int AttributedGraph::num_classes() const {
  if (!labels_) return 0;
  std::set<int> distinct(labels_->begin(), labels_->end());
  return static_cast<int>(distinct.size());
}

StructuralProfile structural_profile(const AttributedGraph& g) {
  StructuralProfile profile;
  const std::size_t n = g.num_nodes();
  profile.degree.resize(n);
  profile.log1p_degree.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int d = g.degree(static_cast<NodeId>(i));
    profile.degree[i] = d;
    profile.log1p_degree[i] = std::log1p(static_cast<double>(d));
  }
  return profile;
}

std::vector<NodeId> k_hop_neighbors(const AttributedGraph& g, NodeId node, int hops) {
  if (node < 0 || node >= static_cast<NodeId>(g.num_nodes())) {
    throw Error("node " + std::to_string(node) + " out of range");
  }
  if (hops < 0) throw Error("hop count must be >= 0");
  std::vector<NodeId> result;
  if (hops == 0) return result;
  if (hops == 1) {
    auto nb = g.neighbors(node);
    return std::vector<NodeId>(nb.begin(), nb.end());
  }
  std::vector<int> dist(g.num_nodes(), -1);
  std::queue<NodeId> frontier;
  dist[static_cast<std::size_t>(node)] = 0;
  frontier.push(node);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    int du = dist[static_cast<std::size_t>(u)];
    if (du == hops) continue;
    for (NodeId v : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = du + 1;
        result.push_back(v);
        frontier.push(v);
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

double adjusted_homophily(const AttributedGraph& g) {
  if (!g.labels()) throw Error("adjusted homophily requires node labels");
  if (g.num_edges() == 0) throw Error("adjusted homophily requires at least one edge");
  const auto& labels = *g.labels();
  const std::size_t n = g.num_nodes();

  std::unordered_map<int, double> class_degree;
  double same = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = g.neighbors(static_cast<NodeId>(i));
    class_degree[labels[i]] += static_cast<double>(nb.size());
    for (NodeId j : nb) {
      if (static_cast<NodeId>(i) < j && labels[i] == labels[static_cast<std::size_t>(j)]) {
        same += 1.0;
      }
    }
  }
  if (class_degree.size() < 2) {
    throw Error("adjusted homophily undefined for a single class");
  }
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  double sum_p2 = 0.0;
  for (const auto& [cls, deg] : class_degree) {
    double p = deg / two_m;
    sum_p2 += p * p;
  }
  const double h_edge = same / static_cast<double>(g.num_edges());
  return (h_edge - sum_p2) / (1.0 - sum_p2);
}

}  // namespace gamm
