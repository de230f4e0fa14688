#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gamm/matrix.hpp"

namespace gamm {

using NodeId = std::int64_t;

/// Partition of feature columns into always-observed columns and columns
/// subject to masking. An empty observed set means every column is missable.
struct ColumnSplit {
  std::vector<int> observed_columns;  // sorted, unique, in [0, d)

  bool is_observed(int col) const;
  std::vector<int> missable_columns(std::size_t d) const;
  std::vector<std::uint8_t> observed_flags(std::size_t d) const;
  void validate(std::size_t d) const;
};

/// Sorts and dedups a user-supplied column list (CLI and JSON ingestion
/// treat the observed set as a set).
std::vector<int> normalize_columns(std::vector<int> columns);

/// Immutable undirected attributed graph: CSR adjacency (sorted neighbor
/// lists, no self-loops, symmetric) plus a dense n x d feature matrix and
/// optional per-node class labels. Safe for concurrent reads.
class AttributedGraph {
 public:
  /// Normalizes an edge list into the canonical simple undirected form:
  /// self-loops dropped, duplicate and reversed edges merged (both counted
  /// for load diagnostics). Validates endpoint ranges, feature shape and
  /// finiteness, and label shape.
  static AttributedGraph build(std::string name, std::size_t num_nodes,
                               std::vector<std::pair<NodeId, NodeId>> edges,
                               Matrix features,
                               std::optional<std::vector<int>> labels = std::nullopt);

  std::size_t num_nodes() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t num_edges() const { return num_edges_; }
  std::size_t num_features() const { return features_.cols(); }

  std::span<const NodeId> neighbors(NodeId node) const;
  int degree(NodeId node) const;

  const Matrix& features() const { return features_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::string& name() const { return name_; }
  int num_classes() const;  // distinct label values; 0 when labels absent

  std::size_t dropped_self_loops() const { return dropped_self_loops_; }
  std::size_t merged_duplicate_edges() const { return merged_duplicates_; }

 private:
  AttributedGraph() = default;

  std::string name_;
  std::vector<std::size_t> row_ptr_;
  std::vector<NodeId> col_idx_;
  Matrix features_;
  std::optional<std::vector<int>> labels_;
  std::size_t num_edges_ = 0;
  std::size_t dropped_self_loops_ = 0;
  std::size_t merged_duplicates_ = 0;
};

/// Per-node structural properties. Only degree is populated today; the
/// record exists so further structural drivers can slot in.
struct StructuralProfile {
  std::vector<int> degree;
  std::vector<double> log1p_degree;
};

StructuralProfile structural_profile(const AttributedGraph& g);

/// Nodes at shortest-path distance in [1, hops] from `node`, sorted,
/// excluding the node itself. hops = 0 yields the empty set.
std::vector<NodeId> k_hop_neighbors(const AttributedGraph& g, NodeId node, int hops);

/// Degree-weighted adjusted homophily:
///   H_adj = (h_edge - sum_k p_k^2) / (1 - sum_k p_k^2)
/// with h_edge the fraction of edges joining same-class endpoints and
/// p_k the degree share of class k. Requires labels, >= 2 classes and
/// >= 1 edge.
double adjusted_homophily(const AttributedGraph& g);

}  // namespace gamm
