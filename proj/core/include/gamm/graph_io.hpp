#pragma once

#include <filesystem>

#include "gamm/graph.hpp"

namespace gamm {

/// Loads a dataset directory:
///   edges.tsv     one edge per line, two whitespace-separated 0-based ids
///   features.csv  n lines of d comma-separated reals, no header
///   labels.txt    optional, n lines, one non-negative integer each
///   meta.json     optional, keys name/n/d/num_classes validated when present
/// Self-loops are dropped and duplicate or reversed edges merged; both are
/// counted on the returned graph and logged at warn level.
AttributedGraph load_graph(const std::filesystem::path& dir);

/// Writes the canonical on-disk form (sorted unique edges with u < v,
/// shortest round-trip float formatting). save(load(save(g))) is
/// byte-identical to save(g).
void save_graph(const AttributedGraph& g, const std::filesystem::path& dir);

/// Headerless comma-separated matrix of reals, one row per line.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

}  // namespace gamm
