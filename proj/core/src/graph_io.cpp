#include "gamm/graph_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gamm/error.hpp"
#include "gamm/logging.hpp"
#include "gamm/text.hpp"

namespace gamm {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

AttributedGraph load_graph(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("dataset directory not found: " + dir.string());
  }

  // features.csv fixes n and d; everything else is validated against it.
  Matrix features;
  {
    auto in = open_or_throw(dir / "features.csv");
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto cells = split(line, ',');
      if (rows == 0) {
        cols = cells.size();
      } else if (cells.size() != cols) {
        throw DataError("features.csv row " + std::to_string(rows) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(cols));
      }
      for (std::size_t j = 0; j < cells.size(); ++j) {
        values.push_back(parse_double(
            cells[j], "features.csv row " + std::to_string(rows) + " col " + std::to_string(j)));
      }
      ++rows;
    }
    if (rows == 0) throw DataError("features.csv is empty");
    features = Matrix(rows, cols);
    features.storage() = std::move(values);
  }
  const std::size_t n = features.rows();

  std::vector<std::pair<NodeId, NodeId>> edges;
  {
    auto in = open_or_throw(dir / "edges.tsv");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      std::istringstream ss(line);
      std::string a, b, extra;
      if (!(ss >> a >> b) || (ss >> extra)) {
        throw DataError("edges.tsv line " + std::to_string(lineno) +
                        ": expected two node ids");
      }
      std::string ctx = "edges.tsv line " + std::to_string(lineno);
      edges.emplace_back(parse_index(a, ctx), parse_index(b, ctx));
    }
  }

  std::optional<std::vector<int>> labels;
  if (std::filesystem::exists(dir / "labels.txt")) {
    auto in = open_or_throw(dir / "labels.txt");
    std::vector<int> vec;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      vec.push_back(static_cast<int>(
          parse_index(line, "labels.txt line " + std::to_string(lineno))));
    }
    if (vec.size() != n) {
      throw DataError("labels.txt has " + std::to_string(vec.size()) +
                      " entries but features.csv has " + std::to_string(n) + " rows");
    }
    labels = std::move(vec);
  }

  std::string name = dir.filename().string();
  if (name.empty()) name = dir.parent_path().filename().string();

  std::optional<nlohmann::json> meta;
  if (std::filesystem::exists(dir / "meta.json")) {
    auto in = open_or_throw(dir / "meta.json");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("meta.json: " + std::string(e.what()));
    }
    if (j.contains("name")) name = j.at("name").get<std::string>();
    meta = std::move(j);
  }

  auto g = AttributedGraph::build(std::move(name), n, std::move(edges), std::move(features),
                                  std::move(labels));

  if (meta) {
    const auto& j = *meta;
    try {
      if (j.contains("n") && j.at("n").get<std::size_t>() != g.num_nodes()) {
        throw DataError("meta.json n=" + j.at("n").dump() + " does not match loaded n=" +
                        std::to_string(g.num_nodes()));
      }
      if (j.contains("d") && j.at("d").get<std::size_t>() != g.num_features()) {
        throw DataError("meta.json d=" + j.at("d").dump() + " does not match loaded d=" +
                        std::to_string(g.num_features()));
      }
      if (j.contains("num_classes") && j.at("num_classes").get<int>() != g.num_classes()) {
        throw DataError("meta.json num_classes=" + j.at("num_classes").dump() +
                        " does not match loaded " + std::to_string(g.num_classes()));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("meta.json: " + std::string(e.what()));
    }
  }

  if (g.dropped_self_loops() > 0) {
    log_warn(g.name() + ": dropped " + std::to_string(g.dropped_self_loops()) + " self-loops");
  }
  if (g.merged_duplicate_edges() > 0) {
    log_warn(g.name() + ": merged " + std::to_string(g.merged_duplicate_edges()) +
             " duplicate/reversed edges");
  }
  return g;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  const std::string fname = path.filename().string();
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw DataError(fname + " row " + std::to_string(rows) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      values.push_back(parse_double(cells[j], fname + " row " + std::to_string(rows)));
    }
    ++rows;
  }
  if (rows == 0) throw DataError(fname + " is empty");
  Matrix m(rows, cols);
  m.storage() = std::move(values);
  return m;
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void save_graph(const AttributedGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      for (NodeId j : g.neighbors(static_cast<NodeId>(i))) {
        if (static_cast<NodeId>(i) < j) {
          out << i << '\t' << j << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(dir / "features.csv");
    const Matrix& f = g.features();
    for (std::size_t i = 0; i < f.rows(); ++i) {
      for (std::size_t j = 0; j < f.cols(); ++j) {
        if (j > 0) out << ',';
        out << format_double(f(i, j));
      }
      out << '\n';
    }
  }
  if (g.labels()) {
    std::ofstream out(dir / "labels.txt");
    for (int c : *g.labels()) out << c << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["name"] = g.name();
    j["n"] = g.num_nodes();
    j["d"] = g.num_features();
    if (g.labels()) j["num_classes"] = g.num_classes();
    std::ofstream out(dir / "meta.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace gamm
