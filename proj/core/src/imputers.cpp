#include "gamm/imputers.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "gamm/error.hpp"
#include "gamm/text.hpp"

namespace gamm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_shapes(const Matrix& features, const Mask& mask) {
  if (features.rows() != mask.rows() || features.cols() != mask.cols()) {
    throw Error("feature matrix and mask shapes differ");
  }
}

// Observed column means; returns per-column "has any observed entry".
std::vector<std::uint8_t> column_means(const Matrix& f, const Mask& mask,
                                       std::vector<double>& means) {
  const std::size_t n = f.rows();
  const std::size_t d = f.cols();
  means.assign(d, 0.0);
  std::vector<std::size_t> counts(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (mask.observed(i, j)) {
        means[j] += f(i, j);
        ++counts[j];
      }
    }
  }
  std::vector<std::uint8_t> has_observed(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    if (counts[j] > 0) {
      means[j] /= static_cast<double>(counts[j]);
      has_observed[j] = 1;
    } else {
      means[j] = 0.0;
    }
  }
  return has_observed;
}

}  // namespace

void ImputerConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (!(plugin_timeout_sec > 0.0)) throw ConfigError("plugin timeout must be > 0");
}

ImputationResult impute_tabular_mean(const Matrix& features, const Mask& mask) {
  check_shapes(features, mask);
  const auto start = Clock::now();
  ImputationResult result;
  result.method = "tabular_mean";
  result.imputed = features;

  std::vector<double> means;
  auto has_observed = column_means(features, mask, means);
  for (std::size_t j = 0; j < features.cols(); ++j) {
    if (!has_observed[j]) result.zero_filled_columns.push_back(static_cast<int>(j));
  }
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      if (!mask.observed(i, j)) result.imputed(i, j) = means[j];
    }
  }
  result.wall_ms = elapsed_ms(start);
  return result;
}

ImputationResult impute_graph_average(const AttributedGraph& g, const Matrix& features,
                                      const Mask& mask) {
  check_shapes(features, mask);
  if (g.num_nodes() != features.rows()) throw Error("graph and feature matrix disagree on n");
  const auto start = Clock::now();
  ImputationResult result;
  result.method = "graph_average";
  result.imputed = features;

  std::vector<double> means;
  auto has_observed = column_means(features, mask, means);
  for (std::size_t j = 0; j < features.cols(); ++j) {
    if (!has_observed[j]) result.zero_filled_columns.push_back(static_cast<int>(j));
  }

  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto nb = g.neighbors(static_cast<NodeId>(i));
    for (std::size_t j = 0; j < features.cols(); ++j) {
      if (mask.observed(i, j)) continue;
      double sum = 0.0;
      std::size_t count = 0;
      for (NodeId k : nb) {
        if (mask.observed(static_cast<std::size_t>(k), j)) {
          sum += features(static_cast<std::size_t>(k), j);
          ++count;
        }
      }
      if (count > 0) {
        result.imputed(i, j) = sum / static_cast<double>(count);
      } else {
        result.imputed(i, j) = means[j];  // 0.0 for fully-missing columns
        ++result.neighbor_fallbacks;
      }
    }
  }
  result.wall_ms = elapsed_ms(start);
  return result;
}

ImputationResult impute_feature_propagation(const AttributedGraph& g, const Matrix& features,
                                            const Mask& mask, const ImputerConfig& config) {
  check_shapes(features, mask);
  if (g.num_nodes() != features.rows()) throw Error("graph and feature matrix disagree on n");
  config.validate();
  const auto start = Clock::now();
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();

  ImputationResult result;
  result.method = "feature_propagation";

  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    int deg = g.degree(static_cast<NodeId>(i));
    if (deg > 0) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(deg));
  }

  Matrix x(n, d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (mask.observed(i, j)) x(i, j) = features(i, j);
    }
  }

  Matrix next(n, d, 0.0);
  int iterations = 0;
  for (; iterations < config.max_iters; ++iterations) {
    for (std::size_t i = 0; i < n; ++i) {
      double* out = next.row(i);
      if (inv_sqrt_deg[i] == 0.0) {
        // Isolated nodes have no propagation path; leave them unchanged.
        const double* cur = x.row(i);
        for (std::size_t j = 0; j < d; ++j) out[j] = cur[j];
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) out[j] = 0.0;
      for (NodeId k : g.neighbors(static_cast<NodeId>(i))) {
        auto ks = static_cast<std::size_t>(k);
        const double w = inv_sqrt_deg[i] * inv_sqrt_deg[ks];
        const double* src = x.row(ks);
        for (std::size_t j = 0; j < d; ++j) out[j] += w * src[j];
      }
    }
    // Clamp observed entries back to the truth, then measure the sweep.
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (mask.observed(i, j)) next(i, j) = features(i, j);
        delta = std::max(delta, std::abs(next(i, j) - x(i, j)));
      }
    }
    std::swap(x, next);
    if (delta <= config.convergence_tol) {
      ++iterations;
      break;
    }
  }
  result.iterations = iterations;
  result.imputed = std::move(x);

  for (std::size_t i = 0; i < n; ++i) {
    if (inv_sqrt_deg[i] != 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (!mask.observed(i, j)) ++result.unreached_entries;
    }
  }
  std::vector<double> means;
  auto has_observed = column_means(features, mask, means);
  for (std::size_t j = 0; j < d; ++j) {
    if (!has_observed[j]) result.zero_filled_columns.push_back(static_cast<int>(j));
  }
  result.wall_ms = elapsed_ms(start);
  return result;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out += "'";
  return out;
}

std::string log_tail(const std::filesystem::path& log_path, std::size_t max_bytes = 1024) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) return "(no plugin log)";
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() > max_bytes) return "..." + all.substr(all.size() - max_bytes);
  return all;
}

}  // namespace

ImputationResult run_external_imputer(const std::string& command, const AttributedGraph& g,
                                      const Matrix& features, const Mask& mask,
                                      const ImputerConfig& config) {
  check_shapes(features, mask);
  config.validate();
  const auto start = Clock::now();
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();

  // Exchange directory. The plugin sees observed values only: missing
  // entries are zero-filled and flagged through mask.csv.
  char tmpl[] = "/tmp/gamm-plugin-XXXXXX";
  const char* made = mkdtemp(tmpl);
  if (made == nullptr) throw PluginError("cannot create plugin exchange directory");
  std::filesystem::path dir(made);

  {
    std::ofstream edges(dir / "edges.tsv");
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      for (NodeId j : g.neighbors(static_cast<NodeId>(i))) {
        if (static_cast<NodeId>(i) < j) edges << i << '\t' << j << '\n';
      }
    }
    std::ofstream feat(dir / "features.csv");
    std::ofstream mcsv(dir / "mask.csv");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (j > 0) {
          feat << ',';
          mcsv << ',';
        }
        feat << format_double(mask.observed(i, j) ? features(i, j) : 0.0);
        mcsv << (mask.observed(i, j) ? '1' : '0');
      }
      feat << '\n';
      mcsv << '\n';
    }
    nlohmann::ordered_json spec;
    spec["name"] = g.name();
    spec["n"] = n;
    spec["d"] = d;
    spec["observed_columns"] = mask.split().observed_columns;
    std::ofstream specf(dir / "spec.json");
    specf << spec.dump(2) << '\n';
    edges.flush();
    feat.flush();
    mcsv.flush();
    specf.flush();
    if (!edges || !feat || !mcsv || !specf) {
      throw PluginError("failed writing the plugin exchange files under " + dir.string());
    }
  }

  const auto log_path = dir / "plugin.log";
  const std::string cmdline =
      command + " " + shell_quote(dir.string()) + " > " + shell_quote(log_path.string()) +
      " 2>&1";

  pid_t pid = fork();
  if (pid < 0) throw PluginError("fork failed for external imputer");
  if (pid == 0) {
    setpgid(0, 0);
    execl("/bin/sh", "sh", "-c", cmdline.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(config.plugin_timeout_sec));
  int status = 0;
  while (true) {
    pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) throw PluginError("waitpid failed for external imputer");
    if (Clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw PluginError("external imputer timed out after " +
                        std::to_string(config.plugin_timeout_sec) + "s; log tail:\n" +
                        log_tail(log_path));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw PluginError("external imputer \"" + command + "\" failed (exchange dir kept at " +
                      dir.string() + "); log tail:\n" + log_tail(log_path));
  }

  ImputationResult result;
  result.method = "external:" + command;
  result.imputed = Matrix(n, d);
  {
    std::ifstream in(dir / "imputed.csv");
    if (!in) {
      throw PluginError("external imputer produced no imputed.csv (exchange dir " +
                        dir.string() + ")");
    }
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      if (i >= n) throw PluginError("imputed.csv has more than n=" + std::to_string(n) + " rows");
      auto cells = split(line, ',');
      if (cells.size() != d) {
        throw PluginError("imputed.csv row " + std::to_string(i) + " has " +
                          std::to_string(cells.size()) + " cells, expected " + std::to_string(d));
      }
      for (std::size_t j = 0; j < d; ++j) {
        double v;
        try {
          v = parse_double(cells[j], "imputed.csv row " + std::to_string(i));
        } catch (const DataError& e) {
          throw PluginError(e.what());
        }
        result.imputed(i, j) = v;
      }
      ++i;
    }
    if (i != n) {
      throw PluginError("imputed.csv has " + std::to_string(i) + " rows, expected " +
                        std::to_string(n));
    }
  }

  // Plugins must never alter observed values. Exact comparison works because
  // the exchange files use round-trip float formatting.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (mask.observed(i, j) && result.imputed(i, j) != features(i, j)) {
        throw PluginError("external imputer altered observed entry (" + std::to_string(i) +
                          ", " + std::to_string(j) + ")");
      }
    }
  }

  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  result.wall_ms = elapsed_ms(start);
  return result;
}

}  // namespace gamm
