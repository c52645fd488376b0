#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbma/candidate_space.hpp"
#include "cbma/dataset.hpp"

namespace cbma {

// Graph-space file: {"nodes": [...], "edges": [{"from","to","prob"}, ...]}.
// Edge endpoints are node names. Cyclic edge sets are rejected.
inline CandidateSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph-space file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed graph-space file " + path + ": " +
                             e.what());
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw std::runtime_error(path + ": missing `nodes` array");
  }
  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    throw std::runtime_error(path + ": missing `edges` array");
  }
  std::vector<std::string> nodes;
  for (const auto& n : doc["nodes"]) nodes.push_back(n.get<std::string>());

  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error(path + ": edge references unknown node `" + name +
                             "`");
  };

  std::vector<Edge> edges;
  std::vector<std::pair<Edge, double>> records;
  for (const auto& e : doc["edges"]) {
    const Edge edge{index_of(e.at("from").get<std::string>()),
                    index_of(e.at("to").get<std::string>())};
    const double prob = e.at("prob").get<double>();
    edges.push_back(edge);
    records.emplace_back(edge, prob);
  }
  Dag full(nodes, edges);  // validates acyclicity and duplicates
  std::vector<double> probs(full.edges.size());
  for (const auto& [edge, prob] : records) {
    const auto it = std::lower_bound(full.edges.begin(), full.edges.end(), edge);
    probs[static_cast<std::size_t>(it - full.edges.begin())] = prob;
  }
  return CandidateSpace(std::move(full), std::move(probs));
}

inline void save_space(const CandidateSpace& space, const std::string& path) {
  nlohmann::json doc;
  doc["nodes"] = space.dag_full.nodes;
  doc["edges"] = nlohmann::json::array();
  for (int e = 0; e < space.edge_count(); ++e) {
    doc["edges"].push_back(
        {{"from", space.dag_full.nodes[space.dag_full.edges[e].from]},
         {"to", space.dag_full.nodes[space.dag_full.edges[e].to]},
         {"prob", space.edge_prob[e]}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph-space file: " + path);
  out << doc.dump(2) << "\n";
}

// Which columns to load from a CSV and which of them to mean-center
// (centering supports the no-intercept model on real data).
struct ColumnSpec {
  std::vector<std::string> columns;  // empty = all columns, file order
  std::vector<std::string> center;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

// Strict numeric CSV reader: header row required, unique names, no missing
// or non-numeric cells (errors carry 1-based row/column coordinates).
inline Dataset load_csv_dataset(const std::string& path,
                                const ColumnSpec& spec = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file, header row required");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw std::runtime_error(path + ": empty header name in column " +
                               std::to_string(i + 1));
    }
    for (std::size_t j = i + 1; j < header.size(); ++j) {
      if (header[i] == header[j]) {
        throw std::runtime_error(path + ": duplicate header `" + header[i] + "`");
      }
    }
  }

  std::vector<std::vector<double>> rows;
  int row_number = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(row_number) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " +
                               std::to_string(header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() ||
          !std::isfinite(v)) {
        throw std::runtime_error(
            path + ": missing or non-numeric cell at row " +
            std::to_string(row_number) + ", column " + std::to_string(c + 1) +
            " (`" + header[c] + "`)");
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  std::vector<std::string> names =
      spec.columns.empty() ? header : spec.columns;
  std::vector<int> source(names.size(), -1);
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == names[i]) {
        source[i] = static_cast<int>(h);
        break;
      }
    }
    if (source[i] < 0) {
      throw std::runtime_error(path + ": requested column `" + names[i] +
                               "` not found");
    }
  }

  Eigen::MatrixXd values(rows.size(), names.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][source[c]];
    }
  }

  for (const std::string& center_col : spec.center) {
    int idx = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == center_col) {
        idx = static_cast<int>(i);
        break;
      }
    }
    if (idx < 0) {
      throw std::runtime_error(path + ": centering column `" + center_col +
                               "` not among loaded columns");
    }
    values.col(idx).array() -= values.col(idx).mean();
  }
  return Dataset(std::move(names), std::move(values));
}

inline void save_csv_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    out << (c ? "," : "") << data.columns[c];
  }
  out << "\n";
  char buf[64];
  for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.values(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace cbma
