#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "causalbench/errors.hpp"
#include "causalbench/graph.hpp"

namespace causalbench {

// Edge list:
//   p=<count>
//   <j> <k> -->     directed j -> k
//   <j> <k> ---     undirected
// Node indices are 0-based. Blank lines and lines starting with '#' are skipped.

inline std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "p=" << g.p() << '\n';
  for (const auto& e : g.edges()) out << e.from << ' ' << e.to << (e.directed ? " -->" : " ---") << '\n';
  return out.str();
}

inline Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int p = -1;
  Graph g;
  bool any_undirected = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (p < 0) {
      if (line.rfind("p=", 0) != 0)
        throw ParseError("edge list line " + std::to_string(line_no) + ": expected header 'p=<count>'");
      try {
        p = std::stoi(line.substr(2));
      } catch (const std::exception&) {
        throw ParseError("edge list line " + std::to_string(line_no) + ": bad node count");
      }
      if (p <= 0) throw ParseError("edge list: node count must be positive");
      g = Graph(p);
      continue;
    }
    std::istringstream fields(line);
    int j = 0, k = 0;
    std::string mark;
    if (!(fields >> j >> k >> mark) || (mark != "-->" && mark != "---"))
      throw ParseError("edge list line " + std::to_string(line_no) + ": expected '<j> <k> -->|---'");
    if (j < 0 || k < 0 || j >= p || k >= p || j == k)
      throw ParseError("edge list line " + std::to_string(line_no) + ": bad node index");
    if (g.adjacent(j, k))
      throw ParseError("edge list line " + std::to_string(line_no) + ": duplicate pair");
    if (mark == "-->") g.add_directed(j, k);
    else {
      g.add_undirected(j, k);
      any_undirected = true;
    }
  }
  if (p < 0) throw ParseError("edge list: missing header");
  if (!any_undirected && detail::directed_part_acyclic(g)) g.set_kind(GraphKind::DAG);
  return g;
}

/// 0/1 CSV, row = source. Symmetric ones read as one undirected edge.
inline std::string to_adjacency_csv(const Graph& g) {
  const auto a = g.to_adjacency();
  std::ostringstream out;
  for (int j = 0; j < a.rows(); ++j) {
    for (int k = 0; k < a.cols(); ++k) out << (k ? "," : "") << a(j, k);
    out << '\n';
  }
  return out.str();
}

inline Graph parse_adjacency_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<int>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<int> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      if (cell == "0") row.push_back(0);
      else if (cell == "1") row.push_back(1);
      else
        throw ParseError("adjacency line " + std::to_string(line_no) + ", column " +
                         std::to_string(row.size() + 1) + ": expected 0 or 1");
    }
    rows.push_back(std::move(row));
  }
  const int p = static_cast<int>(rows.size());
  if (p == 0) throw ParseError("adjacency: empty matrix");
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != p) throw ParseError("adjacency: matrix is not square");
  Graph g(p);
  bool any_undirected = false;
  for (int j = 0; j < p; ++j) {
    if (rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] != 0)
      throw ParseError("adjacency: self-loop at node " + std::to_string(j));
    for (int k = j + 1; k < p; ++k) {
      const bool f = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] != 0;
      const bool b = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] != 0;
      if (f && b) {
        g.add_undirected(j, k);
        any_undirected = true;
      } else if (f) g.add_directed(j, k);
      else if (b) g.add_directed(k, j);
    }
  }
  if (!any_undirected && detail::directed_part_acyclic(g)) g.set_kind(GraphKind::DAG);
  return g;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write '" + path + "'");
  out << text;
  if (!out) throw LoadError("write failed for '" + path + "'");
}

/// Detects the format from the first non-empty line.
inline Graph load_graph(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text.compare(first, 2, "p=") == 0) return parse_edge_list(text);
  return parse_adjacency_csv(text);
}

}  // namespace causalbench
