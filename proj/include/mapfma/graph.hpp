#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mapfma {

using VertexId = std::int32_t;
using AgentId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr AgentId kNoAgent = -1;

/// Raised for malformed input and contract violations (unknown ids, out of
/// range turns, unreadable files). Feasibility problems are reported as
/// data, never through this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected simple graph over dense vertex ids with string labels.
class Graph {
 public:
  Graph() = default;

  /// Creates n vertices labelled "0" .. "n-1".
  explicit Graph(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) add_vertex(std::to_string(i));
  }

  VertexId add_vertex(std::string label) {
    if (index_.contains(label)) throw Error("duplicate vertex label '" + label + "'");
    auto id = static_cast<VertexId>(adj_.size());
    index_.emplace(label, id);
    labels_.push_back(std::move(label));
    adj_.emplace_back();
    return id;
  }

  void add_edge(VertexId u, VertexId v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw Error("self-loop on vertex " + labels_[u]);
    if (has_edge(u, v)) throw Error("parallel edge " + labels_[u] + "-" + labels_[v]);
    insert_sorted(adj_[u], v);
    insert_sorted(adj_[v], u);
    ++num_edges_;
  }

  [[nodiscard]] bool has_edge(VertexId u, VertexId v) const {
    if (!contains(u) || !contains(v)) return false;
    const auto& nu = adj_[u];
    return std::binary_search(nu.begin(), nu.end(), v);
  }

  [[nodiscard]] bool contains(VertexId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < adj_.size();
  }

  [[nodiscard]] std::size_t num_vertices() const { return adj_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return num_edges_; }

  [[nodiscard]] std::span<const VertexId> neighbors(VertexId v) const {
    check_vertex(v);
    return adj_[v];
  }

  [[nodiscard]] std::size_t degree(VertexId v) const { return neighbors(v).size(); }

  [[nodiscard]] std::size_t max_degree() const {
    std::size_t best = 0;
    for (const auto& n : adj_) best = std::max(best, n.size());
    return best;
  }

  [[nodiscard]] const std::string& label(VertexId v) const {
    check_vertex(v);
    return labels_[v];
  }

  [[nodiscard]] std::optional<VertexId> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Edges as (u, v) with u < v, lexicographically sorted.
  [[nodiscard]] std::vector<std::pair<VertexId, VertexId>> edges() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    out.reserve(num_edges_);
    for (VertexId u = 0; u < static_cast<VertexId>(adj_.size()); ++u)
      for (VertexId v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  /// Breadth-first hop distances from `from`; -1 marks unreachable vertices.
  [[nodiscard]] std::vector<int> bfs_distances(VertexId from) const {
    check_vertex(from);
    std::vector<int> dist(adj_.size(), -1);
    std::queue<VertexId> frontier;
    dist[from] = 0;
    frontier.push(from);
    while (!frontier.empty()) {
      VertexId u = frontier.front();
      frontier.pop();
      for (VertexId w : adj_[u]) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          frontier.push(w);
        }
      }
    }
    return dist;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.labels_ == b.labels_ && a.adj_ == b.adj_;
  }

 private:
  void check_vertex(VertexId v) const {
    if (!contains(v)) throw Error("unknown vertex id " + std::to_string(v));
  }

  static void insert_sorted(std::vector<VertexId>& list, VertexId v) {
    list.insert(std::upper_bound(list.begin(), list.end(), v), v);
  }

  std::vector<std::vector<VertexId>> adj_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, VertexId> index_;
  std::size_t num_edges_ = 0;
};

}  // namespace mapfma
