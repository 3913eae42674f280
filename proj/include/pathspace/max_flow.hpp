#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pathspace {

/// Dinic maximum flow with integer capacities; O(E sqrt(V)) on the unit-ish
/// bipartite transport graphs used here. Deterministic: augmentation order
/// follows edge insertion order exactly.
class MaxFlow {
  public:
    explicit MaxFlow(std::size_t n) : adj_(n), level_(n), ptr_(n) {}

    std::size_t node_count() const { return adj_.size(); }

    /// Adds a directed edge and returns its id for later flow_on queries.
    std::size_t add_edge(std::size_t from, std::size_t to, std::int64_t cap) {
        if (from >= adj_.size() || to >= adj_.size()) throw std::domain_error("MaxFlow::add_edge: node out of range");
        if (cap < 0) throw std::domain_error("MaxFlow::add_edge: negative capacity");
        edges_.push_back(Edge{static_cast<int>(to), cap, cap});
        adj_[from].push_back(edges_.size() - 1);
        edges_.push_back(Edge{static_cast<int>(from), 0, 0});
        adj_[to].push_back(edges_.size() - 1);
        return edges_.size() - 2;
    }

    /// Computes max flow from s to t, stopping early once `limit` is reached.
    /// Repeated calls continue from the current flow (edges may be added in
    /// between), so an increasing-threshold sweep pays for each unit once.
    std::int64_t run(std::size_t s, std::size_t t,
                     std::int64_t limit = std::numeric_limits<std::int64_t>::max()) {
        if (s >= adj_.size() || t >= adj_.size() || s == t) throw std::domain_error("MaxFlow::run: bad terminals");
        while (total_ < limit && bfs(s, t)) {
            std::fill(ptr_.begin(), ptr_.end(), 0);
            while (total_ < limit) {
                const std::int64_t pushed = dfs(s, t, std::numeric_limits<std::int64_t>::max());
                if (pushed == 0) break;
                total_ += pushed;
            }
        }
        return total_;
    }

    /// Flow currently routed through the edge with the given id.
    std::int64_t flow_on(std::size_t edge_id) const {
        return edges_[edge_id].orig - edges_[edge_id].cap;
    }

    std::int64_t total_flow() const { return total_; }

  private:
    struct Edge {
        int to;
        std::int64_t cap;
        std::int64_t orig;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        queue_.clear();
        queue_.push_back(static_cast<int>(s));
        level_[s] = 0;
        for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
            const int v = queue_[qi];
            for (std::size_t id : adj_[v]) {
                const Edge& e = edges_[id];
                if (e.cap > 0 && level_[e.to] < 0) {
                    level_[e.to] = level_[v] + 1;
                    queue_.push_back(e.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    std::int64_t dfs(std::size_t v, std::size_t t, std::int64_t f) {
        if (v == t) return f;
        for (std::size_t& i = ptr_[v]; i < adj_[v].size(); ++i) {
            const std::size_t id = adj_[v][i];
            Edge& e = edges_[id];
            if (e.cap <= 0 || level_[e.to] != level_[v] + 1) continue;
            const std::int64_t pushed = dfs(static_cast<std::size_t>(e.to), t, std::min(f, e.cap));
            if (pushed > 0) {
                e.cap -= pushed;
                edges_[id ^ 1].cap += pushed;
                return pushed;
            }
        }
        return 0;
    }

    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<int> level_;
    std::vector<std::size_t> ptr_;
    std::vector<int> queue_;
    std::int64_t total_ = 0;
};

} // namespace pathspace
