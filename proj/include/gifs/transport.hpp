#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gifs/errors.hpp"
#include "gifs/measure.hpp"
#include "gifs/point_set.hpp"

namespace gifs {

struct TransportResult {
  double cost = 0.0;
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
};

namespace detail {

/// Transportation simplex on the complete bipartite graph rows x cols with
/// Euclidean ground cost. The basis is a spanning tree over the n + m
/// nodes (rows first, then columns); node potentials satisfy
/// pi[row] + pi[col] = cost on every basic cell. Costs are recomputed on
/// the fly so memory stays linear in n + m.
class TransportationSimplex {
 public:
  TransportationSimplex(const DiscreteMeasure& mu, const DiscreteMeasure& nu)
      : mu_(mu), nu_(nu), n_(mu.size()), m_(nu.size()) {}

  TransportResult solve() {
    const std::size_t nodes = n_ + m_;
    adj_.assign(nodes, {});
    parent_arc_.assign(nodes, kNone);
    parent_.assign(nodes, kNone);
    depth_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);

    initial_basis();
    max_cost_ = 0.0;
    for (const auto& a : arcs_) max_cost_ = std::max(max_cost_, a.cost);
    // Diameter of the union of supports bounds every cost.
    auto box = mu_.atoms().bbox();
    const auto other = nu_.atoms().bbox();
    for (std::size_t k = 0; k < box.lo.size(); ++k) {
      box.lo[k] = std::min(box.lo[k], other.lo[k]);
      box.hi[k] = std::max(box.hi[k], other.hi[k]);
    }
    max_cost_ = std::max(max_cost_, box.diagonal());
    tol_ = 1e-10 * std::max(max_cost_, std::numeric_limits<double>::min());
    rebuild_tree();

    TransportResult res;
    std::size_t degenerate_run = 0;
    const std::size_t bland_after = 50 * (n_ + m_);
    const std::size_t pivot_cap = 200 * (n_ + m_) * (n_ + m_) + 10000;
    while (true) {
      const bool bland = degenerate_run > bland_after;
      std::size_t ei = 0, ej = 0;
      if (!find_entering(bland, ei, ej)) break;
      const bool degenerate = pivot(ei, ej, bland);
      ++res.pivots;
      if (degenerate) {
        ++res.degenerate_pivots;
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }
      if (res.pivots > pivot_cap) throw NonConvergence("mk_distance: transportation simplex pivot cap reached");
    }
    std::vector<double> terms;
    terms.reserve(arcs_.size());
    for (const auto& a : arcs_) terms.push_back(a.flow * a.cost);
    res.cost = compensated_sum(terms);
    return res;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Arc {
    std::size_t row;
    std::size_t col;
    double flow;
    double cost;
  };

  double cost(std::size_t i, std::size_t j) const { return distance(mu_.atom(i), nu_.atom(j)); }
  std::size_t col_node(std::size_t j) const { return n_ + j; }
  std::size_t other_end(std::size_t arc, std::size_t node) const {
    return node < n_ ? col_node(arcs_[arc].col) : arcs_[arc].row;
  }

  /// North-west corner rule over the canonical (lexicographic) atom order;
  /// already optimal in one dimension. Produces exactly n + m - 1 cells.
  void initial_basis() {
    std::vector<double> supply = mu_.weights();
    std::vector<double> demand = nu_.weights();
    const double ms = compensated_sum(supply), md = compensated_sum(demand);
    if (std::abs(ms - md) > kWeightSumHardLimit)
      throw std::invalid_argument("mk_distance: total masses differ (" + std::to_string(ms) + " vs " +
                                  std::to_string(md) + ")");
    arcs_.clear();
    arcs_.reserve(n_ + m_ - 1);
    std::size_t i = 0, j = 0;
    while (true) {
      const double f = std::min(supply[i], demand[j]);
      add_arc(i, j, std::max(f, 0.0));
      supply[i] -= f;
      demand[j] -= f;
      if (i + 1 == n_ && j + 1 == m_) break;
      if (j + 1 == m_ || (i + 1 < n_ && supply[i] <= demand[j]))
        ++i;
      else
        ++j;
    }
    // Rounding residue of the two normalizations lands on the last cell.
    arcs_.back().flow = std::max(0.0, arcs_.back().flow + std::min(supply.back(), demand.back()));
  }

  void add_arc(std::size_t i, std::size_t j, double flow) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({i, j, flow, cost(i, j)});
    adj_[i].push_back(id);
    adj_[col_node(j)].push_back(id);
  }

  void rebuild_tree() {
    std::fill(parent_arc_.begin(), parent_arc_.end(), kNone);
    parent_[0] = kNone;
    depth_[0] = 0;
    pi_[0] = 0.0;
    relabel_from(0);
  }

  /// BFS from `start` (whose parent data is already set) over tree arcs,
  /// recomputing parent, depth and potential of everything below it.
  void relabel_from(std::size_t start) {
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t arc : adj_[u]) {
        if (arc == parent_arc_[u]) continue;
        const std::size_t v = other_end(arc, u);
        parent_arc_[v] = arc;
        parent_[v] = u;
        depth_[v] = depth_[u] + 1;
        pi_[v] = arcs_[arc].cost - pi_[u];
        queue.push_back(v);
      }
    }
  }

  /// Most negative reduced cost within a block of candidates (or the first
  /// negative one in index order under Bland's rule).
  bool find_entering(bool bland, std::size_t& ei, std::size_t& ej) {
    if (bland) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < m_; ++j)
          if (cost(i, j) - pi_[i] - pi_[col_node(j)] < -tol_) {
            ei = i;
            ej = j;
            return true;
          }
      return false;
    }
    const std::size_t block = std::max<std::size_t>(
        64, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_) * static_cast<double>(m_))));
    double best = -tol_;
    bool found = false;
    std::size_t scanned = 0;
    for (std::size_t r = 0; r < n_; ++r) {
      const std::size_t i = (next_row_ + r) % n_;
      const double pi_i = pi_[i];
      for (std::size_t j = 0; j < m_; ++j) {
        const double rc = cost(i, j) - pi_i - pi_[col_node(j)];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          found = true;
        }
      }
      scanned += m_;
      if (found && scanned >= block) {
        next_row_ = (i + 1) % n_;
        return true;
      }
    }
    return found;
  }

  /// Adds cell (i, j), pushes flow around the cycle and drops a blocking
  /// cell. Returns true when the pivot moved zero flow.
  bool pivot(std::size_t ei, std::size_t ej, bool bland) {
    const std::size_t u = ei, v = col_node(ej);
    // Walk both endpoints up to their common ancestor. Arcs adjacent to
    // the entering cell lose flow, then signs alternate.
    std::vector<std::size_t> up_u, up_v;
    std::size_t a = u, b = v;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        up_u.push_back(parent_arc_[a]);
        a = parent_[a];
      } else {
        up_v.push_back(parent_arc_[b]);
        b = parent_[b];
      }
    }
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = kNone;
    bool leave_on_u_side = true;
    auto consider = [&](const std::vector<std::size_t>& path, bool u_side) {
      for (std::size_t k = 0; k < path.size(); k += 2) {
        const std::size_t arc = path[k];
        const double f = arcs_[arc].flow;
        bool take = false;
        if (leave == kNone || f < theta) {
          take = true;
        } else if (f == theta) {
          if (bland) {
            const auto idx = [&](std::size_t x) { return arcs_[x].row * m_ + arcs_[x].col; };
            take = idx(arc) < idx(leave);
          } else {
            // Prefer the blocking cell farthest from the entering cell on
            // the column side, which keeps degenerate cycles moving.
            take = !u_side;
          }
        }
        if (take) {
          theta = f;
          leave = arc;
          leave_on_u_side = u_side;
        }
      }
    };
    consider(up_u, true);
    consider(up_v, false);

    for (std::size_t k = 0; k < up_u.size(); ++k) arcs_[up_u[k]].flow += (k % 2 == 0 ? -theta : theta);
    for (std::size_t k = 0; k < up_v.size(); ++k) arcs_[up_v[k]].flow += (k % 2 == 0 ? -theta : theta);
    arcs_[leave].flow = 0.0;

    // Detach the leaving cell; the endpoint on the entering side of the cut
    // becomes the root of the detached subtree.
    const Arc old = arcs_[leave];
    auto drop = [&](std::size_t node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), leave));
    };
    drop(old.row);
    drop(col_node(old.col));
    arcs_[leave] = {ei, ej, theta, cost(ei, ej)};
    adj_[u].push_back(leave);
    adj_[v].push_back(leave);

    const std::size_t root = leave_on_u_side ? u : v;
    const std::size_t anchor = leave_on_u_side ? v : u;
    parent_arc_[root] = leave;
    parent_[root] = anchor;
    depth_[root] = depth_[anchor] + 1;
    pi_[root] = arcs_[leave].cost - pi_[anchor];
    relabel_from(root);
    return theta == 0.0;
  }

  const DiscreteMeasure& mu_;
  const DiscreteMeasure& nu_;
  std::size_t n_;
  std::size_t m_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_arc_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;
  std::size_t next_row_ = 0;
  double max_cost_ = 0.0;
  double tol_ = 0.0;
};

}  // namespace detail

/// Optimal transport between two discrete measures with Euclidean ground
/// cost, with solver statistics.
inline TransportResult mk_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim());
  detail::TransportationSimplex solver(mu, nu);
  return solver.solve();
}

/// W1 on the real line as the integral of |F_mu - F_nu|, by one merge of
/// the (already sorted) atoms.
inline double mk_distance_line(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw std::invalid_argument("mk_distance_line: measures must be 1-D");
  std::vector<double> area;
  area.reserve(mu.size() + nu.size());
  std::size_t i = 0, j = 0;
  double diff = 0.0;
  double prev = std::min(mu.atom(0)[0], nu.atom(0)[0]);
  while (i < mu.size() || j < nu.size()) {
    const double x = j == nu.size() || (i < mu.size() && mu.atom(i)[0] <= nu.atom(j)[0]) ? mu.atom(i)[0]
                                                                                       : nu.atom(j)[0];
    area.push_back(std::abs(diff) * (x - prev));
    while (i < mu.size() && mu.atom(i)[0] == x) diff += mu.weight(i++);
    while (j < nu.size() && nu.atom(j)[0] == x) diff -= nu.weight(j++);
    prev = x;
  }
  return compensated_sum(area);
}

/// Monge-Kantorovich (Wasserstein-1) distance. One-dimensional measures
/// use the CDF formula; otherwise the transportation LP is solved exactly.
inline double mk_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim());
  if (mu.dim() == 1) return mk_distance_line(mu, nu);
  return mk_transport(mu, nu).cost;
}

}  // namespace gifs
