#pragma once

#include <set>
#include <vector>

#include "aligngroup/dataset.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// One hyperedge per group. Edge vertices are the member users followed by the
// items the group interacted with in training (test items never enter the
// structure).
struct Hypergraph {
  Index num_users = 0;
  Index num_items = 0;
  Index num_groups = 0;

  std::vector<std::vector<Index>> edge_users;  // group -> user ids
  std::vector<std::vector<Index>> edge_items;  // group -> item ids (train)

  std::vector<std::vector<Index>> user_edges;  // user -> group ids
  std::vector<std::vector<Index>> item_edges;  // item -> group ids

  Index edge_size(Index g) const {
    return static_cast<Index>(edge_users[g].size() + edge_items[g].size());
  }
};

inline Hypergraph build_hypergraph(const InteractionDataset& ds) {
  Hypergraph h;
  h.num_users = ds.num_users;
  h.num_items = ds.num_items;
  h.num_groups = ds.num_groups;
  h.edge_users = ds.group_members;
  h.edge_items = ds.group_train_items();
  h.user_edges.assign(ds.num_users, {});
  h.item_edges.assign(ds.num_items, {});
  for (Index g = 0; g < ds.num_groups; ++g) {
    for (Index u : h.edge_users[g]) h.user_edges[u].push_back(g);
    for (Index i : h.edge_items[g]) h.item_edges[i].push_back(g);
  }
  return h;
}

// Jaccard overlap over full vertex sets (users and items). Two empty groups
// define entry 0; the diagonal of a non-empty group is 1.
inline Mat group_overlap(const Hypergraph& h) {
  const Index n = h.num_groups;
  std::vector<std::set<Index>> verts(n);
  for (Index g = 0; g < n; ++g) {
    for (Index u : h.edge_users[g]) verts[g].insert(u);
    // Item vertex ids offset past the user range to keep the sets disjoint.
    for (Index i : h.edge_items[g]) verts[g].insert(h.num_users + i);
  }
  Mat w = Mat::Zero(n, n);
  for (Index p = 0; p < n; ++p) {
    for (Index q = p; q < n; ++q) {
      std::size_t inter = 0;
      const auto& a = verts[p].size() <= verts[q].size() ? verts[p] : verts[q];
      const auto& b = verts[p].size() <= verts[q].size() ? verts[q] : verts[p];
      for (Index v : a) inter += b.count(v);
      const std::size_t uni = verts[p].size() + verts[q].size() - inter;
      const double val =
          uni == 0 ? 0.0
                   : static_cast<double>(inter) / static_cast<double>(uni);
      w(p, q) = val;
      w(q, p) = val;
    }
  }
  return w;
}

}  // namespace aligngroup
