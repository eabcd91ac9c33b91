#pragma once

#include <cmath>
#include <vector>

#include "aligngroup/hypergraph.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/tape.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// Member vertex indices per group under a scope, expressed as row indices
// into the combined [users; items] table (item row = num_users + item id).
// Small scope: users only. Big scope: users plus training items.
inline std::vector<std::vector<Index>> member_scope(const Hypergraph& h,
                                                    Scope scope) {
  std::vector<std::vector<Index>> members(h.num_groups);
  for (Index g = 0; g < h.num_groups; ++g) {
    members[g] = h.edge_users[g];
    if (scope == Scope::kBig)
      for (Index i : h.edge_items[g]) members[g].push_back(h.num_users + i);
  }
  return members;
}

// Per-group common-preference rows over the combined user/item table.
inline ad::Var common_preferences(ad::Tape& tape, ad::Var users, ad::Var items,
                                  const std::vector<std::vector<Index>>& members,
                                  Strategy strategy) {
  const ad::Var combined = tape.concat_rows(users, items);
  return strategy == Strategy::kCentroid
             ? tape.set_minmax_mid_rows(combined, members)
             : tape.set_mean_rows(combined, members);
}

inline ad::Var alignment_loss(ad::Tape& tape, ad::Var consensus,
                              ad::Var common, double tau, InfoNceMode mode) {
  if (mode == InfoNceMode::kLiteral)
    return tape.infonce_from_dots(tape.row_dot(common, consensus), tau);
  return tape.infonce_cross_pairs(common, consensus, tau);
}

struct ConsensusGap {
  std::vector<double> per_group;
  double mean = 0.0;
};

// Mean Euclidean distance between a group's consensus row and each member
// user's row, plus the mean over groups. User members only.
inline ConsensusGap consensus_gap(const Mat& group_emb, const Mat& user_emb,
                                  const std::vector<std::vector<Index>>& group_users) {
  ConsensusGap out;
  out.per_group.reserve(group_users.size());
  double total = 0.0;
  for (std::size_t g = 0; g < group_users.size(); ++g) {
    double sum = 0.0;
    for (Index u : group_users[g])
      sum += (group_emb.row(static_cast<Index>(g)) - user_emb.row(u)).norm();
    const double gap =
        group_users[g].empty()
            ? 0.0
            : sum / static_cast<double>(group_users[g].size());
    out.per_group.push_back(gap);
    total += gap;
  }
  out.mean = group_users.empty()
                 ? 0.0
                 : total / static_cast<double>(group_users.size());
  return out;
}

}  // namespace aligngroup
