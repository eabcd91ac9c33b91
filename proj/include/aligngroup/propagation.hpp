#pragma once

#include <utility>
#include <vector>

#include "aligngroup/hypergraph.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/tape.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// Membership-derived weights for pushing fused group embeddings back to
// vertices. For vertex v in group g:
//   w(v,g) = (1/|E_v|) * [sum_{g' in E_v} size(g')] / [|E_v| * size(g)]
// where size(g) = |U_g| + |I_g|. Vertices with no groups keep their
// previous-layer embedding.
inline std::vector<std::vector<std::pair<Index, double>>> refresh_weights(
    const Hypergraph& h, const std::vector<std::vector<Index>>& vertex_edges) {
  std::vector<std::vector<std::pair<Index, double>>> w(vertex_edges.size());
  for (std::size_t v = 0; v < vertex_edges.size(); ++v) {
    const auto& edges = vertex_edges[v];
    if (edges.empty()) continue;
    const double k = static_cast<double>(edges.size());
    double size_sum = 0.0;
    for (Index g : edges) size_sum += static_cast<double>(h.edge_size(g));
    w[v].reserve(edges.size());
    for (Index g : edges)
      w[v].emplace_back(
          g, (1.0 / k) * size_sum / (k * static_cast<double>(h.edge_size(g))));
  }
  return w;
}

// Static structure of the forward pass, reused across steps.
struct PropagationPlan {
  std::vector<std::vector<Index>> group_users;   // U_g
  std::vector<std::vector<Index>> group_items;   // I_g (training)
  std::vector<std::vector<std::pair<Index, double>>> user_weights;
  std::vector<std::vector<std::pair<Index, double>>> item_weights;

  explicit PropagationPlan(const Hypergraph& h)
      : group_users(h.edge_users),
        group_items(h.edge_items),
        user_weights(refresh_weights(h, h.user_edges)),
        item_weights(refresh_weights(h, h.item_edges)) {}
};

struct FinalEmbeddings {
  ad::Var users;   // dagger E_u
  ad::Var items;   // dagger E_i
  ad::Var groups;  // dagger E_g
};

struct ParameterVars {
  ad::Var e_user, e_item, e_group, w_fuse, w1, w2;
};

inline ParameterVars push_parameters(ad::Tape& tape, const ParameterSet& p) {
  return ParameterVars{tape.leaf(p.e_user),  tape.leaf(p.e_item),
                       tape.leaf(p.e_group), tape.leaf(p.w_fuse),
                       tape.leaf(p.w1),      tape.leaf(p.w2)};
}

// Builds the L-layer forward pass. Each layer fuses the mean user-side and
// item-side messages per group and pushes the result back to vertices with
// size-adjusted weights. Final embeddings are layer averages; group
// embeddings mix the overlap-weighted layer-0 term when InterRL is enabled.
inline FinalEmbeddings propagate(ad::Tape& tape, const ParameterVars& params,
                                 const PropagationPlan& plan,
                                 const Mat& overlap, Index layers,
                                 bool interrl_enabled) {
  std::vector<ad::Var> user_layers{params.e_user};
  std::vector<ad::Var> item_layers{params.e_item};
  std::vector<ad::Var> group_layers{params.e_group};

  for (Index l = 1; l <= layers; ++l) {
    const ad::Var prev_u = user_layers.back();
    const ad::Var prev_i = item_layers.back();
    const ad::Var user_msg = tape.set_mean_rows(prev_u, plan.group_users);
    const ad::Var item_msg = tape.set_mean_rows(prev_i, plan.group_items);
    const ad::Var fused =
        tape.matmul(tape.concat_cols(user_msg, item_msg), params.w_fuse);
    group_layers.push_back(fused);
    user_layers.push_back(
        tape.weighted_rows_or_fallback(fused, prev_u, plan.user_weights));
    item_layers.push_back(
        tape.weighted_rows_or_fallback(fused, prev_i, plan.item_weights));
  }

  const double inv = 1.0 / static_cast<double>(layers + 1);
  auto layer_mean = [&](const std::vector<ad::Var>& vs) {
    std::vector<std::pair<ad::Var, double>> terms;
    for (ad::Var v : vs) terms.emplace_back(v, inv);
    return tape.linear_combination(terms);
  };

  FinalEmbeddings out;
  out.users = layer_mean(user_layers);
  out.items = layer_mean(item_layers);
  if (interrl_enabled) {
    // Layers 1..L plus the overlap-mixed initial table.
    std::vector<std::pair<ad::Var, double>> terms;
    for (Index l = 1; l <= layers; ++l)
      terms.emplace_back(group_layers[l], inv);
    const ad::Var mixed =
        tape.matmul_const_left(overlap, group_layers[0]);
    terms.emplace_back(mixed, inv);
    out.groups = tape.linear_combination(terms);
  } else {
    out.groups = layer_mean(group_layers);
  }
  return out;
}

}  // namespace aligngroup
