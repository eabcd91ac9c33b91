#pragma once

// Test-only reference implementations, independent of the library's
// vectorized/taped paths.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "aligngroup/dataset.hpp"
#include "aligngroup/hypergraph.hpp"
#include "aligngroup/model.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/rng.hpp"
#include "aligngroup/types.hpp"

namespace oracles {

using aligngroup::Hypergraph;
using aligngroup::Index;
using aligngroup::Mat;

struct NaiveEmbeddings {
  Mat users, items, groups;
};

// Straight transcription of the layered forward pass with explicit loops:
// per-group user/item means, concat * W by scalar loops, size-weighted
// refresh, then layer averages (with or without the overlap mixing of the
// initial group table).
inline NaiveEmbeddings naive_propagate(const Mat& e_u, const Mat& e_i,
                                       const Mat& e_g, const Mat& w_fuse,
                                       const Hypergraph& h, const Mat& overlap,
                                       Index layers, bool interrl) {
  const Index d = e_u.cols();
  std::vector<Mat> us{e_u}, is{e_i}, gs{e_g};

  auto edge_size = [&](Index g) {
    return static_cast<double>(h.edge_users[g].size() + h.edge_items[g].size());
  };

  for (Index l = 1; l <= layers; ++l) {
    const Mat& pu = us.back();
    const Mat& pi = is.back();
    Mat fused = Mat::Zero(h.num_groups, d);
    for (Index g = 0; g < h.num_groups; ++g) {
      std::vector<double> concat(2 * d, 0.0);
      if (!h.edge_users[g].empty()) {
        for (Index u : h.edge_users[g])
          for (Index c = 0; c < d; ++c) concat[c] += pu(u, c);
        for (Index c = 0; c < d; ++c)
          concat[c] /= static_cast<double>(h.edge_users[g].size());
      }
      if (!h.edge_items[g].empty()) {
        for (Index i : h.edge_items[g])
          for (Index c = 0; c < d; ++c) concat[d + c] += pi(i, c);
        for (Index c = 0; c < d; ++c)
          concat[d + c] /= static_cast<double>(h.edge_items[g].size());
      }
      for (Index c = 0; c < d; ++c) {
        double acc = 0.0;
        for (Index r = 0; r < 2 * d; ++r) acc += concat[r] * w_fuse(r, c);
        fused(g, c) = acc;
      }
    }

    Mat nu = Mat::Zero(h.num_users, d);
    for (Index u = 0; u < h.num_users; ++u) {
      const auto& edges = h.user_edges[u];
      if (edges.empty()) {
        nu.row(u) = pu.row(u);
        continue;
      }
      const double k = static_cast<double>(edges.size());
      double size_sum = 0.0;
      for (Index g : edges) size_sum += edge_size(g);
      for (Index g : edges) {
        const double w = (1.0 / k) * size_sum / (k * edge_size(g));
        for (Index c = 0; c < d; ++c) nu(u, c) += w * fused(g, c);
      }
    }
    Mat ni = Mat::Zero(h.num_items, d);
    for (Index i = 0; i < h.num_items; ++i) {
      const auto& edges = h.item_edges[i];
      if (edges.empty()) {
        ni.row(i) = pi.row(i);
        continue;
      }
      const double k = static_cast<double>(edges.size());
      double size_sum = 0.0;
      for (Index g : edges) size_sum += edge_size(g);
      for (Index g : edges) {
        const double w = (1.0 / k) * size_sum / (k * edge_size(g));
        for (Index c = 0; c < d; ++c) ni(i, c) += w * fused(g, c);
      }
    }
    gs.push_back(fused);
    us.push_back(nu);
    is.push_back(ni);
  }

  NaiveEmbeddings out;
  const double inv = 1.0 / static_cast<double>(layers + 1);
  out.users = Mat::Zero(h.num_users, d);
  for (const auto& m : us) out.users += inv * m;
  out.items = Mat::Zero(h.num_items, d);
  for (const auto& m : is) out.items += inv * m;
  out.groups = Mat::Zero(h.num_groups, d);
  if (interrl) {
    for (Index l = 1; l <= layers; ++l) out.groups += inv * gs[l];
    // overlap-mixed initial table, explicit triple loop
    for (Index p = 0; p < h.num_groups; ++p)
      for (Index q = 0; q < h.num_groups; ++q)
        for (Index c = 0; c < d; ++c)
          out.groups(p, c) += inv * overlap(p, q) * e_g(q, c);
  } else {
    for (const auto& m : gs) out.groups += inv * m;
  }
  return out;
}

// Full-sort ranking oracle: sort candidate indices by (-score, index) and
// locate the positive (index 0). Equivalent to the stable tie rule.
inline Index fullsort_rank(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  for (std::size_t r = 0; r < order.size(); ++r)
    if (order[r] == 0) return static_cast<Index>(r + 1);
  return static_cast<Index>(order.size());
}

inline double fullsort_hr(const std::vector<double>& scores, Index k) {
  return fullsort_rank(scores) <= k ? 1.0 : 0.0;
}

inline double fullsort_ndcg(const std::vector<double>& scores, Index k) {
  const Index r = fullsort_rank(scores);
  return r <= k ? 1.0 / std::log2(static_cast<double>(r) + 1.0) : 0.0;
}

// Random tiny dataset for gradient checks.
inline aligngroup::InteractionDataset tiny_instance(std::uint64_t seed,
                                                    Index num_users = 5,
                                                    Index num_items = 4,
                                                    Index num_groups = 3) {
  aligngroup::Rng rng(seed);
  aligngroup::InteractionDataset ds;
  ds.num_users = num_users;
  ds.num_items = num_items;
  ds.num_groups = num_groups;
  ds.group_members.assign(num_groups, {});
  for (Index g = 0; g < num_groups; ++g) {
    const Index size = 1 + static_cast<Index>(rng.uniform_index(3));
    std::vector<Index> perm(num_users);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    ds.group_members[g].assign(perm.begin(), perm.begin() + size);
    const Index n_items = static_cast<Index>(rng.uniform_index(3));  // 0..2
    std::vector<Index> iperm(num_items);
    std::iota(iperm.begin(), iperm.end(), 0);
    rng.shuffle(iperm);
    for (Index k = 0; k < n_items; ++k)
      ds.group_item_train.insert({g, iperm[k]});
    if (n_items < num_items)  // leave-one-out positive, never in train
      ds.group_item_test.push_back({g, iperm[n_items]});
  }
  for (Index u = 0; u < num_users; ++u) {
    const Index n = 1 + static_cast<Index>(rng.uniform_index(2));
    std::vector<Index> iperm(num_items);
    std::iota(iperm.begin(), iperm.end(), 0);
    rng.shuffle(iperm);
    for (Index k = 0; k < n; ++k) ds.user_item_train.insert({u, iperm[k]});
    if (n < num_items) ds.user_item_test.push_back({u, iperm[n]});
  }
  return ds;
}

// Central finite differences of the total loss over every parameter
// coordinate; returns the max relative error against the taped gradients.
inline double max_fd_relative_error(
    const aligngroup::Model& model, aligngroup::ParameterSet& params,
    const std::vector<aligngroup::Triple>& user_triples,
    const std::vector<aligngroup::Triple>& group_triples, double eps = 1e-4) {
  aligngroup::ParameterSet work = params;
  aligngroup::compute_loss_and_gradients(model, work, user_triples,
                                         group_triples);
  // Snapshot every analytic gradient now: the FD loop below reuses the same
  // ParameterSet, and each loss evaluation overwrites the grad buffers.
  std::vector<Mat> analytic_grads;
  for (const auto& slot : work.slots) analytic_grads.push_back(slot.grad);
  double worst = 0.0;
  for (std::size_t s = 0; s < work.slots.size(); ++s) {
    Mat& value = *work.slots[s].value;
    const Mat analytic = analytic_grads[s];
    for (Index r = 0; r < value.rows(); ++r) {
      for (Index c = 0; c < value.cols(); ++c) {
        const double orig = value(r, c);
        auto central = [&](double h) {
          value(r, c) = orig + h;
          const double up = aligngroup::compute_loss_and_gradients(
                                model, work, user_triples, group_triples)
                                .total;
          value(r, c) = orig - h;
          const double dn = aligngroup::compute_loss_and_gradients(
                                model, work, user_triples, group_triples)
                                .total;
          value(r, c) = orig;
          return (up - dn) / (2.0 * h);
        };
        const double numeric = central(eps);
        const double a = analytic(r, c);
        // Floor guards against FD truncation noise dominating near-zero
        // coordinates; real gradient bugs show up at the gradient's own scale.
        const double denom = std::max({1e-4, std::abs(a), std::abs(numeric)});
        const double err = std::abs(a - numeric) / denom;
        if (err <= 1e-4) continue;
        // Re-estimate at half the step. If the two FD estimates disagree,
        // the interval straddles a kink (leaky-ReLU corner, argmax switch)
        // where FD is meaningless against a subgradient: skip. A real
        // gradient bug gives consistent FD estimates that still miss the
        // analytic value.
        const double refined = central(eps / 2.0);
        const double fd_gap = std::abs(numeric - refined) /
                              std::max({1e-4, std::abs(numeric),
                                        std::abs(refined)});
        if (fd_gap > 0.05) continue;  // non-smooth point
        const double denom2 =
            std::max({1e-4, std::abs(a), std::abs(refined)});
        const double err2 = std::abs(a - refined) / denom2;
        // A kink closer than eps/2 fools the consistency check: both
        // estimates straddle it and agree with each other. Shrink the step
        // once more; if FD converges to the analytic value the point is
        // fine, while a wrong gradient leaves the error in place.
        const double tiny = central(eps / 10.0);
        const double denom3 = std::max({1e-4, std::abs(a), std::abs(tiny)});
        const double err3 = std::abs(a - tiny) / denom3;
        worst = std::max(worst, std::min(err2, err3));
      }
    }
  }
  return worst;
}

}  // namespace oracles
