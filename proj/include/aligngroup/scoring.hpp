#pragma once

#include <cmath>
#include <iostream>
#include <unordered_set>
#include <vector>

#include "aligngroup/dataset.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/rng.hpp"
#include "aligngroup/tape.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

constexpr double kLeakyReluSlope = 0.01;

// Plain scorer used for evaluation: sigmoid(LeakyReLU((e .* e_i) W1) W2).
inline double mlp_score(const Eigen::RowVectorXd& entity,
                        const Eigen::RowVectorXd& item, const Mat& w1,
                        const Mat& w2) {
  Eigen::RowVectorXd h = (entity.cwiseProduct(item)) * w1;
  for (Index k = 0; k < h.size(); ++k)
    if (h(k) < 0.0) h(k) *= kLeakyReluSlope;
  const double z = (h * w2)(0, 0);
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

// Tape scorer over row-index batches; shared by user and group paths.
inline ad::Var score_batch(ad::Tape& tape, ad::Var entity_table,
                           ad::Var item_table, ad::Var w1, ad::Var w2,
                           const std::vector<Index>& entities,
                           const std::vector<Index>& items) {
  const ad::Var e = tape.gather_rows(entity_table, entities);
  const ad::Var i = tape.gather_rows(item_table, items);
  const ad::Var h = tape.leaky_relu(tape.matmul(tape.cmul(e, i), w1),
                                    kLeakyReluSlope);
  return tape.sigmoid(tape.matmul(h, w2));
}

struct Triple {
  Index entity;
  Index pos;
  Index neg;
  double weight;  // 1 / |D_entity| over the full epoch pair set
};

struct TrainingPairBatch {
  std::vector<Triple> user_triples;
  std::vector<Triple> group_triples;
};

namespace detail {

inline std::vector<Triple> sample_triples(
    const std::vector<std::vector<Index>>& positives, Index num_items,
    Index neg_per_pos, Rng& rng, const char* what) {
  std::vector<Triple> out;
  for (std::size_t e = 0; e < positives.size(); ++e) {
    const auto& pos = positives[e];
    if (pos.empty()) continue;
    if (static_cast<Index>(pos.size()) >= num_items) {
      std::cerr << "warning: " << what << " " << e
                << " interacted with every item; skipping\n";
      continue;
    }
    std::unordered_set<Index> pos_set(pos.begin(), pos.end());
    const double w =
        1.0 / static_cast<double>(pos.size() * neg_per_pos);
    for (Index p : pos) {
      for (Index k = 0; k < neg_per_pos; ++k) {
        Index n;
        do {
          n = static_cast<Index>(rng.uniform_index(num_items));
        } while (pos_set.count(n));
        out.push_back({static_cast<Index>(e), p, n, w});
      }
    }
  }
  return out;
}

}  // namespace detail

// Fresh uniform negatives for every training positive; deterministic per rng.
inline TrainingPairBatch sample_training_pairs(const InteractionDataset& ds,
                                               Index neg_per_pos, Rng& rng) {
  TrainingPairBatch b;
  b.user_triples = detail::sample_triples(ds.user_train_items(), ds.num_items,
                                          neg_per_pos, rng, "user");
  b.group_triples = detail::sample_triples(ds.group_train_items(), ds.num_items,
                                           neg_per_pos, rng, "group");
  return b;
}

// Pairwise ranking loss over scored triples. Literal mode is the plain
// score-difference form; log-sigmoid mode is canonical BPR. Triple weights
// carry the per-entity 1/|D| normalization.
inline ad::Var bpr_loss(ad::Tape& tape, ad::Var entity_table,
                        ad::Var item_table, ad::Var w1, ad::Var w2,
                        const std::vector<Triple>& triples, BprMode mode) {
  if (triples.empty()) {
    std::cerr << "warning: empty training batch, loss contribution is 0\n";
    return tape.leaf(Mat::Zero(1, 1));
  }
  std::vector<Index> entities, pos, neg;
  Vec weights(static_cast<Index>(triples.size()));
  entities.reserve(triples.size());
  pos.reserve(triples.size());
  neg.reserve(triples.size());
  for (std::size_t k = 0; k < triples.size(); ++k) {
    entities.push_back(triples[k].entity);
    pos.push_back(triples[k].pos);
    neg.push_back(triples[k].neg);
    weights(static_cast<Index>(k)) = triples[k].weight;
  }
  const ad::Var y_pos =
      score_batch(tape, entity_table, item_table, w1, w2, entities, pos);
  const ad::Var y_neg =
      score_batch(tape, entity_table, item_table, w1, w2, entities, neg);
  const ad::Var diff = tape.sub(y_pos, y_neg);
  if (mode == BprMode::kLiteral) return tape.weighted_sum(diff, -weights);
  return tape.weighted_sum(tape.log_sigmoid(diff), -weights);
}

inline ad::Var total_loss(ad::Tape& tape, ad::Var user_bpr, ad::Var group_bpr,
                          ad::Var align, double lambda_align) {
  return tape.linear_combination(
      {{user_bpr, 1.0}, {group_bpr, 1.0}, {align, lambda_align}});
}

}  // namespace aligngroup
