#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "aligngroup/dataset.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/rng.hpp"
#include "aligngroup/scoring.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

enum class Task { kGroup, kUser };

inline const char* to_string(Task t) {
  return t == Task::kGroup ? "group" : "user";
}

// One leave-one-out test case: the held-out positive first, then negatives.
struct EvalCase {
  Index entity;
  std::vector<Index> candidates;  // candidates[0] is the positive
};

// Candidates per test case: the held-out positive plus eval_neg_count
// sampled negatives (uniform, excluding the entity's train and test
// positives). A pre-sampled negatives file, when present, is passed through
// in its stored order.
inline std::vector<EvalCase> build_candidates(const InteractionDataset& ds,
                                              Task task, Index eval_neg_count,
                                              Rng& rng) {
  const auto& test =
      task == Task::kGroup ? ds.group_item_test : ds.user_item_test;
  const auto& provided =
      task == Task::kGroup ? ds.eval_negatives_group : ds.eval_negatives_user;
  const auto positives = task == Task::kGroup ? ds.group_train_items()
                                              : ds.user_train_items();

  std::vector<EvalCase> cases;
  cases.reserve(test.size());
  for (const auto& [entity, held_out] : test) {
    EvalCase c;
    c.entity = entity;
    c.candidates.push_back(held_out);
    auto it = provided.find(entity);
    if (it != provided.end()) {
      c.candidates.insert(c.candidates.end(), it->second.begin(),
                          it->second.end());
    } else {
      std::unordered_set<Index> excluded(positives[entity].begin(),
                                         positives[entity].end());
      excluded.insert(held_out);
      const Index available = ds.num_items - static_cast<Index>(excluded.size());
      require(available >= 1,
              "entity " + std::to_string(entity) +
                  ": no non-positive items left to sample negatives from");
      if (available <= eval_neg_count) {
        // Forced draw: every non-positive item is a negative.
        for (Index i = 0; i < ds.num_items; ++i)
          if (!excluded.count(i)) c.candidates.push_back(i);
      } else {
        std::unordered_set<Index> drawn;
        while (static_cast<Index>(drawn.size()) < eval_neg_count) {
          const Index i = static_cast<Index>(rng.uniform_index(ds.num_items));
          if (!excluded.count(i) && drawn.insert(i).second)
            c.candidates.push_back(i);
        }
      }
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

struct RankMetrics {
  double hr = 0.0;
  double ndcg = 0.0;
};

// Rank of the positive (candidate 0) = 1 + count of strictly higher scores;
// the stable rule lets the positive win ties. The pessimistic rule counts
// ties against it instead.
inline Index positive_rank(const std::vector<double>& scores,
                           bool pessimistic_ties = false) {
  Index rank = 1;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[0] ||
        (pessimistic_ties && scores[k] == scores[0]))
      ++rank;
  }
  return rank;
}

inline RankMetrics rank_metrics(Index rank, Index k) {
  RankMetrics m;
  if (rank <= k) {
    m.hr = 1.0;
    m.ndcg = 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  return m;
}

struct TaskReport {
  std::map<Index, double> hr;    // K -> HR@K
  std::map<Index, double> ndcg;  // K -> NDCG@K
  Index num_cases = 0;
};

struct EvalReport {
  TaskReport group;
  TaskReport user;
  double consensus_gap_mean = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
  std::string config_echo;
};

using CaseScorer =
    std::function<double(Index entity, Index item)>;

inline TaskReport evaluate_cases(const std::vector<EvalCase>& cases,
                                 const CaseScorer& score,
                                 const std::vector<Index>& ks,
                                 bool pessimistic_ties = false) {
  TaskReport rep;
  rep.num_cases = static_cast<Index>(cases.size());
  for (Index k : ks) {
    rep.hr[k] = 0.0;
    rep.ndcg[k] = 0.0;
  }
  if (cases.empty()) return rep;
  for (const auto& c : cases) {
    std::vector<double> scores;
    scores.reserve(c.candidates.size());
    for (Index item : c.candidates) scores.push_back(score(c.entity, item));
    const Index rank = positive_rank(scores, pessimistic_ties);
    for (Index k : ks) {
      const RankMetrics m = rank_metrics(rank, k);
      rep.hr[k] += m.hr;
      rep.ndcg[k] += m.ndcg;
    }
  }
  for (Index k : ks) {
    rep.hr[k] /= static_cast<double>(cases.size());
    rep.ndcg[k] /= static_cast<double>(cases.size());
  }
  return rep;
}

// Scores every candidate with the shared MLP over final embeddings.
inline TaskReport evaluate_task(const Mat& entity_emb, const Mat& item_emb,
                                const Mat& w1, const Mat& w2,
                                const std::vector<EvalCase>& cases,
                                const std::vector<Index>& ks,
                                bool pessimistic_ties = false) {
  return evaluate_cases(
      cases,
      [&](Index e, Index i) {
        return mlp_score(entity_emb.row(e), item_emb.row(i), w1, w2);
      },
      ks, pessimistic_ties);
}

// Non-personalized baseline: item score = its training interaction count.
// The group task adds group-item counts to user-item counts.
inline std::vector<double> popularity_scores(const InteractionDataset& ds,
                                             Task task) {
  std::vector<double> counts(static_cast<std::size_t>(ds.num_items), 0.0);
  for (const auto& [u, i] : ds.user_item_train) counts[i] += 1.0;
  if (task == Task::kGroup)
    for (const auto& [g, i] : ds.group_item_train) counts[i] += 1.0;
  return counts;
}

inline CaseScorer popularity_baseline(const InteractionDataset& ds,
                                      Task task) {
  auto counts = popularity_scores(ds, task);
  return [counts = std::move(counts)](Index, Index item) {
    return counts[item];
  };
}

}  // namespace aligngroup
