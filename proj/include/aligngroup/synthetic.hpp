#pragma once

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "aligngroup/dataset.hpp"
#include "aligngroup/rng.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// Synthetic group-interaction corpus with latent topic structure: items and
// users carry topics, groups form around a topic and interact with popular
// items of that topic, members adopt most of their groups' items. Held-out
// positives share the entity's topic, so the corpus is learnable by a
// consensus model while remaining nontrivial for a popularity ranker.
struct SyntheticSpec {
  Index num_users = 400;
  Index num_items = 200;
  Index num_groups = 80;
  Index topics = 8;
  double zipf_exponent = 0.8;       // within-topic item popularity
  double member_topic_affinity = 0.9;
  double group_item_topic_affinity = 0.95;
  double member_adoption = 0.85;    // chance a member adopts a group item
  Index min_group_extra = 0;        // group size = 2 + geometric + extra
  double mean_group_size = 7.19;
  double mean_user_extra_items = 3.0;
  std::uint64_t seed = 7;

  static SyntheticSpec mafengwo_scale(std::uint64_t seed = 7) {
    SyntheticSpec s;
    s.num_users = 5275;
    s.num_items = 1513;
    s.num_groups = 995;
    s.topics = 24;
    s.seed = seed;
    return s;
  }
};

namespace detail {

// Weighted draw from a cumulative-sum table.
inline Index draw_cumulative(const std::vector<double>& cum, Rng& rng) {
  const double x = rng.uniform() * cum.back();
  return static_cast<Index>(
      std::lower_bound(cum.begin(), cum.end(), x) - cum.begin());
}

}  // namespace detail

inline InteractionDataset generate_synthetic(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  InteractionDataset ds;
  ds.num_users = spec.num_users;
  ds.num_items = spec.num_items;
  ds.num_groups = spec.num_groups;

  // Topic assignment and within-topic popularity weights.
  std::vector<Index> item_topic(spec.num_items);
  std::vector<std::vector<Index>> topic_items(spec.topics);
  for (Index i = 0; i < spec.num_items; ++i) {
    item_topic[i] = static_cast<Index>(rng.uniform_index(spec.topics));
    topic_items[item_topic[i]].push_back(i);
  }
  std::vector<std::vector<double>> topic_cum(spec.topics);
  for (Index t = 0; t < spec.topics; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < topic_items[t].size(); ++k) {
      acc += 1.0 / std::pow(static_cast<double>(k + 1), spec.zipf_exponent);
      topic_cum[t].push_back(acc);
    }
  }
  auto draw_topic_item = [&](Index t) {
    return topic_items[t][detail::draw_cumulative(topic_cum[t], rng)];
  };

  std::vector<Index> user_topic(spec.num_users);
  std::vector<std::vector<Index>> topic_users(spec.topics);
  for (Index u = 0; u < spec.num_users; ++u) {
    user_topic[u] = static_cast<Index>(rng.uniform_index(spec.topics));
    topic_users[user_topic[u]].push_back(u);
  }

  // Groups: topic, members, items (last drawn item held out for test).
  const double geo_mean = std::max(0.5, spec.mean_group_size - 2.0);
  const double geo_p = 1.0 / (geo_mean + 1.0);
  std::vector<Index> group_topic(spec.num_groups);
  ds.group_members.assign(spec.num_groups, {});
  std::vector<std::unordered_set<Index>> group_train(spec.num_groups);
  for (Index g = 0; g < spec.num_groups; ++g) {
    const Index t = static_cast<Index>(rng.uniform_index(spec.topics));
    group_topic[g] = t;
    Index extra = spec.min_group_extra;
    while (rng.uniform() > geo_p && extra < 60) ++extra;
    const Index size = std::min(2 + extra, spec.num_users);
    std::unordered_set<Index> chosen;
    while (static_cast<Index>(chosen.size()) < size) {
      Index u;
      if (rng.uniform() < spec.member_topic_affinity && !topic_users[t].empty())
        u = topic_users[t][rng.uniform_index(topic_users[t].size())];
      else
        u = static_cast<Index>(rng.uniform_index(spec.num_users));
      if (chosen.insert(u).second) ds.group_members[g].push_back(u);
    }

    const Index n_items = 4 + (rng.uniform() < 0.61 ? 1 : 0);
    std::vector<Index> drawn;
    std::unordered_set<Index> seen;
    while (static_cast<Index>(drawn.size()) < n_items - 1) {
      Index i;
      if (rng.uniform() < spec.group_item_topic_affinity)
        i = draw_topic_item(t);
      else
        i = draw_topic_item(
            static_cast<Index>(rng.uniform_index(spec.topics)));
      if (seen.insert(i).second) drawn.push_back(i);
    }
    for (Index i : drawn) {
      ds.group_item_train.insert({g, i});
      group_train[g].insert(i);
    }
    // Held-out positive: from the group's own topic when one is left, so
    // the test signal reflects the consensus interest the model can learn.
    // Small topics can be exhausted by the training draws; fall back to any
    // unseen item then.
    Index held = -1;
    for (Index k = 0; k < 600 && held < 0; ++k) {
      const Index i = draw_topic_item(t);
      if (!seen.count(i)) held = i;
    }
    if (held < 0) {
      for (Index i = 0; i < spec.num_items && held < 0; ++i)
        if (!seen.count(i)) held = i;
    }
    require(held >= 0, "synthetic generator: group covers every item");
    ds.group_item_test.emplace_back(g, held);
  }

  // Users adopt group items and add interests from their own topic.
  std::vector<std::unordered_set<Index>> user_items(spec.num_users);
  for (Index g = 0; g < spec.num_groups; ++g)
    for (Index u : ds.group_members[g])
      for (Index i : group_train[g])
        if (rng.uniform() < spec.member_adoption) user_items[u].insert(i);

  for (Index u = 0; u < spec.num_users; ++u) {
    const Index t = user_topic[u];
    Index extra = 1;  // at least one personal item beyond group adoptions
    while (rng.uniform() > 1.0 / (spec.mean_user_extra_items + 1.0) &&
           extra < 40)
      ++extra;
    Index attempts = 0;
    while (extra > 0 && attempts < 400) {
      ++attempts;
      const Index i = draw_topic_item(t);
      if (user_items[u].insert(i).second) --extra;
    }
    // Held-out positive from the user's topic, outside the training set.
    Index held = -1;
    for (Index k = 0; k < 600; ++k) {
      const Index i = draw_topic_item(t);
      if (!user_items[u].count(i)) {
        held = i;
        break;
      }
    }
    if (held < 0) {
      for (Index i = 0; i < spec.num_items && held < 0; ++i)
        if (!user_items[u].count(i)) held = i;
    }
    require(held >= 0, "synthetic generator: user covers every item");
    ds.user_item_test.emplace_back(u, held);
    for (Index i : user_items[u]) ds.user_item_train.insert({u, i});
  }

  validate_dataset(ds);
  return ds;
}

}  // namespace aligngroup
