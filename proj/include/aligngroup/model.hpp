#pragma once

#include <algorithm>
#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include "aligngroup/alignment.hpp"
#include "aligngroup/dataset.hpp"
#include "aligngroup/evaluation.hpp"
#include "aligngroup/hypergraph.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/propagation.hpp"
#include "aligngroup/scoring.hpp"
#include "aligngroup/tape.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// Everything needed to run the fixed computation graph on one dataset.
struct Model {
  TrainConfig cfg;
  const InteractionDataset* dataset = nullptr;
  Hypergraph hypergraph;
  Mat overlap;
  PropagationPlan plan;
  std::vector<std::vector<Index>> members;  // alignment scope per group

  Model(const InteractionDataset& ds, const TrainConfig& config)
      : cfg(config),
        dataset(&ds),
        hypergraph(build_hypergraph(ds)),
        overlap(group_overlap(hypergraph)),
        plan(hypergraph),
        members(member_scope(hypergraph, config.scope)) {
    cfg.validate();
  }
};

struct ForwardValues {
  Mat users, items, groups, common;
};

// Propagates and reads back the final embedding values (no gradient use).
inline ForwardValues forward_embeddings(const Model& m,
                                        const ParameterSet& params) {
  ad::Tape tape;
  const ParameterVars vars = push_parameters(tape, params);
  const FinalEmbeddings fin =
      propagate(tape, vars, m.plan, m.overlap, m.cfg.layers,
                m.cfg.interrl_enabled);
  const ad::Var common = common_preferences(tape, fin.users, fin.items,
                                            m.members, m.cfg.strategy);
  return ForwardValues{tape.value(fin.users), tape.value(fin.items),
                       tape.value(fin.groups), tape.value(common)};
}

struct LossParts {
  double user = 0.0;
  double group = 0.0;
  double align = 0.0;
  double total = 0.0;
};

// Builds the full graph (propagation -> losses) for one set of triples and
// runs the reverse pass. Gradients land in params.slots[*].grad. The
// align_fraction scales the alignment term so that per-batch contributions
// sum to one full-batch alignment loss per epoch.
inline LossParts compute_loss_and_gradients(
    const Model& m, ParameterSet& params,
    const std::vector<Triple>& user_triples,
    const std::vector<Triple>& group_triples, double align_fraction = 1.0) {
  ad::Tape tape;
  const ParameterVars vars = push_parameters(tape, params);
  const FinalEmbeddings fin =
      propagate(tape, vars, m.plan, m.overlap, m.cfg.layers,
                m.cfg.interrl_enabled);
  const ad::Var common = common_preferences(tape, fin.users, fin.items,
                                            m.members, m.cfg.strategy);
  const ad::Var align =
      alignment_loss(tape, fin.groups, common, m.cfg.tau, m.cfg.infonce_mode);
  const ad::Var l_user = bpr_loss(tape, fin.users, fin.items, vars.w1, vars.w2,
                                  user_triples, m.cfg.bpr_mode);
  const ad::Var l_group = bpr_loss(tape, fin.groups, fin.items, vars.w1,
                                   vars.w2, group_triples, m.cfg.bpr_mode);
  const ad::Var total = total_loss(tape, l_user, l_group, align,
                                   m.cfg.lambda_align * align_fraction);
  tape.backward(total);

  const ad::Var leaves[6] = {vars.e_user, vars.e_item, vars.e_group,
                             vars.w_fuse, vars.w1, vars.w2};
  for (std::size_t k = 0; k < params.slots.size(); ++k) {
    params.slots[k].grad = tape.grad(leaves[k]);
    if (!params.slots[k].grad.allFinite())
      throw NumericError(std::string("non-finite gradient for parameter ") +
                         params.slots[k].name);
  }

  LossParts parts;
  parts.user = tape.value(l_user)(0, 0);
  parts.group = tape.value(l_group)(0, 0);
  parts.align = tape.value(align)(0, 0);
  parts.total = tape.value(total)(0, 0);
  return parts;
}

struct EpochLog {
  Index epoch = 0;
  double loss_user = 0.0;
  double loss_group = 0.0;
  double loss_align = 0.0;
  double monitor_h10 = 0.0;
};

struct TrainResult {
  ParameterSet params;
  std::vector<EpochLog> trace;
  Index adam_steps = 0;
  Index epochs_run = 0;
  double seconds = 0.0;
  double best_h10 = 0.0;
  Index best_epoch = -1;
};

// Full training loop: per epoch, resample negatives, shuffle the epoch pair
// set, and take one Adam step per mini-batch (each batch rebuilds the whole
// graph at current parameters). Early stop monitors group-task H@10.
inline TrainResult train(const Model& m, std::ostream& log = std::cerr) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  result.params = init_parameters(m.cfg, m.dataset->num_users,
                                  m.dataset->num_items, m.dataset->num_groups);
  ParameterSet& params = result.params;
  ParameterSet best = params;

  Rng root(m.cfg.seed);
  Rng eval_rng = root.derive(0xE7A1);
  const auto monitor_cases =
      build_candidates(*m.dataset, Task::kGroup, m.cfg.eval_neg_count,
                       eval_rng);

  AdamOptions adam;
  adam.lr = m.cfg.lr;
  Index t = 0;
  Index since_best = 0;

  for (Index epoch = 1; epoch <= m.cfg.epochs; ++epoch) {
    Rng epoch_rng = root.derive(static_cast<std::uint64_t>(epoch));
    TrainingPairBatch pairs =
        sample_training_pairs(*m.dataset, m.cfg.train_neg_per_pos, epoch_rng);

    // Shuffle user and group triples jointly, tagging provenance.
    struct Tagged {
      bool is_group;
      Triple t;
    };
    std::vector<Tagged> all;
    all.reserve(pairs.user_triples.size() + pairs.group_triples.size());
    for (const auto& tr : pairs.user_triples) all.push_back({false, tr});
    for (const auto& tr : pairs.group_triples) all.push_back({true, tr});
    epoch_rng.shuffle(all);
    const double total_triples = static_cast<double>(all.size());

    EpochLog el;
    el.epoch = epoch;
    for (std::size_t start = 0; start < all.size();
         start += static_cast<std::size_t>(m.cfg.batch_size)) {
      const std::size_t stop =
          std::min(all.size(), start + static_cast<std::size_t>(m.cfg.batch_size));
      std::vector<Triple> bu, bg;
      for (std::size_t k = start; k < stop; ++k)
        (all[k].is_group ? bg : bu).push_back(all[k].t);
      const double frac = static_cast<double>(stop - start) / total_triples;
      LossParts parts;
      try {
        parts = compute_loss_and_gradients(m, params, bu, bg, frac);
        adam_step(params, adam, ++t);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      el.loss_user += parts.user;
      el.loss_group += parts.group;
      el.loss_align += frac * parts.align;
    }

    const ForwardValues fv = forward_embeddings(m, params);
    const TaskReport rep = evaluate_task(fv.groups, fv.items, params.w1,
                                         params.w2, monitor_cases, {10});
    el.monitor_h10 = rep.hr.at(10);
    result.trace.push_back(el);
    result.epochs_run = epoch;
    log << "epoch " << epoch << " L_u " << el.loss_user << " L_g "
        << el.loss_group << " L_align " << el.loss_align << " H@10 "
        << el.monitor_h10 << '\n';

    if (el.monitor_h10 > result.best_h10) {
      result.best_h10 = el.monitor_h10;
      result.best_epoch = epoch;
      best = params;
      since_best = 0;
    } else if (++since_best >= m.cfg.patience) {
      log << "early stop at epoch " << epoch << " (best H@10 "
          << result.best_h10 << " at epoch " << result.best_epoch << ")\n";
      break;
    }
  }

  if (result.best_epoch >= 0) params = best;
  result.adam_steps = t;
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return result;
}

}  // namespace aligngroup
