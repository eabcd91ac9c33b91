// Command-line harness: train models, evaluate checkpoints and baselines,
// run the ablation grid, and dump model internals for inspection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aligngroup/aligngroup.hpp"

namespace fs = std::filesystem;
using namespace aligngroup;

namespace {

// Loads either the canonical tab-separated layout or the whitespace
// "rating" layout (auto-converted, with id maps written next to the data).
InteractionDataset load_any(const std::string& dir) {
  if (fs::exists(fs::path(dir) / "user_train.txt")) return load_dataset(dir);
  if (fs::exists(fs::path(dir) / "userRatingTrain.txt")) {
    std::cerr << "note: converting rating-file layout in " << dir << "\n";
    return load_agree_layout(dir, dir);
  }
  throw LoadError("no dataset found in " + dir +
                  " (expected user_train.txt or userRatingTrain.txt)");
}

// Shared config options: file, environment, then explicit flags, in
// increasing precedence. Flag values are raw strings so that grid lists
// (e.g. --tau 0.1,0.2) flow through unchanged.
struct ConfigCli {
  std::string config_path;
  std::map<std::string, std::string> raw;
  bool no_interrl = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "key=value config file ('#' comments; tau, lambda_align "
                    "and layers accept comma-separated grids)");
    static const struct {
      const char* flag;
      const char* key;
      const char* help;
    } kFlags[] = {
        {"--d", "d", "embedding width"},
        {"--layers", "layers", "propagation depth (grid ok)"},
        {"--tau", "tau", "alignment temperature (grid ok)"},
        {"--lambda-align", "lambda_align", "alignment loss weight (grid ok)"},
        {"--lr", "lr", "Adam learning rate"},
        {"--epochs", "epochs", "max training epochs"},
        {"--seed", "seed", "RNG seed"},
        {"--strategy", "strategy", "consensus strategy: centroid|barycenter"},
        {"--scope", "scope", "member scope: small|big"},
        {"--infonce", "infonce", "alignment form: literal|cross-pair"},
        {"--mode", "bpr_mode", "ranking loss: literal|log-sigmoid"},
        {"--eval-neg-count", "eval_neg_count", "negatives per test case"},
        {"--train-neg-per-pos", "train_neg_per_pos",
         "sampled negatives per training positive"},
        {"--batch-size", "batch_size", "triples per optimizer step"},
        {"--patience", "patience", "early-stop patience (epochs)"},
    };
    for (const auto& f : kFlags)
      cmd->add_option_function<std::string>(
          f.flag, [this, key = std::string(f.key)](const std::string& v) {
            raw[key] = v;
          },
          f.help);
    cmd->add_flag("--no-interrl", no_interrl,
                  "disable overlap mixing of initial group embeddings");
  }

  KeyValues merged() const {
    KeyValues kv;
    if (!config_path.empty()) kv = load_config_file(config_path);
    apply_env_overrides(kv);
    for (const auto& [k, v] : raw) kv[k] = v;
    if (no_interrl) kv["interrl"] = "false";
    return kv;
  }
};

std::vector<Index> parse_ks(const std::string& s) {
  std::vector<Index> ks;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) ks.push_back(std::stoll(tok));
  if (ks.empty()) throw ConfigError("--k needs at least one cutoff");
  return ks;
}

EvalReport run_eval(const InteractionDataset& ds, const Model& model,
                    const ParameterSet& params, const std::vector<Index>& ks) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng root(model.cfg.seed);
  Rng grng = root.derive(0xE7A1);  // matches the training monitor stream
  Rng urng = root.derive(0xE7A2);
  const auto gcases =
      build_candidates(ds, Task::kGroup, model.cfg.eval_neg_count, grng);
  const auto ucases =
      build_candidates(ds, Task::kUser, model.cfg.eval_neg_count, urng);
  const ForwardValues fv = forward_embeddings(model, params);
  EvalReport rep;
  rep.group = evaluate_task(fv.groups, fv.items, params.w1, params.w2, gcases,
                            ks);
  rep.user =
      evaluate_task(fv.users, fv.items, params.w1, params.w2, ucases, ks);
  rep.consensus_gap_mean =
      consensus_gap(fv.groups, fv.users, model.hypergraph.edge_users).mean;
  rep.eval_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  rep.config_echo = config_to_string(model.cfg);
  return rep;
}

std::map<std::string, std::string> dataset_checksums(const std::string& dir) {
  std::map<std::string, std::string> sums;
  for (const char* name :
       {"user_train.txt", "user_test.txt", "group_train.txt", "group_test.txt",
        "group_members.txt", "user_negatives.txt", "group_negatives.txt",
        "userRatingTrain.txt", "userRatingTest.txt", "groupRatingTrain.txt",
        "groupRatingTest.txt", "groupMember.txt"}) {
    const auto path = fs::path(dir) / name;
    if (fs::exists(path)) sums[name] = file_checksum(path.string());
  }
  return sums;
}

void write_report_file(const EvalReport& rep, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write report " + path);
  out.precision(6);
  write_report_kv(rep, out);
}

int cmd_train(const std::string& dataset_dir, const ConfigCli& cc,
              const std::string& out_dir, const std::string& ks_text) {
  const auto ds = load_any(dataset_dir);
  const auto runs = expand_grid(cc.merged());
  const auto ks = parse_ks(ks_text);
  fs::create_directories(out_dir);
  const auto sums = dataset_checksums(dataset_dir);

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const TrainConfig& cfg = runs[r];
    fs::path run_dir = out_dir;
    if (runs.size() > 1) {
      char tag[16];
      std::snprintf(tag, sizeof tag, "run-%03zu", r);
      run_dir /= tag;
      fs::create_directories(run_dir);
    }
    std::cout << "== run " << (r + 1) << "/" << runs.size() << " -> "
              << run_dir.string() << "\n"
              << config_to_string(cfg);

    RunManifest man;
    man.config = cfg;
    man.dataset_checksums = sums;
    man.started_at = now_iso8601();
    const Model model(ds, cfg);
    TrainResult result;
    try {
      result = train(model, std::cerr);
    } catch (const NumericError& e) {
      man.finished_at = now_iso8601();
      man.notes.push_back(std::string("aborted: ") + e.what());
      save_manifest(man, (run_dir / "manifest.json").string());
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }

    Checkpoint ck;
    ck.config = cfg;
    ck.params = result.params;
    ck.adam_steps = result.adam_steps;
    ck.rng_state = Rng(cfg.seed).serialize_state();
    save_checkpoint(ck, (run_dir / "model.ckpt").string());

    EvalReport rep = run_eval(ds, model, result.params, ks);
    rep.train_seconds = result.seconds;
    write_report_file(rep, (run_dir / "report.txt").string());
    print_report_table(rep, std::cout);

    man.loss_trace = result.trace;
    man.finished_at = now_iso8601();
    man.eval_report_path = "report.txt";
    man.notes.push_back("best monitor H@10 " + std::to_string(result.best_h10) +
                        " at epoch " + std::to_string(result.best_epoch));
    save_manifest(man, (run_dir / "manifest.json").string());
  }
  return 0;
}

int cmd_evaluate(const std::string& dataset_dir, const std::string& ckpt_path,
                 bool pop, const std::string& task, const std::string& ks_text,
                 const std::string& out_path, std::uint64_t seed) {
  const auto ds = load_any(dataset_dir);
  const auto ks = parse_ks(ks_text);
  EvalReport rep;
  if (pop) {
    Rng root(seed);
    Rng grng = root.derive(0xE7A1);
    Rng urng = root.derive(0xE7A2);
    if (task != "user")
      rep.group = evaluate_cases(build_candidates(ds, Task::kGroup, 100, grng),
                                 popularity_baseline(ds, Task::kGroup), ks);
    if (task != "group")
      rep.user = evaluate_cases(build_candidates(ds, Task::kUser, 100, urng),
                                popularity_baseline(ds, Task::kUser), ks);
  } else {
    const Checkpoint ck = load_checkpoint(ckpt_path);
    const Model model(ds, ck.config);
    rep = run_eval(ds, model, ck.params, ks);
  }
  print_report_table(rep, std::cout);
  if (!out_path.empty()) write_report_file(rep, out_path);
  return 0;
}

int cmd_ablate(const std::string& dataset_dir, const ConfigCli& cc,
               const std::string& out_path) {
  const auto ds = load_any(dataset_dir);
  const auto base_runs = expand_grid(cc.merged());
  require(base_runs.size() == 1, "ablate takes a single base config, no grids");
  const TrainConfig base = base_runs[0];

  std::ofstream out_file;
  if (!out_path.empty()) {
    out_file.open(out_path);
    require(out_file.good(), "cannot write " + out_path);
  }

  std::printf("%-28s %8s %8s %8s %8s\n", "variant", "H@5", "H@10", "N@5",
              "N@10");
  for (bool interrl : {true, false})
    for (Strategy strat : {Strategy::kCentroid, Strategy::kBarycenter})
      for (Scope scope : {Scope::kSmall, Scope::kBig}) {
        TrainConfig cfg = base;  // shared seed across all variants
        cfg.interrl_enabled = interrl;
        cfg.strategy = strat;
        cfg.scope = scope;
        const std::string name = std::string(interrl ? "full" : "no-interrl") +
                                 "/" + to_string(strat) + "/" +
                                 to_string(scope);
        std::cerr << "== ablation " << name << "\n";
        const Model model(ds, cfg);
        const TrainResult result = train(model, std::cerr);
        const EvalReport rep = run_eval(ds, model, result.params, {5, 10});
        std::printf("%-28s %8.4f %8.4f %8.4f %8.4f\n", name.c_str(),
                    rep.group.hr.at(5), rep.group.hr.at(10),
                    rep.group.ndcg.at(5), rep.group.ndcg.at(10));
        std::fflush(stdout);
        if (out_file.is_open())
          out_file << name << ".hr@5=" << rep.group.hr.at(5) << "\n"
                   << name << ".hr@10=" << rep.group.hr.at(10) << "\n"
                   << name << ".ndcg@5=" << rep.group.ndcg.at(5) << "\n"
                   << name << ".ndcg@10=" << rep.group.ndcg.at(10) << "\n";
      }
  return 0;
}

int cmd_inspect(const std::string& dataset_dir, const std::string& ckpt_path,
                const std::string& what, const std::string& out_path) {
  const auto ds = load_any(dataset_dir);
  const Checkpoint ck = load_checkpoint(ckpt_path);
  const Model model(ds, ck.config);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    require(file.good(), "cannot write " + out_path);
    out = &file;
  }
  out->precision(10);

  auto dump_matrix = [&](const Mat& m) {
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c)
        (*out) << (c ? "," : "") << m(r, c);
      (*out) << "\n";
    }
  };

  if (what == "overlap") {
    dump_matrix(model.overlap);
    return 0;
  }
  const ForwardValues fv = forward_embeddings(model, ck.params);
  if (what == "gap") {
    const auto gap =
        consensus_gap(fv.groups, fv.users, model.hypergraph.edge_users);
    (*out) << "group,gap\n";
    for (std::size_t g = 0; g < gap.per_group.size(); ++g)
      (*out) << g << "," << gap.per_group[g] << "\n";
    (*out) << "mean," << gap.mean << "\n";
  } else if (what == "emb-user") {
    dump_matrix(fv.users);
  } else if (what == "emb-item") {
    dump_matrix(fv.items);
  } else if (what == "emb-group") {
    dump_matrix(fv.groups);
  }
  return 0;
}

int cmd_synth(const std::string& out_dir, Index users, Index items,
              Index groups, Index topics, std::uint64_t seed, bool large) {
  SyntheticSpec spec;
  if (large) {
    spec = SyntheticSpec::mafengwo_scale(seed);
  } else {
    spec.num_users = users;
    spec.num_items = items;
    spec.num_groups = groups;
    spec.topics = topics;
    spec.seed = seed;
  }
  const auto ds = generate_synthetic(spec);
  fs::create_directories(out_dir);
  save_dataset(ds, out_dir);
  const auto s = dataset_stats(ds);
  std::cout << "wrote " << out_dir << ": " << s.num_users << " users, "
            << s.num_items << " items, " << s.num_groups
            << " groups, avg group size " << s.avg_group_size << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Group recommender: hypergraph propagation with consensus alignment"};
  app.require_subcommand(1);

  std::string dataset_dir, out_path, ckpt_path, task = "both", ks = "5,10";
  std::string what;
  bool pop = false, large = false;
  std::uint64_t seed = 42;
  Index users = 400, items = 200, groups = 80, topics = 8;
  ConfigCli train_cc, ablate_cc;

  auto* t = app.add_subcommand("train", "train one model per config point");
  t->add_option("--dataset-dir", dataset_dir, "dataset directory")->required();
  t->add_option("--out", out_path, "output directory")->required();
  t->add_option("--k", ks, "comma-separated ranking cutoffs");
  train_cc.add_to(t);

  auto* e = app.add_subcommand("evaluate",
                               "score a checkpoint or the popularity baseline");
  e->add_option("--dataset-dir", dataset_dir, "dataset directory")->required();
  e->add_option("--checkpoint", ckpt_path, "trained model checkpoint");
  e->add_flag("--pop", pop, "popularity baseline instead of a checkpoint");
  e->add_option("--task", task, "group|user|both")
      ->check(CLI::IsMember({"group", "user", "both"}));
  e->add_option("--k", ks, "comma-separated ranking cutoffs");
  e->add_option("--out", out_path, "also write key=value metrics here");
  e->add_option("--seed", seed, "candidate-sampling seed");

  auto* a = app.add_subcommand(
      "ablate", "train the 8 consensus/propagation variants on a shared seed");
  a->add_option("--dataset-dir", dataset_dir, "dataset directory")->required();
  a->add_option("--out", out_path, "also write key=value metrics here");
  ablate_cc.add_to(a);

  auto* i = app.add_subcommand("inspect", "dump model internals as CSV");
  i->add_option("--dataset-dir", dataset_dir, "dataset directory")->required();
  i->add_option("--checkpoint", ckpt_path, "trained model checkpoint")
      ->required();
  i->add_option("--what", what,
                "gap | overlap | emb-user | emb-item | emb-group")
      ->required()
      ->check(CLI::IsMember(
          {"gap", "overlap", "emb-user", "emb-item", "emb-group"}));
  i->add_option("--out", out_path, "write to a file instead of stdout");

  auto* s = app.add_subcommand("synth", "generate a synthetic benchmark corpus");
  s->add_option("--out", out_path, "output directory")->required();
  s->add_option("--users", users, "number of users");
  s->add_option("--items", items, "number of items");
  s->add_option("--groups", groups, "number of groups");
  s->add_option("--topics", topics, "number of latent topics");
  s->add_option("--seed", seed, "generator seed");
  s->add_flag("--large", large, "preset: 5275 users / 1513 items / 995 groups");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) return cmd_train(dataset_dir, train_cc, out_path, ks);
    if (e->parsed()) {
      if (!pop && ckpt_path.empty()) {
        std::cerr << "error: evaluate needs --checkpoint or --pop\n";
        return 1;
      }
      return cmd_evaluate(dataset_dir, ckpt_path, pop, task, ks, out_path,
                          seed);
    }
    if (a->parsed()) return cmd_ablate(dataset_dir, ablate_cc, out_path);
    if (i->parsed()) return cmd_inspect(dataset_dir, ckpt_path, what, out_path);
    if (s->parsed())
      return cmd_synth(out_path, users, items, groups, topics, seed, large);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
