#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aligngroup/params.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// Flat key=value configuration. '#' starts a comment; whitespace around keys
// and values is ignored. Grid keys (tau, lambda_align, layers) accept comma
// lists and expand into one run per grid point.
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace detail

inline KeyValues parse_key_values(std::istream& in, const std::string& origin) {
  KeyValues kv;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(no) +
                        ": expected key=value");
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("cannot open config file " + path);
  return parse_key_values(in, path);
}

// Environment variables ALIGNGROUP_<KEY> (uppercased) override file values.
inline void apply_env_overrides(KeyValues& kv) {
  static const char* keys[] = {
      "d",      "layers",         "tau",        "lambda_align",
      "lr",     "epochs",         "seed",       "strategy",
      "scope",  "infonce",        "bpr_mode",   "interrl",
      "eval_neg_count", "train_neg_per_pos", "batch_size", "patience"};
  for (const char* key : keys) {
    std::string env = "ALIGNGROUP_";
    for (const char* c = key; *c; ++c)
      env.push_back(static_cast<char>(std::toupper(*c)));
    if (const char* v = std::getenv(env.c_str())) kv[key] = v;
  }
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "centroid") return Strategy::kCentroid;
  if (s == "barycenter") return Strategy::kBarycenter;
  throw ConfigError("unknown strategy '" + s + "'");
}

inline Scope parse_scope(const std::string& s) {
  if (s == "small") return Scope::kSmall;
  if (s == "big") return Scope::kBig;
  throw ConfigError("unknown scope '" + s + "'");
}

inline InfoNceMode parse_infonce(const std::string& s) {
  if (s == "literal") return InfoNceMode::kLiteral;
  if (s == "cross-pair") return InfoNceMode::kCrossPair;
  throw ConfigError("unknown infonce mode '" + s + "'");
}

inline BprMode parse_bpr(const std::string& s) {
  if (s == "literal") return BprMode::kLiteral;
  if (s == "log-sigmoid") return BprMode::kLogSigmoid;
  throw ConfigError("unknown bpr mode '" + s + "'");
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError("expected a boolean, got '" + s + "'");
}

// Non-grid scalar assignment; grid keys must hold a single value here.
inline TrainConfig config_from_key_values(const KeyValues& kv) {
  TrainConfig cfg;
  auto geti = [&](const char* k, Index& out) {
    auto it = kv.find(k);
    if (it != kv.end()) out = static_cast<Index>(std::stoll(it->second));
  };
  auto getd = [&](const char* k, double& out) {
    auto it = kv.find(k);
    if (it != kv.end()) out = std::stod(it->second);
  };
  geti("d", cfg.d);
  geti("layers", cfg.layers);
  getd("tau", cfg.tau);
  getd("lambda_align", cfg.lambda_align);
  getd("lr", cfg.lr);
  geti("epochs", cfg.epochs);
  if (auto it = kv.find("seed"); it != kv.end())
    cfg.seed = std::stoull(it->second);
  if (auto it = kv.find("strategy"); it != kv.end())
    cfg.strategy = parse_strategy(it->second);
  if (auto it = kv.find("scope"); it != kv.end())
    cfg.scope = parse_scope(it->second);
  if (auto it = kv.find("infonce"); it != kv.end())
    cfg.infonce_mode = parse_infonce(it->second);
  if (auto it = kv.find("bpr_mode"); it != kv.end())
    cfg.bpr_mode = parse_bpr(it->second);
  if (auto it = kv.find("interrl"); it != kv.end())
    cfg.interrl_enabled = parse_bool(it->second);
  geti("eval_neg_count", cfg.eval_neg_count);
  geti("train_neg_per_pos", cfg.train_neg_per_pos);
  geti("batch_size", cfg.batch_size);
  geti("patience", cfg.patience);
  cfg.validate();
  return cfg;
}

// Expands comma lists in the grid keys into the cartesian product of runs.
inline std::vector<TrainConfig> expand_grid(const KeyValues& kv) {
  auto values = [&](const char* key) -> std::vector<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return {""};
    auto vs = detail::split_list(it->second);
    if (vs.empty()) throw ConfigError(std::string("empty grid for ") + key);
    return vs;
  };
  const auto taus = values("tau");
  const auto lambdas = values("lambda_align");
  const auto layer_counts = values("layers");

  std::vector<TrainConfig> out;
  for (const auto& l : layer_counts)
    for (const auto& tau : taus)
      for (const auto& lam : lambdas) {
        KeyValues point = kv;
        if (!l.empty()) point["layers"] = l;
        if (!tau.empty()) point["tau"] = tau;
        if (!lam.empty()) point["lambda_align"] = lam;
        out.push_back(config_from_key_values(point));
      }
  return out;
}

inline std::string config_to_string(const TrainConfig& c) {
  std::ostringstream os;
  os.precision(17);  // lossless double round-trip through checkpoints
  os << "d=" << c.d << "\nlayers=" << c.layers << "\ntau=" << c.tau
     << "\nlambda_align=" << c.lambda_align << "\nlr=" << c.lr
     << "\nepochs=" << c.epochs << "\nseed=" << c.seed
     << "\nstrategy=" << to_string(c.strategy)
     << "\nscope=" << to_string(c.scope)
     << "\ninfonce=" << to_string(c.infonce_mode)
     << "\nbpr_mode=" << to_string(c.bpr_mode)
     << "\ninterrl=" << (c.interrl_enabled ? "true" : "false")
     << "\neval_neg_count=" << c.eval_neg_count
     << "\ntrain_neg_per_pos=" << c.train_neg_per_pos
     << "\nbatch_size=" << c.batch_size << "\npatience=" << c.patience
     << "\n";
  return os.str();
}

}  // namespace aligngroup
