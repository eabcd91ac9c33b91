#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aligngroup/config.hpp"
#include "aligngroup/evaluation.hpp"
#include "aligngroup/model.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// FNV-1a over file bytes; good enough to pin dataset identity in manifests.
inline std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return "missing";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

struct RunManifest {
  TrainConfig config;
  std::map<std::string, std::string> dataset_checksums;
  std::string started_at;
  std::string finished_at;
  std::vector<EpochLog> loss_trace;
  std::string eval_report_path;
  std::vector<std::string> notes;
};

inline std::string now_iso8601() {
  const auto t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

inline void save_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json j;
  std::istringstream cfg(config_to_string(m.config));
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      j["config"][line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const auto& [file, sum] : m.dataset_checksums)
    j["dataset_checksums"][file] = sum;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  for (const auto& e : m.loss_trace) {
    j["loss_trace"].push_back({{"epoch", e.epoch},
                               {"loss_user", e.loss_user},
                               {"loss_group", e.loss_group},
                               {"loss_align", e.loss_align},
                               {"monitor_h10", e.monitor_h10}});
  }
  j["eval_report"] = m.eval_report_path;
  j["notes"] = m.notes;
  std::ofstream out(path);
  require(out.good(), "cannot write manifest " + path);
  out << j.dump(2) << '\n';
}

// Machine-readable report: one key=value metric per line.
inline void write_report_kv(const EvalReport& rep, std::ostream& out) {
  auto dump_task = [&](const char* name, const TaskReport& t) {
    for (const auto& [k, v] : t.hr)
      out << name << ".hr@" << k << "=" << v << '\n';
    for (const auto& [k, v] : t.ndcg)
      out << name << ".ndcg@" << k << "=" << v << '\n';
    out << name << ".cases=" << t.num_cases << '\n';
  };
  dump_task("group", rep.group);
  dump_task("user", rep.user);
  out << "consensus_gap_mean=" << rep.consensus_gap_mean << '\n';
  out << "train_seconds=" << rep.train_seconds << '\n';
  out << "eval_seconds=" << rep.eval_seconds << '\n';
}

inline void print_report_table(const EvalReport& rep, std::ostream& out) {
  auto row = [&](const char* name, const TaskReport& t) {
    out << name << ":";
    for (const auto& [k, v] : t.hr) out << "  H@" << k << " " << v;
    for (const auto& [k, v] : t.ndcg) out << "  N@" << k << " " << v;
    out << "  (" << t.num_cases << " cases)\n";
  };
  row("group", rep.group);
  row("user ", rep.user);
  out << "consensus gap mean: " << rep.consensus_gap_mean << '\n';
  out << "train " << rep.train_seconds << " s, eval " << rep.eval_seconds
      << " s\n";
}

}  // namespace aligngroup
