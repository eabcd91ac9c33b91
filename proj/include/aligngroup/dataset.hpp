#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "aligngroup/types.hpp"

namespace aligngroup {

using IdPair = std::pair<Index, Index>;

struct PairHash {
  std::size_t operator()(const IdPair& p) const noexcept {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(p.first) << 21) ^
        static_cast<std::uint64_t>(p.second));
  }
};

using PairSet = std::unordered_set<IdPair, PairHash>;

// Binary interaction corpus: users, items, groups, train/test splits and
// optional pre-sampled evaluation negatives.
struct InteractionDataset {
  Index num_users = 0;
  Index num_items = 0;
  Index num_groups = 0;

  PairSet user_item_train;
  PairSet group_item_train;
  std::vector<IdPair> user_item_test;   // (user, held-out item)
  std::vector<IdPair> group_item_test;  // (group, held-out item)

  std::vector<std::vector<Index>> group_members;  // group -> ordered user ids

  // Optional pre-sampled evaluation candidates (empty maps if absent).
  std::map<Index, std::vector<Index>> eval_negatives_user;
  std::map<Index, std::vector<Index>> eval_negatives_group;

  std::vector<std::vector<Index>> user_train_items() const {
    std::vector<std::vector<Index>> out(num_users);
    for (const auto& [u, i] : user_item_train) out[u].push_back(i);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
  }

  std::vector<std::vector<Index>> group_train_items() const {
    std::vector<std::vector<Index>> out(num_groups);
    for (const auto& [g, i] : group_item_train) out[g].push_back(i);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
  }
};

struct DatasetStats {
  Index num_users = 0;
  Index num_items = 0;
  Index num_groups = 0;
  Index user_item_interactions = 0;   // train + test
  Index group_item_interactions = 0;  // train + test
  double avg_group_size = 0.0;
};

inline DatasetStats dataset_stats(const InteractionDataset& ds) {
  DatasetStats s;
  s.num_users = ds.num_users;
  s.num_items = ds.num_items;
  s.num_groups = ds.num_groups;
  s.user_item_interactions =
      static_cast<Index>(ds.user_item_train.size() + ds.user_item_test.size());
  s.group_item_interactions = static_cast<Index>(ds.group_item_train.size() +
                                                 ds.group_item_test.size());
  std::size_t members = 0;
  for (const auto& g : ds.group_members) members += g.size();
  s.avg_group_size = ds.num_groups == 0
                         ? 0.0
                         : static_cast<double>(members) /
                               static_cast<double>(ds.num_groups);
  return s;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline Index parse_id(const std::string& tok, const std::string& file,
                      std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    require(pos == tok.size() && v >= 0,
            file + ":" + std::to_string(line_no) + ": bad id token '" + tok +
                "'");
    return static_cast<Index>(v);
  } catch (const LoadError&) {
    throw;
  } catch (...) {
    throw LoadError(file + ":" + std::to_string(line_no) +
                    ": bad id token '" + tok + "'");
  }
}

inline std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();
  return line;
}

// entity<TAB>item per line.
inline std::vector<IdPair> read_pairs(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  std::vector<IdPair> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = chomp(line);
    if (line.empty()) continue;
    auto toks = split(line, '\t');
    require(toks.size() == 2,
            path + ":" + std::to_string(no) + ": expected 'entity\\titem'");
    out.emplace_back(parse_id(toks[0], path, no), parse_id(toks[1], path, no));
  }
  return out;
}

// group<TAB>user,user,... per line.
inline std::vector<std::pair<Index, std::vector<Index>>> read_members(
    const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  std::vector<std::pair<Index, std::vector<Index>>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = chomp(line);
    if (line.empty()) continue;
    auto toks = split(line, '\t');
    require(toks.size() == 2,
            path + ":" + std::to_string(no) + ": expected 'group\\tu1,u2,...'");
    std::vector<Index> members;
    for (const auto& t : split(toks[1], ','))
      if (!t.empty()) members.push_back(parse_id(t, path, no));
    require(!members.empty(),
            path + ":" + std::to_string(no) + ": group with no members");
    out.emplace_back(parse_id(toks[0], path, no), std::move(members));
  }
  return out;
}

// entity<TAB>item item ... per line.
inline std::map<Index, std::vector<Index>> read_negatives(
    const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  std::map<Index, std::vector<Index>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = chomp(line);
    if (line.empty()) continue;
    auto toks = split(line, '\t');
    require(toks.size() == 2, path + ":" + std::to_string(no) +
                                  ": expected 'entity\\ti1 i2 ...'");
    const Index entity = parse_id(toks[0], path, no);
    std::vector<Index> items;
    std::istringstream is(toks[1]);
    std::string t;
    while (is >> t) items.push_back(parse_id(t, path, no));
    require(out.emplace(entity, std::move(items)).second,
            path + ":" + std::to_string(no) + ": duplicate negatives entry");
  }
  return out;
}

}  // namespace detail

struct DatasetPaths {
  std::string user_train;
  std::string user_test;
  std::string group_train;
  std::string group_test;
  std::string members;
  std::string user_negatives;   // optional ("" = absent)
  std::string group_negatives;  // optional
};

// Canonical layout under a dataset directory.
inline DatasetPaths canonical_paths(const std::string& dir) {
  namespace fs = std::filesystem;
  DatasetPaths p;
  p.user_train = dir + "/user_train.txt";
  p.user_test = dir + "/user_test.txt";
  p.group_train = dir + "/group_train.txt";
  p.group_test = dir + "/group_test.txt";
  p.members = dir + "/group_members.txt";
  if (fs::exists(dir + "/user_negatives.txt"))
    p.user_negatives = dir + "/user_negatives.txt";
  if (fs::exists(dir + "/group_negatives.txt"))
    p.group_negatives = dir + "/group_negatives.txt";
  return p;
}

inline void validate_dataset(const InteractionDataset& ds) {
  auto check_pair = [&](Index e, Index i, Index e_max, const char* what) {
    require(e >= 0 && e < e_max && i >= 0 && i < ds.num_items,
            std::string(what) + ": id out of range");
  };
  for (const auto& [u, i] : ds.user_item_train)
    check_pair(u, i, ds.num_users, "user_item_train");
  for (const auto& [g, i] : ds.group_item_train)
    check_pair(g, i, ds.num_groups, "group_item_train");

  require(static_cast<Index>(ds.group_members.size()) == ds.num_groups,
          "missing member list for some group");
  for (Index g = 0; g < ds.num_groups; ++g) {
    const auto& m = ds.group_members[g];
    require(!m.empty(), "group " + std::to_string(g) + " has no members");
    std::set<Index> uniq(m.begin(), m.end());
    require(uniq.size() == m.size(),
            "group " + std::to_string(g) + " has duplicate members");
    for (Index u : m)
      require(u >= 0 && u < ds.num_users,
              "group " + std::to_string(g) + ": member id out of range");
  }

  std::unordered_set<Index> seen_u, seen_g;
  for (const auto& [u, i] : ds.user_item_test) {
    check_pair(u, i, ds.num_users, "user_item_test");
    require(seen_u.insert(u).second,
            "duplicate test entry for user " + std::to_string(u));
    require(!ds.user_item_train.count({u, i}),
            "user test pair also present in training set");
  }
  for (const auto& [g, i] : ds.group_item_test) {
    check_pair(g, i, ds.num_groups, "group_item_test");
    require(seen_g.insert(g).second,
            "duplicate test entry for group " + std::to_string(g));
    require(!ds.group_item_train.count({g, i}),
            "group test pair also present in training set");
  }

  auto check_negs = [&](const std::map<Index, std::vector<Index>>& negs,
                        const PairSet& train, const std::vector<IdPair>& test,
                        const char* what) {
    std::unordered_map<Index, Index> held_out;
    for (const auto& [e, i] : test) held_out[e] = i;
    for (const auto& [e, items] : negs) {
      auto it = held_out.find(e);
      for (Index i : items) {
        require(i >= 0 && i < ds.num_items,
                std::string(what) + ": negative item out of range");
        require(!train.count({e, i}),
                std::string(what) + ": negative list contains a training "
                                    "positive of entity " +
                    std::to_string(e));
        require(it == held_out.end() || it->second != i,
                std::string(what) +
                    ": negative list contains the held-out positive of "
                    "entity " +
                    std::to_string(e));
      }
    }
  };
  check_negs(ds.eval_negatives_user, ds.user_item_train, ds.user_item_test,
             "user negatives");
  check_negs(ds.eval_negatives_group, ds.group_item_train, ds.group_item_test,
             "group negatives");
}

inline InteractionDataset load_dataset(const DatasetPaths& paths) {
  InteractionDataset ds;

  auto up_train = detail::read_pairs(paths.user_train);
  auto up_test = detail::read_pairs(paths.user_test);
  auto gp_train = detail::read_pairs(paths.group_train);
  auto gp_test = detail::read_pairs(paths.group_test);
  auto members = detail::read_members(paths.members);

  Index max_u = -1, max_i = -1, max_g = -1;
  for (const auto& [u, i] : up_train) {
    max_u = std::max(max_u, u);
    max_i = std::max(max_i, i);
  }
  for (const auto& [u, i] : up_test) {
    max_u = std::max(max_u, u);
    max_i = std::max(max_i, i);
  }
  for (const auto& [g, i] : gp_train) {
    max_g = std::max(max_g, g);
    max_i = std::max(max_i, i);
  }
  for (const auto& [g, i] : gp_test) {
    max_g = std::max(max_g, g);
    max_i = std::max(max_i, i);
  }
  for (const auto& [g, m] : members) {
    max_g = std::max(max_g, g);
    for (Index u : m) max_u = std::max(max_u, u);
  }
  ds.num_users = max_u + 1;
  ds.num_items = max_i + 1;
  ds.num_groups = max_g + 1;

  ds.user_item_train.insert(up_train.begin(), up_train.end());
  ds.group_item_train.insert(gp_train.begin(), gp_train.end());
  ds.user_item_test = std::move(up_test);
  ds.group_item_test = std::move(gp_test);

  ds.group_members.assign(ds.num_groups, {});
  for (auto& [g, m] : members) {
    require(ds.group_members[g].empty(),
            paths.members + ": duplicate member line for group " +
                std::to_string(g));
    ds.group_members[g] = std::move(m);
  }

  if (!paths.user_negatives.empty())
    ds.eval_negatives_user = detail::read_negatives(paths.user_negatives);
  if (!paths.group_negatives.empty())
    ds.eval_negatives_group = detail::read_negatives(paths.group_negatives);

  validate_dataset(ds);
  return ds;
}

inline InteractionDataset load_dataset(const std::string& dir) {
  return load_dataset(canonical_paths(dir));
}

// Write a dataset back out in canonical form (sorted, LF-terminated).
inline void save_dataset(const InteractionDataset& ds,
                         const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write_pairs = [](const std::string& path, std::vector<IdPair> pairs) {
    std::sort(pairs.begin(), pairs.end());
    std::ofstream out(path);
    for (const auto& [e, i] : pairs) out << e << '\t' << i << '\n';
  };
  write_pairs(dir + "/user_train.txt",
              {ds.user_item_train.begin(), ds.user_item_train.end()});
  write_pairs(dir + "/group_train.txt",
              {ds.group_item_train.begin(), ds.group_item_train.end()});
  write_pairs(dir + "/user_test.txt", ds.user_item_test);
  write_pairs(dir + "/group_test.txt", ds.group_item_test);

  std::ofstream mem(dir + "/group_members.txt");
  for (Index g = 0; g < ds.num_groups; ++g) {
    mem << g << '\t';
    for (std::size_t k = 0; k < ds.group_members[g].size(); ++k) {
      if (k) mem << ',';
      mem << ds.group_members[g][k];
    }
    mem << '\n';
  }

  auto write_negs = [](const std::string& path,
                       const std::map<Index, std::vector<Index>>& negs) {
    std::ofstream out(path);
    for (const auto& [e, items] : negs) {
      out << e << '\t';
      for (std::size_t k = 0; k < items.size(); ++k) {
        if (k) out << ' ';
        out << items[k];
      }
      out << '\n';
    }
  };
  if (!ds.eval_negatives_user.empty())
    write_negs(dir + "/user_negatives.txt", ds.eval_negatives_user);
  if (!ds.eval_negatives_group.empty())
    write_negs(dir + "/group_negatives.txt", ds.eval_negatives_group);
}

inline bool datasets_equal(const InteractionDataset& a,
                           const InteractionDataset& b) {
  auto sorted = [](std::vector<IdPair> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return a.num_users == b.num_users && a.num_items == b.num_items &&
         a.num_groups == b.num_groups && a.user_item_train == b.user_item_train &&
         a.group_item_train == b.group_item_train &&
         sorted(a.user_item_test) == sorted(b.user_item_test) &&
         sorted(a.group_item_test) == sorted(b.group_item_test) &&
         a.group_members == b.group_members &&
         a.eval_negatives_user == b.eval_negatives_user &&
         a.eval_negatives_group == b.eval_negatives_group;
}

// ---------------------------------------------------------------------------
// AGREE-style public release layout.
//
// Expected files under `dir`:
//   userRatingTrain.txt / userRatingTest.txt   : "user item [rating ...]"
//   groupRatingTrain.txt / groupRatingTest.txt : "group item [rating ...]"
//   groupMember.txt                            : "group<TAB or space>u1,u2,..."
//   userRatingNegative.txt / groupRatingNegative.txt (optional):
//     "(e,i) n1 n2 ..." or "e i n1 n2 ..."
// Ids may be arbitrary non-negative integers; they are densified and the
// correspondence is written to id_map_{user,item,group}.txt next to the
// canonical output.
// ---------------------------------------------------------------------------
struct IdDensifier {
  std::unordered_map<Index, Index> map;
  std::vector<Index> original;
  Index operator()(Index raw) {
    auto [it, inserted] = map.emplace(raw, static_cast<Index>(original.size()));
    if (inserted) original.push_back(raw);
    return it->second;
  }
};

inline InteractionDataset load_agree_layout(const std::string& dir,
                                            const std::string& id_map_out_dir =
                                                "") {
  namespace fs = std::filesystem;
  IdDensifier users, items, groups;

  auto read_ws_pairs = [&](const std::string& path, IdDensifier& ent)
      -> std::vector<IdPair> {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    std::vector<IdPair> out;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      line = detail::chomp(line);
      if (line.empty()) continue;
      std::istringstream is(line);
      std::string e, i;
      require(static_cast<bool>(is >> e >> i),
              path + ":" + std::to_string(no) + ": expected 'entity item ...'");
      out.emplace_back(ent(detail::parse_id(e, path, no)),
                       items(detail::parse_id(i, path, no)));
    }
    return out;
  };

  auto up_train = read_ws_pairs(dir + "/userRatingTrain.txt", users);
  auto up_test = read_ws_pairs(dir + "/userRatingTest.txt", users);
  auto gp_train = read_ws_pairs(dir + "/groupRatingTrain.txt", groups);
  auto gp_test = read_ws_pairs(dir + "/groupRatingTest.txt", groups);

  InteractionDataset ds;
  {
    std::ifstream in(dir + "/groupMember.txt");
    require(in.good(), "cannot open " + dir + "/groupMember.txt");
    std::string line;
    std::size_t no = 0;
    std::vector<std::pair<Index, std::vector<Index>>> raw_members;
    while (std::getline(in, line)) {
      ++no;
      line = detail::chomp(line);
      if (line.empty()) continue;
      // Either "g<TAB>u1,u2,..." or "g u1,u2,...".
      std::string head, tail;
      const auto tab = line.find('\t');
      const auto sp = line.find(' ');
      const auto cut = tab != std::string::npos ? tab : sp;
      require(cut != std::string::npos,
              dir + "/groupMember.txt:" + std::to_string(no) +
                  ": expected 'group members'");
      head = line.substr(0, cut);
      tail = line.substr(cut + 1);
      std::vector<Index> m;
      for (const auto& t : detail::split(tail, ','))
        if (!t.empty())
          m.push_back(users(detail::parse_id(t, dir + "/groupMember.txt", no)));
      raw_members.emplace_back(
          groups(detail::parse_id(head, dir + "/groupMember.txt", no)),
          std::move(m));
    }
    ds.group_members.assign(groups.original.size(), {});
    for (auto& [g, m] : raw_members) {
      require(ds.group_members[g].empty(),
              "duplicate member line for group " + std::to_string(g));
      ds.group_members[g] = std::move(m);
    }
  }

  auto read_agree_negs = [&](const std::string& path, IdDensifier& ent)
      -> std::map<Index, std::vector<Index>> {
    std::map<Index, std::vector<Index>> out;
    if (!fs::exists(path)) return out;
    std::ifstream in(path);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      line = detail::chomp(line);
      if (line.empty()) continue;
      std::istringstream is(line);
      std::string first;
      is >> first;
      Index e;
      if (!first.empty() && first.front() == '(') {
        // "(e,i)" key referencing the matching test line.
        const auto comma = first.find(',');
        require(comma != std::string::npos && first.back() == ')',
                path + ":" + std::to_string(no) + ": bad '(e,i)' key");
        e = ent(detail::parse_id(first.substr(1, comma - 1), path, no));
      } else {
        e = ent(detail::parse_id(first, path, no));
        std::string pos_tok;
        is >> pos_tok;  // held-out item, already in the test file
      }
      std::vector<Index> negs;
      std::string t;
      while (is >> t) negs.push_back(items(detail::parse_id(t, path, no)));
      out[e] = std::move(negs);
    }
    return out;
  };

  ds.eval_negatives_user =
      read_agree_negs(dir + "/userRatingNegative.txt", users);
  ds.eval_negatives_group =
      read_agree_negs(dir + "/groupRatingNegative.txt", groups);

  ds.num_users = static_cast<Index>(users.original.size());
  ds.num_items = static_cast<Index>(items.original.size());
  ds.num_groups = static_cast<Index>(groups.original.size());
  ds.user_item_train.insert(up_train.begin(), up_train.end());
  ds.group_item_train.insert(gp_train.begin(), gp_train.end());
  // Drop test pairs that also appear in training (some public releases
  // contain such duplicates); keep the first test line per entity.
  std::unordered_set<Index> seen;
  for (const auto& [u, i] : up_test)
    if (!ds.user_item_train.count({u, i}) && seen.insert(u).second)
      ds.user_item_test.emplace_back(u, i);
  seen.clear();
  for (const auto& [g, i] : gp_test)
    if (!ds.group_item_train.count({g, i}) && seen.insert(g).second)
      ds.group_item_test.emplace_back(g, i);

  // Negatives may collide with positives in public releases; drop offenders.
  auto scrub = [&](std::map<Index, std::vector<Index>>& negs,
                   const PairSet& train, const std::vector<IdPair>& test) {
    std::unordered_map<Index, Index> held;
    for (const auto& [e, i] : test) held[e] = i;
    for (auto& [e, v] : negs) {
      auto it = held.find(e);
      std::erase_if(v, [&](Index i) {
        return train.count({e, i}) || (it != held.end() && it->second == i);
      });
    }
  };
  scrub(ds.eval_negatives_user, ds.user_item_train, ds.user_item_test);
  scrub(ds.eval_negatives_group, ds.group_item_train, ds.group_item_test);

  if (!id_map_out_dir.empty()) {
    fs::create_directories(id_map_out_dir);
    auto dump = [&](const std::string& name, const IdDensifier& d) {
      std::ofstream out(id_map_out_dir + "/id_map_" + name + ".txt");
      for (std::size_t k = 0; k < d.original.size(); ++k)
        out << k << '\t' << d.original[k] << '\n';
    };
    dump("user", users);
    dump("item", items);
    dump("group", groups);
  }

  validate_dataset(ds);
  return ds;
}

}  // namespace aligngroup
