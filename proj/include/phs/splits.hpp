#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "phs/registry.hpp"
#include "phs/util.hpp"

namespace phs {

enum class SplitTag { unspecified, train, test };

struct LabeledExample {
  std::string id;
  std::string text;
  int label = 0;
  std::optional<std::string> group_key;
  SplitTag split = SplitTag::unspecified;
};

struct Fold {
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
};

struct SplitPlan {
  std::string dataset_id;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;

  // Canonical byte representation; identical inputs yield identical bytes.
  std::string canonical() const {
    nlohmann::json j;
    j["dataset_id"] = dataset_id;
    j["seed"] = seed;
    j["folds"] = nlohmann::json::array();
    for (const auto& f : folds) {
      j["folds"].push_back({{"train", f.train_ids}, {"test", f.test_ids}});
    }
    return j.dump();
  }
};

struct IngestOptions {
  bool strict_counts = false;
};

struct IngestResult {
  std::vector<LabeledExample> examples;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Ingestion: line-delimited records {id, text, label, group_key?, split?}.
// Labels are strings drawn from the descriptor's label_names. For user-level
// datasets the per-post rows are collapsed to one example per user, text
// joined in source order with single spaces.

inline IngestResult ingest_records(std::istream& in,
                                   const DatasetDescriptor& desc,
                                   const std::string& origin,
                                   const IngestOptions& opts = {}) {
  IngestResult out;
  std::vector<LabeledExample> rows;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(strcat_msg(origin, ":", lineno, ": not a JSON record"));
    }
    LabeledExample ex;
    if (!j.contains("id") || !j["id"].is_string()) {
      throw DataError(strcat_msg(origin, ":", lineno, ": missing string id"));
    }
    ex.id = j["id"].get<std::string>();
    if (!j.contains("text") || !j["text"].is_string()) {
      throw DataError(strcat_msg(origin, ":", lineno, ": missing string text"));
    }
    ex.text = j["text"].get<std::string>();
    if (!j.contains("label") || !j["label"].is_string()) {
      throw DataError(strcat_msg(origin, ":", lineno, ": missing string label"));
    }
    std::string label = j["label"].get<std::string>();
    int idx = desc.label_index(label);
    if (idx < 0) {
      throw DataError(strcat_msg(origin, ":", lineno, ": unknown label \"", label,
                                 "\" for dataset ", desc.id));
    }
    ex.label = idx;
    if (j.contains("group_key")) {
      if (!j["group_key"].is_string()) {
        throw DataError(strcat_msg(origin, ":", lineno, ": group_key must be a string"));
      }
      ex.group_key = j["group_key"].get<std::string>();
    }
    if (j.contains("split")) {
      std::string s = j["split"].get<std::string>();
      if (s == "train") {
        ex.split = SplitTag::train;
      } else if (s == "test") {
        ex.split = SplitTag::test;
      } else {
        throw DataError(strcat_msg(origin, ":", lineno, ": split must be train or test"));
      }
    }
    if (desc.unit == SampleUnit::user && !ex.group_key) {
      throw DataError(strcat_msg(origin, ":", lineno,
                                 ": user-level dataset requires group_key"));
    }
    if (desc.unit != SampleUnit::user && !seen_ids.insert(ex.id).second) {
      throw DataError(strcat_msg(origin, ":", lineno, ": duplicate id \"", ex.id, "\""));
    }
    rows.push_back(std::move(ex));
  }

  if (desc.unit == SampleUnit::user) {
    // Collapse posts user by user, preserving first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, LabeledExample> by_user;
    for (auto& r : rows) {
      const std::string& key = *r.group_key;
      auto it = by_user.find(key);
      if (it == by_user.end()) {
        order.push_back(key);
        LabeledExample ex;
        ex.id = key;
        ex.text = r.text;
        ex.label = r.label;
        ex.group_key = key;
        ex.split = r.split;
        by_user.emplace(key, std::move(ex));
      } else {
        LabeledExample& ex = it->second;
        if (ex.label != r.label) {
          throw DataError(strcat_msg(origin, ": user \"", key,
                                     "\" has conflicting labels"));
        }
        if (ex.split != r.split) {
          throw DataError(strcat_msg(origin, ": user \"", key,
                                     "\" spans train and test"));
        }
        if (!r.text.empty()) {
          if (!ex.text.empty()) ex.text += ' ';
          ex.text += r.text;
        }
      }
    }
    out.examples.reserve(order.size());
    for (const auto& key : order) out.examples.push_back(by_user.at(key));
  } else {
    out.examples = std::move(rows);
  }

  if (out.examples.size() != desc.num_samples) {
    std::string msg = strcat_msg(
        "dataset ", desc.id, ": descriptor declares ", desc.num_samples, " ",
        to_string(desc.unit), "s but ", origin, " provided ", out.examples.size(),
        " (delta ",
        static_cast<long long>(out.examples.size()) -
            static_cast<long long>(desc.num_samples),
        ")");
    if (opts.strict_counts) throw DataError(msg);
    out.warnings.push_back(std::move(msg));
  }
  return out;
}

inline IngestResult ingest(const DatasetDescriptor& desc,
                           const IngestOptions& opts = {}) {
  std::ifstream in(desc.data_path, std::ios::binary);
  if (!in) {
    throw DataError(strcat_msg("dataset ", desc.id, ": cannot open data file ",
                               desc.data_path));
  }
  return ingest_records(in, desc, desc.data_path, opts);
}

// ---------------------------------------------------------------------------
// Stratified k-fold. Units are whole groups when group keys are present so no
// group ever spans a train/test boundary. Within each class, unit order is
// shuffled by the seeded generator and dealt round-robin from a seeded
// starting fold, which pins per-class per-fold counts to floor/ceil of n/k.

inline SplitPlan stratified_kfold(const std::vector<LabeledExample>& examples,
                                  int k, std::uint64_t seed,
                                  const std::string& dataset_id = "") {
  if (k < 2) throw DataError("stratified_kfold: k must be >= 2");
  if (examples.empty()) throw DataError("stratified_kfold: no examples");

  struct Unit {
    std::string key;
    int label;
    std::vector<const LabeledExample*> members;
  };
  std::vector<Unit> units;
  std::map<std::string, std::size_t> unit_index;
  for (const auto& ex : examples) {
    std::string key = ex.group_key ? *ex.group_key : ex.id;
    auto it = unit_index.find(key);
    if (it == unit_index.end()) {
      unit_index[key] = units.size();
      units.push_back({key, ex.label, {&ex}});
    } else {
      Unit& u = units[it->second];
      if (u.label != ex.label) {
        throw DataError(strcat_msg("stratified_kfold: group \"", key,
                                   "\" has conflicting labels"));
      }
      u.members.push_back(&ex);
    }
  }

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < units.size(); ++i) {
    by_class[units[i].label].push_back(i);
  }
  for (const auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(k)) {
      throw DataError(strcat_msg(
          "stratified_kfold: class ", label, " has ", members.size(),
          " unit(s), fewer than k=", k, "; stratification is infeasible"));
    }
  }

  Rng rng(seed);
  std::vector<int> fold_of_unit(units.size(), -1);
  for (auto& [label, members] : by_class) {
    rng.shuffle(members);
    int offset = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(k)));
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of_unit[members[i]] = (offset + static_cast<int>(i)) % k;
    }
  }

  SplitPlan plan;
  plan.dataset_id = dataset_id;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    Fold& fold = plan.folds[static_cast<std::size_t>(f)];
    for (std::size_t u = 0; u < units.size(); ++u) {
      for (const LabeledExample* ex : units[u].members) {
        if (fold_of_unit[u] == f) {
          fold.test_ids.push_back(ex->id);
        } else {
          fold.train_ids.push_back(ex->id);
        }
      }
    }
    std::sort(fold.train_ids.begin(), fold.train_ids.end());
    std::sort(fold.test_ids.begin(), fold.test_ids.end());
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Official split: one fold mirroring the train/test designation carried by
// the data records.

inline SplitPlan official_split_from(const std::vector<LabeledExample>& examples,
                                     const std::string& dataset_id) {
  SplitPlan plan;
  plan.dataset_id = dataset_id;
  plan.folds.resize(1);
  Fold& fold = plan.folds[0];
  std::map<std::string, SplitTag> group_side;
  for (const auto& ex : examples) {
    if (ex.split == SplitTag::unspecified) {
      throw DataError(strcat_msg("official split for ", dataset_id, ": example \"",
                                 ex.id, "\" carries no train/test designation"));
    }
    if (ex.group_key) {
      auto [it, inserted] = group_side.emplace(*ex.group_key, ex.split);
      if (!inserted && it->second != ex.split) {
        throw DataError(strcat_msg("official split for ", dataset_id, ": group \"",
                                   *ex.group_key, "\" appears in both train and test"));
      }
    }
    if (ex.split == SplitTag::train) {
      fold.train_ids.push_back(ex.id);
    } else {
      fold.test_ids.push_back(ex.id);
    }
  }
  std::sort(fold.train_ids.begin(), fold.train_ids.end());
  std::sort(fold.test_ids.begin(), fold.test_ids.end());
  // The same id tagged both ways arrives as two records.
  for (std::size_t i = 0; i + 1 < fold.train_ids.size(); ++i) {
    if (fold.train_ids[i] == fold.train_ids[i + 1]) {
      throw DataError(strcat_msg("official split for ", dataset_id,
                                 ": duplicate train id \"", fold.train_ids[i], "\""));
    }
  }
  for (std::size_t i = 0; i + 1 < fold.test_ids.size(); ++i) {
    if (fold.test_ids[i] == fold.test_ids[i + 1]) {
      throw DataError(strcat_msg("official split for ", dataset_id,
                                 ": duplicate test id \"", fold.test_ids[i], "\""));
    }
  }
  std::vector<std::string> overlap;
  std::set_intersection(fold.train_ids.begin(), fold.train_ids.end(),
                        fold.test_ids.begin(), fold.test_ids.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty()) {
    throw DataError(strcat_msg("official split for ", dataset_id, ": id \"",
                               overlap.front(), "\" is in both train and test"));
  }
  return plan;
}

inline SplitPlan official_split(const DatasetDescriptor& desc,
                                const IngestOptions& opts = {}) {
  if (desc.split_strategy != SplitStrategy::official) {
    throw DataError(strcat_msg("dataset ", desc.id, " does not use an official split"));
  }
  auto ingested = ingest(desc, opts);
  return official_split_from(ingested.examples, desc.id);
}

// Builds the plan a descriptor's strategy calls for.
inline SplitPlan build_split_plan(const DatasetDescriptor& desc,
                                  const std::vector<LabeledExample>& examples,
                                  std::uint64_t seed, int k = 5) {
  if (desc.split_strategy == SplitStrategy::official) {
    return official_split_from(examples, desc.id);
  }
  return stratified_kfold(examples, k, seed, desc.id);
}

// ---------------------------------------------------------------------------
// Plan verification used by tests and as a runtime guard: partition of the
// id universe, group integrity, per-class per-fold balance.

inline void verify_split_plan(const SplitPlan& plan,
                              const std::vector<LabeledExample>& examples,
                              bool check_balance) {
  std::set<std::string> universe;
  for (const auto& ex : examples) universe.insert(ex.id);
  std::set<std::string> covered;
  for (const auto& fold : plan.folds) {
    std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
    for (const auto& id : fold.test_ids) {
      if (train.count(id)) {
        throw DataError("split plan: id \"" + id + "\" in both train and test");
      }
      if (!covered.insert(id).second) {
        throw DataError("split plan: id \"" + id + "\" tested in two folds");
      }
    }
    if (train.size() + fold.test_ids.size() != universe.size()) {
      throw DataError("split plan: fold does not cover the id universe");
    }
  }
  if (plan.folds.size() > 1 && covered != universe) {
    throw DataError("split plan: test folds do not partition the id universe");
  }

  std::map<std::string, int> label_of;
  std::map<std::string, std::string> group_of;
  for (const auto& ex : examples) {
    label_of[ex.id] = ex.label;
    if (ex.group_key) group_of[ex.id] = *ex.group_key;
  }
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::set<std::string> train_groups, test_groups;
    for (const auto& id : plan.folds[f].train_ids) {
      auto it = group_of.find(id);
      if (it != group_of.end()) train_groups.insert(it->second);
    }
    for (const auto& id : plan.folds[f].test_ids) {
      auto it = group_of.find(id);
      if (it != group_of.end()) test_groups.insert(it->second);
    }
    for (const auto& g : test_groups) {
      if (train_groups.count(g)) {
        throw DataError("split plan: group \"" + g + "\" spans fold " +
                        std::to_string(f));
      }
    }
  }

  if (check_balance && plan.folds.size() > 1) {
    // Per-class per-fold test counts at the unit level must hit floor/ceil
    // of count/k exactly.
    std::map<std::string, std::pair<int, bool>> unit_label;  // unit -> label
    for (const auto& ex : examples) {
      std::string key = ex.group_key ? *ex.group_key : ex.id;
      unit_label.emplace(key, std::make_pair(ex.label, true));
    }
    std::map<int, std::size_t> class_units;
    for (const auto& [key, lab] : unit_label) ++class_units[lab.first];
    const std::size_t k = plan.folds.size();
    for (std::size_t f = 0; f < k; ++f) {
      std::map<int, std::set<std::string>> fold_units;
      for (const auto& id : plan.folds[f].test_ids) {
        std::string key = group_of.count(id) ? group_of[id] : id;
        fold_units[label_of[id]].insert(key);
      }
      for (const auto& [label, total] : class_units) {
        std::size_t lo = total / k;
        std::size_t hi = lo + (total % k == 0 ? 0 : 1);
        std::size_t got =
            fold_units.count(label) ? fold_units[label].size() : 0;
        if (got < lo || got > hi) {
          throw DataError(strcat_msg("split plan: class ", label, " fold ", f,
                                     " holds ", got, " units, outside [", lo,
                                     ", ", hi, "]"));
        }
      }
    }
  }
}

}  // namespace phs
