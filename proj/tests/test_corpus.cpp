#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "phs/registry.hpp"
#include "phs/splits.hpp"
#include "support/tmpdir.hpp"

namespace {

using namespace phs;

TEST(Registry, BuiltinShape) {
  const Registry& reg = builtin_registry();
  EXPECT_EQ(reg.size(), 26u);
  EXPECT_EQ(reg.distinct_sources(), 25u);
  EXPECT_EQ(reg.family_counts().size(), 7u);
}

TEST(Registry, LookupDreaddit) {
  const auto& d = builtin_registry().lookup("Dreaddit");
  EXPECT_EQ(d.platform, Platform::reddit);
  EXPECT_EQ(d.num_samples, 3553u);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ(d.split_strategy, SplitStrategy::official);
}

TEST(Registry, LookupRssd) {
  const auto& d = builtin_registry().lookup("R-SSD");
  EXPECT_EQ(d.platform, Platform::reddit);
  EXPECT_EQ(d.unit, SampleUnit::user);
  EXPECT_EQ(d.num_samples, 500u);
  EXPECT_EQ(d.num_classes, 5);
  EXPECT_EQ(d.split_strategy, SplitStrategy::stratified_5fold);
}

TEST(Registry, MissingIdIsAnError) {
  EXPECT_THROW(builtin_registry().lookup("missing-id"), DataError);
}

TEST(Registry, FidelityCheckPasses) {
  auto check = check_registry_fidelity(builtin_registry());
  for (const auto& p : check.problems) ADD_FAILURE() << p;
  EXPECT_TRUE(check.ok);
  EXPECT_EQ(check.rows, 26u);
  EXPECT_EQ(check.distinct_datasets, 25u);
  EXPECT_EQ(check.task_families, 7u);
}

TEST(Registry, RhmdCarriesMergedVariant) {
  const auto& d = builtin_registry().lookup("RHMD");
  EXPECT_EQ(d.num_classes, 4);
  EXPECT_EQ(d.alt_label_names.size(), 3u);
}

TEST(Registry, ParseErrorsCarryRowContext) {
  const char* dup = R"({"datasets": [
    {"id": "A", "task_family": "stress", "platform": "reddit", "unit": "post",
     "num_samples": 10, "num_classes": 2, "split_strategy": "official",
     "label_names": ["x", "y"]},
    {"id": "A", "task_family": "stress", "platform": "reddit", "unit": "post",
     "num_samples": 10, "num_classes": 2, "split_strategy": "official",
     "label_names": ["x", "y"]}]})";
  try {
    parse_registry(dup, "t");
    FAIL() << "expected duplicate-id error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }

  const char* mismatch = R"({"datasets": [
    {"id": "A", "task_family": "stress", "platform": "reddit", "unit": "post",
     "num_samples": 10, "num_classes": 3, "split_strategy": "official",
     "label_names": ["x", "y"]}]})";
  EXPECT_THROW(parse_registry(mismatch, "t"), DataError);

  const char* bad_enum = R"({"datasets": [
    {"id": "A", "task_family": "moods", "platform": "reddit", "unit": "post",
     "num_samples": 10, "num_classes": 2, "split_strategy": "official",
     "label_names": ["x", "y"]}]})";
  EXPECT_THROW(parse_registry(bad_enum, "t"), DataError);
}

TEST(Registry, LoadFromFile) {
  testsupport::TempDir tmp;
  auto path = tmp.write_file("reg.json", builtin_registry_json());
  Registry reg = load_registry(path);
  EXPECT_EQ(reg.size(), 26u);
}

// ---------------------------------------------------------------------------

DatasetDescriptor binary_desc(std::size_t n) {
  DatasetDescriptor d;
  d.id = "toy";
  d.source = "toy";
  d.num_samples = n;
  d.num_classes = 2;
  d.label_names = {"pos", "neg"};
  return d;
}

TEST(Ingest, MapsLabelsByNameOrder) {
  std::istringstream in(
      R"({"id": "1", "text": "a", "label": "pos"})"
      "\n"
      R"({"id": "2", "text": "b", "label": "neg"})"
      "\n"
      R"({"id": "3", "text": "c", "label": "pos"})"
      "\n");
  auto res = ingest_records(in, binary_desc(3), "mem");
  ASSERT_EQ(res.examples.size(), 3u);
  EXPECT_EQ(res.examples[0].label, 0);
  EXPECT_EQ(res.examples[1].label, 1);
  EXPECT_EQ(res.examples[2].label, 0);
  EXPECT_TRUE(res.warnings.empty());
}

TEST(Ingest, UserLevelConcatenatesPosts) {
  DatasetDescriptor d = binary_desc(1);
  d.unit = SampleUnit::user;
  std::istringstream in(
      R"({"id": "p1", "text": "one", "label": "pos", "group_key": "u1"})"
      "\n"
      R"({"id": "p2", "text": "two", "label": "pos", "group_key": "u1"})"
      "\n"
      R"({"id": "p3", "text": "three", "label": "pos", "group_key": "u1"})"
      "\n");
  auto res = ingest_records(in, d, "mem");
  ASSERT_EQ(res.examples.size(), 1u);
  EXPECT_EQ(res.examples[0].id, "u1");
  EXPECT_EQ(res.examples[0].text, "one two three");
  EXPECT_EQ(res.examples[0].group_key, "u1");
}

TEST(Ingest, UnknownLabelNamesTheLine) {
  std::istringstream in(
      R"({"id": "1", "text": "a", "label": "pos"})"
      "\n"
      R"({"id": "2", "text": "b", "label": "maybe"})"
      "\n");
  try {
    ingest_records(in, binary_desc(2), "mem");
    FAIL() << "expected unknown-label error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("mem:2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("maybe"), std::string::npos);
  }
}

TEST(Ingest, CountMismatchWarnsOrThrows) {
  std::istringstream in(R"({"id": "1", "text": "a", "label": "pos"})" "\n");
  auto res = ingest_records(in, binary_desc(5), "mem");
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("delta -4"), std::string::npos);

  std::istringstream in2(R"({"id": "1", "text": "a", "label": "pos"})" "\n");
  IngestOptions strict;
  strict.strict_counts = true;
  EXPECT_THROW(ingest_records(in2, binary_desc(5), "mem", strict), DataError);
}

TEST(Ingest, DuplicateIdRejected) {
  std::istringstream in(
      R"({"id": "1", "text": "a", "label": "pos"})"
      "\n"
      R"({"id": "1", "text": "b", "label": "neg"})"
      "\n");
  EXPECT_THROW(ingest_records(in, binary_desc(2), "mem"), DataError);
}

// ---------------------------------------------------------------------------

std::vector<LabeledExample> make_examples(const std::vector<int>& labels) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    LabeledExample ex;
    ex.id = "e" + std::to_string(i);
    ex.text = "text";
    ex.label = labels[i];
    out.push_back(std::move(ex));
  }
  return out;
}

std::map<int, int> fold_class_count(const SplitPlan& plan, std::size_t fold,
                                    const std::vector<LabeledExample>& ex) {
  std::map<std::string, int> label_of;
  for (const auto& e : ex) label_of[e.id] = e.label;
  std::map<int, int> out;
  for (const auto& id : plan.folds[fold].test_ids) ++out[label_of[id]];
  return out;
}

TEST(StratifiedKFold, PerfectDivisibility) {
  auto ex = make_examples({0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  auto plan = stratified_kfold(ex, 5, 42);
  verify_split_plan(plan, ex, true);
  for (std::size_t f = 0; f < 5; ++f) {
    auto counts = fold_class_count(plan, f, ex);
    EXPECT_EQ(counts[0], 1);
    EXPECT_EQ(counts[1], 1);
  }
}

TEST(StratifiedKFold, RemainderCountsAreFloorCeil) {
  auto ex = make_examples({0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  auto plan = stratified_kfold(ex, 5, 7);
  verify_split_plan(plan, ex, true);
  std::multiset<int> a_counts, b_counts;
  for (std::size_t f = 0; f < 5; ++f) {
    auto counts = fold_class_count(plan, f, ex);
    a_counts.insert(counts[0]);
    b_counts.insert(counts[1]);
  }
  EXPECT_EQ(a_counts, (std::multiset<int>{1, 1, 1, 2, 2}));
  EXPECT_EQ(b_counts, (std::multiset<int>{1, 1, 1, 1, 1}));
}

TEST(StratifiedKFold, InfeasibleClassNamed) {
  auto ex = make_examples({0, 0, 0, 0});
  try {
    stratified_kfold(ex, 5, 1);
    FAIL() << "expected infeasibility error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("class 0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("infeasible"), std::string::npos);
  }
}

TEST(StratifiedKFold, SeedDeterminismByteForByte) {
  auto ex = make_examples({0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1});
  auto a = stratified_kfold(ex, 3, 99, "ds");
  auto b = stratified_kfold(ex, 3, 99, "ds");
  EXPECT_EQ(a.canonical(), b.canonical());
  auto c = stratified_kfold(ex, 3, 100, "ds");
  EXPECT_NE(a.canonical(), c.canonical());
}

TEST(StratifiedKFold, GroupsNeverSplit) {
  std::vector<LabeledExample> ex;
  for (int u = 0; u < 12; ++u) {
    for (int p = 0; p < 3; ++p) {
      LabeledExample e;
      e.id = "u" + std::to_string(u) + "p" + std::to_string(p);
      e.label = u % 2;
      e.group_key = "u" + std::to_string(u);
      ex.push_back(std::move(e));
    }
  }
  auto plan = stratified_kfold(ex, 3, 5);
  verify_split_plan(plan, ex, true);
}

TEST(OfficialSplit, MirrorsDesignation) {
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 10; ++i) {
    LabeledExample e;
    e.id = "e" + std::to_string(i);
    e.label = i % 2;
    e.split = i < 8 ? SplitTag::train : SplitTag::test;
    ex.push_back(std::move(e));
  }
  auto plan = official_split_from(ex, "toy");
  ASSERT_EQ(plan.folds.size(), 1u);
  EXPECT_EQ(plan.folds[0].train_ids.size(), 8u);
  EXPECT_EQ(plan.folds[0].test_ids.size(), 2u);
  verify_split_plan(plan, ex, false);
}

TEST(OfficialSplit, OverlapNamesTheId) {
  std::vector<LabeledExample> ex;
  LabeledExample a;
  a.id = "dup";
  a.split = SplitTag::train;
  LabeledExample b;
  b.id = "dup";
  b.split = SplitTag::test;
  ex.push_back(a);
  ex.push_back(b);
  try {
    official_split_from(ex, "toy");
    FAIL() << "expected overlap error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("dup"), std::string::npos);
  }
}

TEST(OfficialSplit, MissingDesignationRejected) {
  std::vector<LabeledExample> ex = make_examples({0, 1});
  EXPECT_THROW(official_split_from(ex, "toy"), DataError);
}

TEST(OfficialSplit, Smm4hT1SizedFile) {
  // Synthetic file shaped like the SMM4H T1 row: 14954 posts, official split.
  std::ostringstream data;
  for (int i = 0; i < 14954; ++i) {
    data << R"({"id": "t)" << i << R"(", "text": "post", "label": ")"
         << (i % 7 == 0 ? "adr" : "no_adr") << R"(", "split": ")"
         << (i < 11000 ? "train" : "test") << R"("})" << "\n";
  }
  const auto& desc = builtin_registry().lookup("SMM4H T1");
  std::istringstream in(data.str());
  auto res = ingest_records(in, desc, "mem");
  EXPECT_TRUE(res.warnings.empty());
  auto plan = official_split_from(res.examples, desc.id);
  EXPECT_EQ(plan.folds[0].train_ids.size() + plan.folds[0].test_ids.size(),
            14954u);
}

// Mini property sweep; the full 1000-dataset suite with the brute-force
// counter lives in the acceptance binary.
TEST(StratifiedKFold, RandomDatasetsSatisfyInvariants) {
  Rng rng(314159);
  for (int iter = 0; iter < 60; ++iter) {
    int classes = 2 + static_cast<int>(rng.bounded(5));
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c) {
      int n = 5 + static_cast<int>(rng.bounded(40));
      for (int i = 0; i < n; ++i) labels.push_back(c);
    }
    Rng shuffle_rng(rng.next());
    shuffle_rng.shuffle(labels);
    auto ex = make_examples(labels);
    auto plan = stratified_kfold(ex, 5, rng.next());
    verify_split_plan(plan, ex, true);
  }
}

}  // namespace
