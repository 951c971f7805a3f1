#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "semtarget/error.hpp"
#include "semtarget/targets.hpp"

using namespace semtarget;

namespace {

SimilarityMatrix toy_wup() {
  SimilarityMatrix m("wup", SimilarityKind::kWup, 3);
  m.values = {1, 2.0 / 3, 1.0 / 3, 2.0 / 3, 1, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1};
  return m;
}

const std::vector<std::string> kToyLabels{"a1", "a2", "b1"};

SimilarityMatrix random_matrix(std::mt19937_64& rng, std::size_t c, bool coarse) {
  SimilarityMatrix m("rand", SimilarityKind::kCosine, c);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> q(0, 3);
  for (auto& v : m.values) v = coarse ? q(rng) / 3.0 : u(rng);
  return m;
}

std::vector<std::string> labels_for(std::size_t c) {
  std::vector<std::string> l;
  for (std::size_t i = 0; i < c; ++i) l.push_back("class " + std::to_string(i));
  return l;
}

std::string read_error(std::string_view csv) {
  try {
    read_table(csv);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Targets, ToyWupRow) {
  const auto t = build_targets(toy_wup(), kToyLabels);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.source_name, "wup");
  EXPECT_EQ(t.rows[0].ms_index, 1u);
  EXPECT_EQ(t.rows[0].ms_label, "a2");
  EXPECT_EQ(t.rows[0].ms_score, 2.0 / 3);
  EXPECT_EQ(t.rows[0].ls_index, 2u);
  EXPECT_EQ(t.rows[0].ls_score, 1.0 / 3);
  // b1 sees a1 and a2 tied on both ends; index 0 wins.
  EXPECT_EQ(t.rows[2].ms_index, 0u);
  EXPECT_EQ(t.rows[2].ls_index, 0u);
}

TEST(Targets, FullTie) {
  SimilarityMatrix m("id", SimilarityKind::kCosine, 3);
  for (std::size_t i = 0; i < 3; ++i) m.at(i, i) = 1.0;
  const auto t = build_targets(m, labels_for(3));
  EXPECT_EQ(t.rows[0].ms_index, 1u);
  EXPECT_EQ(t.rows[0].ls_index, 1u);
  EXPECT_EQ(t.rows[1].ms_index, 0u);
  EXPECT_EQ(t.rows[2].ls_index, 0u);
}

TEST(Targets, TwoClassesForceTheOther) {
  SimilarityMatrix m("two", SimilarityKind::kCosine, 2);
  m.values = {1, 0.2, 0.2, 1};
  const auto t = build_targets(m, labels_for(2));
  EXPECT_EQ(t.rows[0].ms_index, 1u);
  EXPECT_EQ(t.rows[0].ls_index, 1u);
  EXPECT_EQ(t.rows[1].ms_index, 0u);
  EXPECT_EQ(t.rows[1].ls_index, 0u);
}

TEST(Targets, BuildErrors) {
  SimilarityMatrix one("one", SimilarityKind::kCosine, 1);
  one.values = {1};
  EXPECT_THROW(build_targets(one, labels_for(1)), ValidationError);
  EXPECT_THROW(build_targets(toy_wup(), labels_for(2)), ValidationError);
}

TEST(Targets, MatchesExhaustiveScan) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t c = 2 + trial % 15;
    const auto m = random_matrix(rng, c, trial % 2 == 0);
    const auto t = build_targets(m, labels_for(c));
    for (std::size_t g = 0; g < c; ++g) {
      const auto [ms, ls] = oracle::scan_targets(m.values, c, g);
      ASSERT_EQ(t.rows[g].ms_index, ms);
      ASSERT_EQ(t.rows[g].ls_index, ls);
      for (std::size_t j = 0; j < c; ++j) {
        if (j == g) continue;
        EXPECT_GE(m.at(g, t.rows[g].ms_index), m.at(g, j));
        EXPECT_LE(m.at(g, t.rows[g].ls_index), m.at(g, j));
      }
    }
  }
}

TEST(Targets, PermutationConsistency) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 2 + trial % 10;
    const auto m = random_matrix(rng, c, false);
    std::vector<std::size_t> perm(c);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SimilarityMatrix p("perm", SimilarityKind::kCosine, c);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) p.at(perm[i], perm[j]) = m.at(i, j);
    const auto a = build_targets(m, labels_for(c));
    const auto b = build_targets(p, labels_for(c));
    for (std::size_t i = 0; i < c; ++i) {
      EXPECT_EQ(b.rows[perm[i]].ms_index, perm[a.rows[i].ms_index]);
      EXPECT_EQ(b.rows[perm[i]].ls_index, perm[a.rows[i].ls_index]);
    }
  }
}

TEST(Targets, CsvRoundTrip) {
  const auto t = build_targets(toy_wup(), kToyLabels);
  const auto text = write_table(t);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "gt_index,gt_label,ms_index,ms_label,ms_score,ls_index,ls_label,ls_score");
  const auto back = read_table(text, "wup", SimilarityKind::kWup);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.rows[i].ms_index, t.rows[i].ms_index);
    EXPECT_EQ(back.rows[i].ls_index, t.rows[i].ls_index);
    EXPECT_EQ(back.rows[i].gt_label, t.rows[i].gt_label);
    EXPECT_NEAR(back.rows[i].ms_score, t.rows[i].ms_score, 1e-12);
    EXPECT_NEAR(back.rows[i].ls_score, t.rows[i].ls_score, 1e-12);
  }
  EXPECT_EQ(write_table(back), text);
}

TEST(Targets, LabelsWithCommasSurvive) {
  const auto t = build_targets(toy_wup(), {"bus, school", "a \"quoted\" one", "plain"});
  const auto back = read_table(write_table(t));
  EXPECT_EQ(back.rows[0].gt_label, "bus, school");
  EXPECT_EQ(back.rows[1].gt_label, "a \"quoted\" one");
}

TEST(Targets, SerializationIsDeterministic) {
  std::mt19937_64 rng(23);
  const auto m = random_matrix(rng, 9, false);
  EXPECT_EQ(write_table(build_targets(m, labels_for(9))), write_table(build_targets(m, labels_for(9))));
}

TEST(Targets, ReadRejectsBrokenInvariants) {
  const std::string header = "gt_index,gt_label,ms_index,ms_label,ms_score,ls_index,ls_label,ls_score\n";
  EXPECT_FALSE(read_error(header + "0,a,0,a,1,1,b,0.5\n1,b,0,a,1,0,a,1\n").empty());
  EXPECT_FALSE(read_error(header + "0,a,1,b,0.5,1,b,0.5\n1,b,0,a,1,1,b,1\n").empty());
  EXPECT_FALSE(read_error(header + "0,a,1,b,0.2,1,b,0.5\n1,b,0,a,1,0,a,1\n").empty());
  EXPECT_FALSE(read_error(header + "0,a,5,b,0.5,1,b,0.5\n1,b,0,a,1,0,a,1\n").empty());
  EXPECT_FALSE(read_error(header + "0,a,1,b,0.5,1,b,0.5\n").empty());
  EXPECT_FALSE(read_error(header + "1,a,0,b,0.5,0,b,0.5\n0,b,1,a,1,1,a,1\n").empty());
  const auto msg = read_error("gt_index,gt_label,ms_index,ms_label,ms_score,ls_index,ls_label\n0,a,1,b,1,1,b\n");
  EXPECT_NE(msg.find("ls_score"), std::string::npos) << msg;
}

TEST(Targets, VariantNames) {
  EXPECT_EQ(to_string(Variant::kMostSimilar), "MS");
  EXPECT_EQ(parse_variant("ls"), Variant::kLeastSimilar);
  EXPECT_THROW(parse_variant("mid"), ValidationError);
}
