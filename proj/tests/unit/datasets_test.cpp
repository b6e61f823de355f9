#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "../support/corpora.hpp"
#include "regstyle/datasets.hpp"
#include "regstyle/error.hpp"

using namespace regstyle;
using namespace regstyle::datasets;
using regstyle::testing_support::add_author;
using regstyle::testing_support::mud_corpus;
using regstyle::testing_support::numbered_subreddits;

namespace {

const std::string kData = REGSTYLE_TEST_DATA;

template <class F>
std::string error_text(ErrorCode expected, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no Error thrown";
  return {};
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto end = s.find('\n', pos);
    out.push_back(s.substr(pos, end - pos));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

Corpus gyafc_fixture() { return load_corpus(kData + "/fixtures/gyafc_small.jsonl", Task::Gyafc); }

}  // namespace

TEST(SplitMix, ReferenceSequence) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ull);
  EXPECT_EQ(rng.next(), 0x06C45D188009454Full);
}

TEST(SplitMix, SampleIsDistinctAndInRange) {
  SplitMix64 rng(3);
  auto s = rng.sample(20, 20);
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(s[i], i);
  EXPECT_THROW(rng.sample(3, 4), Error);
  std::vector<int> hist(5);
  for (int i = 0; i < 5000; ++i) ++hist[rng.below(5)];
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
}

TEST(Corpus, EmptyInput) { EXPECT_EQ(parse_corpus("", Task::Mud).size(), 0u); }

TEST(Corpus, MissingFieldNamesLine) {
  const std::string text =
      R"({"author_id":"a","text":"x","subreddit":"s"})"
      "\n"
      R"({"text":"y","subreddit":"s"})"
      "\n";
  const auto msg = error_text(ErrorCode::SchemaViolation, [&] { parse_corpus(text, Task::Mud); });
  EXPECT_NE(msg.find("line 2"), std::string::npos);
  EXPECT_NE(msg.find("author_id"), std::string::npos);
}

TEST(Corpus, BadJsonAndBadFormality) {
  error_text(ErrorCode::SchemaViolation, [] { parse_corpus("{nope", Task::Cochrane); });
  error_text(ErrorCode::SchemaViolation, [] {
    parse_corpus(R"({"text":"x","domain":"em","formality":"casual","split":"train"})", Task::Gyafc);
  });
}

TEST(Corpus, ThreeRecordFileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / ("regstyle_corpus_" + std::to_string(::getpid()));
  {
    std::ofstream out(path);
    out << R"({"abstract":"A1","pls":"P1","split":"train"})" << "\n\n"
        << R"({"abstract":"A2","pls":"P2","split":"test","id":7})" << "\n"
        << R"({"abstract":"A3 é","pls":"P3","split":"TEST"})" << "\n";
  }
  const auto c = load_corpus(path, Task::Cochrane);
  std::filesystem::remove(path);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.cochrane[1].id, "7");
  EXPECT_EQ(c.cochrane[2].abstract_text, "A3 \xc3\xa9");
  EXPECT_EQ(c.cochrane[2].split, "test");
}

TEST(Corpus, UnreadableFile) {
  error_text(ErrorCode::IoFailure, [] { load_corpus("/nonexistent/corpus.jsonl", Task::Mud); });
}

TEST(Mud, ExactlyEnoughAuthorsAreAllChosen) {
  const auto c = mud_corpus(15);
  const auto sel = select_mud_authors(c, MudVariant::Random, 1);
  ASSERT_EQ(sel.sources.size(), 15u);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(sel.sources[i].id, "q" + std::to_string(i));
    EXPECT_EQ(sel.targets[i].id, "t" + std::to_string(i));
  }
}

TEST(Mud, SameSeedSameSelection) {
  const auto c = mud_corpus(40);
  const auto a = select_mud_authors(c, MudVariant::Random, 9);
  const auto b = select_mud_authors(c, MudVariant::Random, 9);
  const auto d = select_mud_authors(c, MudVariant::Random, 10);
  auto ids = [](const std::vector<Author>& v) {
    std::vector<std::string> out;
    for (const auto& a : v) out.push_back(a.id);
    return out;
  };
  EXPECT_EQ(ids(a.sources), ids(b.sources));
  EXPECT_EQ(ids(a.targets), ids(b.targets));
  EXPECT_NE(ids(a.sources), ids(d.sources));
}

TEST(Mud, TwelveSubredditsIsNotDiverse) {
  auto c = mud_corpus(15, 13);
  add_author(c, "q-narrow", "test_queries", numbered_subreddits(12));
  const auto sel = select_mud_authors(c, MudVariant::Diverse, 4);
  for (const auto& a : sel.sources) EXPECT_NE(a.id, "q-narrow");

  auto narrow = mud_corpus(14, 13);
  add_author(narrow, "q-narrow", "test_queries", numbered_subreddits(12));
  add_author(narrow, "t-extra", "test_targets", numbered_subreddits(13));
  const auto msg = error_text(ErrorCode::InsufficientAuthors, [&] { select_mud_authors(narrow, MudVariant::Diverse, 4); });
  EXPECT_NE(msg.find("diverse"), std::string::npos);
  EXPECT_NE(msg.find("found 14"), std::string::npos);
  EXPECT_NE(msg.find("needed 15"), std::string::npos);
}

TEST(Mud, SingleUsesMostCommonSubredditWithLexicographicTies) {
  Corpus c;
  c.schema = Task::Mud;
  // "b" and "a" are equally common; "a" wins the tie.
  for (int i = 0; i < 2; ++i) {
    add_author(c, "qa" + std::to_string(i), "test_queries", {"a"});
    add_author(c, "qb" + std::to_string(i), "test_queries", {"b"});
    add_author(c, "ta" + std::to_string(i), "test_targets", {"a"});
    add_author(c, "tb" + std::to_string(i), "test_targets", {"b"});
  }
  add_author(c, "q-mixed", "test_queries", {"a", "b"});
  const auto sel = select_mud_authors(c, MudVariant::Single, 2, 2);
  for (const auto* side : {&sel.sources, &sel.targets}) {
    for (const auto& a : *side) {
      for (const auto& p : a.posts) EXPECT_EQ(p.subreddit, "a") << a.id;
    }
  }
  error_text(ErrorCode::InsufficientAuthors, [&] { select_mud_authors(c, MudVariant::Single, 2, 3); });
}

TEST(Mud, AuthorsWithoutSixteenPostsAreIneligible) {
  auto c = mud_corpus(14);
  add_author(c, "q-short", "test_queries", {"r0"}, 15);
  add_author(c, "t-extra", "test_targets", {"r0"});
  error_text(ErrorCode::InsufficientAuthors, [&] { select_mud_authors(c, MudVariant::Random, 1); });
}

TEST(Mud, UnsplitCorpusDrawsDisjointSides) {
  Corpus c;
  c.schema = Task::Mud;
  for (int i = 0; i < 6; ++i) add_author(c, "a" + std::to_string(i), "", {"r"});
  const auto sel = select_mud_authors(c, MudVariant::Random, 5, 3);
  std::set<std::string> ids;
  for (const auto& a : sel.sources) ids.insert(a.id);
  for (const auto& a : sel.targets) ids.insert(a.id);
  EXPECT_EQ(ids.size(), 6u);
}

TEST(Mud, CaseCountsAndExemplar) {
  const auto c = mud_corpus(15);
  const auto one = build_mud_cases(select_mud_authors(c, MudVariant::Random, 1, 1), MudVariant::Random, 1);
  EXPECT_EQ(one.cases.size(), 16u);
  const auto small = build_mud_cases(select_mud_authors(c, MudVariant::Random, 1, 3), MudVariant::Random, 1);
  EXPECT_EQ(small.cases.size(), 16u * 3 * 3);
  const auto full = build_mud_cases(select_mud_authors(c, MudVariant::Random, 1), MudVariant::Random, 1);
  EXPECT_EQ(full.cases.size(), 3600u);

  const auto& tgt = full.cases.front().meta.at("target_author");
  const auto lines = split_lines(full.cases.front().style_exemplar);
  ASSERT_EQ(lines.size(), 16u);
  EXPECT_EQ(lines[0], tgt + " post 0. i think it's fine.");
  EXPECT_EQ(lines[1], tgt + " post 1. i think it's fine.");
  for (const auto& k : full.cases) EXPECT_TRUE(k.gold_refs.empty());
}

TEST(Gyafc, ForcedSingleSegment) {
  const auto c = parse_corpus(
      R"({"text":"y","domain":"em","formality":"formal","split":"train"})"
      "\n"
      R"({"text":"hey u","domain":"em","formality":"informal","split":"test","references":["Hello."]})"
      "\n"
      R"({"text":"sup","domain":"em","formality":"informal","split":"test"})",
      Task::Gyafc);
  const auto plan = build_gyafc_cases(c, "em_i2f", 1, 3);
  ASSERT_EQ(plan.cases.size(), 2u);
  for (const auto& k : plan.cases) EXPECT_EQ(k.style_exemplar, "y");
  EXPECT_EQ(plan.cases[0].gold_refs, std::vector<std::string>{"Hello."});
}

TEST(Gyafc, DirectionSelectsFormalities) {
  const auto c = gyafc_fixture();
  const auto plan = build_gyafc_cases(c, "em_i2f", kGyafcSegments, 7);
  ASSERT_EQ(plan.cases.size(), 20u);
  std::set<std::string> pool;
  for (const auto& r : c.gyafc) {
    if (r.split == "train" && r.domain == "em" && r.formality == "formal") pool.insert(r.text);
  }
  for (const auto& k : plan.cases) {
    EXPECT_EQ(k.meta.at("input_formality"), "informal");
    EXPECT_EQ(k.meta.at("desired_formality"), "formal");
    const auto segs = split_lines(k.style_exemplar);
    ASSERT_EQ(segs.size(), kGyafcSegments);
    EXPECT_EQ(std::set<std::string>(segs.begin(), segs.end()).size(), kGyafcSegments);  // no replacement
    for (const auto& s : segs) EXPECT_TRUE(pool.count(s)) << s;
    for (const auto& g : k.gold_refs) EXPECT_NE(k.style_exemplar, g);
  }
  // Fresh sample per input.
  EXPECT_NE(plan.cases[0].style_exemplar, plan.cases[1].style_exemplar);
}

TEST(Gyafc, SeedDeterminismAndDigest) {
  const auto c = gyafc_fixture();
  const auto a = build_gyafc_cases(c, "em_i2f", 16, 7);
  const auto b = build_gyafc_cases(c, "em_i2f", 16, 7);
  const auto d = build_gyafc_cases(c, "em_i2f", 16, 8);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), d.digest());
}

TEST(Gyafc, InsufficientPool) {
  const auto c = gyafc_fixture();
  error_text(ErrorCode::InsufficientPool, [&] { build_gyafc_cases(c, "em_i2f", 81, 1); });
  // fr has formal train texts but no informal test inputs: an empty plan.
  EXPECT_TRUE(build_gyafc_cases(c, "fr_i2f", 5, 1).cases.empty());
  error_text(ErrorCode::Usage, [&] { build_gyafc_cases(c, "xx_i2f", 1, 1); });
}

TEST(Gyafc, GoldReferencesAreExcludedFromPool) {
  const auto c = parse_corpus(
      R"({"text":"Hello.","domain":"fr","formality":"formal","split":"train"})"
      "\n"
      R"({"text":"Good day.","domain":"fr","formality":"formal","split":"train"})"
      "\n"
      R"({"text":"hey","domain":"fr","formality":"informal","split":"test","references":["Hello."]})",
      Task::Gyafc);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(build_gyafc_cases(c, "fr_i2f", 1, seed).cases.at(0).style_exemplar, "Good day.");
  }
  error_text(ErrorCode::InsufficientPool, [&] { build_gyafc_cases(c, "fr_i2f", 2, 0); });
}

TEST(Cochrane, Construction) {
  const auto one = parse_corpus(
      R"({"abstract":"A","pls":"P train","split":"train"})"
      "\n"
      R"({"abstract":"B","pls":"P1","split":"test"})"
      "\n"
      R"({"abstract":"C","pls":"P2","split":"test"})",
      Task::Cochrane);
  const auto plan = build_cochrane_cases(one, 5);
  ASSERT_EQ(plan.cases.size(), 2u);
  for (const auto& k : plan.cases) EXPECT_EQ(k.style_exemplar, "P train");
  EXPECT_EQ(plan.cases[1].gold_refs, std::vector<std::string>{"P2"});

  const auto none = parse_corpus(R"({"abstract":"B","pls":"P1","split":"test"})", Task::Cochrane);
  error_text(ErrorCode::InsufficientPool, [&] { build_cochrane_cases(none, 5); });
}

TEST(Cochrane, ExemplarNeverEqualsGold) {
  Corpus c;
  c.schema = Task::Cochrane;
  for (int i = 0; i < 4; ++i) c.cochrane.push_back({"", "a" + std::to_string(i), "shared summary", "train"});
  c.cochrane.push_back({"", "a-other", "other summary", "train"});
  for (int i = 0; i < 10; ++i) c.cochrane.push_back({"", "t" + std::to_string(i), "shared summary", "test"});
  const auto plan = build_cochrane_cases(c, 3);
  for (const auto& k : plan.cases) EXPECT_EQ(k.style_exemplar, "other summary");
  EXPECT_EQ(build_cochrane_cases(c, 3), plan);
}

TEST(Plan, JsonRoundTripAndTamperDetection) {
  const auto plan = build_gyafc_cases(gyafc_fixture(), "em_i2f", 16, 7);
  const auto text = plan.to_json();
  const auto back = PairingPlan::from_json(text);
  EXPECT_EQ(back, plan);
  EXPECT_EQ(back.to_json(), text);

  auto tampered = text;
  const auto pos = tampered.find("omg");
  ASSERT_NE(pos, std::string::npos);
  tampered.replace(pos, 3, "OMG");
  error_text(ErrorCode::SchemaViolation, [&] { PairingPlan::from_json(tampered); });
  error_text(ErrorCode::SchemaViolation, [&] { PairingPlan::from_json("{}"); });

  const auto path = std::filesystem::temp_directory_path() / ("regstyle_plan_" + std::to_string(::getpid()) + ".json");
  save_plan(plan, path);
  EXPECT_EQ(load_plan(path), plan);
  std::filesystem::remove(path);
}

TEST(Plan, MudRoundTripKeepsSelections) {
  const auto c = mud_corpus(15);
  const auto plan = build_mud_cases(select_mud_authors(c, MudVariant::Random, 1, 2), MudVariant::Random, 1);
  const auto back = PairingPlan::from_json(plan.to_json());
  EXPECT_EQ(back.source_authors, plan.source_authors);
  EXPECT_EQ(back.digest(), plan.digest());
}
