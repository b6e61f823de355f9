#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "regstyle/error.hpp"
#include "regstyle/textproc.hpp"

using namespace regstyle;
using namespace regstyle::text;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST(Tokenize, SplitsTrailingPunctuation) {
  const auto tokens = tokenize("don't stop!");
  ASSERT_EQ(3u, tokens.size());
  EXPECT_EQ("don't", tokens[0].surface);
  EXPECT_EQ(TokenKind::Word, tokens[0].kind);
  EXPECT_EQ("stop", tokens[1].surface);
  EXPECT_EQ("!", tokens[2].surface);
  EXPECT_EQ(TokenKind::Punctuation, tokens[2].kind);
}

TEST(Tokenize, KeepsInternalHyphensAndPeriods) {
  EXPECT_EQ((std::vector<std::string>{"(", "state-of-the-art", ")", "e.g", "."}),
            surfaces(tokenize("(state-of-the-art) e.g.")));
}

TEST(Tokenize, ClassifiesNumbersAndSymbols) {
  const auto tokens = tokenize("It cost $3.50, or 20% @home #1");
  std::vector<TokenKind> kinds;
  for (const auto& t : tokens) kinds.push_back(t.kind);
  EXPECT_EQ((std::vector<std::string>{"It", "cost", "$3.50", ",", "or", "20%", "@home", "#1"}), surfaces(tokens));
  EXPECT_EQ(TokenKind::Number, tokens[2].kind);
  EXPECT_EQ(TokenKind::Number, tokens[5].kind);
  EXPECT_EQ(TokenKind::Word, tokens[6].kind);
  EXPECT_EQ(TokenKind::Symbol, tokens[7].kind);
}

TEST(Tokenize, LowercasesNonAscii) {
  const auto tokens = tokenize("Ärger ΣΟΦΙΑ");
  ASSERT_EQ(2u, tokens.size());
  EXPECT_EQ("ärger", tokens[0].lowercase);
  EXPECT_EQ("σοφια", tokens[1].lowercase);
}

TEST(Tokenize, EmptyAndWhitespace) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
}

TEST(Sentences, SplitsOnTerminals) {
  const auto tokens = tokenize("Hello there. How are you? Fine!");
  const auto spans = split_sentences(tokens);
  ASSERT_EQ(3u, spans.size());
  EXPECT_EQ((Span{0, 3}), spans[0]);
  EXPECT_EQ((Span{3, 7}), spans[1]);
  EXPECT_EQ((Span{7, 9}), spans[2]);
}

TEST(Sentences, AbbreviationsDoNotSplit) {
  const Document doc("Mr. Smith arrived at 5 p.m. today. He left.");
  EXPECT_EQ(2u, doc.sentences().size());
}

TEST(Sentences, AbsorbsClosersAndRuns) {
  const Document doc("He said \"stop!\" Then?! Nothing");
  ASSERT_EQ(3u, doc.sentences().size());
  EXPECT_EQ("\"", doc.tokens()[doc.sentences()[0].end - 1].surface);
}

TEST(Sentences, TrailingTextWithoutTerminal) {
  EXPECT_EQ(1u, Document("no terminal here").sentences().size());
  EXPECT_TRUE(Document("").sentences().empty());
}

TEST(Sentences, ShippedAbbreviationList) {
  const auto& list = abbreviations();
  EXPECT_GE(list.size(), 40u);
  EXPECT_NE(list.end(), std::find(list.begin(), list.end(), "e.g."));
  for (const auto& a : list) EXPECT_EQ('.', a.back()) << a;
}

TEST(Document, Counts) {
  const Document doc("The cat sat, 42 times.");
  EXPECT_EQ(4u, doc.word_count());
  EXPECT_EQ(14u, doc.char_count());  // "42" is a number token
}

TEST(Syllables, HandCounts) {
  EXPECT_EQ(1u, count_syllables("cat"));
  EXPECT_EQ(3u, count_syllables("syllable"));
  EXPECT_EQ(1u, count_syllables("make"));
  EXPECT_EQ(2u, count_syllables("table"));
  EXPECT_EQ(1u, count_syllables("the"));
  EXPECT_EQ(2u, count_syllables("happy"));
  EXPECT_EQ(3u, count_syllables("beautiful"));
  EXPECT_EQ(1u, count_syllables("a"));
  EXPECT_EQ(1u, count_syllables("rhythm"));
  EXPECT_EQ(0u, count_syllables("123"));
}

TEST(Stem, Examples) {
  EXPECT_EQ("run", stem("running"));
  EXPECT_EQ("cat", stem("cats"));
  EXPECT_EQ("caress", stem("caresses"));
  EXPECT_EQ("poni", stem("ponies"));
  EXPECT_EQ("relat", stem("relational"));
  EXPECT_EQ("is", stem("is"));
}

// Reference stems for a word list drawn from running English text; see
// tests/fixtures/porter_words.tsv.
TEST(Stem, MatchesReferenceList) {
  std::ifstream in(std::string(REGSTYLE_TEST_DATA) + "/fixtures/porter_words.tsv");
  ASSERT_TRUE(in.good());
  std::size_t checked = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    ASSERT_NE(std::string::npos, tab);
    const std::string word = line.substr(0, tab);
    EXPECT_EQ(line.substr(tab + 1), stem(word)) << word;
    ++checked;
  }
  EXPECT_GT(checked, 1000u);
}

TEST(NGrams, CountsWithMultiplicity) {
  const std::vector<std::string> w = {"a", "b", "a", "b"};
  const auto bigrams = ngrams(w, 2);
  EXPECT_EQ(2u, bigrams.size());
  EXPECT_EQ(2u, bigrams.at({"a", "b"}));
  EXPECT_EQ(1u, bigrams.at({"b", "a"}));
  EXPECT_TRUE(ngrams(w, 5).empty());
}

TEST(NGrams, RejectsZero) {
  const std::vector<std::string> w = {"a"};
  try {
    ngrams(w, 0);
    FAIL() << "expected InvalidN";
  } catch (const Error& e) {
    EXPECT_EQ(ErrorCode::InvalidN, e.code());
  }
}

TEST(OverlapTokens, WordsAndNumbersLowercased) {
  EXPECT_EQ((std::vector<std::string>{"the", "cat", "sat", "42"}),
            overlap_tokens(Document("The CAT sat, 42 !")));
}

TEST(Casefold, Basic) {
  EXPECT_EQ("straße", casefold("STRAßE"));
  EXPECT_EQ("éclair", casefold("Éclair"));
}
