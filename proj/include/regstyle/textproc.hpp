#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regstyle::text {

enum class TokenKind { Word, Punctuation, Number, Symbol };

std::string_view to_string(TokenKind kind);

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Word;
  std::string lowercase;

  bool operator==(const Token&) const = default;
};

/// Half-open token index range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

/// A text with its tokenization and sentence structure computed once.
class Document {
 public:
  Document() = default;
  explicit Document(std::string raw);

  const std::string& raw() const { return raw_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<Span>& sentences() const { return sentences_; }
  /// Tokens of kind Word only.
  std::size_t word_count() const { return word_count_; }
  /// Letters and digits inside word tokens.
  std::size_t char_count() const { return char_count_; }

 private:
  std::string raw_;
  std::vector<Token> tokens_;
  std::vector<Span> sentences_;
  std::size_t word_count_ = 0;
  std::size_t char_count_ = 0;
};

/// Simple Unicode case fold over UTF-8 (ASCII, Latin-1, Latin Extended-A,
/// Greek and Cyrillic). Other code points pass through unchanged.
std::string casefold(std::string_view utf8);

/// Whitespace split; leading and trailing punctuation become separate
/// one-character punctuation tokens; apostrophes, hyphens and periods inside
/// a word stay in the word.
std::vector<Token> tokenize(std::string_view raw);

/// Sentence boundaries after runs of . ! ? (plus any closing quotes or
/// brackets) unless the period closes a known abbreviation.
std::vector<Span> split_sentences(const std::vector<Token>& tokens);

/// The shipped abbreviation list, lowercased and including the final period.
const std::vector<std::string>& abbreviations();

std::size_t count_syllables(std::string_view word);

/// Porter (1980) suffix stripper, steps 1 through 5.
std::string stem(std::string_view word);

using NGram = std::vector<std::string>;
using NGramCounts = std::map<NGram, std::size_t>;

/// Contiguous n-grams with multiplicity. Throws InvalidN for n == 0.
NGramCounts ngrams(std::span<const std::string> tokens, std::size_t n);

/// Lowercased surfaces of word and number tokens; the token stream every
/// overlap metric works on.
std::vector<std::string> overlap_tokens(const Document& doc);

bool contains_letter(std::string_view utf8);

}  // namespace regstyle::text
