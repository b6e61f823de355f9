#include "regstyle/textproc.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "regstyle/embedded_data.hpp"
#include "regstyle/error.hpp"
#include "utf8.hpp"

namespace regstyle::text {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Number: return "number";
    case TokenKind::Symbol: return "symbol";
  }
  return "unknown";
}

std::string casefold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : utf8::decode(s)) utf8::append(out, utf8::fold(cp));
  return out;
}

bool contains_letter(std::string_view s) {
  const auto cps = utf8::decode(s);
  return std::any_of(cps.begin(), cps.end(), utf8::is_letter);
}

namespace {

bool is_number_char(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U':': case U'/': case U'-': case U'+':
    case U'%': case U'$': case U'\'': case 0xA3: case 0xA5: case 0x20AC:
      return true;
    default:
      return utf8::is_digit(cp);
  }
}

TokenKind classify(const std::vector<char32_t>& cps) {
  if (std::any_of(cps.begin(), cps.end(), utf8::is_letter)) return TokenKind::Word;
  if (std::all_of(cps.begin(), cps.end(), utf8::is_punct)) return TokenKind::Punctuation;
  if (std::any_of(cps.begin(), cps.end(), utf8::is_digit) &&
      std::all_of(cps.begin(), cps.end(), is_number_char)) {
    return TokenKind::Number;
  }
  return TokenKind::Symbol;
}

Token make_token(std::vector<char32_t> cps) {
  Token t;
  t.kind = classify(cps);
  t.surface = utf8::encode(cps);
  for (char32_t& cp : cps) cp = utf8::fold(cp);
  t.lowercase = utf8::encode(cps);
  return t;
}

void emit_chunk(const std::vector<char32_t>& chunk, std::vector<Token>& out) {
  std::size_t lo = 0;
  std::size_t hi = chunk.size();
  while (lo < hi && utf8::is_punct(chunk[lo])) {
    out.push_back(make_token({chunk[lo]}));
    ++lo;
  }
  std::size_t trail = hi;
  while (trail > lo && utf8::is_punct(chunk[trail - 1])) --trail;
  if (trail > lo) {
    out.push_back(make_token({chunk.begin() + static_cast<std::ptrdiff_t>(lo),
                              chunk.begin() + static_cast<std::ptrdiff_t>(trail)}));
  }
  for (std::size_t i = trail; i < hi; ++i) out.push_back(make_token({chunk[i]}));
}

std::set<std::string> load_abbreviations() {
  std::set<std::string> out;
  std::istringstream in{std::string(embedded::abbreviations())};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.insert(casefold(line));
  }
  return out;
}

const std::set<std::string>& abbreviation_set() {
  static const std::set<std::string> set = load_abbreviations();
  return set;
}

bool is_terminal(const Token& t) {
  return t.surface == "." || t.surface == "!" || t.surface == "?";
}

bool is_closer(const Token& t) {
  static const std::set<std::string> closers = {")", "]", "}", "”", "’", "»"};
  return t.kind == TokenKind::Punctuation && closers.count(t.surface) > 0;
}

}  // namespace

const std::vector<std::string>& abbreviations() {
  static const std::vector<std::string> list(abbreviation_set().begin(), abbreviation_set().end());
  return list;
}

std::vector<Token> tokenize(std::string_view raw) {
  std::vector<Token> out;
  std::vector<char32_t> chunk;
  for (char32_t cp : utf8::decode(raw)) {
    if (utf8::is_space(cp)) {
      if (!chunk.empty()) emit_chunk(chunk, out);
      chunk.clear();
    } else {
      chunk.push_back(cp);
    }
  }
  if (!chunk.empty()) emit_chunk(chunk, out);
  return out;
}

std::vector<Span> split_sentences(const std::vector<Token>& tokens) {
  std::vector<Span> spans;
  const auto& abbrev = abbreviation_set();
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_terminal(tokens[i])) {
      ++i;
      continue;
    }
    if (tokens[i].surface == "." && i > 0 && tokens[i - 1].kind != TokenKind::Punctuation &&
        abbrev.count(tokens[i - 1].lowercase + ".") > 0) {
      ++i;
      continue;
    }
    // A straight double quote closes the sentence only when one is open.
    bool quote_open = std::count_if(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    [](const Token& t) { return t.surface == "\""; }) % 2 == 1;
    std::size_t end = i + 1;
    while (end < tokens.size()) {
      if (is_terminal(tokens[end]) || is_closer(tokens[end])) {
        ++end;
      } else if (quote_open && tokens[end].surface == "\"") {
        quote_open = false;
        ++end;
      } else {
        break;
      }
    }
    spans.push_back({start, end});
    start = end;
    i = end;
  }
  if (start < tokens.size()) spans.push_back({start, tokens.size()});
  return spans;
}

Document::Document(std::string raw) : raw_(std::move(raw)) {
  tokens_ = tokenize(raw_);
  sentences_ = split_sentences(tokens_);
  for (const Token& t : tokens_) {
    if (t.kind != TokenKind::Word) continue;
    ++word_count_;
    for (char32_t cp : utf8::decode(t.surface)) {
      if (utf8::is_letter(cp) || utf8::is_digit(cp)) ++char_count_;
    }
  }
}

std::size_t count_syllables(std::string_view word) {
  if (!contains_letter(word)) return 0;
  std::string w;
  for (char32_t cp : utf8::decode(word)) {
    const char32_t f = utf8::fold(cp);
    if (f >= U'a' && f <= U'z') w.push_back(static_cast<char>(f));
  }
  auto vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  // Silent final e: "cake" but not "table" (consonant + le) or "free".
  const std::size_t n = w.size();
  if (n >= 3 && w[n - 1] == 'e' && !vowel(w[n - 2])) {
    const bool consonant_le = w[n - 2] == 'l' && !vowel(w[n - 3]);
    if (!consonant_le && groups > 1) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

NGramCounts ngrams(std::span<const std::string> tokens, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidN, "n-gram order must be at least 1");
  NGramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::vector<std::string> overlap_tokens(const Document& doc) {
  std::vector<std::string> out;
  for (const Token& t : doc.tokens()) {
    if (t.kind == TokenKind::Word || t.kind == TokenKind::Number) out.push_back(t.lowercase);
  }
  return out;
}

}  // namespace regstyle::text
