#include <algorithm>
#include <unordered_set>

#include "../textproc/utf8.hpp"
#include "regstyle/error.hpp"
#include "regstyle/mda.hpp"

namespace regstyle::mda {

namespace {

// Curly apostrophes are matched as ASCII ones.
std::string match_form(const std::string& lowercase) {
  std::string out;
  out.reserve(lowercase.size());
  for (char32_t cp : text::utf8::decode(lowercase)) {
    text::utf8::append(out, (cp == 0x2019 || cp == 0x2018) ? U'\'' : cp);
  }
  return out;
}

std::size_t letter_count(const std::string& surface) {
  const auto cps = text::utf8::decode(surface);
  return static_cast<std::size_t>(std::count_if(cps.begin(), cps.end(), text::utf8::is_letter));
}

bool starts_uppercase(const std::string& surface) {
  const auto cps = text::utf8::decode(surface);
  return !cps.empty() && text::utf8::is_upper(cps.front());
}

struct RuleCounter {
  const std::vector<text::Token>& tokens;
  const std::vector<std::string>& forms;  // match forms, empty for non-words
  std::size_t words;

  bool is_word(std::size_t i) const { return tokens[i].kind == text::TokenKind::Word; }

  double operator()(const LexiconRule& r) const { return count_words(r.pattern); }
  double operator()(const SuffixRule& r) const { return count_words(r.pattern); }

  double operator()(const BigramRule& r) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      if (is_word(i) && is_word(i + 1) && r.first.matches(forms[i]) && r.second.matches(forms[i + 1])) ++n;
    }
    return static_cast<double>(n);
  }

  double operator()(const PunctuationRule& r) const {
    return static_cast<double>(std::count_if(tokens.begin(), tokens.end(), [&](const text::Token& t) {
      return t.kind == text::TokenKind::Punctuation && r.chars.count(t.surface) > 0;
    }));
  }

  double operator()(const TokenClassRule& r) const {
    std::size_t n = 0;
    for (const auto& t : tokens) {
      switch (r.token_class) {
        case TokenClassRule::Class::Number:
          n += t.kind == text::TokenKind::Number;
          break;
        case TokenClassRule::Class::Capitalized:
          n += t.kind == text::TokenKind::Word && starts_uppercase(t.surface);
          break;
        case TokenClassRule::Class::LongWord:
          n += t.kind == text::TokenKind::Word && letter_count(t.surface) >= r.min_length;
          break;
      }
    }
    return static_cast<double>(n);
  }

  double operator()(const StatisticRule& r) const {
    if (r.kind == StatisticRule::Kind::MeanWordLength) {
      std::size_t letters = 0;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_word(i)) letters += letter_count(tokens[i].surface);
      }
      return static_cast<double>(letters) / static_cast<double>(words);
    }
    std::unordered_set<std::string> types;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < tokens.size() && seen < r.window; ++i) {
      if (!is_word(i)) continue;
      types.insert(forms[i]);
      ++seen;
    }
    return static_cast<double>(types.size()) / static_cast<double>(seen);
  }

  double count_words(const WordPattern& p) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (is_word(i) && p.matches(forms[i])) ++n;
    }
    return static_cast<double>(n);
  }
};

}  // namespace

bool WordPattern::matches(std::string_view w) const {
  if (any) return true;
  if (!words.empty() && words.count(std::string(w)) > 0) return true;
  for (const auto& s : suffixes) {
    if (w.size() >= s.size() + min_stem && w.substr(w.size() - s.size()) == s) return true;
  }
  return false;
}

FeatureVector extract_features(const text::Document& doc, const FeatureCatalog& catalog) {
  if (doc.word_count() == 0) {
    throw Error(ErrorCode::EmptyDocument, "feature extraction needs at least one word token");
  }
  const auto& tokens = doc.tokens();
  std::vector<std::string> forms(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == text::TokenKind::Word) forms[i] = match_form(tokens[i].lowercase);
  }
  const RuleCounter counter{tokens, forms, doc.word_count()};

  FeatureVector fv;
  fv.catalog_version = catalog.version();
  fv.doc_words = doc.word_count();
  fv.rates.reserve(catalog.size());
  for (const auto& rule : catalog.features()) {
    const double raw = std::visit(counter, rule.matcher);
    switch (rule.normalization) {
      case Normalization::PerThousandWords:
        fv.rates.push_back(1000.0 * raw / static_cast<double>(doc.word_count()));
        break;
      case Normalization::PerThousandTokens:
        fv.rates.push_back(1000.0 * raw / static_cast<double>(tokens.size()));
        break;
      case Normalization::Raw:
        fv.rates.push_back(raw);
        break;
    }
  }
  return fv;
}

}  // namespace regstyle::mda
