#include "regstyle/error.hpp"
#include "regstyle/metrics.hpp"

namespace regstyle::metrics {

namespace {

void require_words(const text::Document& doc, const char* metric) {
  if (doc.word_count() == 0 || doc.sentences().empty()) {
    throw Error(ErrorCode::EmptyDocument, std::string(metric) + " needs at least one word");
  }
}

}  // namespace

double fkgl(const text::Document& doc) {
  require_words(doc, "FKGL");
  std::size_t syllables = 0;
  for (const auto& t : doc.tokens()) {
    if (t.kind == text::TokenKind::Word) syllables += text::count_syllables(t.surface);
  }
  const double words = static_cast<double>(doc.word_count());
  const double sentences = static_cast<double>(doc.sentences().size());
  return 0.39 * (words / sentences) + 11.8 * (static_cast<double>(syllables) / words) - 15.59;
}

double ari(const text::Document& doc) {
  require_words(doc, "ARI");
  const double words = static_cast<double>(doc.word_count());
  const double sentences = static_cast<double>(doc.sentences().size());
  return 4.71 * (static_cast<double>(doc.char_count()) / words) + 0.5 * (words / sentences) - 21.43;
}

}  // namespace regstyle::metrics
