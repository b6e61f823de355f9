#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regstyle/mda.hpp"
#include "regstyle/textproc.hpp"

namespace regstyle::metrics {

using Tokens = std::vector<std::string>;

// Readability. Both throw EmptyDocument for documents without words.
double fkgl(const text::Document& doc);
double ari(const text::Document& doc);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Overlap metrics. The Document overloads lowercase and keep word and
// number tokens (text::overlap_tokens); the token overloads take tokens as given.
Prf rouge_n_prf(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n);
double rouge_n(const text::Document& candidate, const text::Document& reference, std::size_t n);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
Prf rouge_l_prf(std::span<const std::string> candidate, std::span<const std::string> reference);
double rouge_l(const text::Document& candidate, const text::Document& reference);

/// Clipped n-gram precisions for n = 1..4, add-one smoothing on zero counts
/// for n >= 2, brevity penalty against the closest reference length.
double bleu(std::span<const std::string> candidate, std::span<const Tokens> references);
double bleu(const text::Document& candidate, std::span<const text::Document> references);

struct SariComponents {
  double keep = 0.0;      // mean F1 over n = 1..4
  double deletion = 0.0;  // mean precision over n = 1..4
  double addition = 0.0;  // mean F1 over n = 1..4
  double score = 0.0;
};

/// Throws NoReferences for an empty reference list.
SariComponents sari_components(std::span<const std::string> input, std::span<const std::string> candidate,
                               std::span<const Tokens> references);
double sari(const text::Document& input, const text::Document& candidate,
            std::span<const text::Document> references);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  /// Search nodes before the chunk-minimizing search returns its best so far.
  std::size_t search_budget = 1'000'000;
};

struct MeteorStats {
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::size_t exact_matches = 0;
  std::size_t stem_matches = 0;
  std::size_t chunks = 0;
  bool exhaustive = true;  // false when the search budget ran out
  double score = 0.0;

  std::size_t matches() const { return exact_matches + stem_matches; }
};

MeteorStats meteor_stats(std::span<const std::string> candidate, std::span<const std::string> reference,
                         const MeteorParams& params = {});
double meteor(const text::Document& candidate, const text::Document& reference);
/// Best score over several references.
double meteor(const text::Document& candidate, std::span<const text::Document> references);

struct OverlapRouge {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

/// ROUGE of a system output against the style target as reference.
OverlapRouge overlap_rouge(const text::Document& output, const text::Document& target);

enum class Formality { Formal, Informal };

/// prob is P(formal); the threshold 0.5 counts as formal.
bool formality_accuracy(double prob, Formality desired);

/// Away/Towards in any embedding space.
inline mda::AwayTowards embedding_away_towards(std::span<const double> rewritten, std::span<const double> input,
                                               std::span<const double> target) {
  return mda::away_towards(rewritten, input, target);
}

/// Everything scored for one (case, system) pair.
struct ScoreVector {
  double away_biber = 0.0;
  double towards_biber = 0.0;
  std::optional<double> away_stylecav, towards_stylecav;
  std::optional<double> away_luar, towards_luar;
  std::optional<double> mis, sbert_sim, meteor, cola, formality_prob;
  std::optional<double> fkgl, ari;
  std::optional<double> rouge1, rouge2, rougeL, bleu, sari;
  double overlap_rouge1 = 0.0;
  double overlap_rouge2 = 0.0;
  double overlap_rougeL = 0.0;
  /// Formality accuracy for GYAFC cases, when the classifier was reachable.
  std::optional<bool> formality_correct;

  std::string to_json() const;
  static ScoreVector from_json(std::string_view text);
  bool operator==(const ScoreVector&) const = default;
};

}  // namespace regstyle::metrics
