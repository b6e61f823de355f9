#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "regstyle/linalg.hpp"
#include "regstyle/textproc.hpp"

namespace regstyle::mda {

// ---------------------------------------------------------------------------
// Feature catalog
// ---------------------------------------------------------------------------

/// One slot of a lexical rule: a word list, a suffix list, or a wildcard.
struct WordPattern {
  std::set<std::string> words;
  std::vector<std::string> suffixes;
  std::size_t min_stem = 0;  // characters that must precede a suffix
  bool any = false;

  bool matches(std::string_view lowercase) const;
};

struct LexiconRule {
  WordPattern pattern;
};
struct SuffixRule {
  WordPattern pattern;
};
/// Adjacent pair of word tokens.
struct BigramRule {
  WordPattern first;
  WordPattern second;
};
/// Punctuation tokens whose surface is in `chars`.
struct PunctuationRule {
  std::set<std::string> chars;
};
struct TokenClassRule {
  enum class Class { Number, Capitalized, LongWord } token_class = Class::Number;
  std::size_t min_length = 0;
};
struct StatisticRule {
  enum class Kind { TypeTokenRatio, MeanWordLength } kind = Kind::TypeTokenRatio;
  std::size_t window = 400;
};

using Matcher =
    std::variant<LexiconRule, SuffixRule, BigramRule, PunctuationRule, TokenClassRule, StatisticRule>;

enum class Normalization { PerThousandWords, PerThousandTokens, Raw };

struct FeatureRule {
  std::string name;
  Normalization normalization = Normalization::PerThousandWords;
  Matcher matcher;
};

class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  FeatureCatalog(std::string version, std::vector<FeatureRule> features);

  /// Parses the JSON catalog format shipped in data/biber_catalog.json.
  static FeatureCatalog parse(std::string_view json_text);
  static FeatureCatalog load(const std::filesystem::path& path);
  /// The shipped catalog.
  static const FeatureCatalog& builtin();

  const std::string& version() const { return version_; }
  const std::vector<FeatureRule>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  std::vector<std::string> names() const;

 private:
  std::string version_;
  std::vector<FeatureRule> features_;
};

// ---------------------------------------------------------------------------
// Vectors, model, embedding
// ---------------------------------------------------------------------------

struct FeatureVector {
  std::string catalog_version;
  std::vector<double> rates;
  std::size_t doc_words = 0;
};

/// Throws EmptyDocument when the document has no word tokens.
FeatureVector extract_features(const text::Document& doc, const FeatureCatalog& catalog);

struct MdaFitConfig {
  std::size_t dimensions = 6;
  /// When set, D is the smallest count whose cumulative share of variance
  /// reaches this threshold; `dimensions` is ignored.
  std::optional<double> variance_threshold;
  bool varimax = false;
  double jacobi_tolerance = 1e-10;
};

struct MdaModel {
  static constexpr std::string_view kFormat = "regstyle-mda-model";
  static constexpr int kFormatVersion = 1;

  std::string catalog_version;
  std::vector<std::string> feature_names;  // all catalog features, catalog order
  std::vector<std::size_t> kept;            // indices into feature_names
  std::vector<std::size_t> dropped;         // zero-variance features
  std::vector<double> mean;                 // per catalog feature
  std::vector<double> std;                  // per catalog feature; 0 for dropped
  linalg::Matrix loadings;                  // kept.size() x dimensions
  std::vector<double> explained_variance;   // per dimension, non-increasing
  double total_variance = 0.0;              // trace of the correlation matrix
  bool rotated = false;
  std::size_t corpus_size = 0;

  std::size_t dimensions() const { return loadings.cols(); }

  std::string to_json() const;
  static MdaModel from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static MdaModel load(const std::filesystem::path& path);
};

/// z-score, correlation matrix, Jacobi eigendecomposition, dimension
/// selection, optional varimax. Column signs are fixed so the entry with the
/// largest magnitude is positive.
MdaModel fit_mda(std::span<const FeatureVector> corpus, const MdaFitConfig& config = {},
                 std::vector<std::string> feature_names = {});

struct MdaEmbedding {
  std::vector<double> scores;
};

MdaEmbedding project(const MdaModel& model, const FeatureVector& fv);

struct AwayTowards {
  double away = 0.0;
  double towards = 0.0;
};

double cosine(std::span<const double> a, std::span<const double> b);

/// away = (1 - cos(rewritten, input)) / 2, towards = (1 + cos(rewritten, target)) / 2.
AwayTowards away_towards(std::span<const double> rewritten, std::span<const double> input,
                         std::span<const double> target);

}  // namespace regstyle::mda
