#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regstyle::datasets {

/// splitmix64. The exact output sequence is part of the plan format: plans
/// built from the same seed and corpus must agree across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
};

/// Mixes a string into a seed, for per-item streams that do not depend on
/// processing order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt);

enum class Task { Mud, Gyafc, Cochrane };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);  // Usage on unknown names

struct TransferCase {
  std::string id;
  Task task = Task::Mud;
  std::string input_text;
  std::string style_exemplar;
  std::vector<std::string> gold_refs;  // empty for mud
  std::map<std::string, std::string> meta;

  bool operator==(const TransferCase&) const = default;
};

// ---------------------------------------------------------------------------
// Corpora (newline-delimited JSON)

struct MudPost {
  std::string author_id;
  std::string text;
  std::string subreddit;
  std::string split;  // optional; "test_queries" / "test_targets" when present
};

struct GyafcRecord {
  std::string id;
  std::string text;
  std::string domain;     // "em" or "fr"
  std::string formality;  // "formal" or "informal"
  std::string split;      // "train" or "test"
  std::vector<std::string> references;
};

struct CochraneRecord {
  std::string id;
  std::string abstract_text;
  std::string pls;
  std::string split;
};

struct Corpus {
  Task schema = Task::Mud;
  std::vector<MudPost> mud;
  std::vector<GyafcRecord> gyafc;
  std::vector<CochraneRecord> cochrane;

  std::size_t size() const;
};

/// Throws IoFailure when unreadable and SchemaViolation naming the 1-based
/// line of the first bad record. Blank lines are skipped.
Corpus load_corpus(const std::filesystem::path& path, Task schema);
Corpus parse_corpus(std::string_view jsonl, Task schema);

// ---------------------------------------------------------------------------
// MUD

enum class MudVariant { Random, Single, Diverse };

std::string_view to_string(MudVariant v);
MudVariant mud_variant_from_string(std::string_view name);

struct Author {
  std::string id;
  std::vector<MudPost> posts;  // stored order
};

struct AuthorSelection {
  std::vector<Author> sources;
  std::vector<Author> targets;
};

inline constexpr std::size_t kMudPostsPerAuthor = 16;
inline constexpr std::size_t kMudAuthorsPerSide = 15;
inline constexpr std::size_t kDiverseMinSubreddits = 13;

/// Picks `per_side` source and target authors. With split labels present,
/// sources come from test_queries and targets from test_targets; otherwise
/// both sides are drawn disjointly from one pool. Only authors with exactly
/// 16 posts are eligible. Throws InsufficientAuthors.
AuthorSelection select_mud_authors(const Corpus& corpus, MudVariant variant, std::uint64_t seed,
                                   std::size_t per_side = kMudAuthorsPerSide);

// ---------------------------------------------------------------------------
// Plans

struct PairingPlan {
  Task task = Task::Mud;
  std::string variant;  // random/single/diverse, em_i2f.., or cochrane
  std::uint64_t seed = 0;
  std::size_t k = 0;    // segments per exemplar (gyafc), 0 otherwise
  std::string separator = "\n";
  std::vector<std::string> source_authors;
  std::vector<std::string> target_authors;
  std::vector<TransferCase> cases;

  std::string to_json() const;  // includes the digest
  static PairingPlan from_json(std::string_view text);
  /// SHA-256 over the canonical serialization without the digest field.
  std::string digest() const;

  bool operator==(const PairingPlan&) const = default;
};

PairingPlan build_mud_cases(const AuthorSelection& selection, MudVariant variant, std::uint64_t seed);

inline constexpr std::size_t kGyafcSegments = 16;

/// direction: em_i2f, em_f2i, fr_i2f or fr_f2i.
PairingPlan build_gyafc_cases(const Corpus& corpus, std::string_view direction, std::size_t k,
                              std::uint64_t seed);

PairingPlan build_cochrane_cases(const Corpus& corpus, std::uint64_t seed);

void save_plan(const PairingPlan& plan, const std::filesystem::path& path);
PairingPlan load_plan(const std::filesystem::path& path);

}  // namespace regstyle::datasets
