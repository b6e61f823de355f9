#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "regstyle/datasets.hpp"
#include "regstyle/error.hpp"
#include "regstyle/providers.hpp"

namespace regstyle::pipeline {

using datasets::TransferCase;

enum class System { Copy, Target, Gold, Simple, Styll, Rg, RgContrastive };

std::string_view to_string(System s);
System system_from_string(std::string_view name);  // Usage on unknown names
/// Every system in report order: copy, target, gold, simple, styll, rg, rg_contrastive.
const std::vector<System>& all_systems();
bool is_naive(System s);
bool produces_descriptors(System s);
std::size_t step_count(System s);

// ---------------------------------------------------------------------------
// Prompts

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
  System system = System::Simple;
  int step = 1;
  std::string body;  // placeholders written as {name}

  /// Placeholder names in order of appearance (repeats kept).
  std::vector<std::string> placeholders() const;
};

/// Throws Usage for a naive system or a step outside 1..step_count.
const PromptTemplate& prompt_template(System s, int step);
std::vector<PromptTemplate> all_templates();

/// Substitutes every placeholder; nothing else changes. Bound values are
/// inserted verbatim, even if they contain braces. Throws MissingBinding.
std::string render_prompt(const PromptTemplate& t, const Bindings& bindings);

/// Inverse of render_prompt: recovers the bound values from a rendered
/// prompt, or nullopt when the text does not fit the template.
std::optional<Bindings> extract_bindings(const PromptTemplate& t, std::string_view rendered);

// ---------------------------------------------------------------------------
// Response handling

/// Comma/newline separated descriptor list: trimmed of whitespace, quotes and
/// list bullets, lowercased, empties dropped, first occurrence kept.
std::vector<std::string> parse_descriptors(std::string_view raw);

/// Strips surrounding whitespace, a leading "Rewritten text:" label and one
/// matched pair of surrounding quotes.
std::string trim_response(std::string_view raw);

// ---------------------------------------------------------------------------
// Runs

struct Step {
  std::string prompt;
  std::string response;  // raw, untrimmed

  bool operator==(const Step&) const = default;
};

struct PipelineRun {
  std::string case_id;
  System system = System::Copy;
  std::vector<Step> steps;
  std::optional<std::vector<std::string>> descriptors;
  std::string output_text;
  bool degraded = false;
  std::string error;  // why the run degraded
  std::optional<ErrorCode> error_code;
  /// The response repeats the prompt it was given (instruction-following failure).
  bool suspect = false;

  std::string to_json() const;
  static PipelineRun from_json(std::string_view text);
  bool operator==(const PipelineRun&) const = default;
};

class Pipeline {
 public:
  /// `seed` drives the gold baseline's choice among references.
  Pipeline(providers::ChatProvider& chat, std::string model, std::uint64_t seed);

  PipelineRun run(const TransferCase& c, System s);

  PipelineRun run_simple(const TransferCase& c);
  PipelineRun run_styll(const TransferCase& c);
  PipelineRun run_rg(const TransferCase& c);
  PipelineRun run_rg_contrastive(const TransferCase& c);
  /// Copy, Target or Gold. Gold without references throws NoGoldReference.
  PipelineRun run_naive(const TransferCase& c, System s) const;

 private:
  // Sends one step; false (and the run marked degraded) on provider failure.
  bool step(PipelineRun& run, const PromptTemplate& t, const Bindings& b);
  PipelineRun three_step(const TransferCase& c, System s);

  providers::ChatProvider& chat_;
  std::string model_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Run store: <dir>/runs/<case>__<system>.json plus an append-only index.jsonl.

class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  /// Atomically writes the run document, then appends it to the index.
  void write(const PipelineRun& run);
  /// Index entry for (case, system), if one was completed.
  std::optional<bool> completed_degraded(const std::string& case_id, System s) const;
  std::optional<PipelineRun> load(const std::string& case_id, System s) const;
  /// Every run listed in the index, in index order (latest entry wins).
  std::vector<PipelineRun> load_all() const;

 private:
  std::filesystem::path run_path(const std::string& case_id, System s) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, System>> order_;
  std::map<std::pair<std::string, System>, bool> index_;  // -> degraded
};

struct BatchOptions {
  std::size_t concurrency = 4;
  bool retry_degraded = true;  // rerun cases whose earlier attempt degraded
  std::optional<std::size_t> max_runs;  // stop after this many executions
};

struct BatchSummary {
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already in the index
  std::size_t degraded = 0;
  std::size_t endpoint_failures = 0;  // degraded by EndpointUnavailable
};

/// Runs every (case, system) not yet completed in the store, case-major.
BatchSummary run_batch(Pipeline& pipeline, RunStore& store, const std::vector<TransferCase>& cases,
                       const std::vector<System>& systems, const BatchOptions& options = {});

/// Qualitative dump: one row per case with target, input and each system's
/// output (CSV).
void write_output_dump(const std::filesystem::path& path, const std::vector<TransferCase>& cases,
                       const std::vector<PipelineRun>& runs, const std::vector<System>& systems);

}  // namespace regstyle::pipeline
