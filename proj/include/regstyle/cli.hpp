#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "regstyle/analysis.hpp"
#include "regstyle/datasets.hpp"
#include "regstyle/error.hpp"
#include "regstyle/mda.hpp"
#include "regstyle/metrics.hpp"
#include "regstyle/pipeline.hpp"
#include "regstyle/providers.hpp"

namespace regstyle::cli {

struct EndpointSettings {
  std::string base_url;
  std::string model = "meta-llama/Llama-3.2-3B-Instruct";
  std::string api_key_env = "REGSTYLE_API_KEY";
  std::string api_key_header = "Authorization";
  std::string cache_dir;  // empty: <run_dir>/cache
  std::size_t concurrency = 4;
  int retry_attempts = 3;
  int retry_base_delay_ms = 1000;
  int timeout_s = 300;
};

struct SidecarSettings {
  std::string base_url;  // empty: neural metrics are skipped
  std::string secret_header;
  std::string secret_env = "REGSTYLE_SIDECAR_SECRET";
  std::size_t concurrency = 4;
  int timeout_s = 300;
};

struct PathSettings {
  std::string corpus;
  std::string plan;
  std::string run_dir;
  std::string mda_model;
  std::string mda_corpus;  // optional JSONL of {"text": ...}; default: texts of the plan
  std::string report_dir;  // empty: <run_dir>/report
};

struct MdaSettings {
  std::size_t dimensions = 6;
  std::optional<double> variance_threshold;
  std::string rotation = "none";  // none or varimax
};

struct RunConfig {
  std::string task = "mud";
  std::string variant;  // mud: random/single/diverse; gyafc: em_i2f..; cochrane: empty
  std::vector<std::string> systems;  // empty: all seven
  std::uint64_t seed = 0;
  std::size_t k = datasets::kGyafcSegments;
  std::size_t authors_per_side = datasets::kMudAuthorsPerSide;
  std::optional<std::size_t> max_runs;  // stop the batch early (partial runs)
  bool retry_degraded = true;
  EndpointSettings endpoint;
  SidecarSettings sidecar;
  PathSettings paths;
  MdaSettings mda;

  std::string to_json() const;
  /// Unknown keys and wrong types are Usage errors.
  static RunConfig from_json(std::string_view text);

  datasets::Task task_enum() const;
  std::vector<pipeline::System> system_list() const;
  std::filesystem::path report_dir() const;
};

RunConfig load_config(const std::filesystem::path& path);

enum class Command { Plan, MdaFit, Run, Report };

/// Checks everything the command needs before it touches the network or
/// the file system. Throws Usage.
void validate(const RunConfig& config, Command command);

/// 0 success, 1 usage/config, 2 data, 3 provider failure.
int exit_code(ErrorCode code);

// ---------------------------------------------------------------------------
// Scoring

/// Computes the score vector of one output. Thread-safe; caches the MDA
/// projections and embeddings of inputs and exemplars.
class CaseScorer {
 public:
  /// `sidecar` may be null; `kinds` are the kinds it advertised.
  CaseScorer(const mda::MdaModel& model, providers::ScorerClient* sidecar, std::set<providers::ScorerKind> kinds);

  metrics::ScoreVector score(const datasets::TransferCase& c, const std::string& output);
  const std::set<providers::ScorerKind>& kinds() const { return kinds_; }

 private:
  std::vector<double> biber(const std::string& text);
  std::vector<double> embed(providers::ScorerKind kind, const std::string& text);
  bool has(providers::ScorerKind kind) const { return sidecar_ && kinds_.count(kind); }

  const mda::MdaModel& model_;
  providers::ScorerClient* sidecar_;
  std::set<providers::ScorerKind> kinds_;
  std::mutex mu_;
  std::map<std::string, std::vector<double>> biber_cache_;
  std::map<std::pair<providers::ScorerKind, std::string>, std::vector<double>> embed_cache_;
};

/// One line of <run_dir>/scores.jsonl. `output_sha` ties the score to the
/// run output it was computed from, so re-executed runs get rescored.
struct ScoreRecord {
  std::string case_id;
  pipeline::System system = pipeline::System::Copy;
  std::string output_sha;
  std::vector<std::string> kinds;  // sidecar kinds used
  std::optional<metrics::ScoreVector> scores;
  std::string error;  // set when the output could not be scored

  std::string to_json() const;
  static ScoreRecord from_json(std::string_view line);
};

/// Latest record per (case, system); malformed lines are skipped.
std::map<std::pair<std::string, pipeline::System>, ScoreRecord> load_scores(const std::filesystem::path& run_dir);

// ---------------------------------------------------------------------------
// Commands. Each throws regstyle::Error; run_cli maps errors to exit codes.

struct RunOutcome {
  pipeline::BatchSummary batch;
  std::size_t scored = 0;
  std::size_t unscorable = 0;        // non-degraded outputs with no scorable text
  std::size_t scorer_failures = 0;   // sidecar errors while scoring
};

std::string cmd_plan(const RunConfig& config, std::ostream& out);  // returns the digest
mda::MdaModel cmd_mda_fit(const RunConfig& config, std::ostream& out);
RunOutcome cmd_run(const RunConfig& config, std::ostream& out);
analysis::Report cmd_report(const RunConfig& config, std::ostream& out);
void cmd_oracle_gen(const std::filesystem::path& path, std::uint64_t seed, std::size_t cases, std::ostream& out);

/// Full command line (argv[0] excluded). Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regstyle::cli
