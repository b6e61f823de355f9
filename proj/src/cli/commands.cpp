#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <thread>

#include "oracle.hpp"
#include "regstyle/cli.hpp"
#include "regstyle/textproc.hpp"

namespace regstyle::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  if (sep.empty()) return {s};
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + sep.size();
  }
  return out;
}

// Texts the MDA space is fitted on: every distinct input, exemplar segment
// and gold reference of the plan, in plan order.
std::vector<std::string> plan_texts(const datasets::PairingPlan& plan) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& t) {
    if (seen.insert(t).second) out.push_back(t);
  };
  for (const auto& c : plan.cases) {
    add(c.input_text);
    for (const auto& seg : split(c.style_exemplar, plan.separator)) add(seg);
    for (const auto& r : c.gold_refs) add(r);
  }
  return out;
}

std::vector<std::string> jsonl_texts(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).at("text").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// Stand-in for runs that never call the model (naive systems only).
class NoEndpoint : public providers::ChatProvider {
 public:
  std::string chat(const providers::ChatRequest&) override {
    throw Error(ErrorCode::EndpointUnavailable, "no chat endpoint configured");
  }
};

std::string env_or_empty(const std::string& name) {
  if (name.empty()) return {};
  const char* v = std::getenv(name.c_str());
  return v ? v : "";
}

std::vector<std::string> kind_names(const std::set<providers::ScorerKind>& kinds) {
  std::vector<std::string> out;
  for (auto k : kinds) out.emplace_back(providers::to_string(k));
  return out;
}

bool covers(const std::vector<std::string>& have, const std::vector<std::string>& want) {
  return std::all_of(want.begin(), want.end(),
                     [&](const auto& k) { return std::find(have.begin(), have.end(), k) != have.end(); });
}

// The run directory belongs to one plan; mixing plans would mix cases.
void bind_run_dir(const RunConfig& config, const datasets::PairingPlan& plan) {
  const fs::path dir = config.paths.run_dir;
  const fs::path marker = dir / "run.json";
  const std::string digest = plan.digest();
  if (fs::exists(marker)) {
    std::string bound;
    try {
      bound = json::parse(read_file(marker)).at("plan_digest").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, marker.string() + ": " + e.what());
    }
    if (bound != digest) {
      throw Error(ErrorCode::Usage, "run directory " + dir.string() + " holds runs of plan " + bound +
                                        ", not " + digest);
    }
  } else {
    write_file(marker, json{{"plan_digest", digest}, {"plan", config.paths.plan}}.dump(2) + "\n");
  }
  write_file(dir / "config.json", config.to_json());
}

}  // namespace

// ---------------------------------------------------------------------------

std::string cmd_plan(const RunConfig& config, std::ostream& out) {
  validate(config, Command::Plan);
  const auto task = config.task_enum();
  const auto corpus = datasets::load_corpus(config.paths.corpus, task);
  datasets::PairingPlan plan;
  switch (task) {
    case datasets::Task::Mud: {
      const auto variant = datasets::mud_variant_from_string(config.variant.empty() ? "random" : config.variant);
      const auto selection = datasets::select_mud_authors(corpus, variant, config.seed, config.authors_per_side);
      plan = datasets::build_mud_cases(selection, variant, config.seed);
      break;
    }
    case datasets::Task::Gyafc:
      plan = datasets::build_gyafc_cases(corpus, config.variant, config.k, config.seed);
      break;
    case datasets::Task::Cochrane:
      plan = datasets::build_cochrane_cases(corpus, config.seed);
      break;
  }
  datasets::save_plan(plan, config.paths.plan);
  const auto digest = plan.digest();
  out << "plan: " << plan.cases.size() << " cases (" << datasets::to_string(plan.task) << " " << plan.variant
      << ", seed " << plan.seed << ")\n"
      << "digest: " << digest << "\n"
      << "wrote " << config.paths.plan << "\n";
  return digest;
}

mda::MdaModel cmd_mda_fit(const RunConfig& config, std::ostream& out) {
  validate(config, Command::MdaFit);
  const auto texts = config.paths.mda_corpus.empty() ? plan_texts(datasets::load_plan(config.paths.plan))
                                                     : jsonl_texts(config.paths.mda_corpus);
  const auto& catalog = mda::FeatureCatalog::builtin();
  std::vector<mda::FeatureVector> vectors;
  std::size_t skipped = 0;
  for (const auto& t : texts) {
    try {
      vectors.push_back(mda::extract_features(text::Document(t), catalog));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyDocument) throw;
      ++skipped;
    }
  }
  if (vectors.empty()) throw Error(ErrorCode::InsufficientCorpus, "no texts with words to fit the MDA space on");

  mda::MdaFitConfig fit;
  fit.dimensions = config.mda.dimensions;
  fit.variance_threshold = config.mda.variance_threshold;
  fit.varimax = config.mda.rotation == "varimax";
  const auto model = mda::fit_mda(vectors, fit, catalog.names());
  model.save(config.paths.mda_model);

  out << "mda: " << vectors.size() << " texts";
  if (skipped) out << " (" << skipped << " without words skipped)";
  out << ", " << model.kept.size() << " features kept, " << model.dropped.size() << " constant features dropped\n";
  out << "dim  variance  explained  cumulative\n";
  double cumulative = 0.0;
  for (std::size_t d = 0; d < model.explained_variance.size(); ++d) {
    const double share = model.total_variance > 0 ? model.explained_variance[d] / model.total_variance : 0.0;
    cumulative += share;
    char line[96];
    std::snprintf(line, sizeof line, "%3zu  %8.4f  %9.4f  %10.4f\n", d + 1, model.explained_variance[d], share,
                  cumulative);
    out << line;
  }
  out << "wrote " << config.paths.mda_model << "\n";
  return model;
}

RunOutcome cmd_run(const RunConfig& config, std::ostream& out) {
  validate(config, Command::Run);
  const auto systems = config.system_list();
  const auto plan = datasets::load_plan(config.paths.plan);
  const auto model = mda::MdaModel::load(config.paths.mda_model);
  bind_run_dir(config, plan);

  const bool needs_chat = std::any_of(systems.begin(), systems.end(), [](auto s) { return !pipeline::is_naive(s); });
  std::unique_ptr<providers::ChatProvider> chat;
  if (needs_chat) {
    providers::ChatConfig cc;
    cc.base_url = config.endpoint.base_url;
    cc.api_key_header = config.endpoint.api_key_header;
    cc.api_key = env_or_empty(config.endpoint.api_key_env);
    cc.cache_dir = config.endpoint.cache_dir.empty() ? fs::path(config.paths.run_dir) / "cache"
                                                     : fs::path(config.endpoint.cache_dir);
    cc.concurrency = config.endpoint.concurrency;
    cc.retry.attempts = config.endpoint.retry_attempts;
    cc.retry.base_delay = std::chrono::milliseconds(config.endpoint.retry_base_delay_ms);
    cc.timeout = std::chrono::seconds(config.endpoint.timeout_s);
    chat = std::make_unique<providers::ChatClient>(cc);
  } else {
    chat = std::make_unique<NoEndpoint>();
  }

  RunOutcome outcome;
  pipeline::Pipeline pipe(*chat, config.endpoint.model, config.seed);
  pipeline::RunStore store(config.paths.run_dir);
  pipeline::BatchOptions options;
  options.concurrency = config.endpoint.concurrency;
  options.retry_degraded = config.retry_degraded;
  options.max_runs = config.max_runs;
  outcome.batch = pipeline::run_batch(pipe, store, plan.cases, systems, options);
  out << "runs: " << outcome.batch.executed << " executed, " << outcome.batch.skipped << " already done, "
      << outcome.batch.degraded << " degraded";
  if (outcome.batch.endpoint_failures) out << " (" << outcome.batch.endpoint_failures << " endpoint failures)";
  out << "\n";

  // Scoring. An unreachable sidecar only drops the neural metrics.
  std::unique_ptr<providers::ScorerClient> sidecar;
  std::set<providers::ScorerKind> kinds;
  if (!config.sidecar.base_url.empty()) {
    providers::ScorerConfig sc;
    sc.base_url = config.sidecar.base_url;
    sc.secret_header = config.sidecar.secret_header;
    sc.secret = env_or_empty(config.sidecar.secret_env);
    sc.concurrency = config.sidecar.concurrency;
    sc.timeout = std::chrono::seconds(config.sidecar.timeout_s);
    sidecar = std::make_unique<providers::ScorerClient>(sc);
    try {
      for (const auto& name : sidecar->health().kinds) {
        try {
          kinds.insert(providers::scorer_kind_from_string(name));
        } catch (const Error&) {
          // kinds this client does not know are ignored
        }
      }
    } catch (const Error& e) {
      out << "warning: sidecar unavailable, neural metrics skipped (" << e.what() << ")\n";
      sidecar.reset();
    }
  }
  CaseScorer scorer(model, sidecar.get(), kinds);
  const auto kind_list = kind_names(scorer.kinds());

  std::map<std::string, const datasets::TransferCase*> by_id;
  for (const auto& c : plan.cases) by_id[c.id] = &c;
  const auto previous = load_scores(config.paths.run_dir);

  struct Job {
    const datasets::TransferCase* c;
    pipeline::PipelineRun run;
    std::string sha;
  };
  std::vector<Job> jobs;
  for (auto& run : store.load_all()) {
    if (run.degraded || !by_id.count(run.case_id)) continue;
    if (std::find(systems.begin(), systems.end(), run.system) == systems.end()) continue;
    const auto sha = providers::sha256_hex(run.output_text);
    const auto it = previous.find({run.case_id, run.system});
    if (it != previous.end() && it->second.output_sha == sha && covers(it->second.kinds, kind_list)) {
      if (it->second.scores) {
        ++outcome.scored;
      } else {
        ++outcome.unscorable;
      }
      continue;
    }
    jobs.push_back({by_id[run.case_id], std::move(run), sha});
  }

  std::mutex mu;
  std::ofstream scores_out(fs::path(config.paths.run_dir) / "scores.jsonl", std::ios::app);
  if (!scores_out) throw Error(ErrorCode::IoFailure, "cannot append to scores.jsonl");
  std::atomic<std::size_t> next{0};
  std::string first_failure;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      const auto& job = jobs[i];
      ScoreRecord rec{job.run.case_id, job.run.system, job.sha, kind_list, std::nullopt, {}};
      try {
        rec.scores = scorer.score(*job.c, job.run.output_text);
      } catch (const Error& e) {
        if (exit_code(e.code()) == 3) {
          std::lock_guard lock(mu);
          ++outcome.scorer_failures;
          if (first_failure.empty()) first_failure = e.what();
          continue;  // left unscored; the next run retries it
        }
        rec.error = e.what();
      }
      std::lock_guard lock(mu);
      scores_out << rec.to_json() << "\n" << std::flush;
      if (rec.scores) {
        ++outcome.scored;
      } else {
        ++outcome.unscorable;
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(config.sidecar.concurrency, jobs.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  out << "scores: " << outcome.scored << " scored, " << outcome.unscorable << " unscorable";
  if (outcome.scorer_failures) out << ", " << outcome.scorer_failures << " sidecar failures (" << first_failure << ")";
  out << (kind_list.empty() ? " [no neural metrics]" : "") << "\n";
  return outcome;
}

analysis::Report cmd_report(const RunConfig& config, std::ostream& out) {
  validate(config, Command::Report);
  const auto systems = config.system_list();
  const auto plan = datasets::load_plan(config.paths.plan);

  std::vector<pipeline::PipelineRun> runs;
  if (fs::exists(fs::path(config.paths.run_dir) / "index.jsonl")) {
    runs = pipeline::RunStore(config.paths.run_dir).load_all();
  }
  const auto scores = load_scores(config.paths.run_dir);
  std::set<std::string> ids;
  for (const auto& c : plan.cases) ids.insert(c.id);

  std::vector<analysis::CaseScore> case_scores;
  std::map<pipeline::System, std::vector<pipeline::PipelineRun>> by_system;
  for (const auto& run : runs) {
    if (!ids.count(run.case_id)) continue;
    by_system[run.system].push_back(run);
    analysis::CaseScore cs{run.case_id, run.system, run.degraded, std::nullopt};
    if (!run.degraded) {
      const auto it = scores.find({run.case_id, run.system});
      if (it != scores.end() && it->second.output_sha == providers::sha256_hex(run.output_text)) {
        cs.scores = it->second.scores;
      }
    }
    case_scores.push_back(std::move(cs));
  }

  const auto report = analysis::aggregate(plan, case_scores, systems);
  const auto points = analysis::system_points(report);
  const fs::path dir = config.report_dir();
  const std::string title = std::string(datasets::to_string(plan.task)) +
                            (plan.variant.empty() || plan.variant == "cochrane" ? "" : " (" + plan.variant + ")");
  const std::string y_label = plan.task == datasets::Task::Cochrane ? "ROUGE-1" : "MIS";

  write_file(dir / "table.csv", report.to_csv());
  write_file(dir / "table.txt", report.to_text());
  write_file(dir / "frontier.csv", analysis::plot_csv(points));
  write_file(dir / "frontier.svg", analysis::plot_svg(points, title, "Towards (Biber MDA)", y_label));
  for (auto s : systems) {
    if (!pipeline::produces_descriptors(s)) continue;
    const auto name = std::string(pipeline::to_string(s));
    write_file(dir / ("descriptors_" + name + ".csv"),
               analysis::frequency_csv(name, analysis::descriptor_frequency(by_system[s])));
  }
  std::vector<pipeline::PipelineRun> kept;
  for (const auto& run : runs) {
    if (ids.count(run.case_id)) kept.push_back(run);
  }
  pipeline::write_output_dump(dir / "outputs.csv", plan.cases, kept, systems);

  out << report.to_text();
  out << "wrote " << dir.string() << "\n";
  return report;
}

void cmd_oracle_gen(const fs::path& path, std::uint64_t seed, std::size_t cases, std::ostream& out) {
  write_file(path, oracle::fixture_json(seed, cases));
  out << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Register-guided style transfer: planning, runs, scoring and reports"};
  app.name("regstyle");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string task, variant, corpus, plan, run_dir, mda_model, mda_corpus, report_dir;
  std::string endpoint, model, api_key_env, cache_dir, sidecar, rotation;
  std::vector<std::string> systems;
  std::uint64_t seed = 0;
  std::size_t k = 0, authors = 0, dims = 0, concurrency = 0, max_runs = 0;
  int retries = 0, retry_delay = 0, timeout = 0;
  double threshold = 0.0;
  bool no_retry_degraded = false;

  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  auto* o_task = app.add_option("--task", task, "mud, gyafc or cochrane");
  auto* o_variant = app.add_option("--variant", variant, "mud: random/single/diverse; gyafc: em_i2f, em_f2i, fr_i2f, fr_f2i");
  auto* o_systems = app.add_option("--systems", systems, "Comma-separated systems (default: all seven)")->delimiter(',');
  auto* o_seed = app.add_option("--seed", seed, "Seed for pairing, pooling and the gold baseline");
  auto* o_k = app.add_option("--k", k, "Segments per GYAFC exemplar (default 16)");
  auto* o_authors = app.add_option("--authors-per-side", authors, "MUD source/target authors (default 15)");
  auto* o_corpus = app.add_option("--corpus", corpus, "Corpus JSONL");
  auto* o_plan = app.add_option("--plan", plan, "Plan file");
  auto* o_run_dir = app.add_option("--run-dir", run_dir, "Run directory");
  auto* o_mda_model = app.add_option("--mda-model", mda_model, "MDA model file");
  auto* o_mda_corpus = app.add_option("--mda-corpus", mda_corpus, "JSONL of {\"text\": ...} to fit MDA on");
  auto* o_report_dir = app.add_option("--report-dir", report_dir, "Report directory (default <run-dir>/report)");
  auto* o_endpoint = app.add_option("--endpoint", endpoint, "Chat completions base URL");
  auto* o_model = app.add_option("--model", model, "Model name sent to the endpoint");
  auto* o_key_env = app.add_option("--api-key-env", api_key_env, "Env var holding the API key (default REGSTYLE_API_KEY)");
  auto* o_cache = app.add_option("--cache-dir", cache_dir, "Response cache (default <run-dir>/cache)");
  auto* o_conc = app.add_option("--concurrency", concurrency, "In-flight chat requests (default 4)");
  auto* o_retries = app.add_option("--retries", retries, "Attempts per chat request (default 3)");
  auto* o_delay = app.add_option("--retry-delay-ms", retry_delay, "First retry delay, doubled each time");
  auto* o_timeout = app.add_option("--timeout", timeout, "Chat request timeout in seconds");
  auto* o_sidecar = app.add_option("--sidecar", sidecar, "Scoring sidecar base URL");
  auto* o_dims = app.add_option("--dims", dims, "MDA dimensions (default 6)");
  auto* o_thresh = app.add_option("--variance-threshold", threshold, "Keep dimensions up to this cumulative share");
  auto* o_rot = app.add_option("--rotation", rotation, "none or varimax");
  auto* o_max_runs = app.add_option("--max-runs", max_runs, "Stop the batch after this many executions");
  auto* o_no_retry = app.add_flag("--no-retry-degraded", no_retry_degraded, "Keep degraded runs on resume");

  auto* c_plan = app.add_subcommand("plan", "Build the pairing plan from a corpus");
  auto* c_fit = app.add_subcommand("mda-fit", "Fit the Biber MDA space");
  auto* c_run = app.add_subcommand("run", "Run the systems over the plan and score the outputs");
  auto* c_report = app.add_subcommand("report", "Aggregate scores into tables, frontier plots and descriptor counts");
  auto* c_oracle = app.add_subcommand("oracle-gen", "Regenerate the overlap-metric oracle fixture");
  std::string oracle_out;
  std::uint64_t oracle_seed = 20240601;
  std::size_t oracle_cases = 60;
  c_oracle->add_option("--out", oracle_out, "Output path")->required();
  c_oracle->add_option("--oracle-seed", oracle_seed, "Seed of the random cases");
  c_oracle->add_option("--cases", oracle_cases, "Number of random cases");

  std::vector<std::string> argv_store{"regstyle"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_oracle->parsed()) {
      cmd_oracle_gen(oracle_out, oracle_seed, oracle_cases, out);
      return 0;
    }
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    auto set = [](CLI::Option* o, auto& field, const auto& value) {
      if (o->count()) field = value;
    };
    set(o_task, config.task, task);
    set(o_variant, config.variant, variant);
    set(o_systems, config.systems, systems);
    set(o_seed, config.seed, seed);
    set(o_k, config.k, k);
    set(o_authors, config.authors_per_side, authors);
    set(o_corpus, config.paths.corpus, corpus);
    set(o_plan, config.paths.plan, plan);
    set(o_run_dir, config.paths.run_dir, run_dir);
    set(o_mda_model, config.paths.mda_model, mda_model);
    set(o_mda_corpus, config.paths.mda_corpus, mda_corpus);
    set(o_report_dir, config.paths.report_dir, report_dir);
    set(o_endpoint, config.endpoint.base_url, endpoint);
    set(o_model, config.endpoint.model, model);
    set(o_key_env, config.endpoint.api_key_env, api_key_env);
    set(o_cache, config.endpoint.cache_dir, cache_dir);
    set(o_conc, config.endpoint.concurrency, concurrency);
    set(o_retries, config.endpoint.retry_attempts, retries);
    set(o_delay, config.endpoint.retry_base_delay_ms, retry_delay);
    set(o_timeout, config.endpoint.timeout_s, timeout);
    set(o_sidecar, config.sidecar.base_url, sidecar);
    set(o_dims, config.mda.dimensions, dims);
    if (o_thresh->count()) config.mda.variance_threshold = threshold;
    set(o_rot, config.mda.rotation, rotation);
    if (o_max_runs->count()) config.max_runs = max_runs;
    if (o_no_retry->count()) config.retry_degraded = !no_retry_degraded;

    if (c_plan->parsed()) {
      cmd_plan(config, out);
    } else if (c_fit->parsed()) {
      cmd_mda_fit(config, out);
    } else if (c_run->parsed()) {
      const auto outcome = cmd_run(config, out);
      if (outcome.batch.endpoint_failures || outcome.scorer_failures) return 3;
      if (outcome.unscorable) return 2;
    } else if (c_report->parsed()) {
      cmd_report(config, out);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace regstyle::cli
