#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "regstyle/cli.hpp"

namespace regstyle::cli {

using nlohmann::json;

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::Usage, msg); }

// Copies obj[key] into out when present; finish() rejects keys never asked for.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) usage(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      usage(where_ + key + ": wrong type");
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    T v{};
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    get(key, v);
    out = v;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) usage("unknown config key '" + where_ + k + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

const std::set<std::string> kGyafcDirections = {"em_i2f", "em_f2i", "fr_i2f", "fr_f2i"};

bool has_llm_system(const std::vector<pipeline::System>& systems) {
  for (auto s : systems) {
    if (!pipeline::is_naive(s)) return true;
  }
  return false;
}

}  // namespace

std::string RunConfig::to_json() const {
  json j;
  j["task"] = task;
  j["variant"] = variant;
  j["systems"] = systems;
  j["seed"] = seed;
  j["k"] = k;
  j["authors_per_side"] = authors_per_side;
  j["max_runs"] = max_runs ? json(*max_runs) : json(nullptr);
  j["retry_degraded"] = retry_degraded;
  j["endpoint"] = {{"base_url", endpoint.base_url},
                   {"model", endpoint.model},
                   {"api_key_env", endpoint.api_key_env},
                   {"api_key_header", endpoint.api_key_header},
                   {"cache_dir", endpoint.cache_dir},
                   {"concurrency", endpoint.concurrency},
                   {"retry_attempts", endpoint.retry_attempts},
                   {"retry_base_delay_ms", endpoint.retry_base_delay_ms},
                   {"timeout_s", endpoint.timeout_s}};
  j["sidecar"] = {{"base_url", sidecar.base_url},
                  {"secret_header", sidecar.secret_header},
                  {"secret_env", sidecar.secret_env},
                  {"concurrency", sidecar.concurrency},
                  {"timeout_s", sidecar.timeout_s}};
  j["paths"] = {{"corpus", paths.corpus},         {"plan", paths.plan},
                {"run_dir", paths.run_dir},       {"mda_model", paths.mda_model},
                {"mda_corpus", paths.mda_corpus}, {"report_dir", paths.report_dir}};
  j["mda"] = {{"dimensions", mda.dimensions},
              {"variance_threshold", mda.variance_threshold ? json(*mda.variance_threshold) : json(nullptr)},
              {"rotation", mda.rotation}};
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    usage(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(j, "");
  r.get("task", c.task);
  r.get("variant", c.variant);
  r.get("systems", c.systems);
  r.get("seed", c.seed);
  r.get("k", c.k);
  r.get("authors_per_side", c.authors_per_side);
  r.get("max_runs", c.max_runs);
  r.get("retry_degraded", c.retry_degraded);
  if (const json* e = r.child("endpoint")) {
    Reader er(*e, "endpoint.");
    er.get("base_url", c.endpoint.base_url);
    er.get("model", c.endpoint.model);
    er.get("api_key_env", c.endpoint.api_key_env);
    er.get("api_key_header", c.endpoint.api_key_header);
    er.get("cache_dir", c.endpoint.cache_dir);
    er.get("concurrency", c.endpoint.concurrency);
    er.get("retry_attempts", c.endpoint.retry_attempts);
    er.get("retry_base_delay_ms", c.endpoint.retry_base_delay_ms);
    er.get("timeout_s", c.endpoint.timeout_s);
    er.finish();
  }
  if (const json* s = r.child("sidecar")) {
    Reader sr(*s, "sidecar.");
    sr.get("base_url", c.sidecar.base_url);
    sr.get("secret_header", c.sidecar.secret_header);
    sr.get("secret_env", c.sidecar.secret_env);
    sr.get("concurrency", c.sidecar.concurrency);
    sr.get("timeout_s", c.sidecar.timeout_s);
    sr.finish();
  }
  if (const json* p = r.child("paths")) {
    Reader pr(*p, "paths.");
    pr.get("corpus", c.paths.corpus);
    pr.get("plan", c.paths.plan);
    pr.get("run_dir", c.paths.run_dir);
    pr.get("mda_model", c.paths.mda_model);
    pr.get("mda_corpus", c.paths.mda_corpus);
    pr.get("report_dir", c.paths.report_dir);
    pr.finish();
  }
  if (const json* m = r.child("mda")) {
    Reader mr(*m, "mda.");
    mr.get("dimensions", c.mda.dimensions);
    mr.get("variance_threshold", c.mda.variance_threshold);
    mr.get("rotation", c.mda.rotation);
    mr.finish();
  }
  r.finish();
  return c;
}

datasets::Task RunConfig::task_enum() const { return datasets::task_from_string(task); }

std::vector<pipeline::System> RunConfig::system_list() const {
  if (systems.empty()) return pipeline::all_systems();
  std::vector<pipeline::System> out;
  for (const auto& name : systems) {
    const auto s = pipeline::system_from_string(name);
    if (std::find(out.begin(), out.end(), s) != out.end()) usage("system '" + name + "' listed twice");
    out.push_back(s);
  }
  return out;
}

std::filesystem::path RunConfig::report_dir() const {
  if (!paths.report_dir.empty()) return paths.report_dir;
  return std::filesystem::path(paths.run_dir) / "report";
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return RunConfig::from_json(ss.str());
}

void validate(const RunConfig& c, Command command) {
  const auto task = c.task_enum();
  switch (task) {
    case datasets::Task::Mud:
      datasets::mud_variant_from_string(c.variant.empty() ? "random" : c.variant);
      if (c.authors_per_side == 0) usage("authors_per_side must be positive");
      break;
    case datasets::Task::Gyafc:
      if (!kGyafcDirections.count(c.variant)) {
        usage("gyafc needs --variant em_i2f, em_f2i, fr_i2f or fr_f2i (got '" + c.variant + "')");
      }
      if (c.k == 0) usage("k must be positive");
      break;
    case datasets::Task::Cochrane:
      if (!c.variant.empty() && c.variant != "cochrane") usage("cochrane takes no variant");
      break;
  }
  const auto systems = c.system_list();

  auto need = [](const std::string& value, const char* what) {
    if (value.empty()) usage(std::string("missing ") + what);
  };
  switch (command) {
    case Command::Plan:
      need(c.paths.corpus, "paths.corpus (--corpus)");
      need(c.paths.plan, "paths.plan (--plan)");
      break;
    case Command::MdaFit:
      need(c.paths.mda_model, "paths.mda_model (--mda-model)");
      if (c.paths.mda_corpus.empty()) need(c.paths.plan, "paths.plan or paths.mda_corpus");
      if (c.mda.dimensions == 0) usage("mda.dimensions must be positive");
      if (c.mda.variance_threshold && !(*c.mda.variance_threshold > 0.0 && *c.mda.variance_threshold <= 1.0)) {
        usage("mda.variance_threshold must lie in (0, 1]");
      }
      if (c.mda.rotation != "none" && c.mda.rotation != "varimax") usage("mda.rotation must be none or varimax");
      break;
    case Command::Run:
      need(c.paths.plan, "paths.plan (--plan)");
      need(c.paths.run_dir, "paths.run_dir (--run-dir)");
      need(c.paths.mda_model, "paths.mda_model (--mda-model)");
      if (has_llm_system(systems)) {
        need(c.endpoint.base_url, "endpoint.base_url (--endpoint)");
        need(c.endpoint.model, "endpoint.model (--model)");
        providers::Url::parse(c.endpoint.base_url);
      }
      if (!c.sidecar.base_url.empty()) providers::Url::parse(c.sidecar.base_url);
      if (c.endpoint.concurrency == 0) usage("endpoint.concurrency must be positive");
      if (c.endpoint.retry_attempts < 1) usage("endpoint.retry_attempts must be at least 1");
      if (c.endpoint.retry_base_delay_ms < 0 || c.endpoint.timeout_s <= 0) usage("endpoint timing must be positive");
      if (c.sidecar.concurrency == 0 || c.sidecar.timeout_s <= 0) usage("sidecar settings must be positive");
      break;
    case Command::Report:
      need(c.paths.plan, "paths.plan (--plan)");
      need(c.paths.run_dir, "paths.run_dir (--run-dir)");
      break;
  }
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::InvalidN:
    case ErrorCode::InvalidProbability:
    case ErrorCode::InvalidRequest:
    case ErrorCode::MissingBinding:
      return 1;
    case ErrorCode::EndpointUnavailable:
    case ErrorCode::BadRequest:
    case ErrorCode::EmptyCompletion:
    case ErrorCode::ScorerUnavailable:
      return 3;
    default:
      return 2;
  }
}

}  // namespace regstyle::cli
