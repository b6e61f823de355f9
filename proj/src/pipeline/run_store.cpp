#include <atomic>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "regstyle/csv.hpp"
#include "regstyle/error.hpp"
#include "regstyle/pipeline.hpp"

namespace regstyle::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string PipelineRun::to_json() const {
  json steps_json = json::array();
  for (const auto& s : steps) steps_json.push_back({{"prompt", s.prompt}, {"response", s.response}});
  json doc{{"case_id", case_id},
           {"system", to_string(system)},
           {"steps", std::move(steps_json)},
           {"descriptors", descriptors ? json(*descriptors) : json(nullptr)},
           {"output_text", output_text},
           {"degraded", degraded},
           {"error", error},
           {"error_code", error_code ? json(std::string(regstyle::to_string(*error_code))) : json(nullptr)},
           {"suspect", suspect},
           {"message_layout", "single user message, no system message"}};
  return doc.dump(2) + "\n";
}

PipelineRun PipelineRun::from_json(std::string_view text) {
  PipelineRun run;
  try {
    const json doc = json::parse(text);
    run.case_id = doc.at("case_id").get<std::string>();
    run.system = system_from_string(doc.at("system").get<std::string>());
    for (const auto& s : doc.at("steps")) run.steps.push_back({s.at("prompt"), s.at("response")});
    if (!doc.at("descriptors").is_null()) run.descriptors = doc.at("descriptors").get<std::vector<std::string>>();
    run.output_text = doc.at("output_text").get<std::string>();
    run.degraded = doc.at("degraded").get<bool>();
    run.error = doc.value("error", "");
    if (doc.contains("error_code") && !doc.at("error_code").is_null()) {
      run.error_code = error_code_from_string(doc.at("error_code").get<std::string>());
    }
    run.suspect = doc.value("suspect", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("malformed run record: ") + e.what());
  }
  return run;
}

namespace {

std::string safe_name(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    const bool ok = std::isalnum(c) || c == '-' || c == '_' || c == '.';
    out += ok ? static_cast<char>(c) : '_';
  }
  return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp);
    out << content;
    if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot move " + tmp + " into place: " + ec.message());
}

}  // namespace

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "runs", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create run directory " + dir_.string() + ": " + ec.message());
  std::ifstream in(dir_ / "index.jsonl");
  for (std::string line; std::getline(in, line);) {
    // A line cut short by an interrupted write is ignored; its run is redone.
    try {
      const json doc = json::parse(line);
      const std::pair key{doc.at("case_id").get<std::string>(), system_from_string(doc.at("system").get<std::string>())};
      if (!fs::exists(run_path(key.first, key.second))) continue;
      if (!index_.count(key)) order_.push_back(key);
      index_[key] = doc.at("degraded").get<bool>();
    } catch (const std::exception&) {
      continue;
    }
  }
}

fs::path RunStore::run_path(const std::string& case_id, System s) const {
  return dir_ / "runs" / (safe_name(case_id) + "__" + std::string(to_string(s)) + ".json");
}

void RunStore::write(const PipelineRun& run) {
  write_atomic(run_path(run.case_id, run.system), run.to_json());
  std::lock_guard lock(mu_);
  std::ofstream index(dir_ / "index.jsonl", std::ios::app);
  if (!index) throw Error(ErrorCode::IoFailure, "cannot append to " + (dir_ / "index.jsonl").string());
  index << json{{"case_id", run.case_id}, {"system", to_string(run.system)}, {"degraded", run.degraded}}.dump() << "\n";
  index.flush();
  const std::pair key{run.case_id, run.system};
  if (!index_.count(key)) order_.push_back(key);
  index_[key] = run.degraded;
}

std::optional<bool> RunStore::completed_degraded(const std::string& case_id, System s) const {
  std::lock_guard lock(mu_);
  const auto it = index_.find({case_id, s});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<PipelineRun> RunStore::load(const std::string& case_id, System s) const {
  std::ifstream in(run_path(case_id, s), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return PipelineRun::from_json(buf.str());
}

std::vector<PipelineRun> RunStore::load_all() const {
  std::vector<std::pair<std::string, System>> keys;
  {
    std::lock_guard lock(mu_);
    keys = order_;
  }
  std::vector<PipelineRun> out;
  for (const auto& [id, s] : keys) {
    if (auto run = load(id, s)) out.push_back(std::move(*run));
  }
  return out;
}

BatchSummary run_batch(Pipeline& pipeline, RunStore& store, const std::vector<TransferCase>& cases,
                       const std::vector<System>& systems, const BatchOptions& options) {
  BatchSummary summary;
  std::vector<std::pair<const TransferCase*, System>> work;
  for (const auto& c : cases) {
    for (auto s : systems) {
      const auto done = store.completed_degraded(c.id, s);
      if (done && !(*done && options.retry_degraded)) {
        ++summary.skipped;
        continue;
      }
      work.emplace_back(&c, s);
    }
  }
  if (options.max_runs && work.size() > *options.max_runs) work.resize(*options.max_runs);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= work.size()) return;
      const auto& [c, s] = work[i];
      try {
        PipelineRun run;
        try {
          run = pipeline.run(*c, s);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoGoldReference) throw;
          run.case_id = c->id;
          run.system = s;
          run.degraded = true;
          run.error = e.what();
          run.error_code = e.code();
        }
        store.write(run);
        std::lock_guard lock(mu);
        ++summary.executed;
        if (run.degraded) ++summary.degraded;
        if (run.error_code == ErrorCode::EndpointUnavailable) ++summary.endpoint_failures;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = work.size();  // stop handing out work
        return;
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(options.concurrency, work.size()));
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return summary;
}

void write_output_dump(const fs::path& path, const std::vector<TransferCase>& cases,
                       const std::vector<PipelineRun>& runs, const std::vector<System>& systems) {
  std::map<std::pair<std::string, System>, const PipelineRun*> by_key;
  for (const auto& r : runs) by_key[{r.case_id, r.system}] = &r;

  std::vector<std::string> header = {"case_id", "target", "input"};
  for (auto s : systems) header.emplace_back(to_string(s));
  std::string out = csv_row(header);
  for (const auto& c : cases) {
    std::vector<std::string> row = {c.id, c.style_exemplar, c.input_text};
    for (auto s : systems) {
      const auto it = by_key.find({c.id, s});
      if (it == by_key.end()) {
        row.emplace_back();
      } else {
        row.push_back(it->second->degraded ? "[degraded] " + it->second->error : it->second->output_text);
      }
    }
    out += csv_row(row);
  }
  write_atomic(path, out);
}

}  // namespace regstyle::pipeline
