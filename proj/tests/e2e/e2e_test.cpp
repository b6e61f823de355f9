// Whole-harness runs against the in-process mock chat endpoint and sidecar.

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "mock_servers.hpp"
#include "regstyle/cli.hpp"

namespace fs = std::filesystem;
using namespace regstyle;

namespace {

const std::string kData = REGSTYLE_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    out.push_back(l);
  }
  return out;
}

std::size_t valid_index_lines(const fs::path& run_dir) {
  std::size_t n = 0;
  for (const auto& l : lines(slurp(run_dir / "index.jsonl"))) {
    n += nlohmann::json::accept(l);
  }
  return n;
}

class EndToEnd : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("regstyle_e2e_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    mock::ChatOptions opts;
    opts.mode = mock::ChatMode::Stylist;
    chat_ = std::make_unique<mock::MockChatServer>(opts);
    sidecar_ = std::make_unique<mock::MockSidecar>();
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int cli(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return cli::run_cli(args, out_, err_);
  }

  void plan_and_fit() {
    ASSERT_EQ(cli({"plan", "--task", "gyafc", "--variant", "em_i2f", "--seed", "11", "--k", "16", "--corpus",
                   kData + "/fixtures/gyafc_small.jsonl", "--plan", path("plan.json")}),
              0)
        << err_.str();
    ASSERT_EQ(cli({"mda-fit", "--plan", path("plan.json"), "--mda-model", path("mda.json")}), 0) << err_.str();
  }

  std::vector<std::string> run_args() const {
    return {"run",       "--task",   "gyafc",           "--variant",     "em_i2f",
            "--seed",    "11",       "--plan",          path("plan.json"), "--mda-model",
            path("mda.json"), "--run-dir", path("run"), "--endpoint",    chat_->base_url(),
            "--sidecar", sidecar_->base_url(), "--retry-delay-ms", "0"};
  }

  fs::path dir_;
  std::unique_ptr<mock::MockChatServer> chat_;
  std::unique_ptr<mock::MockSidecar> sidecar_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(EndToEnd, PlanFitRunReport) {
  plan_and_fit();
  const auto plan = datasets::load_plan(path("plan.json"));
  ASSERT_EQ(plan.cases.size(), 20u);

  // An interrupted first pass, then the rest.
  auto first = run_args();
  first.insert(first.end(), {"--max-runs", "60"});
  ASSERT_EQ(cli(first), 0) << err_.str() << out_.str();
  EXPECT_NE(out_.str().find("60 executed, 0 already done"), std::string::npos) << out_.str();
  ASSERT_EQ(cli(run_args()), 0) << err_.str() << out_.str();
  EXPECT_NE(out_.str().find("80 executed, 60 already done, 0 degraded"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("140 scored, 0 unscorable"), std::string::npos) << out_.str();
  EXPECT_EQ(valid_index_lines(path("run")), 140u);  // nothing ran twice
  // No prompt reached the endpoint twice.
  const auto prompts = chat_->prompts();
  EXPECT_EQ(std::set<std::string>(prompts.begin(), prompts.end()).size(), prompts.size());

  ASSERT_EQ(cli({"report", "--task", "gyafc", "--variant", "em_i2f", "--plan", path("plan.json"), "--run-dir",
                 path("run")}),
            0)
      << err_.str();
  const fs::path rep = path("run/report");

  const auto table = lines(slurp(rep / "table.csv"));
  ASSERT_EQ(table.size(), 8u);
  for (std::size_t i = 1; i < table.size(); ++i) {
    EXPECT_NE(table[i].find(",20,0,"), std::string::npos) << table[i];
  }
  const std::string golden = kData + "/golden/e2e_gyafc_table.csv";
  if (std::getenv("REGSTYLE_UPDATE_GOLDEN")) std::ofstream(golden, std::ios::binary) << slurp(rep / "table.csv");
  EXPECT_EQ(slurp(rep / "table.csv"), slurp(golden));

  // Frontier flags agree with a fresh dominance check over the plotted points.
  std::vector<analysis::SystemPoint> points;
  std::vector<bool> flags;
  for (const auto& l : lines(slurp(rep / "frontier.csv"))) {
    if (l.rfind("system,", 0) == 0) continue;
    std::istringstream in(l);
    std::string name, x, y, n, flag;
    std::getline(in, name, ',');
    std::getline(in, x, ',');
    std::getline(in, y, ',');
    std::getline(in, n, ',');
    std::getline(in, flag, ',');
    points.push_back({name, std::stod(x), std::stod(y), std::stoul(n)});
    flags.push_back(flag == "true");
  }
  ASSERT_EQ(points.size(), 7u);
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size(); ++j) dominated = dominated || analysis::dominates(points[j], points[i]);
    EXPECT_EQ(flags[i], !dominated) << points[i].system;
  }
  const auto svg = slurp(rep / "frontier.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);

  for (const char* s : {"styll", "rg", "rg_contrastive"}) {
    const auto freq = lines(slurp(rep / ("descriptors_" + std::string(s) + ".csv")));
    ASSERT_GE(freq.size(), 2u) << s;
    EXPECT_EQ(freq[1].substr(0, std::string(s).size() + 3), std::string(s) + ",1,");
    EXPECT_NE(freq[1].find(",20"), std::string::npos) << freq[1];
  }
  // Records end in CRLF; exemplars carry bare newlines inside quoted fields.
  const auto dump = slurp(rep / "outputs.csv");
  std::size_t records = 0;
  for (auto p = dump.find("\r\n"); p != std::string::npos; p = dump.find("\r\n", p + 2)) ++records;
  EXPECT_EQ(records, 21u);

  // The report is a pure function of the run directory.
  const auto before = slurp(rep / "table.txt");
  ASSERT_EQ(cli({"report", "--task", "gyafc", "--variant", "em_i2f", "--plan", path("plan.json"), "--run-dir",
                 path("run")}),
            0);
  EXPECT_EQ(slurp(rep / "table.txt"), before);
}

TEST_F(EndToEnd, KillAndResume) {
  plan_and_fit();
  mock::ChatOptions slow;
  slow.mode = mock::ChatMode::Stylist;
  slow.delay = std::chrono::milliseconds(25);
  chat_->set_options(slow);

  auto args = run_args();
  args.insert(args.end(), {"--concurrency", "1"});
  std::vector<std::string> argv_store{REGSTYLE_BIN};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    if (!std::freopen("/dev/null", "w", stdout)) std::_Exit(126);
    ::execv(argv[0], argv.data());
    std::_Exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  while (valid_index_lines(path("run")) < 40 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFSIGNALED(status)) << "run finished before it could be interrupted";

  const std::size_t done = valid_index_lines(path("run"));
  ASSERT_GE(done, 40u);
  ASSERT_LT(done, 140u);

  slow.delay = std::chrono::milliseconds(0);
  chat_->set_options(slow);
  ASSERT_EQ(cli(run_args()), 0) << err_.str();
  EXPECT_NE(out_.str().find(std::to_string(140 - done) + " executed, " + std::to_string(done) + " already done"),
            std::string::npos)
      << out_.str();
  EXPECT_EQ(valid_index_lines(path("run")), 140u);
  EXPECT_EQ(cli::load_scores(path("run")).size(), 140u);
}
