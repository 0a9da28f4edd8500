#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

const std::string kSim = TRUSTYA_SIM_BIN;
const fs::path kData = TRUSTYA_TEST_DATA_DIR;

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = "'" + kSim + "' " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / ("trustya_cli_" + std::to_string(::getpid()));
  void SetUp() override { fs::create_directories(dir); }
  void TearDown() override { fs::remove_all(dir); }
};

TEST_F(Cli, SimulateWritesExportsDeterministically) {
  const auto a = run("simulate --spec '" + (kData / "mixed.json").string() + "' --out '" + (dir / "a").string() + "'");
  ASSERT_EQ(a.status, 0) << a.out;
  EXPECT_NE(a.out.find("Smartx3+SmarterRandomx3+Statusx2"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("games=3"), std::string::npos);
  const auto b = run("simulate --spec '" + (kData / "mixed.json").string() + "' --out '" + (dir / "b").string() + "'");
  ASSERT_EQ(b.status, 0);
  for (const char* f : {"games.csv", "aggregate.csv", "scatter.csv", "logs/game_40.jsonl", "logs/game_42.jsonl"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST_F(Cli, SeedOverridesAndTerminationFlags) {
  const auto r = run("simulate --spec '" + (kData / "mixed.json").string() + "' --seeds 2 --base-seed 7 --hard-stop --out '" +
                     dir.string() + "'");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("games=2"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "logs/game_8.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "logs/game_40.jsonl"));
  EXPECT_NE(run("simulate --spec '" + (kData / "mixed.json").string() + "' --hard-stop --overtime").status, 0);
}

TEST_F(Cli, ReplayAcceptsAndRejects) {
  ASSERT_EQ(run("simulate --spec '" + (kData / "mixed.json").string() + "' --seeds 1 --out '" + dir.string() + "'").status,
            0);
  const auto log = dir / "logs/game_40.jsonl";
  const auto ok = run("replay --log '" + log.string() + "'");
  EXPECT_EQ(ok.status, 0) << ok.out;
  EXPECT_EQ(ok.out.rfind("OK ", 0), 0u) << ok.out;
  EXPECT_NE(ok.out.find("0 divergences"), std::string::npos);

  // Flip the first investment amount digit on some line.
  std::string text = slurp(log);
  const auto pos = text.find("\"amount\":");
  ASSERT_NE(pos, std::string::npos);
  auto& digit = text[pos + 9];
  digit = digit == '1' ? '2' : '1';
  std::ofstream(dir / "tampered.jsonl", std::ios::binary) << text;
  const auto bad = run("replay --log '" + (dir / "tampered.jsonl").string() + "'");
  EXPECT_EQ(bad.status, 1) << bad.out;
  EXPECT_EQ(bad.out.rfind("DIVERGENCE at line ", 0), 0u) << bad.out;

  std::ofstream(dir / "garbage.jsonl") << "this is not a log\n";
  EXPECT_EQ(run("replay --log '" + (dir / "garbage.jsonl").string() + "'").status, 2);
}

TEST_F(Cli, BaselinesTable) {
  const auto r = run("baselines --config '" + (kData / "config_small.json").string() + "' --seeds 2 --hard-stop --out '" +
                     dir.string() + "'");
  ASSERT_EQ(r.status, 0) << r.out;
  std::istringstream table(slurp(dir / "baselines.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line, "setting,games,mean_gini,stddev_gini,mean_earnings_fraction,stddev_earnings_fraction");
  int rows = 0;
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 9);
  EXPECT_TRUE(fs::exists(dir / "Taking" / "games.csv"));
  EXPECT_NE(r.out.find("Taking"), std::string::npos);
}

TEST_F(Cli, BadInputsExitNonzero) {
  const auto roster = run("simulate --spec '" + (kData / "bad_roster.json").string() + "'");
  EXPECT_EQ(roster.status, 2);
  EXPECT_NE(roster.out.find("invalid_config"), std::string::npos) << roster.out;
  EXPECT_NE(run("simulate --spec /nonexistent.json").status, 0);
  EXPECT_NE(run("simulate").status, 0);
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("juggle").status, 0);
  EXPECT_NE(run("simulate --spec '" + (kData / "mixed.json").string() + "' --seeds 0").status, 0);
}

}  // namespace
