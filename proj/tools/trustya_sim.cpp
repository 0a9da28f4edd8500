// trustya-sim: batch simulation, log replay and the nine baseline settings.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trustya/sim.hpp"

namespace {

using namespace trustya;

constexpr int kExitDivergence = 1;
constexpr int kExitBadInput = 2;

void print_aggregate(const std::string& label, const sim::Aggregate& a) {
  std::printf("%-24s games=%zu gini=%s (sd %s) earnings=%s (sd %s)\n", label.c_str(), a.games,
              sim::format_real(a.mean_gini).c_str(), sim::format_real(a.stddev_gini).c_str(),
              sim::format_real(a.mean_earnings).c_str(), sim::format_real(a.stddev_earnings).c_str());
}

void apply_termination(GameConfig& config, bool hard_stop, bool overtime) {
  if (hard_stop) config.hard_stop = true;
  if (overtime) config.hard_stop = false;
}

int run_simulate(const std::string& spec_path, std::optional<int> seeds, std::optional<std::uint64_t> base_seed,
                 const std::string& out_dir, bool hard_stop, bool overtime) {
  sim::SimSpec spec = sim::load_spec(spec_path);
  if (seeds) spec.seeds = *seeds;
  if (base_seed) spec.base_seed = *base_seed;
  apply_termination(spec.config, hard_stop, overtime);
  spec.out_dir = out_dir;
  spec.validate();
  const auto result = sim::run_batch(spec);
  print_aggregate(result.roster, result.aggregate);
  if (!out_dir.empty()) std::printf("wrote %s\n", out_dir.c_str());
  return 0;
}

int run_replay(const std::string& log_path) {
  const auto report = sim::replay_file(log_path);
  if (report.divergence) {
    const auto& d = *report.divergence;
    std::printf("DIVERGENCE at line %zu: %s\n", d.line, d.reason.c_str());
    if (!d.expected.empty()) std::printf("  logged:      %s\n", d.expected.c_str());
    if (!d.actual.empty()) std::printf("  regenerated: %s\n", d.actual.c_str());
    return kExitDivergence;
  }
  std::printf("OK %zu events replayed, 0 divergences", report.events);
  if (report.summary) {
    std::printf(", %d rounds, end %s, gini %s, earnings %s", report.summary->rounds,
                std::string(to_string(report.summary->end_reason)).c_str(),
                sim::format_real(report.summary->gini).c_str(),
                sim::format_real(report.summary->earnings_fraction).c_str());
  } else {
    std::printf(", game still in progress");
  }
  std::printf("\n");
  return 0;
}

int run_baselines(const std::string& config_path, int seeds, std::uint64_t base_seed, const std::string& out_dir,
                  bool hard_stop) {
  GameConfig base;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw GameError(ErrorCode::InvalidConfig, "cannot open config '" + config_path + "'");
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw GameError(ErrorCode::InvalidConfig, "config '" + config_path + "' is not valid JSON");
    base = parse_config(doc);
  }
  apply_termination(base, hard_stop, false);

  std::string table = "setting,games,mean_gini,stddev_gini,mean_earnings_fraction,stddev_earnings_fraction\n";
  for (auto& b : sim::baseline_specs(base, seeds, base_seed)) {
    if (!out_dir.empty()) b.spec.out_dir = std::filesystem::path(out_dir) / b.name;
    const auto result = sim::run_batch(b.spec);
    const auto& a = result.aggregate;
    print_aggregate(b.name, a);
    table += b.name + "," + std::to_string(a.games) + "," + sim::format_real(a.mean_gini) + "," +
             sim::format_real(a.stddev_gini) + "," + sim::format_real(a.mean_earnings) + "," +
             sim::format_real(a.stddev_earnings) + "\n";
  }
  if (!out_dir.empty()) {
    std::ofstream(std::filesystem::path(out_dir) / "baselines.csv", std::ios::binary) << table;
    std::printf("wrote %s\n", out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-ya simulator"};
  app.require_subcommand(1);

  std::string spec_path;
  std::optional<int> seeds;
  std::optional<std::uint64_t> base_seed;
  std::string out_dir;
  bool hard_stop = false;
  bool overtime = false;
  auto* simulate = app.add_subcommand("simulate", "Run a batch of all-bot games from a spec file");
  simulate->add_option("--spec", spec_path, "Spec JSON: config keys plus roster, seeds, base_seed")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--seeds", seeds, "Number of games (overrides the value in --spec)")->check(CLI::PositiveNumber);
  simulate->add_option("--base-seed", base_seed, "First seed (overrides the value in --spec)");
  simulate->add_option("--out", out_dir, "Directory for CSV exports and per-game logs");
  auto* hard_flag = simulate->add_flag("--hard-stop", hard_stop, "End exactly at round_limit");
  simulate->add_flag("--overtime", overtime, "Use the probabilistic end after round_limit")->excludes(hard_flag);

  std::string log_path;
  auto* replay = app.add_subcommand("replay", "Re-execute a logged game and compare it line by line");
  replay->add_option("--log", log_path, "Event log (JSON lines)")->required()->check(CLI::ExistingFile);

  std::string config_path;
  int baseline_seeds = 30;
  std::uint64_t baseline_base = 1;
  std::string baseline_out;
  bool baseline_hard = false;
  auto* baselines = app.add_subcommand("baselines", "Run the nine homogeneous bot settings");
  baselines->add_option("--config", config_path, "GameConfig JSON used as the template")->check(CLI::ExistingFile);
  baselines->add_option("--seeds", baseline_seeds, "Games per setting")->check(CLI::PositiveNumber);
  baselines->add_option("--base-seed", baseline_base, "First seed");
  baselines->add_option("--out", baseline_out, "Directory for exports (one subdirectory per setting)");
  baselines->add_flag("--hard-stop", baseline_hard, "End exactly at round_limit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(spec_path, seeds, base_seed, out_dir, hard_stop, overtime);
    if (*replay) return run_replay(log_path);
    return run_baselines(config_path, baseline_seeds, baseline_base, baseline_out, baseline_hard);
  } catch (const GameError& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }
}
