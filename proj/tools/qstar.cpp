// Copyright 2026 The qstar Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qstar: build, verify and benchmark planners on the hard linear-q* family.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qstar/config.hpp"
#include "qstar/errors.hpp"
#include "qstar/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> cap;
  std::string format = "csv";
};

qstar::ExperimentConfig load(const std::string& path, const GlobalFlags& flags) {
  qstar::ExperimentConfig cfg = qstar::load_config(path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.cap) cfg.cap = *flags.cap;
  if (!flags.out_dir.empty()) {
    cfg.out_dir = flags.out_dir;
  } else if (cfg.out_dir.empty()) {
    const char* env = std::getenv("QSTAR_OUT_DIR");
    cfg.out_dir = env != nullptr && *env != '\0' ? env : ".";
  }
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw qstar::Error("cannot write '" + path.string() + "'");
  return out;
}

int run_verify(const std::string& path, const GlobalFlags& flags, bool mutate) {
  const qstar::ExperimentConfig cfg = load(path, flags);
  const qstar::VerifyReport report = qstar::cmd_verify(cfg, mutate);
  if (flags.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : report.checks) {
      j.push_back({{"check", c.name},
                   {"pass", c.pass},
                   {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr)},
                   {"detail", c.detail}});
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << std::setprecision(17);
    for (const auto& c : report.checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " ("
                << c.detail << ")\n";
    }
  }
  return report.ok() ? kExitPass : kExitFail;
}

int run_bench(const std::string& path, const GlobalFlags& flags, bool timing) {
  const qstar::ExperimentConfig cfg = load(path, flags);
  const auto records = qstar::cmd_bench(cfg, {timing});
  const std::filesystem::path dir(cfg.out_dir);
  {
    auto out = open_out(dir / "bench.csv");
    qstar::write_bench_csv(out, records);
  }
  if (cfg.planner == qstar::PlannerKind::kLsvi) {
    auto out = open_out(dir / "bench_stages.csv");
    qstar::write_bench_stage_csv(out, records);
  }
  const nlohmann::json summary = qstar::bench_summary(cfg, records);
  {
    auto out = open_out(dir / "bench_summary.json");
    out << summary.dump(2) << '\n';
  }
  if (flags.format == "json") {
    std::cout << summary.dump(2) << '\n';
  } else {
    qstar::write_bench_csv(std::cout, records);
  }
  return summary["soundness_failure_rate"].get<double>() <= cfg.zeta ? kExitPass : kExitFail;
}

int run_adversary(const std::string& path, const GlobalFlags& flags, std::uint64_t budget) {
  const qstar::ExperimentConfig cfg = load(path, flags);
  const qstar::AdversaryReport report = qstar::cmd_adversary(cfg, budget);
  const nlohmann::json j = qstar::adversary_json(report);
  {
    auto out = open_out(std::filesystem::path(cfg.out_dir) / "adversary.json");
    out << j.dump(2) << '\n';
  }
  if (flags.format == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << std::setprecision(17) << "model,action,p_not_queried\n";
    for (const auto& row : report.rows) {
      for (std::size_t a = 0; a < row.not_queried.size(); ++a) {
        std::cout << (row.a_star == 0 ? std::string("M0") : "M" + std::to_string(row.a_star))
                  << ',' << a + 1 << ',' << row.not_queried[a] << '\n';
      }
    }
    std::cout << "# floor (1-eps)^n = " << report.floor << ", min ratio = " << report.min_ratio
              << ", floor " << (report.floor_holds ? "holds" : "VIOLATED") << '\n';
  }
  return report.ok() ? kExitPass : kExitFail;
}

int run_solve(const std::string& path, const GlobalFlags& flags, std::string out_path) {
  const qstar::ExperimentConfig cfg = load(path, flags);
  if (out_path.empty()) out_path = (std::filesystem::path(cfg.out_dir) / "tables.csv").string();
  auto out = open_out(out_path);
  qstar::cmd_solve(cfg, out);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qstar: hard instances and planners for linearly realizable q*"};
  app.require_subcommand(1);
  GlobalFlags flags;
  std::uint64_t seed = 0;
  std::size_t cap = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out-dir", flags.out_dir, "output directory (default: $QSTAR_OUT_DIR or .)");
  auto* cap_opt = app.add_option("--cap", cap, "state enumeration cap")->check(CLI::PositiveNumber);
  app.add_option("--format", flags.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
  app.fallthrough();

  std::string config_path;
  bool mutate = false;
  bool timing = false;
  std::uint64_t budget = 0;
  std::string out_path;

  auto* verify = app.add_subcommand("verify", "check construction invariants of an instance");
  verify->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  verify->add_flag("--mutate", mutate, "corrupt the sigma recursion (expected failure)");

  auto* bench = app.add_subcommand("bench", "run a planner over seeded replicates");
  bench->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  bench->add_flag("--timing", timing, "record wall time (breaks byte-identical output)");

  auto* adversary = app.add_subcommand("adversary", "measure P(a not queried) under a query cap");
  adversary->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  adversary->add_option("--budget", budget, "query cap")->required();

  auto* solve = app.add_subcommand("solve", "write exact q*, v* and gaps");
  solve->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out_path, "tables CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }
  if (*seed_opt) flags.seed = seed;
  if (*cap_opt) flags.cap = cap;

  try {
    if (*verify) return run_verify(config_path, flags, mutate);
    if (*bench) return run_bench(config_path, flags, timing);
    if (*adversary) return run_adversary(config_path, flags, budget);
    if (*solve) return run_solve(config_path, flags, out_path);
  } catch (const qstar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const qstar::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
