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

#include "qstar/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

double to_double(const Entry& e, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size() || !std::isfinite(v)) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + e.value + "'", e.line);
  }
}

template <typename Int>
Int to_int(const Entry& e, const std::string& key) {
  Int v{};
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects an integer, got '" + e.value + "'", e.line);
  }
  return v;
}

void require(bool ok, const Entry& e, const std::string& message) {
  if (!ok) throw ConfigError(message, e.line);
}

}  // namespace

std::string planner_name(PlannerKind planner) {
  switch (planner) {
    case PlannerKind::kLsvi: return "lsvi";
    case PlannerKind::kRandom: return "random";
    case PlannerKind::kGreedyOracle: return "greedy-oracle";
    case PlannerKind::kFirstAction: return "first-action";
  }
  return "?";
}

PlannerKind parse_planner(const std::string& text) {
  if (text == "lsvi") return PlannerKind::kLsvi;
  if (text == "random") return PlannerKind::kRandom;
  if (text == "greedy-oracle") return PlannerKind::kGreedyOracle;
  if (text == "first-action") return PlannerKind::kFirstAction;
  throw ParameterError("unknown planner '" + text + "'");
}

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
  std::map<std::string, Entry> entries;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    entries[key] = {value, line_no};
  }

  ExperimentConfig cfg;
  InstanceConfig& inst = cfg.instance;
  using Handler = std::function<void(const Entry&)>;
  const std::map<std::string, Handler> handlers = {
      {"d", [&](const Entry& e) {
         inst.d = to_int<int>(e, "d");
         require(inst.d >= 2, e, "d must be >= 2");
       }},
      {"H", [&](const Entry& e) {
         inst.H = to_int<int>(e, "H");
         require(inst.H >= 1, e, "H must be >= 1");
       }},
      {"eta", [&](const Entry& e) { inst.eta = to_double(e, "eta"); }},
      {"gamma", [&](const Entry& e) {
         inst.gamma = to_double(e, "gamma");
         require(*inst.gamma > 0.0 && *inst.gamma <= 0.25, e, "gamma must lie in (0, 1/4]");
       }},
      {"k", [&](const Entry& e) {
         inst.k = to_int<int>(e, "k");
         require(*inst.k >= 1, e, "k must be >= 1");
       }},
      {"epsilon", [&](const Entry& e) {
         inst.epsilon = to_double(e, "epsilon");
         require(*inst.epsilon > 0.0, e, "epsilon must be positive");
       }},
      {"mode", [&](const Entry& e) {
         if (e.value == "fixed") inst.mode = HorizonMode::kFixed;
         else if (e.value == "discounted") inst.mode = HorizonMode::kDiscounted;
         else throw ConfigError("mode must be 'fixed' or 'discounted'", e.line);
       }},
      {"alpha", [&](const Entry& e) {
         inst.alpha = to_double(e, "alpha");
         require(inst.alpha >= 2.0 / 3.0 && inst.alpha < 1.0, e, "alpha must lie in [2/3, 1)");
       }},
      {"a_star", [&](const Entry& e) {
         inst.a_star = to_int<int>(e, "a_star");
         require(inst.a_star >= 0, e, "a_star must be >= 0 (0 selects M_0)");
       }},
      {"vectors", [&](const Entry& e) {
         if (e.value == "orthonormal") inst.vectors = VectorMode::kOrthonormal;
         else if (e.value == "gaussian") inst.vectors = VectorMode::kGaussian;
         else if (e.value == "file") inst.vectors = VectorMode::kFile;
         else throw ConfigError("vectors must be orthonormal, gaussian or file", e.line);
       }},
      {"vector_file", [&](const Entry& e) {
         std::filesystem::path p(e.value);
         if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
         require(std::filesystem::exists(p), e, "vector_file '" + p.string() + "' does not exist");
         inst.vector_file = p.string();
       }},
      {"seed", [&](const Entry& e) { cfg.seed = to_int<std::uint64_t>(e, "seed"); }},
      {"planner", [&](const Entry& e) {
         try {
           cfg.planner = parse_planner(e.value);
         } catch (const ParameterError& err) {
           throw ConfigError(err.what(), e.line);
         }
       }},
      {"replication", [&](const Entry& e) {
         cfg.replication = to_int<int>(e, "replication");
         require(cfg.replication >= 1, e, "replication must be >= 1");
       }},
      {"out_dir", [&](const Entry& e) { cfg.out_dir = e.value; }},
      {"delta_target", [&](const Entry& e) {
         cfg.delta_target = to_double(e, "delta_target");
         require(cfg.delta_target > 0.0, e, "delta_target must be positive");
       }},
      {"zeta", [&](const Entry& e) {
         cfg.zeta = to_double(e, "zeta");
         require(cfg.zeta > 0.0 && cfg.zeta <= 1.0, e, "zeta must lie in (0, 1]");
       }},
      {"n", [&](const Entry& e) {
         cfg.n = to_int<std::uint64_t>(e, "n");
         require(*cfg.n >= 1, e, "n must be >= 1");
       }},
      {"budget", [&](const Entry& e) { cfg.budget = to_int<std::uint64_t>(e, "budget"); }},
      {"cap", [&](const Entry& e) {
         cfg.cap = to_int<std::size_t>(e, "cap");
         require(cfg.cap >= 1, e, "cap must be >= 1");
       }},
      {"design_tolerance", [&](const Entry& e) {
         cfg.design_tolerance = to_double(e, "design_tolerance");
         require(cfg.design_tolerance > 0.0, e, "design_tolerance must be positive");
       }},
      {"design_max_iters", [&](const Entry& e) {
         cfg.design_max_iters = to_int<int>(e, "design_max_iters");
         require(cfg.design_max_iters >= 0, e, "design_max_iters must be >= 0");
       }},
      {"rollouts", [&](const Entry& e) {
         cfg.rollouts = to_int<int>(e, "rollouts");
         require(cfg.rollouts >= 0, e, "rollouts must be >= 0");
       }},
      {"trials", [&](const Entry& e) {
         cfg.trials = to_int<int>(e, "trials");
         require(cfg.trials >= 1, e, "trials must be >= 1");
       }},
      {"threads", [&](const Entry& e) {
         cfg.threads = to_int<int>(e, "threads");
         require(cfg.threads >= 0, e, "threads must be >= 0");
       }},
  };

  for (const auto& [key, entry] : entries) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError("unknown key '" + key + "'", entry.line);
    it->second(entry);
  }

  for (const char* key : {"d", "H"}) {
    if (!entries.count(key)) throw ConfigError(std::string("missing required key '") + key + "'", 0);
  }
  if (inst.eta && inst.gamma) {
    throw ConfigError("give either eta (paper mode) or gamma (desk mode), not both",
                      entries["gamma"].line);
  }
  if (!inst.eta && !inst.gamma) {
    throw ConfigError("missing required key 'eta' (or 'gamma' for desk mode)", 0);
  }
  if (inst.gamma && !inst.k) throw ConfigError("desk mode (gamma) needs 'k'", entries["gamma"].line);
  if (inst.eta) {
    const Entry& e = entries["eta"];
    require(inst.d >= 18, entries["d"], "paper mode (eta) needs d >= 18");
    const double eta_max = 0.5 - 2.0 / std::log2(static_cast<double>(inst.d - 1));
    if (!(*inst.eta > 0.0 && *inst.eta <= eta_max + 1e-12)) {
      std::ostringstream msg;
      msg << "eta must satisfy 0 < eta <= 1/2 - 2/log2(d-1) = " << eta_max;
      throw ConfigError(msg.str(), e.line);
    }
  }
  if (inst.mode == HorizonMode::kDiscounted && !entries.count("alpha")) {
    throw ConfigError("discounted mode needs 'alpha'", entries["mode"].line);
  }
  if (!inst.vector_file.empty() && inst.vectors == VectorMode::kAuto) inst.vectors = VectorMode::kFile;
  if (inst.vectors == VectorMode::kFile && inst.vector_file.empty()) {
    throw ConfigError("vectors = file needs 'vector_file'", entries["vectors"].line);
  }
  if (inst.k && inst.a_star > *inst.k) {
    throw ConfigError("a_star must be <= k", entries["a_star"].line);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'", 0);
  return parse_config(in, std::filesystem::path(path).parent_path().string());
}

}  // namespace qstar
