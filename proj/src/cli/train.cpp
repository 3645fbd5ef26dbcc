// Copyright 2026 The GHM Authors. All Rights Reserved.
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

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include <fmt/core.h>

#include "ghm/cli.hpp"
#include "json.hpp"

namespace ghm::cli {
namespace {

using nlohmann::json;

// Collects every problem in a config instead of stopping at the first one.
class ConfigReader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& message) { problems.push_back(message); }

  const json* object(const json& parent, const std::string& key, const std::string& path) {
    if (!parent.contains(key)) return nullptr;
    const json& value = parent.at(key);
    if (!value.is_object()) {
      fail(path + " must be an object");
      return nullptr;
    }
    return &value;
  }

  void known_keys(const json& obj, const std::string& path,
                  const std::vector<std::string_view>& keys) {
    for (const auto& [key, _] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(fmt::format("{}{} is not a known field", path.empty() ? "" : path + ".", key));
      }
    }
  }

  void real(const json& obj, const std::string& path, const char* key, double& target,
            const std::function<bool(double)>& ok, const char* requirement) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string field = path + "." + key;
    if (!v.is_number()) {
      fail(field + " must be a number");
      return;
    }
    const double value = v.get<double>();
    if (!ok(value)) {
      fail(fmt::format("{} {}", field, requirement));
      return;
    }
    target = value;
  }

  template <typename Int>
  void count(const json& obj, const std::string& path, const char* key, Int& target,
             bool positive) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string field = path + "." + key;
    if (!v.is_number_integer()) {
      fail(field + " must be an integer");
      return;
    }
    if (v.get<long long>() < (positive ? 1 : 0)) {
      fail(field + (positive ? " must be > 0" : " must be >= 0"));
      return;
    }
    target = v.get<Int>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& target) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_boolean()) {
      fail(path + "." + key + " must be a boolean");
      return;
    }
    target = obj.at(key).get<bool>();
  }
};

const auto kNonNegative = [](double v) { return v >= 0.0 && std::isfinite(v); };
const auto kPositive = [](double v) { return v > 0.0 && std::isfinite(v); };
const auto kFinite = [](double v) { return std::isfinite(v); };
const auto kUnitHalfOpen = [](double v) { return v >= 0.0 && v < 1.0; };
const auto kUnitLeftOpen = [](double v) { return v > 0.0 && v <= 1.0; };

void read_ghm(ConfigReader& r, const json& obj, const std::string& path, GhmConfig& ghm) {
  r.count(obj, path, "bins", ghm.bins, true);
  r.count(obj, path, "reg_bins", ghm.reg_bins, true);
  r.boolean(obj, path, "use_ema", ghm.use_ema);
  r.real(obj, path, "alpha", ghm.momentum, kUnitHalfOpen, "must lie in [0, 1)");
  r.real(obj, path, "gamma", ghm.gamma, kNonNegative, "must be >= 0");
  r.real(obj, path, "alpha_balance", ghm.alpha_balance, kUnitLeftOpen, "must lie in (0, 1]");
  r.real(obj, path, "mu", ghm.mu, kPositive, "must be > 0");
  r.real(obj, path, "delta", ghm.delta, kPositive, "must be > 0");
  r.count(obj, path, "trace_every", ghm.trace_every, false);
}

const std::vector<std::string_view> kGhmKeys = {
    "bins", "reg_bins", "use_ema", "alpha", "gamma", "alpha_balance", "mu", "delta",
    "trace_every"};

bool valid_name(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

double mean_of(const std::vector<TrainReport>& runs,
               const std::function<double(const TrainReport&)>& pick) {
  double sum = 0.0;
  for (const auto& run : runs) sum += pick(run);
  return sum / static_cast<double>(runs.size());
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write {}", path.string()));
  }
  return out;
}

}  // namespace

TrainConfig parse_train_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({fmt::format("not valid JSON ({})", e.what())});
  }
  if (!root.is_object()) {
    throw ConfigError({"top level must be an object"});
  }

  ConfigReader r;
  TrainConfig config;
  r.known_keys(root, "", {"task", "seeds", "dataset", "optimizer", "ghm", "arms"});

  if (!root.contains("task") || !root.at("task").is_string()) {
    r.fail("task must be \"classification\" or \"regression\"");
  } else {
    const auto task = root.at("task").get<std::string>();
    if (task == "classification") {
      config.task = TaskKind::kClassification;
    } else if (task == "regression") {
      config.task = TaskKind::kRegression;
    } else {
      r.fail("task must be \"classification\" or \"regression\"");
    }
  }
  const bool cls = config.task == TaskKind::kClassification;

  if (root.contains("seeds")) {
    const json& seeds = root.at("seeds");
    config.seeds.clear();
    if (!seeds.is_array() || seeds.empty()) {
      r.fail("seeds must be a non-empty array of integers");
    } else {
      for (const auto& s : seeds) {
        if (!s.is_number_unsigned()) {
          r.fail("seeds must be a non-empty array of integers");
          break;
        }
        config.seeds.push_back(s.get<std::uint64_t>());
      }
    }
  }

  if (const json* ds = r.object(root, "dataset", "dataset")) {
    if (cls) {
      auto& d = config.cls_dataset;
      r.known_keys(*ds, "dataset",
                   {"n_easy_neg", "n_pos", "n_outliers", "cluster_separation", "noise_scale"});
      r.count(*ds, "dataset", "n_easy_neg", d.n_easy_neg, false);
      r.count(*ds, "dataset", "n_pos", d.n_pos, false);
      r.count(*ds, "dataset", "n_outliers", d.n_outliers, false);
      r.real(*ds, "dataset", "cluster_separation", d.cluster_separation, kFinite,
             "must be finite");
      r.real(*ds, "dataset", "noise_scale", d.noise_scale, kNonNegative, "must be >= 0");
      if (d.n_easy_neg + d.n_pos + d.n_outliers < 2) {
        r.fail("dataset must contain at least two points");
      }
    } else {
      auto& d = config.reg_dataset;
      r.known_keys(*ds, "dataset",
                   {"n_inliers", "n_outliers", "inlier_noise", "outlier_scale", "slope"});
      r.count(*ds, "dataset", "n_inliers", d.n_inliers, false);
      r.count(*ds, "dataset", "n_outliers", d.n_outliers, false);
      r.real(*ds, "dataset", "inlier_noise", d.inlier_noise, kNonNegative, "must be >= 0");
      r.real(*ds, "dataset", "outlier_scale", d.outlier_scale, kNonNegative, "must be >= 0");
      r.real(*ds, "dataset", "slope", d.slope, kFinite, "must be finite");
      if (d.n_inliers + d.n_outliers < 2) {
        r.fail("dataset must contain at least two points");
      }
    }
  }

  if (const json* opt = r.object(root, "optimizer", "optimizer")) {
    auto& o = config.optimizer;
    r.known_keys(*opt, "optimizer",
                 {"learning_rate", "momentum", "weight_decay", "iterations", "batch_size"});
    r.real(*opt, "optimizer", "learning_rate", o.learning_rate, kPositive, "must be > 0");
    r.real(*opt, "optimizer", "momentum", o.momentum, kUnitHalfOpen, "must lie in [0, 1)");
    r.real(*opt, "optimizer", "weight_decay", o.weight_decay, kNonNegative, "must be >= 0");
    r.count(*opt, "optimizer", "iterations", o.iterations, true);
    r.count(*opt, "optimizer", "batch_size", o.batch_size, true);
  }

  GhmConfig shared;
  if (const json* g = r.object(root, "ghm", "ghm")) {
    r.known_keys(*g, "ghm", kGhmKeys);
    read_ghm(r, *g, "ghm", shared);
  }

  if (!root.contains("arms") || !root.at("arms").is_array() || root.at("arms").empty()) {
    r.fail("arms must be a non-empty array");
  } else {
    std::set<std::string> names;
    const json& arms = root.at("arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const std::string path = fmt::format("arms[{}]", i);
      const json& a = arms[i];
      if (!a.is_object()) {
        r.fail(path + " must be an object");
        continue;
      }
      TrainArm arm{"", "", shared};
      if (a.contains("loss") && a.at("loss").is_string()) {
        arm.loss = a.at("loss").get<std::string>();
      }
      const bool known = cls ? parse_cls_loss(arm.loss).has_value()
                             : parse_reg_loss(arm.loss).has_value();
      if (!known) {
        r.fail(path + (cls ? ".loss must be one of CE, FL, GHM-C"
                           : ".loss must be one of SL1, ASL1, GHM-R"));
      }
      arm.name = a.contains("name") && a.at("name").is_string() ? a.at("name").get<std::string>()
                                                                  : arm.loss;
      if (!valid_name(arm.name)) {
        r.fail(path + ".name must be non-empty and use only letters, digits, '_' or '-'");
      } else if (!names.insert(arm.name).second) {
        r.fail(path + ".name '" + arm.name + "' is used twice");
      }
      for (const auto& [key, _] : a.items()) {
        if (key != "name" && key != "loss" &&
            std::find(kGhmKeys.begin(), kGhmKeys.end(), key) == kGhmKeys.end()) {
          r.fail(fmt::format("{}.{} is not a known field", path, key));
        }
      }
      read_ghm(r, a, path, arm.ghm);
      config.arms.push_back(std::move(arm));
    }
  }

  if (!r.problems.empty()) {
    throw ConfigError(std::move(r.problems));
  }
  return config;
}

std::vector<ArmResult> run_training(const TrainConfig& config) {
  std::vector<ArmResult> results;
  for (const auto& arm : config.arms) {
    ArmResult result{arm, {}};
    for (std::uint64_t seed : config.seeds) {
      if (config.task == TaskKind::kClassification) {
        auto spec = config.cls_dataset;
        spec.seed = seed;
        result.runs.push_back(train_classifier(gen_cls_dataset(spec),
                                               *parse_cls_loss(arm.loss),
                                               config.optimizer, arm.ghm, seed));
      } else {
        auto spec = config.reg_dataset;
        spec.seed = seed;
        result.runs.push_back(train_regressor(gen_reg_dataset(spec),
                                              *parse_reg_loss(arm.loss),
                                              config.optimizer, arm.ghm, seed));
      }
    }
    results.push_back(std::move(result));
  }
  return results;
}

void write_training(const TrainConfig& config, const std::vector<ArmResult>& results,
                    const std::filesystem::path& output_dir) {
  std::filesystem::create_directories(output_dir);
  const bool cls = config.task == TaskKind::kClassification;

  for (const auto& result : results) {
    auto metrics = open_output(output_dir / (result.arm.name + "_metrics.csv"));
    metrics << (cls ? "seed,precision,recall,f1,w0,w1,bias\n"
                    : "seed,median_abs_error,slope\n");
    for (std::size_t s = 0; s < result.runs.size(); ++s) {
      const auto& run = result.runs[s];
      if (cls) {
        const auto& m = *run.classification;
        metrics << fmt::format("{},{},{},{},{},{},{}\n", config.seeds[s],
                               format_real(m.precision), format_real(m.recall),
                               format_real(m.f1), format_real(run.params(0)),
                               format_real(run.params(1)), format_real(run.params(2)));
      } else {
        metrics << fmt::format("{},{},{}\n", config.seeds[s],
                               format_real(*run.median_abs_error), format_real(run.params(0)));
      }
    }

    auto losses = open_output(output_dir / (result.arm.name + "_loss.csv"));
    losses << "iteration";
    for (auto seed : config.seeds) losses << ",seed_" << seed;
    losses << '\n';
    for (std::size_t it = 0; it < config.optimizer.iterations; ++it) {
      losses << it;
      for (const auto& run : result.runs) losses << ',' << format_real(run.loss_curve[it]);
      losses << '\n';
    }

    if (result.arm.ghm.trace_every > 0 && !result.runs.front().weight_trace.empty()) {
      auto trace = open_output(output_dir / (result.arm.name + "_weights.csv"));
      trace << "seed,iteration,bin,count,mean_beta\n";
      for (std::size_t s = 0; s < result.runs.size(); ++s) {
        for (const auto& entry : result.runs[s].weight_trace) {
          for (std::size_t j = 0; j < entry.counts.size(); ++j) {
            trace << fmt::format("{},{},{},{},{}\n", config.seeds[s], entry.iteration, j + 1,
                                 entry.counts[j], format_real(entry.mean_beta[j]));
          }
        }
      }
    }
  }

  auto summary = open_output(output_dir / "summary.csv");
  summary << (cls ? "arm,loss,mean_precision,mean_recall,mean_f1\n"
                  : "arm,loss,mean_median_abs_error,mean_slope\n");
  for (const auto& result : results) {
    if (cls) {
      summary << fmt::format(
          "{},{},{},{},{}\n", result.arm.name, result.arm.loss,
          format_real(mean_of(result.runs, [](const auto& r) { return r.classification->precision; })),
          format_real(mean_of(result.runs, [](const auto& r) { return r.classification->recall; })),
          format_real(mean_of(result.runs, [](const auto& r) { return r.classification->f1; })));
    } else {
      summary << fmt::format(
          "{},{},{},{}\n", result.arm.name, result.arm.loss,
          format_real(mean_of(result.runs, [](const auto& r) { return *r.median_abs_error; })),
          format_real(mean_of(result.runs, [](const auto& r) { return r.params(0); })));
    }
  }
}

}  // namespace ghm::cli
