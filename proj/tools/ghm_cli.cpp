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

// Command-line front end: analyze, curve, bench, train and synth.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ghm/cli.hpp"
#include "ghm/synthetic.hpp"

namespace {

struct SharedFlags {
  std::string input;
  std::string output;
  std::uint64_t seed = 42;
  std::optional<std::size_t> bins;
  double alpha = ghm::kDefaultMomentum;
  std::optional<double> epsilon;
  double mu = ghm::kDefaultAsl1Mu;
  double delta = ghm::kDefaultSmoothL1Delta;
  double gamma = ghm::kDefaultFocalGamma;
  bool use_ema = false;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--input,-i", f.input, "Input dump or config file");
  cmd->add_option("--output,-o", f.output, "Output file (directory for train); stdout if omitted");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--bins,-M", f.bins, "Number of unit regions");
  cmd->add_option("--alpha", f.alpha, "EMA momentum");
  cmd->add_option("--epsilon", f.epsilon, "Exact-density window length");
  cmd->add_option("--mu", f.mu, "ASL1 mu");
  cmd->add_option("--delta", f.delta, "Smooth L1 division point");
  cmd->add_option("--gamma", f.gamma, "Focal loss gamma");
  cmd->add_flag("--use-ema", f.use_ema, "Use moving-average unit-region counts");
}

std::ifstream open_input(const std::string& path) {
  if (path.empty()) {
    throw ghm::Error("--input is required");
  }
  std::ifstream in(path);
  if (!in) {
    throw ghm::Error("cannot open " + path);
  }
  return in;
}

// Writes to --output when given, otherwise to stdout.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw ghm::Error("cannot write " + path);
  }
  fn(out);
}

ghm::cli::DumpKind parse_kind(const std::string& kind) {
  if (kind == "cls") return ghm::cli::DumpKind::kClassification;
  if (kind == "reg") return ghm::cli::DumpKind::kRegression;
  throw ghm::Error("kind must be cls or reg");
}

std::string one_line(std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  return message;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient harmonizing losses: distribution analysis, curves, benchmarks, toy training"};
  app.require_subcommand(1);
  SharedFlags f;

  std::string kind = "cls";
  auto* analyze = app.add_subcommand("analyze", "Per-bin gradient-norm distribution of a dump");
  add_shared(analyze, f);
  analyze->add_option("--kind", kind, "cls or reg")->check(CLI::IsMember({"cls", "reg"}));

  std::string loss = "CE";
  std::size_t points = 100;
  double max_d = 2.0;
  std::size_t batch_size = 0;
  double alpha_balance = ghm::kDefaultFocalAlpha;
  auto* curve = app.add_subcommand("curve", "Reformulated gradient contribution over a grid");
  add_shared(curve, f);
  curve->add_option("--loss", loss, "CE, FL, GHM-C, SL1, ASL1 or GHM-R")->required();
  curve->add_option("--points", points, "Grid size");
  curve->add_option("--max-d", max_d, "Upper end of the |d| grid");
  curve->add_option("--batch-size", batch_size, "Reference chunk size for EMA (0 = whole)");
  curve->add_option("--alpha-balance", alpha_balance, "Focal loss alpha");

  std::vector<std::size_t> sizes = {1000, 10000, 100000};
  std::vector<std::size_t> bench_bins = {30};
  std::vector<std::string> estimators = {"naive", "sorted", "histogram"};
  std::size_t repetitions = 5;
  bool mask = false;
  auto* bench = app.add_subcommand("bench", "Time the density estimators");
  add_shared(bench, f);
  bench->add_option("--n", sizes, "Batch sizes")->delimiter(',');
  bench->add_option("--m", bench_bins, "Unit-region counts")->delimiter(',');
  bench->add_option("--estimators", estimators, "naive,sorted,histogram")->delimiter(',');
  bench->add_option("--repetitions", repetitions, "Repetitions per configuration");
  bench->add_flag("--mask-timings", mask, "Print '-' for timings (reproducible output)");

  auto* train = app.add_subcommand("train", "Run toy training arms from a JSON config");
  add_shared(train, f);

  std::size_t count = 5000;
  auto* synth = app.add_subcommand("synth", "Write a heavy-tailed synthetic dump");
  add_shared(synth, f);
  synth->add_option("--kind", kind, "cls or reg")->check(CLI::IsMember({"cls", "reg"}));
  synth->add_option("--count", count, "Number of records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (analyze->parsed()) {
      ghm::cli::AnalyzeOptions options;
      options.kind = parse_kind(kind);
      options.bins = f.bins.value_or(options.kind == ghm::cli::DumpKind::kClassification
                                         ? ghm::kDefaultClassificationBins
                                         : ghm::kDefaultRegressionBins);
      options.epsilon = f.epsilon;
      options.mu = f.mu;
      auto in = open_input(f.input);
      std::ostringstream table;
      ghm::cli::analyze(in, options, table);
      with_output(f.output, [&](std::ostream& out) { out << table.str(); });
    } else if (curve->parsed()) {
      ghm::cli::CurveOptions options;
      const auto parsed = ghm::cli::parse_curve_loss(loss);
      if (!parsed) throw ghm::Error("unknown loss " + loss);
      options.loss = *parsed;
      options.points = points;
      options.max_abs_d = max_d;
      options.bins = f.bins;
      options.use_ema = f.use_ema;
      options.alpha = f.alpha;
      options.batch_size = batch_size;
      options.gamma = f.gamma;
      options.alpha_balance = alpha_balance;
      options.mu = f.mu;
      options.delta = f.delta;
      std::optional<std::ifstream> reference;
      if (!f.input.empty()) reference = open_input(f.input);
      std::ostringstream table;
      ghm::cli::curve(options, reference ? &*reference : nullptr, table);
      with_output(f.output, [&](std::ostream& out) { out << table.str(); });
    } else if (bench->parsed()) {
      ghm::cli::BenchOptions options;
      options.sizes = sizes;
      options.bins = f.bins ? std::vector<std::size_t>{*f.bins} : bench_bins;
      options.estimators.clear();
      for (const auto& name : estimators) {
        const auto e = ghm::cli::parse_estimator(name);
        if (!e) throw ghm::Error("unknown estimator " + name);
        options.estimators.push_back(*e);
      }
      options.repetitions = repetitions;
      options.seed = f.seed;
      options.mask_timings = mask;
      const auto rows = ghm::cli::run_bench(options);
      with_output(f.output, [&](std::ostream& out) { ghm::cli::write_bench(options, rows, out); });
    } else if (train->parsed()) {
      auto in = open_input(f.input);
      std::stringstream text;
      text << in.rdbuf();
      const auto config = ghm::cli::parse_train_config(text.str());
      if (f.output.empty()) throw ghm::Error("train needs --output <directory>");
      ghm::cli::write_training(config, ghm::cli::run_training(config), f.output);
    } else if (synth->parsed()) {
      const bool cls = parse_kind(kind) == ghm::cli::DumpKind::kClassification;
      with_output(f.output, [&](std::ostream& out) {
        if (cls) {
          ghm::cli::write_cls_dump(out, ghm::heavy_tailed_classification(count, f.seed));
        } else {
          ghm::cli::write_reg_dump(out, ghm::heavy_tailed_residuals(count, f.seed));
        }
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
