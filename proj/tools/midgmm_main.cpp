// tools/midgmm_main.cpp
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
//
// Command-line front end: generate synthetic attribute spaces, fit mixtures
// to labeled points, compute weighted barycenters, sample embeddings, and
// query pairwise distances. Exit codes: 0 success, 1 runtime error, 2 usage
// error.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "midgmm/barycenter.hpp"
#include "midgmm/fitting.hpp"
#include "midgmm/io.hpp"
#include "midgmm/sampling.hpp"
#include "midgmm/wasserstein.hpp"

namespace {

using midgmm::AttributeSpace;
using midgmm::Errc;
using midgmm::Error;
using midgmm::Index;
using midgmm::Matrix;
using midgmm::Vector;

std::string format_weight(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

struct LambdaSpec {
  std::vector<std::string> labels;
  Vector<double> raw;
};

LambdaSpec parse_lambda_items(const std::vector<std::string>& items) {
  LambdaSpec spec;
  spec.raw.resize(static_cast<Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto pos = items[i].rfind('=');
    if (pos == std::string::npos || pos == 0 || pos + 1 == items[i].size())
      throw CLI::ValidationError(
          "--lambda", "expected label=weight, got '" + items[i] + "'");
    const std::string label = items[i].substr(0, pos);
    char* end = nullptr;
    const std::string number = items[i].substr(pos + 1);
    const double value = std::strtod(number.c_str(), &end);
    if (end == number.c_str() || *end != '\0')
      throw CLI::ValidationError(
          "--lambda", "malformed weight in '" + items[i] + "'");
    for (const auto& seen : spec.labels)
      if (seen == label)
        throw CLI::ValidationError("--lambda",
                                   "label '" + label + "' given twice");
    spec.labels.push_back(label);
    spec.raw(static_cast<Index>(i)) = value;
  }
  return spec;
}

AttributeSpace<double> load_models(const std::vector<std::string>& paths) {
  std::vector<std::string> labels;
  std::vector<midgmm::GaussianMixture<double>> mixtures;
  for (const auto& path : paths) {
    AttributeSpace<double> space = midgmm::io::load_space(path);
    for (Index l = 0; l < space.size(); ++l) {
      labels.push_back(space.labels()[static_cast<std::size_t>(l)]);
      mixtures.push_back(space.mixtures()[static_cast<std::size_t>(l)]);
    }
  }
  return AttributeSpace<double>(std::move(labels), std::move(mixtures));
}

std::filesystem::path sibling_with_suffix(const std::filesystem::path& base,
                                          const std::string& suffix) {
  std::filesystem::path derived = base;
  derived.replace_extension();
  return derived.string() + suffix;
}

void run_synth(Index dim, Index attrs, Index mixtures, Index points,
               std::uint64_t seed, const std::string& out,
               std::string points_out) {
  if (points_out.empty())
    points_out = sibling_with_suffix(out, ".points.csv").string();
  auto data =
      midgmm::make_synthetic_space<double>(dim, attrs, mixtures, points, seed);
  midgmm::io::save_space(data.space, out);

  std::vector<midgmm::io::SampleBatch> batches;
  for (std::size_t l = 0; l < data.points.size(); ++l)
    batches.push_back({{data.points[l].label, "synth", ""},
                       data.points[l].points,
                       data.point_components[l]});
  midgmm::io::export_samples(batches, dim, points_out);
  std::cout << "wrote " << out << " and " << points_out << "\n";
}

void run_fit(const std::string& points_path, Index mixtures,
             std::uint64_t seed, Index max_iters, double tol,
             double stddev_floor, const std::string& out) {
  auto datasets = midgmm::io::load_labeled_points(points_path);
  if (datasets.empty())
    midgmm::fail(Errc::too_few_points,
                 "'" + points_path + "' contains no data rows");
  midgmm::FitConfig config;
  config.components = mixtures;
  config.seed = seed;
  config.max_iters = max_iters;
  config.tol = tol;
  config.stddev_floor = stddev_floor;
  midgmm::io::save_space(midgmm::fit_space(datasets, config), out);
  std::cout << "wrote " << out << "\n";
}

void run_barycenter(const std::vector<std::string>& model_paths,
                    const std::vector<std::string>& lambda_items,
                    const std::string& mode_flag, double prune_eps,
                    Index candidate_cap, Index lp_cap,
                    const std::string& out, std::string report_path,
                    std::string result_label) {
  AttributeSpace<double> full = load_models(model_paths);
  LambdaSpec spec = parse_lambda_items(lambda_items);

  std::vector<std::string> labels;
  std::vector<midgmm::GaussianMixture<double>> mixtures;
  for (const auto& label : spec.labels) {
    labels.push_back(label);
    mixtures.push_back(full.at(label));  // throws UnknownLabel
  }
  AttributeSpace<double> space(std::move(labels), std::move(mixtures));
  auto lambda = midgmm::InterpolationWeights<double>::renormalized(
      spec.raw, midgmm::kWeightSumTol);

  midgmm::BarycenterOptions options;
  options.candidate_cap = candidate_cap;
  options.lp_variable_cap = lp_cap;
  options.prune_epsilon = prune_eps;

  midgmm::PlanMode mode;
  if (mode_flag == "hard") {
    mode = midgmm::PlanMode::hard;
  } else if (mode_flag == "exact") {
    mode = midgmm::PlanMode::exact;
  } else {
    // auto: exact while the LP stays within its variable cap
    double variables = 0;
    double num_candidates = 1;
    double total_components = 0;
    for (const auto& mixture : space.mixtures()) {
      num_candidates *= double(mixture.component_count());
      total_components += double(mixture.component_count());
    }
    variables = num_candidates * total_components;
    mode = variables <= double(lp_cap) ? midgmm::PlanMode::exact
                                       : midgmm::PlanMode::hard;
  }

  auto result = midgmm::gmm_barycenter(space, lambda, mode, options);

  if (result_label.empty()) {
    result_label = "mid(";
    for (Index l = 0; l < lambda.size(); ++l) {
      if (l > 0) result_label += '+';
      result_label += spec.labels[static_cast<std::size_t>(l)] + "=" +
                      format_weight(lambda[l]);
    }
    result_label += ')';
  }
  AttributeSpace<double> output({result_label}, {result.mixture});
  midgmm::io::save_space(output, out);

  if (report_path.empty())
    report_path = sibling_with_suffix(out, ".report.json").string();
  nlohmann::ordered_json report;
  report["objective"] = result.objective;
  report["mode"] = std::string(midgmm::to_string(result.mode));
  report["lambda"] = nlohmann::ordered_json::object();
  for (Index l = 0; l < lambda.size(); ++l)
    report["lambda"][spec.labels[static_cast<std::size_t>(l)]] = lambda[l];
  report["candidates"] = nlohmann::ordered_json::array();
  for (const auto& entry : result.provenance) {
    nlohmann::ordered_json item;
    item["tuple"] = entry.tuple;
    item["weight"] = entry.weight;
    report["candidates"].push_back(std::move(item));
  }
  std::ofstream report_out(report_path);
  if (!report_out)
    midgmm::fail(Errc::io_error,
                 "cannot open '" + report_path + "' for writing");
  report_out << report.dump(2) << '\n';

  std::cout << "wrote " << out << " (label '" << result_label << "', mode "
            << midgmm::to_string(result.mode) << ", objective "
            << result.objective << ") and " << report_path << "\n";
}

void run_sample(const std::string& model_path, const std::string& label,
                Index count, std::uint64_t seed, const std::string& out) {
  AttributeSpace<double> space = midgmm::io::load_space(model_path);
  const auto& mixture = space.at(label);  // throws UnknownLabel
  midgmm::io::SampleBatch batch;
  batch.meta = {label, "", ""};
  if (count > 0) {
    midgmm::SamplerConfig config;
    config.seed = seed;
    config.count = count;
    auto drawn = midgmm::sample(mixture, config);
    batch.values = std::move(drawn.values);
    batch.components = std::move(drawn.components);
  } else {
    batch.values.resize(0, space.dimension());
  }
  midgmm::io::export_samples(batch, space.dimension(), out);
  std::cout << "wrote " << out << " (" << count << " samples)\n";
}

struct ComponentSelector {
  std::string label;
  Index component;
};

ComponentSelector parse_selector(const std::string& text) {
  const auto pos = text.rfind('.');
  if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
    throw CLI::ValidationError(
        "selector", "expected label.component, got '" + text + "'");
  char* end = nullptr;
  const std::string number = text.substr(pos + 1);
  const long index = std::strtol(number.c_str(), &end, 10);
  if (end == number.c_str() || *end != '\0' || index < 0)
    throw CLI::ValidationError(
        "selector", "malformed component index in '" + text + "'");
  return {text.substr(0, pos), static_cast<Index>(index)};
}

void run_w2(const std::string& model_path, const std::string& selector_a,
            const std::string& selector_b) {
  const auto a = parse_selector(selector_a);
  const auto b = parse_selector(selector_b);
  AttributeSpace<double> space = midgmm::io::load_space(model_path);
  auto pick = [&](const ComponentSelector& s) -> const midgmm::DiagonalGaussian<double>& {
    const auto& mixture = space.at(s.label);
    if (s.component >= mixture.component_count())
      midgmm::fail(Errc::invalid_argument,
                   "attribute '" + s.label + "' has " +
                       std::to_string(mixture.component_count()) +
                       " components, asked for index " +
                       std::to_string(s.component));
    return mixture.component(s.component).gaussian;
  };
  const double value = midgmm::w2_squared(pick(a), pick(b));
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  std::cout << buffer << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Wasserstein barycenters and seedable sampling for attribute-"
      "conditioned diagonal-covariance Gaussian mixture models"};
  app.require_subcommand(1);

  // synth
  Index synth_dim = 2, synth_attrs = 4, synth_mixtures = 3,
        synth_points = 600;
  std::uint64_t synth_seed = 0;
  std::string synth_out, synth_points_out;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic ground-truth space and labeled points");
  synth->add_option("--dim", synth_dim, "Embedding dimension")
      ->check(CLI::Range(Index(1), Index(1) << 20));
  synth->add_option("--attrs", synth_attrs, "Number of attributes (L)")
      ->check(CLI::Range(Index(1), Index(1) << 20));
  synth->add_option("--mixtures", synth_mixtures, "Components per mixture (K)")
      ->check(CLI::Range(Index(1), Index(1) << 20));
  synth->add_option("--points", synth_points, "Points per attribute")
      ->check(CLI::Range(Index(1), Index(1) << 30));
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--out", synth_out, "Output model file (JSON)")
      ->required();
  synth->add_option("--points-out", synth_points_out,
                    "Output points CSV (default: <out>.points.csv)");
  synth->callback([&] {
    run_synth(synth_dim, synth_attrs, synth_mixtures, synth_points,
              synth_seed, synth_out, synth_points_out);
  });

  // fit
  std::string fit_points, fit_out;
  Index fit_mixtures = 3, fit_max_iters = 200;
  std::uint64_t fit_seed = 0;
  double fit_tol = 1e-7, fit_floor = 1e-4;
  auto* fit = app.add_subcommand(
      "fit", "Fit one mixture per attribute from a labeled points CSV");
  fit->add_option("--points", fit_points, "Input labeled points CSV")
      ->required();
  fit->add_option("--mixtures", fit_mixtures, "Components per mixture (K)")
      ->check(CLI::Range(Index(1), Index(1) << 20));
  fit->add_option("--seed", fit_seed, "RNG seed");
  fit->add_option("--max-iters", fit_max_iters, "EM iteration cap")
      ->check(CLI::Range(Index(1), Index(1) << 20));
  fit->add_option("--tol", fit_tol, "Relative NLL convergence tolerance")
      ->check(CLI::PositiveNumber);
  fit->add_option("--stddev-floor", fit_floor, "Stddev floor during EM")
      ->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_out, "Output model file (JSON)")->required();
  fit->callback([&] {
    run_fit(fit_points, fit_mixtures, fit_seed, fit_max_iters, fit_tol,
            fit_floor, fit_out);
  });

  // barycenter
  std::vector<std::string> bary_models, bary_lambda;
  std::string bary_mode = "auto", bary_out, bary_report, bary_label;
  double bary_prune_eps = 1e-12;
  Index bary_candidate_cap = midgmm::BarycenterOptions{}.candidate_cap;
  Index bary_lp_cap = midgmm::BarycenterOptions{}.lp_variable_cap;
  auto* bary = app.add_subcommand(
      "barycenter",
      "Compute the weighted barycenter of attribute mixtures");
  bary->add_option("--model", bary_models,
                   "Model file(s); repeat to merge attribute spaces")
      ->required();
  bary->add_option("--lambda", bary_lambda,
                   "Interpolation weights as label=w[,label=w...]")
      ->required()
      ->delimiter(',');
  bary->add_option("--mode", bary_mode, "Plan mode (default: auto)")
      ->check(CLI::IsMember({"auto", "exact", "hard"}));
  bary->add_option("--prune-eps", bary_prune_eps,
                   "Weight threshold for pruning")
      ->check(CLI::NonNegativeNumber);
  bary->add_option("--candidate-cap", bary_candidate_cap,
                   "Cap on the candidate count")
      ->check(CLI::PositiveNumber);
  bary->add_option("--lp-cap", bary_lp_cap,
                   "Cap on exact-mode LP variables")
      ->check(CLI::PositiveNumber);
  bary->add_option("--out", bary_out, "Output model file (JSON)")->required();
  bary->add_option("--report", bary_report,
                   "Report sidecar path (default: <out>.report.json)");
  bary->add_option("--label", bary_label,
                   "Label for the result (default: derived)");
  bary->callback([&] {
    run_barycenter(bary_models, bary_lambda, bary_mode, bary_prune_eps,
                   bary_candidate_cap, bary_lp_cap, bary_out, bary_report,
                   bary_label);
  });

  // sample
  std::string sample_model, sample_label, sample_out;
  Index sample_n = 1;
  std::uint64_t sample_seed = 0;
  auto* smp = app.add_subcommand("sample",
                                 "Draw embeddings from a stored mixture");
  smp->add_option("--model", sample_model, "Model file (JSON)")->required();
  smp->add_option("--label", sample_label, "Attribute label")->required();
  smp->add_option("--n", sample_n, "Number of samples")
      ->check(CLI::Range(Index(0), Index(1) << 30));
  smp->add_option("--seed", sample_seed, "RNG seed");
  smp->add_option("--out", sample_out, "Output CSV")->required();
  smp->callback([&] {
    run_sample(sample_model, sample_label, sample_n, sample_seed, sample_out);
  });

  // w2
  std::string w2_model, w2_a, w2_b;
  auto* w2 = app.add_subcommand(
      "w2", "Print the squared W2 distance between two stored components");
  w2->add_option("--model", w2_model, "Model file (JSON)")->required();
  w2->add_option("selector_a", w2_a, "First component as label.index")
      ->required();
  w2->add_option("selector_b", w2_b, "Second component as label.index")
      ->required();
  w2->callback([&] { run_w2(w2_model, w2_a, w2_b); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
