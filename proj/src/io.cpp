// src/io.cpp
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

#include "midgmm/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace midgmm::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> csv_split(const std::string& line,
                                   const std::filesystem::path& path) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      if (!current.empty())
        fail(Errc::parse_error,
             path.string() + ": stray quote inside unquoted field");
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (in_quotes)
    fail(Errc::parse_error, path.string() + ": unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

double parse_double(const std::string& text,
                    const std::filesystem::path& path) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    fail(Errc::parse_error,
         path.string() + ": malformed number '" + text + "'");
  return value;
}

}  // namespace

void save_space(const AttributeSpace<double>& space,
                const std::filesystem::path& path) {
  ordered_json root;
  root["format_version"] = kModelFormatVersion;
  root["dimension"] = space.dimension();
  root["attributes"] = ordered_json::array();
  for (Index l = 0; l < space.size(); ++l) {
    const auto& mixture = space.mixtures()[static_cast<std::size_t>(l)];
    ordered_json entry;
    entry["label"] = space.labels()[static_cast<std::size_t>(l)];
    ordered_json weights = ordered_json::array();
    ordered_json means = ordered_json::array();
    ordered_json stddevs = ordered_json::array();
    for (Index k = 0; k < mixture.component_count(); ++k) {
      const auto& component = mixture.component(k);
      weights.push_back(component.weight);
      ordered_json mean = ordered_json::array();
      ordered_json stddev = ordered_json::array();
      for (Index d = 0; d < mixture.dimension(); ++d) {
        mean.push_back(component.gaussian.mean()(d));
        stddev.push_back(component.gaussian.stddev()(d));
      }
      means.push_back(std::move(mean));
      stddevs.push_back(std::move(stddev));
    }
    entry["weights"] = std::move(weights);
    entry["means"] = std::move(means);
    entry["stddevs"] = std::move(stddevs);
    root["attributes"].push_back(std::move(entry));
  }

  std::ofstream out(path);
  if (!out)
    fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  out << root.dump(2) << '\n';
  if (!out) fail(Errc::io_error, "failed writing '" + path.string() + "'");
}

AttributeSpace<double> load_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open '" + path.string() + "'");

  ordered_json root;
  try {
    root = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }

  int version = 0;
  Index dimension = 0;
  try {
    version = root.at("format_version").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }
  if (version != kModelFormatVersion)
    fail(Errc::unsupported_version,
         path.string() + ": format_version " + std::to_string(version) +
             " (supported: " + std::to_string(kModelFormatVersion) + ")");

  std::vector<std::string> labels;
  std::vector<GaussianMixture<double>> mixtures;
  try {
    dimension = root.at("dimension").get<Index>();
    for (const auto& entry : root.at("attributes")) {
      const auto label = entry.at("label").get<std::string>();
      const auto weights = entry.at("weights").get<std::vector<double>>();
      const auto means =
          entry.at("means").get<std::vector<std::vector<double>>>();
      const auto stddevs =
          entry.at("stddevs").get<std::vector<std::vector<double>>>();
      if (means.size() != weights.size() || stddevs.size() != weights.size())
        fail(Errc::validation_error,
             path.string() + ": attribute '" + label +
                 "': weights/means/stddevs lengths disagree");
      std::vector<MixtureComponent<double>> components;
      for (std::size_t k = 0; k < weights.size(); ++k) {
        if (static_cast<Index>(means[k].size()) != dimension ||
            static_cast<Index>(stddevs[k].size()) != dimension)
          fail(Errc::validation_error,
               path.string() + ": attribute '" + label + "', component " +
                   std::to_string(k) + ": expected dimension " +
                   std::to_string(dimension));
        Vector<double> mean =
            Eigen::Map<const Vector<double>>(means[k].data(), dimension);
        Vector<double> stddev =
            Eigen::Map<const Vector<double>>(stddevs[k].data(), dimension);
        try {
          components.push_back(
              {weights[k],
               DiagonalGaussian<double>(std::move(mean), std::move(stddev))});
        } catch (const Error& e) {
          fail(Errc::validation_error, path.string() + ": attribute '" +
                                           label + "', component " +
                                           std::to_string(k) + ": " +
                                           e.what());
        }
      }
      try {
        mixtures.emplace_back(std::move(components));
      } catch (const Error& e) {
        fail(Errc::validation_error,
             path.string() + ": attribute '" + label + "': " + e.what());
      }
      labels.push_back(label);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }

  try {
    return AttributeSpace<double>(std::move(labels), std::move(mixtures));
  } catch (const Error& e) {
    fail(Errc::validation_error, path.string() + ": " + e.what());
  }
}

void export_samples(std::span<const SampleBatch> batches, Index dimension,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    fail(Errc::io_error, "cannot open '" + path.string() + "' for writing");

  out << "attribute,mode,lambda,component";
  for (Index d = 0; d < dimension; ++d) out << ",dim_" << d;
  out << '\n';

  for (const auto& batch : batches) {
    if (batch.values.cols() != dimension)
      fail(Errc::dimension_mismatch,
           "batch '" + batch.meta.attribute + "' has dimension " +
               std::to_string(batch.values.cols()) + ", expected " +
               std::to_string(dimension));
    if (static_cast<Index>(batch.components.size()) != batch.values.rows())
      fail(Errc::invalid_argument,
           "batch '" + batch.meta.attribute +
               "': component list does not match sample count");
    for (Index i = 0; i < batch.values.rows(); ++i) {
      out << csv_quote(batch.meta.attribute) << ','
          << csv_quote(batch.meta.mode) << ',' << csv_quote(batch.meta.lambda)
          << ',' << batch.components[static_cast<std::size_t>(i)];
      for (Index d = 0; d < dimension; ++d)
        out << ',' << format_double(batch.values(i, d));
      out << '\n';
    }
  }
  if (!out) fail(Errc::io_error, "failed writing '" + path.string() + "'");
}

std::vector<LabeledEmbeddings<double>> load_labeled_points(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line))
    fail(Errc::parse_error, path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv_split(line, path);
  if (header.size() < 5 || header[0] != "attribute" || header[1] != "mode" ||
      header[2] != "lambda" || header[3] != "component")
    fail(Errc::parse_error, path.string() + ": unexpected header");
  const Index dimension = static_cast<Index>(header.size()) - 4;
  for (Index d = 0; d < dimension; ++d)
    if (header[static_cast<std::size_t>(4 + d)] !=
        "dim_" + std::to_string(d))
      fail(Errc::parse_error, path.string() + ": unexpected header column '" +
                                  header[static_cast<std::size_t>(4 + d)] +
                                  "'");

  std::vector<std::string> order;
  std::vector<std::vector<double>> rows_by_label;  // flattened row-major
  auto group_of = [&](const std::string& label) -> std::vector<double>& {
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] == label) return rows_by_label[i];
    order.push_back(label);
    rows_by_label.emplace_back();
    return rows_by_label.back();
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv_split(line, path);
    if (static_cast<Index>(fields.size()) != 4 + dimension)
      fail(Errc::parse_error,
           path.string() + ": row has " + std::to_string(fields.size()) +
               " fields, expected " + std::to_string(4 + dimension));
    auto& flat = group_of(fields[0]);
    for (Index d = 0; d < dimension; ++d)
      flat.push_back(parse_double(fields[static_cast<std::size_t>(4 + d)], path));
  }

  std::vector<LabeledEmbeddings<double>> result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Index rows = static_cast<Index>(rows_by_label[i].size()) / dimension;
    Matrix<double> points(rows, dimension);
    for (Index r = 0; r < rows; ++r)
      for (Index d = 0; d < dimension; ++d)
        points(r, d) =
            rows_by_label[i][static_cast<std::size_t>(r * dimension + d)];
    result.push_back({order[i], std::move(points)});
  }
  return result;
}

}  // namespace midgmm::io
