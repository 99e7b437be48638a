// midgmm/io.hpp
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
// Serialization of attribute spaces (JSON model files, format_version 1,
// standard deviations on disk — never variances) and of sample sets (CSV
// with header attribute,mode,lambda,component,dim_0,...,dim_{D-1}).
// Numeric round trips are exact: JSON doubles use shortest round-trip
// formatting, CSV doubles are written with 17 significant digits.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "midgmm/fitting.hpp"
#include "midgmm/types.hpp"

namespace midgmm::io {

inline constexpr int kModelFormatVersion = 1;

void save_space(const AttributeSpace<double>& space,
                const std::filesystem::path& path);

AttributeSpace<double> load_space(const std::filesystem::path& path);

struct SampleMetadata {
  std::string attribute;
  std::string mode;    // free-form tag; may be empty
  std::string lambda;  // free-form tag; may be empty
};

struct SampleBatch {
  SampleMetadata meta;
  Matrix<double> values;           // n x D
  std::vector<Index> components;   // chosen component per row
};

void export_samples(std::span<const SampleBatch> batches, Index dimension,
                    const std::filesystem::path& path);

inline void export_samples(const SampleBatch& batch, Index dimension,
                           const std::filesystem::path& path) {
  export_samples(std::span<const SampleBatch>(&batch, 1), dimension, path);
}

/// Reads a sample/points CSV back, grouping rows by attribute label in
/// order of first appearance.
std::vector<LabeledEmbeddings<double>> load_labeled_points(
    const std::filesystem::path& path);

}  // namespace midgmm::io
