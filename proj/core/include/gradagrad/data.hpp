// Copyright 2026 The gradagrad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gradagrad {

struct Feature {
  std::size_t index = 0;  // 1-based, as in the file
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

struct SparseExample {
  double label = 0.0;
  /// Strictly increasing indices; absent indices are implicit zeros.
  std::vector<Feature> features;

  friend bool operator==(const SparseExample&, const SparseExample&) = default;
};

struct LabelMapping {
  double original = 0.0;
  double normalized = 0.0;

  friend bool operator==(const LabelMapping&, const LabelMapping&) = default;
};

struct Dataset {
  std::vector<SparseExample> examples;
  std::size_t dim = 0;
  /// Filled by normalize_labels; empty for a freshly loaded file.
  std::vector<LabelMapping> label_map;

  std::size_t size() const { return examples.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Malformed LIBSVM input. `line()` is the 1-based physical line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses `label idx:val idx:val ...`.
SparseExample parse_libsvm_line(std::string_view line, std::size_t line_number = 1);

/// Reads a whole stream. Blank lines and lines starting with '#' are skipped.
Dataset parse_libsvm(std::istream& in);

/// Throws std::runtime_error when the file cannot be opened, ParseError on
/// malformed content.
Dataset load_dataset(const std::filesystem::path& path);

/// Shortest round-trip text for every value, so parse(format(d)) == d.
std::string format_libsvm_line(const SparseExample& example);
void write_libsvm(std::ostream& out, const Dataset& dataset);

struct LabelRule {
  enum class Kind {
    /// {−1,+1} as is, {0,1} → {−1,+1}, {1,2} → {+1,−1}, three or more
    /// classes → most frequent class against the rest. Any other two-label
    /// set is rejected.
    automatic,
    /// `positive_label` (or, when empty, the most frequent label) → +1,
    /// everything else → −1.
    one_vs_rest,
  };

  Kind kind = Kind::automatic;
  std::optional<double> positive_label;
};

/// Maps labels to ±1 and records the mapping. Throws std::invalid_argument
/// listing the distinct labels when the rule cannot map them.
Dataset normalize_labels(Dataset dataset, const LabelRule& rule = {});

/// A seeded permutation of 0..n−1 cut into consecutive batches of
/// `batch_size` (the last one possibly shorter).
std::vector<std::vector<std::size_t>> minibatch_iter(std::size_t n, std::size_t batch_size,
                                                     std::uint64_t epoch_seed);
std::vector<std::vector<std::size_t>> minibatch_iter(const Dataset& dataset, std::size_t batch_size,
                                                     std::uint64_t epoch_seed);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace gradagrad
