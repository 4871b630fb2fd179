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

#include "gradagrad/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace gradagrad {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && !is_space(text[pos])) ++pos;
    if (pos > start) tokens.push_back(text.substr(start, pos - start));
  }
  return tokens;
}

std::optional<double> parse_real(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<std::size_t> parse_index(std::string_view token) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size() || token.empty()) return std::nullopt;
  return value;
}

bool skippable(std::string_view line) {
  const auto tokens = split_ws(line);
  return tokens.empty() || tokens.front().front() == '#';
}

std::string list_labels(const std::map<double, std::size_t>& counts) {
  std::string out = "{";
  bool first = true;
  for (const auto& [label, count] : counts) {
    if (!first) out += ", ";
    out += format_double(label);
    first = false;
  }
  return out + "}";
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

SparseExample parse_libsvm_line(std::string_view line, std::size_t line_number) {
  const auto tokens = split_ws(line);
  if (tokens.empty()) throw ParseError(line_number, "empty line");

  SparseExample example;
  const auto label = parse_real(tokens.front());
  if (!label) throw ParseError(line_number, "non-numeric label '" + std::string(tokens.front()) + "'");
  example.label = *label;

  example.features.reserve(tokens.size() - 1);
  for (std::size_t t = 1; t < tokens.size(); ++t) {
    const std::string_view token = tokens[t];
    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line_number, "malformed feature '" + std::string(token) + "' (expected idx:val)");
    }
    const auto index = parse_index(token.substr(0, colon));
    if (!index || *index == 0) {
      throw ParseError(line_number, "invalid feature index in '" + std::string(token) + "'");
    }
    const auto value = parse_real(token.substr(colon + 1));
    if (!value) throw ParseError(line_number, "non-numeric feature value in '" + std::string(token) + "'");
    if (!example.features.empty() && *index <= example.features.back().index) {
      throw ParseError(line_number, "non-increasing feature index " + std::to_string(*index) + " after " +
                                        std::to_string(example.features.back().index));
    }
    example.features.push_back({*index, *value});
  }
  return example;
}

Dataset parse_libsvm(std::istream& in) {
  Dataset dataset;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (skippable(line)) continue;
    SparseExample example = parse_libsvm_line(line, line_number);
    if (!example.features.empty()) dataset.dim = std::max(dataset.dim, example.features.back().index);
    dataset.examples.push_back(std::move(example));
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
  return parse_libsvm(in);
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::string format_libsvm_line(const SparseExample& example) {
  std::string out = format_double(example.label);
  for (const Feature& f : example.features) {
    out += ' ';
    out += std::to_string(f.index);
    out += ':';
    out += format_double(f.value);
  }
  return out;
}

void write_libsvm(std::ostream& out, const Dataset& dataset) {
  for (const SparseExample& example : dataset.examples) out << format_libsvm_line(example) << '\n';
}

Dataset normalize_labels(Dataset dataset, const LabelRule& rule) {
  std::map<double, std::size_t> counts;
  for (const SparseExample& example : dataset.examples) ++counts[example.label];

  auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(counts.begin(), counts.end(), [&](const auto& entry) {
      return std::find(allowed.begin(), allowed.end(), entry.first) != allowed.end();
    });
  };
  // Ties go to the smallest label (std::map iterates in ascending order).
  auto most_frequent = [&] {
    return std::max_element(counts.begin(), counts.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->first;
  };

  std::map<double, double> mapping;
  auto one_vs_rest = [&](double positive) {
    for (const auto& entry : counts) mapping[entry.first] = entry.first == positive ? 1.0 : -1.0;
  };

  if (counts.empty()) {
    // nothing to map
  } else if (rule.kind == LabelRule::Kind::one_vs_rest) {
    const double positive = rule.positive_label.value_or(most_frequent());
    if (!counts.contains(positive)) {
      throw std::invalid_argument("positive label " + format_double(positive) + " not present in labels " +
                                  list_labels(counts));
    }
    one_vs_rest(positive);
  } else if (subset_of({-1.0, 1.0})) {
    for (const auto& entry : counts) mapping[entry.first] = entry.first;
  } else if (subset_of({0.0, 1.0})) {
    for (const auto& entry : counts) mapping[entry.first] = entry.first == 1.0 ? 1.0 : -1.0;
  } else if (subset_of({1.0, 2.0})) {
    for (const auto& entry : counts) mapping[entry.first] = entry.first == 1.0 ? 1.0 : -1.0;
  } else if (counts.size() >= 3) {
    one_vs_rest(most_frequent());
  } else {
    throw std::invalid_argument("no automatic ±1 mapping for labels " + list_labels(counts) +
                                "; choose a one-vs-rest positive class");
  }

  dataset.label_map.clear();
  for (const auto& [original, normalized] : mapping) dataset.label_map.push_back({original, normalized});
  for (SparseExample& example : dataset.examples) example.label = mapping.at(example.label);
  return dataset;
}

std::vector<std::vector<std::size_t>> minibatch_iter(std::size_t n, std::size_t batch_size,
                                                     std::uint64_t epoch_seed) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(epoch_seed);
  std::shuffle(order.begin(), order.end(), engine);

  std::vector<std::vector<std::size_t>> batches;
  batches.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

std::vector<std::vector<std::size_t>> minibatch_iter(const Dataset& dataset, std::size_t batch_size,
                                                     std::uint64_t epoch_seed) {
  return minibatch_iter(dataset.size(), batch_size, epoch_seed);
}

}  // namespace gradagrad
