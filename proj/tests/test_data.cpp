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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "gradagrad/data.hpp"
#include "gradagrad/seed.hpp"

using namespace gradagrad;

namespace {

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_libsvm(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("parse a single line") {
  const SparseExample ex = parse_libsvm_line("+1 2:0.5 10:-3e2");
  CHECK(ex.label == 1.0);
  REQUIRE(ex.features.size() == 2);
  CHECK(ex.features[0] == Feature{2, 0.5});
  CHECK(ex.features[1] == Feature{10, -300.0});

  CHECK(parse_libsvm_line("-1").features.empty());
  CHECK(parse_libsvm_line("  3\t1:1  ").label == 3.0);
}

TEST_CASE("malformed lines report their line number") {
  CHECK_THROWS_AS(parse_libsvm_line("abc 1:2"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 0:2"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 1:nan"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 1:inf"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 1:2 1:3"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 1=2"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 x:2"), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 -1:2"), ParseError);

  try {
    parse_libsvm_line("1 5:1 3:1", 42);
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 42);
    CHECK(std::string(e.what()).rfind("line 42:", 0) == 0);
  }

  CHECK(parse_error_line("1 1:1\n\n# comment\n1 1:q\n") == 4);
  CHECK(parse_error_line("1 1:1\n1 2:2\n") == 0);
}

TEST_CASE("malformed fixture fails on line 3") {
  CHECK_THROWS_AS(load_dataset(GRADAGRAD_FIXTURES "/malformed.libsvm"), ParseError);
  try {
    load_dataset(GRADAGRAD_FIXTURES "/malformed.libsvm");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load_dataset(GRADAGRAD_FIXTURES "/does_not_exist.libsvm"), std::runtime_error);
}

TEST_CASE("tiny fixture") {
  const Dataset d = load_dataset(GRADAGRAD_FIXTURES "/tiny.libsvm");
  CHECK(d.size() == 4);
  CHECK(d.dim == 3);
  CHECK(d.examples[0].features == std::vector<Feature>{{1, 0.5}, {3, 2.0}});
  CHECK(d.examples[2].features[0].value == 1e-3);
  CHECK(d.examples[3].features.empty());
  CHECK(d.label_map.empty());

  const Dataset n = normalize_labels(d);
  CHECK(n.examples[0].label == 1.0);
  CHECK(n.examples[1].label == -1.0);
  CHECK(n.examples[3].label == -1.0);
  CHECK(n.label_map == std::vector<LabelMapping>{{0.0, -1.0}, {1.0, 1.0}});
}

TEST_CASE("label normalization") {
  auto with_labels = [](std::initializer_list<double> labels) {
    Dataset d;
    for (double l : labels) d.examples.push_back({l, {}});
    return d;
  };
  auto labels_of = [](const Dataset& d) {
    std::vector<double> out;
    for (const auto& ex : d.examples) out.push_back(ex.label);
    return out;
  };

  CHECK(labels_of(normalize_labels(with_labels({-1, 1, 1}))) == std::vector<double>{-1, 1, 1});
  CHECK(labels_of(normalize_labels(with_labels({1, 1}))) == std::vector<double>{1, 1});
  CHECK(labels_of(normalize_labels(with_labels({1, 2, 2}))) == std::vector<double>{1, -1, -1});
  CHECK(labels_of(normalize_labels(with_labels({3, 1, 2, 3}))) == std::vector<double>{1, -1, -1, 1});
  // Tie between 1 and 2: the smaller label wins.
  CHECK(labels_of(normalize_labels(with_labels({2, 1, 3, 1, 2}))) == std::vector<double>{-1, 1, -1, 1, -1});
  CHECK_THROWS_AS(normalize_labels(with_labels({3, 5})), std::invalid_argument);

  LabelRule ovr{LabelRule::Kind::one_vs_rest, 5.0};
  CHECK(labels_of(normalize_labels(with_labels({3, 5}), ovr)) == std::vector<double>{-1, 1});
  ovr.positive_label = 7.0;
  CHECK_THROWS_AS(normalize_labels(with_labels({3, 5}), ovr), std::invalid_argument);
}

TEST_CASE("wine fixture binarizes on the majority class") {
  const Dataset raw = load_dataset(GRADAGRAD_FIXTURES "/wine_scale.libsvm");
  CHECK(raw.size() == 178);
  CHECK(raw.dim == 13);
  const Dataset wine = normalize_labels(raw);
  const auto positives =
      std::count_if(wine.examples.begin(), wine.examples.end(), [](const auto& ex) { return ex.label == 1.0; });
  CHECK(positives == 71);

  const Dataset binary = load_dataset(GRADAGRAD_FIXTURES "/wine_binary_scale.libsvm");
  for (std::size_t j = 0; j < binary.size(); ++j) {
    CHECK(binary.examples[j].label == wine.examples[j].label);
    CHECK(binary.examples[j].features == wine.examples[j].features);
  }
}

TEST_CASE("breast cancer fixture") {
  const Dataset d = load_dataset(GRADAGRAD_FIXTURES "/breast_cancer_scale.libsvm");
  CHECK(d.size() == 569);
  CHECK(d.dim == 30);
  for (const auto& ex : d.examples) {
    CHECK((ex.label == 1.0 || ex.label == -1.0));
    for (const auto& f : ex.features) CHECK(std::abs(f.value) <= 1.0);
  }
  CHECK(normalize_labels(d).examples == d.examples);
}

TEST_CASE("format_double is shortest and lossless") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(1e-300) == "1e-300");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 1000; ++t) {
    const double v = u(rng) * std::pow(10.0, static_cast<double>(t % 40) - 20.0);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("property: write then parse reproduces the dataset") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> n_features(0, 6);
  std::uniform_int_distribution<std::size_t> gap(1, 5);
  std::normal_distribution<double> value(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset d;
    for (int j = 0; j < 20; ++j) {
      SparseExample ex{j % 2 == 0 ? 1.0 : -1.0, {}};
      std::size_t idx = 0;
      for (int f = n_features(rng); f > 0; --f) {
        idx += gap(rng);
        ex.features.push_back({idx, value(rng)});
      }
      d.dim = std::max(d.dim, idx);
      d.examples.push_back(ex);
    }
    std::stringstream buffer;
    write_libsvm(buffer, d);
    CHECK(parse_libsvm(buffer) == d);
  }

  const Dataset fixture = load_dataset(GRADAGRAD_FIXTURES "/breast_cancer_scale.libsvm");
  std::stringstream buffer;
  write_libsvm(buffer, fixture);
  CHECK(parse_libsvm(buffer) == fixture);
}

TEST_CASE("property: minibatches partition the indices and are seed-deterministic") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(1, 300);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(rng);
    const std::size_t b = size(rng);
    const std::uint64_t seed = rng();
    const auto batches = minibatch_iter(n, b, seed);
    CHECK(batches.size() == (n + b - 1) / b);
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      CHECK(batches[i].size() == (i + 1 < batches.size() ? b : n - b * (batches.size() - 1)));
      seen.insert(seen.end(), batches[i].begin(), batches[i].end());
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(seen[i] == i);
    CHECK(minibatch_iter(n, b, seed) == batches);
  }
  CHECK(minibatch_iter(100, 10, 1) != minibatch_iter(100, 10, 2));
  CHECK(minibatch_iter(0, 3, 1).empty());
  CHECK_THROWS_AS(minibatch_iter(10, 0, 1), std::invalid_argument);
}

TEST_CASE("derived seeds separate streams and counters") {
  static_assert(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(0, 0, 0) != derive_seed(0, 0, 1));
  CHECK(derive_seed(0, 0, 0) != derive_seed(0, 1, 0));
  CHECK(derive_seed(0, 0, 0) != derive_seed(1, 0, 0));
  CHECK(derive_seed(5, 1, 0) != derive_seed(5, 0, 1));
}
