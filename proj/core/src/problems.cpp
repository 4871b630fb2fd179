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

#include "gradagrad/problems.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gradagrad/seed.hpp"

namespace gradagrad {

SampleStream::SampleStream(std::uint64_t seed) : seed_(seed), engine_(derive_seed(seed, 0)) {}

const std::vector<std::size_t>& SampleStream::next_batch(std::size_t n, std::size_t batch_size) {
  if (cursor_ == batches_.size()) {
    batches_ = minibatch_iter(n, batch_size, derive_seed(seed_, 1, epochs_started_));
    cursor_ = 0;
    ++epochs_started_;
  }
  return batches_[cursor_++];
}

namespace {

void check_dim(std::span<const double> x, std::size_t dim) {
  detail::require(x.size() == dim, "problem: point dimension mismatch");
}

class AbsValue final : public Problem {
 public:
  explicit AbsValue(std::size_t dim) : dim_(dim) {}

  std::string name() const override { return "abs"; }
  std::size_t dim() const override { return dim_; }

  Sample sample(std::span<const double> x, SampleStream&) const override {
    return {grad_full(x), loss_full(x)};
  }

  double loss_full(std::span<const double> x) const override {
    check_dim(x, dim_);
    double sum = 0.0;
    for (double v : x) sum += std::abs(v);
    return sum;
  }

  Vector grad_full(std::span<const double> x) const override {
    check_dim(x, dim_);
    Vector g(dim_);
    for (std::size_t i = 0; i < dim_; ++i) g[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    return g;
  }

  std::optional<double> f_star() const override { return 0.0; }
  bool deterministic() const override { return true; }

  bool smooth_at(std::span<const double> x, double h) const override {
    for (double v : x) {
      if (std::abs(v) <= h) return false;
    }
    return true;
  }

 private:
  std::size_t dim_;
};

class Quadratic final : public Problem {
 public:
  Quadratic(Vector diag, double noise_std) : diag_(std::move(diag)), noise_std_(noise_std) {}

  std::string name() const override { return "quadratic"; }
  std::size_t dim() const override { return diag_.size(); }

  Sample sample(std::span<const double> x, SampleStream& stream) const override {
    Sample s{grad_full(x), loss_full(x)};
    if (noise_std_ > 0.0) {
      std::normal_distribution<double> noise(0.0, noise_std_);
      for (std::size_t i = 0; i < s.grad.size(); ++i) {
        const double xi = noise(stream.engine());
        s.grad[i] += xi;
        s.loss += xi * x[i];
      }
    }
    return s;
  }

  double loss_full(std::span<const double> x) const override {
    check_dim(x, diag_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += diag_[i] * x[i] * x[i];
    return 0.5 * sum;
  }

  Vector grad_full(std::span<const double> x) const override {
    check_dim(x, diag_.size());
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = diag_[i] * x[i];
    return g;
  }

  std::optional<double> f_star() const override { return 0.0; }
  bool deterministic() const override { return noise_std_ == 0.0; }

 private:
  Vector diag_;
  double noise_std_;
};

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

class LogisticRegression final : public Problem {
 public:
  LogisticRegression(std::shared_ptr<const Dataset> data, std::size_t batch_size)
      : data_(std::move(data)), batch_size_(batch_size) {}

  std::string name() const override { return "logistic"; }
  std::size_t dim() const override { return data_->dim; }

  Sample sample(std::span<const double> w, SampleStream& stream) const override {
    check_dim(w, data_->dim);
    const auto& batch = stream.next_batch(data_->size(), batch_size_);
    Sample s{Vector(data_->dim, 0.0), 0.0};
    for (std::size_t j : batch) accumulate(data_->examples[j], w, s);
    scale(s, static_cast<double>(batch.size()));
    return s;
  }

  double loss_full(std::span<const double> w) const override { return full(w).loss; }
  Vector grad_full(std::span<const double> w) const override { return full(w).grad; }

  std::optional<double> accuracy(std::span<const double> w) const override {
    check_dim(w, data_->dim);
    std::size_t correct = 0;
    for (const SparseExample& ex : data_->examples) {
      if (ex.label * margin(ex, w) > 0.0) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data_->size());
  }

  bool deterministic() const override { return batch_size_ >= data_->size(); }

  std::optional<std::size_t> steps_per_epoch() const override {
    return (data_->size() + batch_size_ - 1) / batch_size_;
  }

 private:
  static double margin(const SparseExample& ex, std::span<const double> w) {
    double dot = 0.0;
    for (const Feature& f : ex.features) dot += w[f.index - 1] * f.value;
    return dot;
  }

  static void accumulate(const SparseExample& ex, std::span<const double> w, Sample& s) {
    const double t = ex.label * margin(ex, w);
    s.loss += softplus(-t);
    const double coeff = -ex.label * sigmoid(-t);
    for (const Feature& f : ex.features) s.grad[f.index - 1] += coeff * f.value;
  }

  static void scale(Sample& s, double count) {
    s.loss /= count;
    for (double& g : s.grad) g /= count;
  }

  Sample full(std::span<const double> w) const {
    check_dim(w, data_->dim);
    Sample s{Vector(data_->dim, 0.0), 0.0};
    for (const SparseExample& ex : data_->examples) accumulate(ex, w, s);
    scale(s, static_cast<double>(data_->size()));
    return s;
  }

  std::shared_ptr<const Dataset> data_;
  std::size_t batch_size_;
};

class Constant final : public Problem {
 public:
  Constant(std::size_t dim, double value) : dim_(dim), value_(value) {}

  std::string name() const override { return "constant"; }
  std::size_t dim() const override { return dim_; }
  Sample sample(std::span<const double> x, SampleStream&) const override { return {grad_full(x), value_}; }
  double loss_full(std::span<const double> x) const override {
    check_dim(x, dim_);
    return value_;
  }
  Vector grad_full(std::span<const double> x) const override {
    check_dim(x, dim_);
    return Vector(dim_, 0.0);
  }
  std::optional<double> f_star() const override { return value_; }
  bool deterministic() const override { return true; }

 private:
  std::size_t dim_;
  double value_;
};

}  // namespace

std::unique_ptr<Problem> make_abs_value(std::size_t dim) {
  detail::require(dim >= 1, "abs_value: dim must be at least 1");
  return std::make_unique<AbsValue>(dim);
}

std::unique_ptr<Problem> make_quadratic(Vector diag, double noise_std) {
  detail::require(!diag.empty(), "quadratic: empty diagonal");
  for (double d : diag) detail::require(d > 0.0, "quadratic: diagonal entries must be positive");
  detail::require(noise_std >= 0.0, "quadratic: noise_std must be nonnegative");
  return std::make_unique<Quadratic>(std::move(diag), noise_std);
}

std::unique_ptr<Problem> make_logistic_regression(std::shared_ptr<const Dataset> dataset,
                                                  std::size_t batch_size) {
  if (!dataset || dataset->examples.empty()) throw std::invalid_argument("logistic: empty dataset");
  if (batch_size == 0) throw std::invalid_argument("logistic: batch_size must be at least 1");
  for (const SparseExample& ex : dataset->examples) {
    if (ex.label != 1.0 && ex.label != -1.0) {
      throw std::invalid_argument("logistic: label " + format_double(ex.label) + " is not ±1");
    }
  }
  return std::make_unique<LogisticRegression>(std::move(dataset), batch_size);
}

std::unique_ptr<Problem> make_constant(std::size_t dim, double value) {
  detail::require(dim >= 1, "constant: dim must be at least 1");
  return std::make_unique<Constant>(dim, value);
}

}  // namespace gradagrad
