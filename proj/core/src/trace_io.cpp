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

#include "gradagrad/trace_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "gradagrad/data.hpp"

namespace gradagrad {

void write_trace_csv(std::ostream& out, std::span<const StepTrace> traces) {
  out << kTraceHeader << '\n';
  for (const StepTrace& step : traces) {
    for (const CoordTrace& c : step.coords) {
      out << step.k << ',' << c.i << ',' << format_double(c.g) << ',' << format_double(c.v_raw) << ','
          << format_double(c.v_clipped) << ',' << to_string(c.branch) << ',';
      if (c.r) out << format_double(*c.r);
      out << ',' << format_double(c.gamma) << ',' << format_double(c.alpha) << ',' << format_double(c.a) << '\n';
    }
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

enum Column { kK, kI, kG, kVRaw, kVClipped, kBranch, kR, kGamma, kAlpha, kA, kColumnCount };

constexpr std::array<std::string_view, kColumnCount> kColumnNames = {
    "k", "i", "g", "v_raw", "v_clipped", "branch", "r", "gamma", "alpha", "a"};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw TraceFormatError("trace line " + std::to_string(line) + ": " + what);
}

double to_real(std::string_view field, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || end != field.data() + field.size()) {
    fail(line, "bad value '" + std::string(field) + "' in column " + std::string(column));
  }
  return value;
}

std::size_t to_index(std::string_view field, std::size_t line, std::string_view column) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || end != field.data() + field.size()) {
    fail(line, "bad integer '" + std::string(field) + "' in column " + std::string(column));
  }
  return value;
}

}  // namespace

std::vector<StepTrace> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("trace is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::array<std::size_t, kColumnCount> position{};
  const auto header = split_commas(line);
  std::string missing;
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == kColumnNames[c]) found = h;
    }
    if (found == header.size()) {
      missing += missing.empty() ? "" : ", ";
      missing += kColumnNames[c];
    }
    position[c] = found;
  }
  if (!missing.empty()) throw TraceFormatError("trace is missing columns: " + missing);

  std::vector<StepTrace> traces;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      fail(line_number, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    auto field = [&](Column c) { return fields[position[c]]; };

    CoordTrace rec;
    const std::size_t k = to_index(field(kK), line_number, "k");
    rec.i = to_index(field(kI), line_number, "i");
    rec.g = to_real(field(kG), line_number, "g");
    rec.v_raw = to_real(field(kVRaw), line_number, "v_raw");
    rec.v_clipped = to_real(field(kVClipped), line_number, "v_clipped");
    const auto branch = parse_branch(field(kBranch));
    if (!branch) fail(line_number, "unknown branch '" + std::string(field(kBranch)) + "'");
    rec.branch = *branch;
    if (!field(kR).empty()) rec.r = to_real(field(kR), line_number, "r");
    rec.gamma = to_real(field(kGamma), line_number, "gamma");
    rec.alpha = to_real(field(kAlpha), line_number, "alpha");
    rec.a = to_real(field(kA), line_number, "a");

    if (traces.empty() || traces.back().k != k) {
      if (!traces.empty() && k < traces.back().k) fail(line_number, "step index decreases");
      traces.push_back(StepTrace{k, {}, std::nullopt});
    }
    traces.back().coords.push_back(rec);
  }
  return traces;
}

}  // namespace gradagrad
