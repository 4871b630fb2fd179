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
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradagrad/optim.hpp"

namespace gradagrad {

inline constexpr std::string_view kTraceHeader = "k,i,g,v_raw,v_clipped,branch,r,gamma,alpha,a";

/// One row per (step, coordinate). `r` is empty outside the negative branch.
void write_trace_csv(std::ostream& out, std::span<const StepTrace> traces);

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Columns are matched by header name, so extra columns are ignored and
/// column order does not matter. Throws TraceFormatError naming missing
/// columns or the offending line.
std::vector<StepTrace> read_trace_csv(std::istream& in);

}  // namespace gradagrad
