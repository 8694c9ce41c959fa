// Copyright 2026 The MINR Authors. All Rights Reserved.
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

#ifndef MINR_GRADCHECK_HPP_
#define MINR_GRADCHECK_HPP_

// Finite-difference suites over every op and every model pipeline, shared
// by the `gradcheck` subcommand and the test suite.

#include <cstdint>
#include <string>
#include <vector>

#include "minr/autodiff.hpp"
#include "minr/model.hpp"

namespace minr {

struct GradSuite {
  std::string name;
  ad::GradCheckReport report;
  double seconds = 0.0;
};

inline constexpr double kGradTolerance = 1e-4;

// One suite per op: random inputs, loss = sum(op(x) * w) for fixed random w.
GradSuite op_suite(ad::OpKind kind, std::uint64_t seed = 11,
                   double tolerance = kGradTolerance);

// Small model (sin INR) whose every parameter is checked against a 2-instance
// batch_loss under 50% random masks.
GradSuite pipeline_suite(ModelMode mode, std::uint64_t seed = 12,
                         double tolerance = kGradTolerance);

// All op suites, then transinr, ginr and mae pipelines.
std::vector<GradSuite> run_all_suites(double tolerance = kGradTolerance);

}  // namespace minr

#endif  // MINR_GRADCHECK_HPP_
