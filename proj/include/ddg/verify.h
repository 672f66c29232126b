/*
 * Copyright 2026 The DDG Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DDG_VERIFY_H_
#define DDG_VERIFY_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace ddg {

// One measured quantity compared against a threshold.
struct VerifyCheck {
  std::string name;
  double measured = 0;
  double threshold = 0;
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;

  bool passed() const;
};

// Suites: convolution, sampler, transform, rounding.
const std::vector<std::string>& VerifySuiteNames();

absl::StatusOr<VerifyReport> RunVerifySuite(std::string_view suite);

}  // namespace ddg

#endif  // DDG_VERIFY_H_
