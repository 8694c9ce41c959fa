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

#ifndef MINR_ERROR_HPP_
#define MINR_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace minr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by autodiff ops whose inputs do not conform to the op's shape rule.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Unknown keys, malformed values or overrides. The CLI maps it to a usage
// error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace minr

#endif  // MINR_ERROR_HPP_
