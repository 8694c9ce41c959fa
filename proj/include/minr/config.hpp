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

#ifndef MINR_CONFIG_HPP_
#define MINR_CONFIG_HPP_

// Flat `section.key = value` configuration. Every key has a typed default;
// files and command-line overrides are layered on top, and unknown keys are
// rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace minr {

class Config {
 public:
  enum class Type { string, integer, real, boolean };

  struct Entry {
    Type type;
    std::string value;  // canonical text form
  };

  static Config defaults();

  // Throws minr::Error on unknown key or a value that does not parse.
  void set(std::string_view key, std::string_view value);
  // Parses `key=value` (used by --set).
  void apply_override(std::string_view assignment);
  // Lines of `section.key = value`; `#` starts a comment.
  void load_text(std::string_view text, std::string_view origin = "<text>");
  void load_file(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  const std::string& get_string(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_seed(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;

  // Sorted, one `key = value` per line; load_text(to_text()) round-trips.
  std::string to_text() const;

  const std::map<std::string, Entry, std::less<>>& entries() const {
    return entries_;
  }

  bool operator==(const Config& other) const { return to_text() == other.to_text(); }

 private:
  const Entry& lookup(std::string_view key, Type type) const;
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace minr

#endif  // MINR_CONFIG_HPP_
