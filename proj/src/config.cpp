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

#include "minr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "minr/error.hpp"

namespace minr {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string type_name(Config::Type t) {
  switch (t) {
    case Config::Type::string: return "string";
    case Config::Type::integer: return "integer";
    case Config::Type::real: return "float";
    case Config::Type::boolean: return "bool";
  }
  return "?";
}

std::string canonical(Config::Type type, std::string_view key,
                      std::string_view raw) {
  const std::string_view v = trim(raw);
  auto fail = [&]() -> std::string {
    throw ConfigError("config: " + std::string(key) + " expects " + type_name(type) +
                ", got '" + std::string(v) + "'");
  };
  switch (type) {
    case Config::Type::string:
      return std::string(v);
    case Config::Type::integer: {
      std::int64_t x = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || p != v.data() + v.size()) {
        // Seeds may use the full unsigned range.
        std::uint64_t u = 0;
        auto [pu, ecu] = std::from_chars(v.data(), v.data() + v.size(), u);
        if (ecu != std::errc() || pu != v.data() + v.size()) return fail();
        return std::to_string(u);
      }
      return std::to_string(x);
    }
    case Config::Type::real: {
      double x = 0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x))
        return fail();
      char buf[64];
      auto [end, ec2] = std::to_chars(buf, buf + sizeof(buf), x);
      return std::string(buf, end);
    }
    case Config::Type::boolean:
      if (v == "true" || v == "1") return "true";
      if (v == "false" || v == "0") return "false";
      return fail();
  }
  return fail();
}

}  // namespace

Config Config::defaults() {
  Config c;
  auto def = [&](const char* key, Type t, const char* v) {
    c.entries_[key] = Entry{t, canonical(t, key, v)};
  };
  using T = Type;
  def("data.source", T::string, "synth:faces_like");
  def("data.size", T::integer, "64");
  def("data.count", T::integer, "224");
  def("data.test_count", T::integer, "-1");
  def("data.seed", T::integer, "1");

  def("model.mode", T::string, "transinr");
  def("model.patch", T::integer, "8");
  def("model.d_model", T::integer, "128");
  def("model.depth", T::integer, "4");
  def("model.heads", T::integer, "4");
  def("model.inr_width", T::integer, "64");
  def("model.inr_layers", T::integer, "5");
  def("model.activation", T::string, "relu");
  def("model.features", T::string, "fourier");
  def("model.fourier_frequencies", T::integer, "6");
  def("model.fourier_base", T::real, "1");
  def("model.ginr_specific_layer", T::integer, "2");

  def("baseline.dec_dim", T::integer, "64");
  def("baseline.dec_depth", T::integer, "2");
  def("baseline.dec_heads", T::integer, "4");

  def("mask.strategy", T::string, "random");
  def("mask.ratio", T::real, "0.75");
  def("mask.seed", T::integer, "2");
  def("mask.fixed", T::boolean, "false");

  def("train.steps", T::integer, "5000");
  def("train.batch_size", T::integer, "8");
  def("train.lr", T::real, "1e-4");
  def("train.beta1", T::real, "0.9");
  def("train.beta2", T::real, "0.999");
  def("train.eps", T::real, "1e-8");
  def("train.weight_decay", T::real, "0");
  def("train.seed", T::integer, "3");
  def("train.checkpoint_every", T::integer, "1000");

  def("eval.seed", T::integer, "4");
  def("eval.strategies", T::string, "random,block");
  def("eval.ratios", T::string, "0.75");
  return c;
}

void Config::set(std::string_view key, std::string_view value) {
  auto it = entries_.find(trim(key));
  if (it == entries_.end()) {
    throw ConfigError("config: unknown key '" + std::string(trim(key)) + "'");
  }
  it->second.value = canonical(it->second.type, it->first, value);
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("config: override '" + std::string(assignment) +
                "' is not key=value");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Config::load_text(std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                  ": expected 'section.key = value'");
    }
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

bool Config::has(std::string_view key) const { return entries_.contains(key); }

const Config::Entry& Config::lookup(std::string_view key, Type type) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError("config: unknown key '" + std::string(key) + "'");
  if (it->second.type != type)
    throw ConfigError("config: " + std::string(key) + " is not a " + type_name(type));
  return it->second;
}

const std::string& Config::get_string(std::string_view key) const {
  return lookup(key, Type::string).value;
}

std::int64_t Config::get_int(std::string_view key) const {
  return std::stoll(lookup(key, Type::integer).value);
}

std::uint64_t Config::get_seed(std::string_view key) const {
  const std::string& v = lookup(key, Type::integer).value;
  if (!v.empty() && v[0] == '-') return static_cast<std::uint64_t>(std::stoll(v));
  return std::stoull(v);
}

double Config::get_double(std::string_view key) const {
  return std::stod(lookup(key, Type::real).value);
}

bool Config::get_bool(std::string_view key) const {
  return lookup(key, Type::boolean).value == "true";
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  std::vector<std::string> out;
  std::string_view rest = get_string(key);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [k, e] : entries_) out += k + " = " + e.value + "\n";
  return out;
}

}  // namespace minr
