// Copyright 2026 The GHM Authors. All Rights Reserved.
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

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include <fmt/core.h>

#include "ghm/cli.hpp"
#include "ghm/cls_loss.hpp"
#include "ghm/reg_loss.hpp"

namespace ghm::cli {
namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

struct Record {
  std::optional<double> p;
  std::optional<int> label;
  std::optional<double> d;
};

double parse_number(std::string_view text, std::size_t line, std::string_view key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, fmt::format("bad number '{}' for key {}", text, key));
  }
  return value;
}

// Returns nullopt for blank and comment lines.
std::optional<Record> parse_line(std::string_view text, std::size_t line) {
  Record rec;
  bool any = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    pos = text.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    if (!any && text[pos] == '#') return std::nullopt;
    const std::size_t end = std::min(text.find_first_of(" \t\r", pos), text.size());
    const std::string_view token = text.substr(pos, end - pos);
    pos = end;
    any = true;

    const std::size_t eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ParseError(line, fmt::format("expected key=value, got '{}'", token));
    }
    const std::string_view key = token.substr(0, eq);
    const std::string_view value = token.substr(eq + 1);
    if (key == "p") {
      rec.p = parse_number(value, line, key);
    } else if (key == "label") {
      if (value == "0" || value == "1") {
        rec.label = value == "1" ? 1 : 0;
      } else {
        throw ParseError(line, fmt::format("label must be 0 or 1, got '{}'", value));
      }
    } else if (key == "d") {
      rec.d = parse_number(value, line, key);
    }
  }
  if (!any) return std::nullopt;
  return rec;
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  std::size_t records = 0;
  while (std::getline(in, text)) {
    ++line;
    if (auto rec = parse_line(text, line)) {
      fn(*rec, line);
      ++records;
    }
  }
  if (records == 0) {
    throw Error("no records");
  }
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(fmt::format("line {}: {}", line, message)), line_(line) {}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error("invalid config: " + join(problems, "; ")), problems_(std::move(problems)) {}

std::vector<ClassificationExample> read_cls_dump(std::istream& in) {
  std::vector<ClassificationExample> out;
  for_each_record(in, [&](const Record& rec, std::size_t line) {
    if (!rec.p || !rec.label) {
      throw ParseError(line, "classification record needs p and label");
    }
    if (!(*rec.p >= 0.0 && *rec.p <= 1.0)) {
      throw ParseError(line, fmt::format("p must lie in [0, 1], got {}", *rec.p));
    }
    out.push_back({*rec.p, *rec.label});
  });
  return out;
}

std::vector<double> read_reg_dump(std::istream& in) {
  std::vector<double> out;
  for_each_record(in, [&](const Record& rec, std::size_t line) {
    if (!rec.d) {
      throw ParseError(line, "regression record needs d");
    }
    if (!std::isfinite(*rec.d)) {
      throw ParseError(line, "d must be finite");
    }
    out.push_back(*rec.d);
  });
  return out;
}

void write_cls_dump(std::ostream& out, const std::vector<ClassificationExample>& batch) {
  for (const auto& ex : batch) {
    out << fmt::format("p={:.17g} label={}\n", ex.p, ex.label);
  }
}

void write_reg_dump(std::ostream& out, const std::vector<double>& residuals) {
  for (double d : residuals) {
    out << fmt::format("d={:.17g}\n", d);
  }
}

std::vector<double> read_gradient_norms(std::istream& in, DumpKind kind, double mu) {
  if (kind == DumpKind::kClassification) {
    return gradient_norms_cls(read_cls_dump(in));
  }
  return gradient_norms_reg(read_reg_dump(in), mu);
}

std::string format_real(double value) { return fmt::format("{:.9g}", value); }

}  // namespace ghm::cli
