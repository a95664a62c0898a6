// Copyright 2026 The Authors.
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
#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace netmirror::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_line(std::string_view line);

// Quotes a field when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Reads all records, skipping blank lines and lines starting with '#'.
// When the first record equals header it is treated as a header and dropped.
// Throws InputError on malformed quoting or a field-count mismatch.
std::vector<Record> read_records(std::istream& in, const std::string& source,
                                 std::size_t expected_fields,
                                 const std::vector<std::string>& header = {});

std::string trim(std::string_view s);

}  // namespace netmirror::csv
