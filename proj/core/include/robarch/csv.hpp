/*
 * Copyright 2026 The robarch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace robarch::csv {

using Row = std::vector<std::string>;

/// Splits one CSV line. Double-quoted fields may contain commas; "" escapes a quote.
Row split_line(std::string_view line);

/// Reads all non-empty lines of a file. Throws IoError when unreadable.
std::vector<Row> read_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Parses a double; returns false on any trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

std::string join(const Row& fields);

}  // namespace robarch::csv
