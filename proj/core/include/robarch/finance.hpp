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

#include "robarch/fdbasis.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace robarch {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Returns nullopt for anything else or an invalid date.
std::optional<Date> parse_date(const std::string& text);
std::string format_date(Date date);

struct Bar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

/// Date-ordered bars of one symbol (or of the aggregate index).
struct PriceSeries {
  std::string symbol;
  std::vector<Bar> bars;
};

struct RejectedRow {
  std::string source;
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

/// The ten sector codes; anything else maps to "unknown".
const std::vector<std::string>& sector_codes();
std::string normalize_sector(const std::string& code);

struct OhlcvPanel {
  std::vector<PriceSeries> symbols;  // sorted by symbol
  PriceSeries index;
  std::map<std::string, std::string> sectors;
  std::vector<RejectedRow> rejects;

  /// Sector code of a symbol, "unknown" when unmapped.
  std::string sector_of(const std::string& symbol) const;
};

enum class PanelFormat { csv_per_symbol, single_csv };
PanelFormat parse_panel_format(const std::string& text);

struct PanelSources {
  std::filesystem::path prices;  // directory of <SYMBOL>.csv, or one long CSV
  PanelFormat format = PanelFormat::csv_per_symbol;
  std::filesystem::path index;
  std::optional<std::filesystem::path> sectors;  // CSV symbol,sector
};

/// Reads OHLCV files. Columns are found by header name (case-insensitive):
/// date and close are required, symbol too in the long format; open, high,
/// low and volume are optional. Rows that do not parse, or carry a
/// non-positive close, go to `rejects`. Throws InputError for a missing
/// index file or a duplicated (symbol, date).
OhlcvPanel load_panel(const PanelSources& sources);

void write_rejects(const std::filesystem::path& path, const std::vector<RejectedRow>& rejects);

struct DroppedSymbol {
  std::string symbol;
  double missing_fraction = 0.0;
  std::string reason;
};

struct FilterResult {
  OhlcvPanel panel;
  std::vector<DroppedSymbol> dropped;
};

/// Keeps index dates >= start, restricts every symbol to that calendar and
/// drops symbols missing more than max_missing_fraction of it.
FilterResult filter_missing(const OhlcvPanel& panel, Date start, double max_missing_fraction);

void write_dropped(const std::filesystem::path& path, const std::vector<DroppedSymbol>& dropped);

/// Values on a subset of dates, in date order.
struct FeatureSeries {
  std::vector<Date> dates;
  std::vector<double> values;
};

/// r_N(t) = (X_t - X_{t-N}) / X_{t-N} on the series' own trading calendar.
/// Empty when the series has at most N bars.
FeatureSeries aggregate_returns(const PriceSeries& series, Index window);

struct BetaSeries {
  FeatureSeries beta;
  std::vector<Date> zero_variance;  // dates left undefined for that reason
};

/// Sample Cov(stock, index) / Var(index) over the last N return pairs that
/// share a date. Undefined with fewer than N pairs.
BetaSeries rolling_beta(const FeatureSeries& stock, const FeatureSeries& index, Index window);

struct FeaturePanel {
  Index window = 250;
  std::vector<Date> calendar;  // index trading dates
  std::vector<std::string> symbols;
  std::vector<FeatureSeries> returns;
  std::vector<FeatureSeries> betas;
  std::vector<std::string> sectors;
};

FeaturePanel compute_features(const OhlcvPanel& panel, Index window);

struct FunctionalPanel {
  FunctionalDataset dataset;
  std::vector<std::string> sectors;  // per record
  std::vector<DroppedSymbol> dropped;
  std::optional<BasisSelection> selection;
};

inline constexpr Index kDefaultFinanceBasis = 13;

/// Smooths every symbol's return and beta series (time = position on the
/// index calendar) onto one basis and standardizes both variables. m = 0
/// selects m in [4, 22] by residual variance. Symbols with too few points
/// are dropped and reported.
FunctionalPanel build_functional_panel(const FeaturePanel& features, BasisFamily family, Index m);

/// Random-walk prices for testing and demos: a market factor plus
/// idiosyncratic noise, sector codes cycling through sector_codes(), and
/// optional random gaps.
struct SyntheticMarketSpec {
  Index symbols = 20;
  Index days = 700;
  std::uint64_t seed = 1;
  double missing_fraction = 0.0;  // per-symbol fraction of dropped days
  Date start = Date{std::chrono::year{2000}, std::chrono::month{1}, std::chrono::day{3}};
};

OhlcvPanel synthetic_market(const SyntheticMarketSpec& spec);

/// Writes <dir>/prices/<SYMBOL>.csv, <dir>/index.csv and <dir>/sectors.csv.
void write_panel(const OhlcvPanel& panel, const std::filesystem::path& dir);

}  // namespace robarch
