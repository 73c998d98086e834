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

#include "robarch/finance.hpp"

#include "robarch/csv.hpp"
#include "robarch/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace robarch {

namespace fs = std::filesystem;

std::optional<Date> parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const char* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc() && ptr == first + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

const std::vector<std::string>& sector_codes() {
  static const std::vector<std::string> codes{"CD", "CS", "E", "F", "HC", "I", "M", "RE", "T", "U"};
  return codes;
}

std::string normalize_sector(const std::string& code) {
  const auto& codes = sector_codes();
  return std::find(codes.begin(), codes.end(), code) != codes.end() ? code : "unknown";
}

std::string OhlcvPanel::sector_of(const std::string& symbol) const {
  const auto it = sectors.find(symbol);
  return it == sectors.end() ? "unknown" : it->second;
}

PanelFormat parse_panel_format(const std::string& text) {
  if (text == "csv-per-symbol") return PanelFormat::csv_per_symbol;
  if (text == "single-csv") return PanelFormat::single_csv;
  throw InputError("panel format must be csv-per-symbol or single-csv, got '" + text + "'");
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Columns {
  int symbol = -1, date = -1, open = -1, high = -1, low = -1, close = -1, volume = -1;
  std::size_t width = 0;
};

Columns map_columns(const csv::Row& header, bool need_symbol, const std::string& source) {
  Columns c;
  c.width = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    const int idx = static_cast<int>(i);
    if (name == "symbol") c.symbol = idx;
    else if (name == "date") c.date = idx;
    else if (name == "open") c.open = idx;
    else if (name == "high") c.high = idx;
    else if (name == "low") c.low = idx;
    else if (name == "close") c.close = idx;
    else if (name == "volume") c.volume = idx;
  }
  if (c.date < 0 || c.close < 0 || (need_symbol && c.symbol < 0)) {
    throw InputError(source + ": header must name date and close" +
                     std::string(need_symbol ? " and symbol" : "") + " columns");
  }
  return c;
}

// Parses one data row; returns an error text on failure.
std::optional<std::string> parse_bar(const csv::Row& row, const Columns& c, Bar& bar) {
  if (row.size() != c.width) return "expected " + std::to_string(c.width) + " fields";
  const auto date = parse_date(row[static_cast<std::size_t>(c.date)]);
  if (!date) return "bad date '" + row[static_cast<std::size_t>(c.date)] + "'";
  bar.date = *date;
  auto field = [&](int idx, const char* name, double& out, bool positive) -> std::optional<std::string> {
    if (idx < 0) return std::nullopt;
    if (!csv::parse_double(row[static_cast<std::size_t>(idx)], out) || !std::isfinite(out)) {
      return std::string("bad ") + name;
    }
    if (positive ? out <= 0.0 : out < 0.0) return std::string("non-positive ") + name;
    return std::nullopt;
  };
  if (auto e = field(c.close, "close", bar.close, true)) return e;
  bar.open = bar.high = bar.low = bar.close;
  bar.volume = 0.0;
  if (auto e = field(c.open, "open", bar.open, true)) return e;
  if (auto e = field(c.high, "high", bar.high, true)) return e;
  if (auto e = field(c.low, "low", bar.low, true)) return e;
  if (auto e = field(c.volume, "volume", bar.volume, false)) return e;
  return std::nullopt;
}

struct RawFile {
  csv::Row header;
  std::vector<std::pair<std::size_t, csv::Row>> rows;  // (line number, fields)
};

RawFile read_raw(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  RawFile raw;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (raw.header.empty()) {
      raw.header = csv::split_line(line);
    } else {
      raw.rows.emplace_back(number, csv::split_line(line));
    }
  }
  if (raw.header.empty()) throw InputError(path.string() + ": empty file");
  return raw;
}

void sort_and_check(PriceSeries& series) {
  std::stable_sort(series.bars.begin(), series.bars.end(),
                   [](const Bar& a, const Bar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < series.bars.size(); ++i) {
    if (series.bars[i].date == series.bars[i - 1].date) {
      throw InputError("duplicate date " + format_date(series.bars[i].date) + " for symbol " +
                       series.symbol);
    }
  }
}

PriceSeries read_series(const fs::path& path, const std::string& symbol,
                        std::vector<RejectedRow>& rejects) {
  const RawFile raw = read_raw(path);
  const Columns cols = map_columns(raw.header, false, path.string());
  PriceSeries series{symbol, {}};
  for (const auto& [line, row] : raw.rows) {
    Bar bar;
    if (auto err = parse_bar(row, cols, bar)) {
      rejects.push_back({path.string(), line, *err});
    } else {
      series.bars.push_back(bar);
    }
  }
  sort_and_check(series);
  return series;
}

}  // namespace

OhlcvPanel load_panel(const PanelSources& sources) {
  if (!fs::is_regular_file(sources.index)) {
    throw InputError("index series file not found: " + sources.index.string());
  }
  OhlcvPanel panel;
  panel.index = read_series(sources.index, "index", panel.rejects);
  if (panel.index.bars.empty()) throw InputError("index series has no valid rows");

  if (sources.format == PanelFormat::csv_per_symbol) {
    if (!fs::is_directory(sources.prices)) {
      throw InputError("price directory not found: " + sources.prices.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(sources.prices)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      panel.symbols.push_back(read_series(f, f.stem().string(), panel.rejects));
    }
  } else {
    if (!fs::is_regular_file(sources.prices)) {
      throw InputError("price file not found: " + sources.prices.string());
    }
    const RawFile raw = read_raw(sources.prices);
    const Columns cols = map_columns(raw.header, true, sources.prices.string());
    std::map<std::string, PriceSeries> by_symbol;
    for (const auto& [line, row] : raw.rows) {
      Bar bar;
      auto err = parse_bar(row, cols, bar);
      if (!err && row[static_cast<std::size_t>(cols.symbol)].empty()) err = "empty symbol";
      if (err) {
        panel.rejects.push_back({sources.prices.string(), line, *err});
        continue;
      }
      const std::string& symbol = row[static_cast<std::size_t>(cols.symbol)];
      auto& series = by_symbol[symbol];
      series.symbol = symbol;
      series.bars.push_back(bar);
    }
    for (auto& [symbol, series] : by_symbol) {
      sort_and_check(series);
      panel.symbols.push_back(std::move(series));
    }
  }
  if (panel.symbols.empty()) throw InputError("no symbols found in " + sources.prices.string());

  if (sources.sectors) {
    const auto rows = csv::read_file(*sources.sectors);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() < 2) {
        throw InputError(sources.sectors->string() + ": line " + std::to_string(i + 1) +
                         " needs symbol,sector");
      }
      if (i == 0 && lower(rows[i][0]) == "symbol") continue;
      panel.sectors[rows[i][0]] = normalize_sector(rows[i][1]);
    }
  }
  return panel;
}

void write_rejects(const fs::path& path, const std::vector<RejectedRow>& rejects) {
  std::ostringstream out;
  out << "source,line,reason\n";
  for (const auto& r : rejects) out << csv::join({r.source, std::to_string(r.line), r.reason}) << '\n';
  write_text(path, out.str());
}

FilterResult filter_missing(const OhlcvPanel& panel, Date start, double max_missing_fraction) {
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction < 1.0)) {
    throw InputError("max missing fraction must lie in [0, 1)");
  }
  FilterResult result;
  OhlcvPanel& out = result.panel;
  out.sectors = panel.sectors;
  out.rejects = panel.rejects;
  out.index.symbol = panel.index.symbol;
  for (const Bar& b : panel.index.bars) {
    if (b.date >= start) out.index.bars.push_back(b);
  }
  if (out.index.bars.empty()) throw InputError("no index dates on or after " + format_date(start));
  std::vector<Date> calendar;
  for (const Bar& b : out.index.bars) calendar.push_back(b.date);
  const auto days = static_cast<double>(calendar.size());

  for (const PriceSeries& s : panel.symbols) {
    PriceSeries kept{s.symbol, {}};
    for (const Bar& b : s.bars) {
      if (std::binary_search(calendar.begin(), calendar.end(), b.date)) kept.bars.push_back(b);
    }
    const double missing = 1.0 - static_cast<double>(kept.bars.size()) / days;
    if (missing > max_missing_fraction) {
      result.dropped.push_back({s.symbol, missing, "missing fraction above threshold"});
    } else {
      out.symbols.push_back(std::move(kept));
    }
  }
  if (out.symbols.empty()) throw InputError("every symbol was dropped by the missing-data filter");
  return result;
}

void write_dropped(const fs::path& path, const std::vector<DroppedSymbol>& dropped) {
  std::ostringstream out;
  out << "symbol,missing_fraction,reason\n";
  for (const auto& d : dropped) {
    out << csv::join({d.symbol, csv::format_double(d.missing_fraction), d.reason}) << '\n';
  }
  write_text(path, out.str());
}

FeatureSeries aggregate_returns(const PriceSeries& series, Index window) {
  if (window < 1) throw InputError("return window N must be >= 1");
  FeatureSeries out;
  const auto n = static_cast<Index>(series.bars.size());
  for (Index t = window; t < n; ++t) {
    const double past = series.bars[static_cast<std::size_t>(t - window)].close;
    const double now = series.bars[static_cast<std::size_t>(t)].close;
    out.dates.push_back(series.bars[static_cast<std::size_t>(t)].date);
    out.values.push_back((now - past) / past);
  }
  return out;
}

BetaSeries rolling_beta(const FeatureSeries& stock, const FeatureSeries& index, Index window) {
  if (window < 2) throw InputError("beta window N must be >= 2");
  if (stock.dates.size() != stock.values.size() || index.dates.size() != index.values.size()) {
    throw InputError("feature series dates and values differ in length");
  }
  std::vector<Date> dates;
  std::vector<double> xs, ys;
  for (std::size_t i = 0, j = 0; i < stock.dates.size() && j < index.dates.size();) {
    if (stock.dates[i] < index.dates[j]) {
      ++i;
    } else if (index.dates[j] < stock.dates[i]) {
      ++j;
    } else {
      dates.push_back(stock.dates[i]);
      xs.push_back(stock.values[i++]);
      ys.push_back(index.values[j++]);
    }
  }
  BetaSeries out;
  const auto n = static_cast<std::size_t>(window);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t p = n - 1; p < dates.size(); ++p) {
    const std::size_t lo = p + 1 - n;
    double mx = 0.0, my = 0.0, ymax = 0.0;
    for (std::size_t q = lo; q <= p; ++q) {
      mx += xs[q];
      my += ys[q];
      ymax = std::max(ymax, std::abs(ys[q]));
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, syy = 0.0;
    for (std::size_t q = lo; q <= p; ++q) {
      sxy += (xs[q] - mx) * (ys[q] - my);
      syy += (ys[q] - my) * (ys[q] - my);
    }
    const double floor = 64.0 * eps * ymax;
    if (syy <= floor * floor * static_cast<double>(n)) {
      out.zero_variance.push_back(dates[p]);
      continue;
    }
    out.beta.dates.push_back(dates[p]);
    out.beta.values.push_back(sxy / syy);  // the (N - 1) divisors cancel
  }
  return out;
}

FeaturePanel compute_features(const OhlcvPanel& panel, Index window) {
  FeaturePanel out;
  out.window = window;
  for (const Bar& b : panel.index.bars) out.calendar.push_back(b.date);
  const FeatureSeries index_returns = aggregate_returns(panel.index, window);
  const std::size_t n = panel.symbols.size();
  out.symbols.resize(n);
  out.returns.resize(n);
  out.betas.resize(n);
  out.sectors.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const PriceSeries& s = panel.symbols[i];
    out.symbols[i] = s.symbol;
    out.sectors[i] = panel.sector_of(s.symbol);
    out.returns[i] = aggregate_returns(s, window);
    out.betas[i] = rolling_beta(out.returns[i], index_returns, window).beta;
  });
  return out;
}

namespace {

SampledCurve to_curve(const std::string& label, const FeatureSeries& f,
                      const std::vector<Date>& calendar) {
  SampledCurve c{label, {}, f.values};
  c.t.reserve(f.dates.size());
  for (const Date& d : f.dates) {
    const auto it = std::lower_bound(calendar.begin(), calendar.end(), d);
    if (it == calendar.end() || *it != d) {
      throw InputError("feature date " + format_date(d) + " of " + label + " is not on the index calendar");
    }
    c.t.push_back(static_cast<double>(it - calendar.begin()));
  }
  return c;
}

}  // namespace

FunctionalPanel build_functional_panel(const FeaturePanel& features, BasisFamily family, Index m) {
  if (m < 0) throw InputError("basis size m must be >= 0");
  const std::size_t n = features.symbols.size();
  std::vector<SampledCurve> returns(n), betas(n);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    returns[i] = to_curve(features.symbols[i] + ":return", features.returns[i], features.calendar);
    betas[i] = to_curve(features.symbols[i] + ":beta", features.betas[i], features.calendar);
    for (const auto* c : {&returns[i], &betas[i]}) {
      if (!c->t.empty()) {
        lo = std::min(lo, c->t.front());
        hi = std::max(hi, c->t.back());
      }
    }
  }
  if (!(hi > lo)) throw InputError("features cover fewer than two calendar positions");

  std::vector<DroppedSymbol> dropped;
  auto usable = [&](std::size_t i, Index need) {
    return static_cast<Index>(returns[i].t.size()) >= need && static_cast<Index>(betas[i].t.size()) >= need;
  };
  std::optional<BasisSelection> selection;
  if (m == 0) {
    constexpr Index kMin = 4, kMax = 22;
    std::vector<SampledCurve> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (usable(i, kMin)) {
        pool.push_back(returns[i]);
        pool.push_back(betas[i]);
      }
    }
    if (pool.empty()) throw InputError("no symbol has enough feature points for basis selection");
    selection = select_basis_count(pool, family, kMin, kMax, lo, hi);
    m = selection->m;
  }

  std::vector<SampledCurve> keep_r, keep_b;
  std::vector<std::string> labels, sectors;
  for (std::size_t i = 0; i < n; ++i) {
    if (!usable(i, m)) {
      dropped.push_back({features.symbols[i], 0.0, "fewer feature points than basis functions"});
      continue;
    }
    keep_r.push_back(std::move(returns[i]));
    keep_b.push_back(std::move(betas[i]));
    labels.push_back(features.symbols[i]);
    sectors.push_back(features.sectors[i]);
  }
  if (labels.empty()) throw InputError("no symbol has enough feature points for m = " + std::to_string(m));

  const BasisSystem basis(family, m, lo, hi);
  const Matrix cr = smooth(keep_r, basis);
  const Matrix cb = smooth(keep_b, basis);
  Matrix coeffs(cr.rows(), 2 * m);
  coeffs << cr, cb;
  FunctionalDataset raw(std::move(coeffs), 2, basis, {"return", "beta"}, labels);
  return {standardize(raw), std::move(sectors), std::move(dropped), std::move(selection)};
}

OhlcvPanel synthetic_market(const SyntheticMarketSpec& spec) {
  if (spec.symbols < 1 || spec.days < 2) throw InputError("synthetic market needs symbols >= 1 and days >= 2");
  if (!(spec.missing_fraction >= 0.0 && spec.missing_fraction < 1.0)) {
    throw InputError("synthetic missing fraction must lie in [0, 1)");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Date> dates;
  std::chrono::sys_days day{spec.start};
  while (static_cast<Index>(dates.size()) < spec.days) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) dates.emplace_back(day);
    day += std::chrono::days{1};
  }
  const auto days = dates.size();
  std::vector<double> market(days);
  for (double& r : market) r = 0.0003 + 0.01 * gauss(rng);

  auto bar = [&](Date d, double close) {
    const double spread = 0.005 * close;
    return Bar{d, close * (1.0 + 0.002 * gauss(rng)), close + spread, close - spread, close,
               std::round(1e5 * (1.0 + unif(rng)))};
  };
  OhlcvPanel panel;
  panel.index.symbol = "index";
  double level = 1000.0;
  for (std::size_t t = 0; t < days; ++t) {
    if (t > 0) level *= std::exp(market[t]);
    panel.index.bars.push_back(bar(dates[t], level));
  }
  const auto& codes = sector_codes();
  for (Index s = 0; s < spec.symbols; ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "S%03ld", static_cast<long>(s + 1));
    PriceSeries series{name, {}};
    const double beta0 = 0.5 + unif(rng);
    const double drift = 0.5 * (unif(rng) - 0.5);
    double price = 20.0 + 80.0 * unif(rng);
    for (std::size_t t = 0; t < days; ++t) {
      const double beta = beta0 + drift * static_cast<double>(t) / static_cast<double>(days);
      if (t > 0) price *= std::exp(beta * market[t] + 0.012 * gauss(rng));
      const bool gap = unif(rng) < spec.missing_fraction;
      if (!gap || t == 0) series.bars.push_back(bar(dates[t], price));
    }
    panel.sectors[series.symbol] = codes[static_cast<std::size_t>(s) % codes.size()];
    panel.symbols.push_back(std::move(series));
  }
  return panel;
}

namespace {

void write_series(const fs::path& path, const PriceSeries& s) {
  std::ostringstream out;
  out << "date,open,high,low,close,volume\n";
  for (const Bar& b : s.bars) {
    out << csv::join({format_date(b.date), csv::format_double(b.open), csv::format_double(b.high),
                      csv::format_double(b.low), csv::format_double(b.close),
                      csv::format_double(b.volume)})
        << '\n';
  }
  write_text(path, out.str());
}

}  // namespace

void write_panel(const OhlcvPanel& panel, const fs::path& dir) {
  fs::create_directories(dir / "prices");
  for (const auto& s : panel.symbols) write_series(dir / "prices" / (s.symbol + ".csv"), s);
  write_series(dir / "index.csv", panel.index);
  std::ostringstream out;
  out << "symbol,sector\n";
  for (const auto& [symbol, sector] : panel.sectors) out << csv::join({symbol, sector}) << '\n';
  write_text(dir / "sectors.csv", out.str());
}

}  // namespace robarch
