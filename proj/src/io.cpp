#include "rcv/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "rcv/errors.hpp"

namespace rcv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_int(const std::string& text, std::size_t pos, std::size_t len, const std::string& whole) {
  int value = 0;
  const char* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len) {
    throw DataError("malformed timestamp '" + whole + "'");
  }
  return value;
}

double parse_number(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line) + ": cannot parse price '" + text + "'");
  }
  return value;
}

std::int64_t grid_millis(std::int64_t start, std::int64_t length, int n, int i) {
  return start + static_cast<std::int64_t>(std::llround(static_cast<double>(length) * i / n));
}

struct Tick {
  std::int64_t millis;
  double log_price;
};

}  // namespace

Timestamp parse_timestamp(const std::string& raw) {
  const std::string text = trim(raw);
  // YYYY-MM-DD?HH:MM:SS
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    throw DataError("malformed timestamp '" + text + "'");
  }
  const int month = parse_int(text, 5, 2, text);
  const int day = parse_int(text, 8, 2, text);
  parse_int(text, 0, 4, text);
  const int hh = parse_int(text, 11, 2, text);
  const int mm = parse_int(text, 14, 2, text);
  const int ss = parse_int(text, 17, 2, text);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60) {
    throw DataError("timestamp out of range '" + text + "'");
  }
  int ms = 0;
  if (text.size() > 19) {
    if (text[19] != '.' || text.size() == 20) throw DataError("malformed timestamp '" + text + "'");
    std::string frac = text.substr(20);
    if (frac.size() > 3) frac = frac.substr(0, 3);
    while (frac.size() < 3) frac.push_back('0');
    ms = parse_int(frac, 0, 3, text);
  }
  Timestamp out;
  out.date = text.substr(0, 10);
  out.millis = ((static_cast<std::int64_t>(hh) * 60 + mm) * 60 + ss) * 1000 + ms;
  return out;
}

std::string format_timestamp(const std::string& date, std::int64_t millis) {
  const std::int64_t seconds = millis / 1000;
  std::ostringstream out;
  out << date << 'T' << std::setfill('0') << std::setw(2) << seconds / 3600 << ':' << std::setw(2)
      << (seconds / 60) % 60 << ':' << std::setw(2) << seconds % 60 << '.' << std::setw(3) << millis % 1000;
  return out.str();
}

int parse_clock(const std::string& raw) {
  const std::string text = trim(raw);
  int hh = 0;
  int mm = 0;
  int ss = 0;
  char c1 = 0;
  char c2 = 0;
  std::istringstream in(text);
  in >> hh >> c1 >> mm;
  if (!in || c1 != ':') throw ConfigError("session time '" + text + "' is not HH:MM");
  if (in >> c2) {
    if (c2 != ':' || !(in >> ss)) throw ConfigError("session time '" + text + "' is not HH:MM:SS");
  }
  if (hh < 0 || hh > 24 || mm < 0 || mm > 59 || ss < 0 || ss > 59) {
    throw ConfigError("session time '" + text + "' out of range");
  }
  return (hh * 60 + mm) * 60 + ss;
}

IngestReport ingest_ticks(std::istream& in, const IngestOptions& options) {
  if (options.obs_per_day < 1) throw ConfigError("obs_per_day: must be positive");
  const int start_s = parse_clock(options.session_start);
  const int end_s = parse_clock(options.session_end);
  if (end_s <= start_s) throw ConfigError("session_end: must follow session_start");
  const std::int64_t start_ms = static_cast<std::int64_t>(start_s) * 1000;
  const std::int64_t end_ms = static_cast<std::int64_t>(end_s) * 1000;

  IngestReport report;
  std::map<std::string, std::array<std::vector<Tick>, 2>> days;
  std::array<std::string, 2> assets;
  int asset_count = 0;
  bool wide = false;
  bool logged = false;
  int ts_col = 0;
  int price_col = 1;
  int asset_col = 2;
  bool have_header = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto fields = split_csv(stripped);
    if (!have_header) {
      have_header = true;
      std::vector<std::string> names;
      for (const auto& f : fields) names.push_back(lower(f));
      const auto find = [&](const std::string& name) {
        const auto it = std::find(names.begin(), names.end(), name);
        return it == names.end() ? -1 : static_cast<int>(it - names.begin());
      };
      if (find("asset") >= 0) {
        ts_col = find("timestamp");
        price_col = find("price");
        asset_col = find("asset");
        if (ts_col < 0 || price_col < 0 || fields.size() != 3) {
          throw DataError("line " + std::to_string(line_no) + ": long format needs columns timestamp,price,asset");
        }
      } else {
        if (fields.size() != 3 || names[0] != "timestamp") {
          throw DataError("line " + std::to_string(line_no) +
                          ": expected header timestamp,price,asset or timestamp,<asset1>,<asset2>");
        }
        wide = true;
        const bool l1 = names[1].rfind("log_", 0) == 0;
        const bool l2 = names[2].rfind("log_", 0) == 0;
        if (l1 != l2) throw DataError("line " + std::to_string(line_no) + ": mixed log and level price columns");
        logged = l1;
        assets = {logged ? fields[1].substr(4) : fields[1], logged ? fields[2].substr(4) : fields[2]};
        asset_count = 2;
      }
      continue;
    }
    if (fields.size() != 3) {
      throw DataError("line " + std::to_string(line_no) + ": expected 3 fields, found " +
                      std::to_string(fields.size()));
    }
    Timestamp ts;
    try {
      ts = parse_timestamp(fields[static_cast<std::size_t>(ts_col)]);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    ++report.ticks_read;
    const bool inside = ts.millis >= start_ms && ts.millis <= end_ms;
    auto store = [&](int asset, const std::string& text) {
      const double value = parse_number(text, line_no);
      if (!logged && !(value > 0.0)) {
        throw DataError("line " + std::to_string(line_no) + ": price must be positive");
      }
      if (inside) days[ts.date][static_cast<std::size_t>(asset)].push_back({ts.millis, logged ? value : std::log(value)});
    };
    if (wide) {
      store(0, fields[1]);
      store(1, fields[2]);
    } else {
      const std::string& name = fields[static_cast<std::size_t>(asset_col)];
      int asset = -1;
      for (int a = 0; a < asset_count; ++a) {
        if (assets[static_cast<std::size_t>(a)] == name) asset = a;
      }
      if (asset < 0) {
        if (asset_count == 2) {
          throw DataError("line " + std::to_string(line_no) + ": third asset '" + name + "' (two are supported)");
        }
        assets[static_cast<std::size_t>(asset_count)] = name;
        asset = asset_count++;
      }
      store(asset, fields[static_cast<std::size_t>(price_col)]);
    }
    if (!inside) ++report.ticks_outside_session;
  }
  if (!have_header) throw DataError("tick file is empty");
  if (asset_count < 2) throw DataError("tick file holds fewer than two assets");

  const int n = options.obs_per_day;
  HighFreqPanel& panel = report.panel;
  panel.assets = assets;
  panel.obs_per_day = n;
  panel.session_start_seconds = start_s;
  panel.session_seconds = end_s - start_s;
  const std::int64_t length = end_ms - start_ms;

  for (auto& [date, ticks] : days) {
    if (ticks[0].empty() || ticks[1].empty()) {
      ++report.empty_days_dropped;
      continue;
    }
    bool short_day = false;
    for (auto& series : ticks) {
      std::stable_sort(series.begin(), series.end(), [](const Tick& a, const Tick& b) { return a.millis < b.millis; });
      if (series.back().millis < end_ms - static_cast<std::int64_t>(options.short_day_tolerance_seconds) * 1000) {
        short_day = true;
      }
    }
    if (short_day && options.drop_short_days) {
      ++report.short_days_dropped;
      continue;
    }
    for (std::size_t a = 0; a < 2; ++a) {
      const auto& series = ticks[a];
      std::size_t next = 0;
      double last = series.front().log_price;
      for (int i = 0; i <= n; ++i) {
        const std::int64_t t = grid_millis(start_ms, length, n, i);
        while (next < series.size() && series[next].millis <= t) last = series[next++].log_price;
        panel.log_price[a].push_back(last);
      }
    }
    panel.day_labels.push_back(date);
  }
  report.prices_were_logged = logged;
  if (panel.days() == 0) throw DataError("no complete trading days in the tick file");
  panel.validate();
  return report;
}

IngestReport ingest_ticks_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return ingest_ticks(in, options);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_panel_csv(std::ostream& out, const HighFreqPanel& panel) {
  panel.validate();
  const std::int64_t start = static_cast<std::int64_t>(panel.session_start_seconds) * 1000;
  const std::int64_t length = static_cast<std::int64_t>(panel.session_seconds) * 1000;
  const int n = panel.obs_per_day;
  out << "timestamp,log_" << panel.assets[0] << ",log_" << panel.assets[1] << '\n';
  out << std::setprecision(17);
  for (std::size_t d = 0; d < panel.days(); ++d) {
    const auto x = panel.day_prices(0, d);
    const auto y = panel.day_prices(1, d);
    for (int i = 0; i <= n; ++i) {
      out << format_timestamp(panel.day_labels[d], grid_millis(start, length, n, i)) << ','
          << x[static_cast<std::size_t>(i)] << ',' << y[static_cast<std::size_t>(i)] << '\n';
    }
  }
}

void write_copula_matrix(std::ostream& out, const EmpiricalCopulaGrid& grid) {
  out << "u\\v";
  for (double v : grid.v) out << ',' << v;
  out << '\n' << std::setprecision(10);
  for (std::size_t i = 0; i < grid.u.size(); ++i) {
    out << grid.u[i];
    for (std::size_t j = 0; j < grid.v.size(); ++j) out << ',' << grid.at(i, j);
    out << '\n';
  }
}

std::vector<TailRow> tail_table(const CopulaCdf& cdf, const std::vector<double>& z) {
  std::vector<TailRow> rows;
  rows.reserve(z.size());
  for (double value : z) {
    const TailConcentration t = tail_concentration(cdf, value);
    rows.push_back({value, t.lower, t.upper, value <= 0.5 ? t.lower : t.upper});
  }
  return rows;
}

std::vector<KendallRow> kendall_table(const std::vector<double>& z, const std::vector<double>& k) {
  if (z.size() != k.size()) throw DomainError("kendall table: z and K(z) differ in length");
  std::vector<KendallRow> rows;
  rows.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) rows.push_back({z[i], k[i], z[i]});
  return rows;
}

std::vector<ContourSegment> decile_contours(const EmpiricalCopulaGrid& grid) {
  std::vector<ContourSegment> out;
  for (int d = 1; d <= 9; ++d) {
    const auto level = contour_segments(grid, d / 10.0);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds{"contours", "tail", "kendall", "scatter", "histogram"};
  return kinds;
}

std::string comment_block(const std::string& text) {
  std::ostringstream out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
  return out.str();
}

}  // namespace rcv
