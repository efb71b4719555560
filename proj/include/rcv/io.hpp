#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcv/copula_models.hpp"
#include "rcv/occupation.hpp"
#include "rcv/panel.hpp"
#include "rcv/sv_simulator.hpp"

namespace rcv {

/// Parsed "YYYY-MM-DD[T ]HH:MM:SS[.fff]".
struct Timestamp {
  std::string date;
  std::int64_t millis = 0;  // since midnight
};

/// Throws DataError on malformed input.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(const std::string& date, std::int64_t millis);
/// "HH:MM" or "HH:MM:SS" to seconds since midnight.
int parse_clock(const std::string& text);

struct IngestOptions {
  std::string session_start = "09:30";
  std::string session_end = "16:00";
  int obs_per_day = 390;
  bool drop_short_days = true;
  /// A day is short when an asset's last in-session tick precedes the
  /// session end by more than this many seconds.
  int short_day_tolerance_seconds = 1800;
};

struct IngestReport {
  HighFreqPanel panel;
  int empty_days_dropped = 0;
  int short_days_dropped = 0;
  std::size_t ticks_read = 0;
  std::size_t ticks_outside_session = 0;
  bool prices_were_logged = false;
};

/// Long CSV (timestamp,price,asset) or wide CSV (timestamp,price1,price2),
/// told apart by the header. Wide columns named log_* hold log-prices;
/// otherwise prices are logged on the way in. Each grid time takes the last
/// tick at or before it; a grid time with no earlier in-session tick takes
/// the first one of the day.
IngestReport ingest_ticks(std::istream& in, const IngestOptions& options);
IngestReport ingest_ticks_file(const std::string& path, const IngestOptions& options);

/// Wide CSV of the grid log-prices (17 significant digits) that ingests
/// back to the identical panel.
void write_panel_csv(std::ostream& out, const HighFreqPanel& panel);

/// Matrix layout: header row of v values, one row per u.
void write_copula_matrix(std::ostream& out, const EmpiricalCopulaGrid& grid);

struct TailRow {
  double z = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double tail = 0.0;  // L(z) for z <= 1/2, U(z) above
};
std::vector<TailRow> tail_table(const CopulaCdf& cdf, const std::vector<double>& z);

struct KendallRow {
  double z = 0.0;
  double k = 0.0;
  double diagonal = 0.0;  // the 45-degree line, a lower bound on K
};
std::vector<KendallRow> kendall_table(const std::vector<double>& z, const std::vector<double>& k);

/// Decile contours (levels 0.1, ..., 0.9) of a gridded copula.
std::vector<ContourSegment> decile_contours(const EmpiricalCopulaGrid& grid);

/// Kinds accepted by the plot command.
const std::vector<std::string>& plot_kinds();

/// Prefixes every line of `text` with "# ".
std::string comment_block(const std::string& text);

}  // namespace rcv
