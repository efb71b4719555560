#include <gtest/gtest.h>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "rcv/errors.hpp"
#include "rcv/io.hpp"
#include "rcv/occupation.hpp"
#include "rcv/random.hpp"
#include "rcv/spot_vol.hpp"
#include "rcv/sv_simulator.hpp"

using namespace rcv;

namespace {

IngestOptions minute_grid() {
  IngestOptions o;
  o.obs_per_day = 390;
  o.drop_short_days = false;
  return o;
}

}  // namespace

TEST(Timestamps, ParseAndFormat) {
  const auto t = parse_timestamp("2024-03-05T09:30:45.250");
  EXPECT_EQ(t.date, "2024-03-05");
  EXPECT_EQ(t.millis, (9 * 3600 + 30 * 60 + 45) * 1000 + 250);
  EXPECT_EQ(parse_timestamp("2024-03-05 16:00:00").millis, 16 * 3600 * 1000);
  EXPECT_EQ(format_timestamp("2024-03-05", t.millis), "2024-03-05T09:30:45.250");
  EXPECT_THROW(parse_timestamp("2024-03-05T9:30"), DataError);
  EXPECT_THROW(parse_timestamp("yesterday"), DataError);
  EXPECT_EQ(parse_clock("09:30"), 34200);
  EXPECT_THROW(parse_clock("9h30"), ConfigError);
}

TEST(IngestTicks, PreviousTick) {
  std::istringstream in(
      "timestamp,price,asset\n"
      "2024-01-02T09:30:00,100.0,A\n"
      "2024-01-02T09:30:45,101.0,A\n"
      "2024-01-02T09:30:00,50.0,B\n"
      "2024-01-02T15:59:00,52.0,B\n");
  const auto r = ingest_ticks(in, minute_grid());
  const auto a = r.panel.day_prices(0, 0);
  EXPECT_DOUBLE_EQ(a[0], std::log(100.0));
  EXPECT_DOUBLE_EQ(a[1], std::log(101.0));
  EXPECT_DOUBLE_EQ(a[390], std::log(101.0));
  const auto b = r.panel.day_prices(1, 0);
  EXPECT_DOUBLE_EQ(b[388], std::log(50.0));
  EXPECT_DOUBLE_EQ(b[389], std::log(52.0));
  EXPECT_EQ(r.panel.assets[0], "A");
  EXPECT_EQ(r.ticks_read, 4u);
}

TEST(IngestTicks, ConstantPriceHasZeroReturns) {
  std::ostringstream csv;
  csv << "timestamp,p1,p2\n";
  for (int m = 0; m <= 390; m += 7) {
    csv << format_timestamp("2024-01-02", (34200 + 60 * m) * 1000LL) << ",25.5,25.5\n";
  }
  std::istringstream in(csv.str());
  const auto r = ingest_ticks(in, minute_grid());
  for (double x : r.panel.increments(0)) EXPECT_EQ(x, 0.0);
  for (double x : r.panel.increments(1)) EXPECT_EQ(x, 0.0);
}

TEST(IngestTicks, PoissonArrivalsMatchBruteForceLookup) {
  PhiloxStream rng(12, 0, 0);
  struct Tick {
    std::string date;
    long long ms;
    double price;
  };
  std::vector<Tick> ticks[2];
  std::ostringstream csv;
  csv << "timestamp,price,asset\n";
  for (int day = 0; day < 3; ++day) {
    const std::string date = "2024-02-0" + std::to_string(day + 5);
    for (int a = 0; a < 2; ++a) {
      double t = 34200.0 + 20 * rng.uniform();
      double p = 100.0;
      while (t <= 57600.0) {
        const long long ms = static_cast<long long>(t * 1000);
        p *= std::exp(0.001 * rng.normal());
        ticks[a].push_back({date, ms, p});
        csv << format_timestamp(date, ms) << ',' << std::setprecision(17) << p << ',' << (a == 0 ? "X" : "Y") << '\n';
        t += -12.0 * std::log(rng.uniform());
      }
    }
  }
  std::istringstream in(csv.str());
  IngestOptions o;
  o.obs_per_day = 78;
  o.drop_short_days = false;
  const auto r = ingest_ticks(in, o);
  ASSERT_EQ(r.panel.days(), 3u);
  for (int a = 0; a < 2; ++a) {
    for (std::size_t d = 0; d < 3; ++d) {
      const auto prices = r.panel.day_prices(a, d);
      for (int i = 0; i <= 78; ++i) {
        const long long grid = 34200000LL + 300000LL * i;
        double expected = NAN;
        double first = NAN;
        for (const auto& t : ticks[a]) {
          if (t.date != r.panel.day_labels[d]) continue;
          if (std::isnan(first)) first = t.price;
          if (t.ms <= grid) expected = t.price;
        }
        if (std::isnan(expected)) expected = first;
        EXPECT_NEAR(prices[static_cast<std::size_t>(i)], std::log(expected), 1e-15);
      }
    }
  }
}

TEST(IngestTicks, SessionAndDayFiltering) {
  std::istringstream in(
      "timestamp,a,b\n"
      "2024-01-02T08:00:00,1,1\n"
      "2024-01-02T09:30:00,2,2\n"
      "2024-01-02T16:00:00,3,3\n"
      "2024-01-03T09:30:00,2,2\n"
      "2024-01-03T13:00:00,3,3\n"
      "2024-01-04T17:00:00,3,3\n");
  IngestOptions o;
  o.obs_per_day = 13;
  const auto r = ingest_ticks(in, o);
  EXPECT_EQ(r.panel.days(), 1u);
  EXPECT_EQ(r.short_days_dropped, 1);
  EXPECT_EQ(r.empty_days_dropped, 0);
  EXPECT_EQ(r.ticks_outside_session, 2u);
  EXPECT_DOUBLE_EQ(r.panel.day_prices(0, 0)[0], std::log(2.0));
}

TEST(IngestTicks, ErrorsCarryLineNumbers) {
  std::istringstream bad_time("timestamp,a,b\n2024-01-02T09:30:00,1,1\nnot-a-time,1,1\n");
  try {
    ingest_ticks(bad_time, minute_grid());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream bad_price("timestamp,a,b\n2024-01-02T09:30:00,1,abc\n");
  try {
    ingest_ticks(bad_price, minute_grid());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream empty("");
  EXPECT_THROW(ingest_ticks(empty, minute_grid()), DataError);
}

TEST(PanelCsv, RoundTripThroughSpotVariance) {
  SimConfig c;
  c.days = 5;
  c.inner_steps_per_day = 390;
  c.seed = 31;
  const HighFreqPanel panel = observe(simulate(c), 78);
  std::stringstream csv;
  csv << comment_block("seed=31\n");
  write_panel_csv(csv, panel);
  IngestOptions o;
  o.obs_per_day = 78;
  const auto back = ingest_ticks(csv, o);
  EXPECT_TRUE(back.prices_were_logged);
  EXPECT_EQ(back.panel.log_price[0], panel.log_price[0]);
  EXPECT_EQ(back.panel.log_price[1], panel.log_price[1]);
  EXPECT_EQ(back.panel.day_labels, panel.day_labels);

  SpotVolConfig cfg;
  cfg.block_size = 48;
  const auto a = spot_variance_path(panel, cfg);
  const auto b = spot_variance_path(back.panel, cfg);
  ASSERT_EQ(a.blocks.size(), b.blocks.size());
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    EXPECT_EQ(a.blocks[i].value, b.blocks[i].value);
    EXPECT_EQ(a.blocks[i].truncated, b.blocks[i].truncated);
  }
}

TEST(PlotTables, TailAndKendall) {
  std::vector<double> z;
  for (int i = 1; i < 100; ++i) z.push_back(i / 100.0);
  const auto tail = tail_table(CopulaModel::independence().cdf_evaluator(), z);
  EXPECT_NEAR(tail[49].lower, 0.5, 1e-15);
  EXPECT_NEAR(tail[49].upper, 0.5, 1e-15);
  EXPECT_EQ(tail[49].tail, tail[49].lower);
  EXPECT_EQ(tail[80].tail, tail[80].upper);

  const auto g = CopulaModel::gumbel(2.0);
  std::vector<double> k;
  for (double v : z) k.push_back(g.kendall_function(v));
  for (const auto& row : kendall_table(z, k)) {
    EXPECT_EQ(row.diagonal, row.z);
    EXPECT_GE(row.k, row.z);
  }
}

TEST(PlotTables, ComonotoneDecileContour) {
  EmpiricalCopulaGrid grid;
  grid.u = interior_lattice(0.05);
  grid.v = grid.u;
  for (double u : grid.u) {
    for (double v : grid.v) grid.values.push_back(std::min(u, v));
  }
  bool through_centre = false;
  for (const auto& s : decile_contours(grid)) {
    if (std::abs(s.level - 0.5) > 1e-12) continue;
    for (const auto& p : {s.from, s.to}) {
      through_centre |= std::abs(p.u - 0.5) < 1e-9 && std::abs(p.v - 0.5) < 1e-9;
    }
  }
  EXPECT_TRUE(through_centre);
  EXPECT_EQ(plot_kinds().size(), 5u);
}

TEST(CommentBlock, PrefixesLines) { EXPECT_EQ(comment_block("a=1\nb=2\n"), "# a=1\n# b=2\n"); }
