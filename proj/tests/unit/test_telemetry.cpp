#include "cohortpm/error.hpp"
#include "cohortpm/simulate.hpp"
#include "cohortpm/telemetry.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>

using namespace cohortpm;
using testsupport::TempDir;
using testsupport::write_text;

namespace {

const char* kTelemetryHeader = "timestamp,appliance_id,sensor_id,value\n";
const char* kAlarmHeader = "timestamp,appliance_id,alarm_id\n";

std::string two_by_two_hourly(int hours) {
    std::string text = kTelemetryHeader;
    for (int h = 0; h < hours; ++h) {
        for (const char* a : {"hvac01", "hvac02"}) {
            for (const char* s : {"TempMand", "TempRip"}) {
                text += std::to_string(h * 60) + "," + a + "," + s + "," + std::to_string(h) + "\n";
            }
        }
    }
    return text;
}

} // namespace

TEST(Telemetry, LoadsLongFormatWithIsoTimestamps) {
    TempDir dir;
    write_text(dir / "t.csv", std::string(kTelemetryHeader) +
                                  "# exported by the BMS\n"
                                  "2023-01-01T00:00Z,h1,A,1.5\n"
                                  "2023-01-01T01:00Z,h1,A,2.5\n"
                                  "2023-01-01T00:00Z,h2,A,3\n"
                                  "2023-01-01T01:00Z,h2,A,\n");
    write_text(dir / "a.csv", std::string(kAlarmHeader) + "2023-01-01T01:00:59Z,h2,AlmSP\n");
    const auto loaded = load_cohort(dir / "t.csv", dir / "a.csv");
    const auto& ds = loaded.dataset;
    ASSERT_EQ(ds.appliance_count(), 2u);
    ASSERT_EQ(ds.sensor_count(), 1u);
    EXPECT_TRUE(loaded.rejected_rows.empty());
    EXPECT_EQ(ds.extent.length(), 120);
    EXPECT_EQ(ds.appliances[0].series[0].values, (std::vector<double>{1.5, 2.5}));
    EXPECT_EQ(ds.appliances[1].series[0].values[0], 3.0);
    EXPECT_TRUE(is_missing(ds.appliances[1].series[0].values[1]));
    ASSERT_EQ(ds.alarms.size(), 1u);
    EXPECT_EQ(ds.alarms[0].at, ds.extent.start + 60); // seconds truncated
}

TEST(Telemetry, SeventeenByFifteenYearShape) {
    TempDir dir;
    SimConfig c;
    c.n_appliances = 17;
    c.n_sensors = 15;
    c.days = 365;
    c.grid_interval = kMinutesPerDay;
    const auto sim = generate_cohort(c);
    write_telemetry_csv(sim.dataset, dir / "t.csv");
    write_alarms_csv({}, dir / "a.csv");
    const auto ds = load_cohort(dir / "t.csv", dir / "a.csv").dataset;
    EXPECT_EQ(ds.appliance_count(), 17u);
    EXPECT_EQ(ds.sensor_count(), 15u);
    EXPECT_EQ(ds.extent.length(), 365 * kMinutesPerDay);
}

TEST(Telemetry, EmptyAlarmsFileIsValid) {
    TempDir dir;
    write_text(dir / "t.csv", two_by_two_hourly(3));
    write_text(dir / "empty.csv", "");
    write_text(dir / "header_only.csv", kAlarmHeader);
    EXPECT_TRUE(load_cohort(dir / "t.csv", dir / "empty.csv").dataset.alarms.empty());
    EXPECT_TRUE(load_cohort(dir / "t.csv", dir / "header_only.csv").dataset.alarms.empty());
}

TEST(Telemetry, RosterMismatchIsAnError) {
    TempDir dir;
    write_text(dir / "t.csv", std::string(kTelemetryHeader) + "0,h1,A,1\n0,h1,B,1\n0,h2,A,1\n0,h2,C,1\n");
    write_text(dir / "a.csv", kAlarmHeader);
    EXPECT_THROW(load_cohort(dir / "t.csv", dir / "a.csv"), DataError);
}

TEST(Telemetry, StructuralErrors) {
    TempDir dir;
    write_text(dir / "a.csv", kAlarmHeader);
    write_text(dir / "one.csv", std::string(kTelemetryHeader) + "0,h1,A,1\n60,h1,A,2\n");
    EXPECT_THROW(load_cohort(dir / "one.csv", dir / "a.csv"), DataError);
    write_text(dir / "dup.csv", std::string(kTelemetryHeader) + "0,h1,A,1\n0,h1,A,2\n0,h2,A,1\n");
    EXPECT_THROW(load_cohort(dir / "dup.csv", dir / "a.csv"), DataError);
    write_text(dir / "hdr.csv", "time,appliance,sensor,value\n0,h1,A,1\n");
    EXPECT_THROW(load_cohort(dir / "hdr.csv", dir / "a.csv"), DataError);
    EXPECT_THROW(load_cohort(dir / "missing.csv", dir / "a.csv"), DataError);
}

TEST(Telemetry, BadRowsAreReportedNotFatal) {
    TempDir dir;
    write_text(dir / "t.csv", std::string(kTelemetryHeader) +
                                  "0,h1,A,1\n"
                                  "60,h1,A,abc\n"    // line 3
                                  "xx,h1,A,1\n"      // line 4
                                  "0,h2,A,1,extra\n" // line 5
                                  "0,h2,A,2\n");
    write_text(dir / "a.csv", std::string(kAlarmHeader) + "0,h9,X\n999999,h1,X\n0,h1,X\n");
    const auto loaded = load_cohort(dir / "t.csv", dir / "a.csv");
    ASSERT_EQ(loaded.rejected_rows.size(), 5u);
    EXPECT_EQ(loaded.rejected_rows[0].line, 3u);
    EXPECT_EQ(loaded.rejected_rows[1].line, 4u);
    EXPECT_EQ(loaded.rejected_rows[2].line, 5u);
    EXPECT_EQ(loaded.dataset.alarms.size(), 1u);
}

TEST(Telemetry, NativeGridIsGcdOfOffsets) {
    TempDir dir;
    write_text(dir / "t.csv", std::string(kTelemetryHeader) + "0,h1,A,1\n30,h1,A,2\n90,h1,A,4\n0,h2,A,1\n60,h2,A,2\n");
    write_text(dir / "a.csv", kAlarmHeader);
    const auto ds = load_cohort(dir / "t.csv", dir / "a.csv").dataset;
    EXPECT_EQ(ds.appliances[0].series[0].grid_interval, 30);
    EXPECT_EQ(ds.appliances[1].series[0].grid_interval, 60);
    EXPECT_EQ(ds.extent.length(), 120);
    const auto& v = ds.appliances[0].series[0].values;
    ASSERT_EQ(v.size(), 4u);
    EXPECT_TRUE(is_missing(v[2]));
    EXPECT_EQ(v[3], 4.0);
}

TEST(Telemetry, CsvRoundTripIsBitExact) {
    TempDir dir;
    SimConfig c;
    c.n_appliances = 3;
    c.n_sensors = 4;
    c.days = 20;
    c.quantum = 0.0; // full-precision doubles
    const auto sim = generate_cohort(c);
    auto ds = sim.dataset;
    ds.appliances[1].series[2].values[5] = kMissing;
    write_telemetry_csv(ds, dir / "t.csv");
    write_alarms_csv(ds.alarms, dir / "a.csv");
    const auto back = load_cohort(dir / "t.csv", dir / "a.csv").dataset;
    ASSERT_EQ(back.roster, ds.roster);
    ASSERT_EQ(back.appliance_count(), ds.appliance_count());
    EXPECT_EQ(back.extent.start, ds.extent.start);
    EXPECT_EQ(back.extent.end, ds.extent.end);
    for (std::size_t i = 0; i < ds.appliance_count(); ++i) {
        for (std::size_t k = 0; k < ds.sensor_count(); ++k) {
            const auto& a = ds.appliances[i].series[k].values;
            const auto& b = back.appliances[i].series[k].values;
            ASSERT_EQ(a.size(), b.size());
            for (std::size_t j = 0; j < a.size(); ++j) {
                if (is_missing(a[j])) {
                    EXPECT_TRUE(is_missing(b[j]));
                } else {
                    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[j]), std::bit_cast<std::uint64_t>(b[j]));
                }
            }
        }
    }
}

TEST(Resample, MinuteSeriesToHourlyMeans) {
    SensorSeries s;
    s.grid_interval = 1;
    for (int i = 0; i < 180; ++i) {
        s.values.push_back(std::sin(i * 0.1) * 10.0);
    }
    const auto r = resample(s, 60);
    ASSERT_EQ(r.values.size(), 3u);
    for (int b = 0; b < 3; ++b) {
        long double sum = 0;
        for (int i = 0; i < 60; ++i) {
            sum += s.values[b * 60 + i];
        }
        EXPECT_NEAR(r.values[b], static_cast<double>(sum / 60), 1e-12);
    }
}

TEST(Resample, ConstantStaysConstant) {
    for (const Minutes native : {1, 5, 15, 60}) {
        SensorSeries s;
        s.grid_interval = native;
        s.values.assign(static_cast<std::size_t>(24 * 60 / native), 3.25);
        for (const double v : resample(s, 60).values) {
            EXPECT_EQ(v, 3.25);
        }
    }
}

TEST(Resample, ThreeHourGapGivesThreeMissingBins) {
    SensorSeries s;
    s.grid_interval = 10;
    s.values.assign(6 * 8, 1.0);
    for (int i = 12; i < 30; ++i) { // hours 2, 3, 4 empty
        s.values[i] = kMissing;
    }
    const auto r = resample(s, 60);
    ASSERT_EQ(r.values.size(), 8u);
    int missing_run = 0;
    for (std::size_t b = 0; b < r.values.size(); ++b) {
        missing_run += is_missing(r.values[b]);
        EXPECT_EQ(is_missing(r.values[b]), b >= 2 && b <= 4);
    }
    EXPECT_EQ(missing_run, 3);
}

TEST(Resample, RejectsFinerTarget) {
    SensorSeries s;
    s.grid_interval = 60;
    s.values.assign(3, 1.0);
    EXPECT_THROW(resample(s, 30), ConfigError);
    EXPECT_THROW(resample(s, 0), ConfigError);
}

TEST(Impute, MedianExamples) {
    SensorSeries s;
    s.values = {1, kMissing, 3};
    EXPECT_EQ(impute_median(s).values, (std::vector<double>{1, 2, 3}));
    s.values = {5, kMissing, 1, 9, kMissing};
    EXPECT_EQ(impute_median(s).values, (std::vector<double>{5, 5, 1, 9, 5}));
    s.values = {4, 2, 8};
    EXPECT_EQ(impute_median(s).values, s.values);
    s.values = {kMissing, kMissing};
    EXPECT_THROW(impute_median(s), DataError);
}

TEST(Prepare, AlignsMixedGrids) {
    CohortDataset ds;
    ds.roster = {"A"};
    ds.extent = {Timestamp{0}, Timestamp{180}};
    SensorSeries fine{"A", 30, Timestamp{0}, {1, 3, 5, kMissing, 9, 11}};
    SensorSeries coarse{"A", 60, Timestamp{0}, {2, 4}};
    ds.appliances = {{"h1", {fine}}, {"h2", {coarse}}};
    const auto p = prepare_cohort(ds, 60);
    EXPECT_EQ(p.extent.length(), 180);
    EXPECT_EQ(p.appliances[0].series[0].values, (std::vector<double>{2, 5, 10}));
    EXPECT_EQ(p.appliances[1].series[0].values, (std::vector<double>{2, 4, 3})); // padded bin imputed
}

TEST(FilterAlarms, Examples) {
    const std::vector<AlarmEvent> alarms = {
        {"h1", "X", Timestamp{10}}, {"h1", "X", Timestamp{20}}, {"h2", "X", Timestamp{30}},
        {"h1", "Y", Timestamp{40}}, {"h2", "X", Timestamp{50}},
    };
    EXPECT_EQ(filter_alarms(alarms, {}), alarms);
    EXPECT_TRUE(filter_alarms(alarms, {{"*", "*", Timestamp{0}, Timestamp{100}}}).empty());
    const auto kept = filter_alarms(alarms, {{"*", "X", Timestamp{15}, Timestamp{30}}});
    ASSERT_EQ(kept.size(), 3u);
    EXPECT_EQ(kept[0].at, Timestamp{10});
    EXPECT_EQ(kept[1].at, Timestamp{40});
    EXPECT_EQ(kept[2].at, Timestamp{50});
}

TEST(FilterAlarms, LoadsExclusionFile) {
    TempDir dir;
    write_text(dir / "x.csv", "appliance_id,alarm_id,from,to\nh1,*,2023-01-01,2023-01-02T00:00Z\n");
    const auto ex = load_exclusions(dir / "x.csv");
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_EQ(ex[0].to - ex[0].from, kMinutesPerDay);
    write_text(dir / "bad.csv", "appliance_id,alarm_id,from,to\nh1,*,2023-01-02,2023-01-01\n");
    EXPECT_THROW(load_exclusions(dir / "bad.csv"), DataError);
}

TEST(Timestamps, IsoRoundTrip) {
    const auto t = parse_timestamp("1970-01-02T01:30Z", true);
    ASSERT_TRUE(t);
    EXPECT_EQ(t->minutes, kMinutesPerDay + 90);
    EXPECT_EQ(parse_timestamp("2024-02-29T23:59:59", true), parse_timestamp("2024-02-29T23:59", true));
    const auto leap = *parse_timestamp("2024-02-29T12:00Z", true);
    EXPECT_EQ(parse_timestamp(format_iso8601(leap), true), leap);
    EXPECT_FALSE(parse_timestamp("2023-13-01", true));
    EXPECT_FALSE(parse_timestamp("12x", false));
}
