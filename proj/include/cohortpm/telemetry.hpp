#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cohortpm {

/// Durations and timestamps are integer minutes; no time zones.
using Minutes = std::int64_t;

inline constexpr Minutes kMinutesPerHour = 60;
inline constexpr Minutes kMinutesPerDay = 24 * 60;

struct Timestamp {
    Minutes minutes = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
    friend Timestamp operator+(Timestamp t, Minutes d) { return {t.minutes + d}; }
    friend Timestamp operator-(Timestamp t, Minutes d) { return {t.minutes - d}; }
    friend Minutes operator-(Timestamp a, Timestamp b) { return a.minutes - b.minutes; }
};

/// Missing samples are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return v != v; }

/// One sensor's samples on a regular grid: sample i sits at start + i * grid_interval.
struct SensorSeries {
    std::string sensor_id;
    Minutes grid_interval = kMinutesPerHour;
    Timestamp start;
    std::vector<double> values;

    Timestamp time_at(std::size_t i) const {
        return start + static_cast<Minutes>(i) * grid_interval;
    }
    std::size_t missing_count() const;
};

/// Series of one appliance, indexed in the cohort's roster order.
struct ApplianceTelemetry {
    std::string appliance_id;
    std::vector<SensorSeries> series;
};

struct AlarmEvent {
    std::string appliance_id;
    std::string alarm_id;
    Timestamp at;

    friend bool operator==(const AlarmEvent&, const AlarmEvent&) = default;
};

/// Closed time interval used for the dataset extent.
struct TimeRange {
    Timestamp start;
    Timestamp end;

    Minutes length() const { return end - start; }
};

/// The cohort: N appliances sharing one sensor roster.
///
/// `extent.end` is the end of the coverage of the last grid bin, so a series of
/// n hourly samples starting at `extent.start` has extent length n hours.
struct CohortDataset {
    std::vector<std::string> roster;
    std::vector<ApplianceTelemetry> appliances;
    std::vector<AlarmEvent> alarms;
    TimeRange extent;

    std::size_t appliance_count() const { return appliances.size(); }
    std::size_t sensor_count() const { return roster.size(); }
    std::optional<std::size_t> appliance_index(const std::string& id) const;
    std::optional<std::size_t> sensor_index(const std::string& id) const;

    /// Throws DataError when N < 2 or rosters disagree.
    void validate() const;
};

struct RowError {
    std::string file;
    std::size_t line = 0;
    std::string message;
};

struct LoadedCohort {
    CohortDataset dataset;
    std::vector<RowError> rejected_rows;
};

/// Reads the long-format telemetry CSV and the alarm CSV.
///
/// Each (appliance, sensor) series is placed on its own native grid, anchored at
/// the earliest timestamp of the file. The native interval is the gcd of the
/// offsets of its samples. Rows that fail to parse are skipped and reported.
LoadedCohort load_cohort(const std::filesystem::path& telemetry_path,
                         const std::filesystem::path& alarms_path);

/// Bins the series onto a coarser grid anchored at series.start. Each output
/// bin is the mean of the non-missing samples in [bin_start, bin_start + target).
SensorSeries resample(const SensorSeries& series, Minutes target_interval);

/// Replaces missing samples by the median of the observed ones.
SensorSeries impute_median(const SensorSeries& series);

/// Median of the non-missing values; mean of the central pair for even counts.
double observed_median(const std::vector<double>& values);

/// Resamples every series to `grid_interval`, pads or trims to the common
/// extent, then imputes. Result has identical start and length for all series.
CohortDataset prepare_cohort(const CohortDataset& dataset, Minutes grid_interval);

/// An exclusion drops alarms matching (appliance, alarm) with `at` in [from, to].
/// Either id may be "*".
struct AlarmExclusion {
    std::string appliance_id;
    std::string alarm_id;
    Timestamp from;
    Timestamp to;

    bool matches(const AlarmEvent& e) const;
};

std::vector<AlarmEvent> filter_alarms(const std::vector<AlarmEvent>& alarms,
                                      const std::vector<AlarmExclusion>& exclusions);

std::vector<AlarmExclusion> load_exclusions(const std::filesystem::path& path);

/// Parses either integer minutes or ISO-8601 UTC (YYYY-MM-DD[THH:MM[:SS]][Z]).
std::optional<Timestamp> parse_timestamp(const std::string& text, bool iso);
std::string format_iso8601(Timestamp t);

/// The formats `load_cohort` reads, with integer-minute timestamps. Values use the
/// shortest round-trip form so a reload is bit-exact; missing values are empty cells.
std::string telemetry_csv(const CohortDataset& dataset);
std::string alarms_csv(const std::vector<AlarmEvent>& alarms);
void write_telemetry_csv(const CohortDataset& dataset, const std::filesystem::path& path);
void write_alarms_csv(const std::vector<AlarmEvent>& alarms, const std::filesystem::path& path);

} // namespace cohortpm
