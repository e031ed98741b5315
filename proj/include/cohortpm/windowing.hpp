#pragma once

#include "cohortpm/telemetry.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace cohortpm {

/// Window geometry around a prediction instant t:
///   telemetry [t - telemetry, t], action (t, t + action), forecast [t + action, t + action + forecast).
struct WindowSpec {
    Minutes telemetry = 14 * kMinutesPerDay;
    Minutes action = 7 * kMinutesPerDay;
    Minutes forecast = 7 * kMinutesPerDay;
    Minutes step = kMinutesPerDay;

    /// Throws ConfigError unless every duration is strictly positive.
    void validate() const;
    Minutes span() const { return telemetry + action + forecast; }
};

struct LabeledWindow {
    std::size_t appliance_index = 0;
    std::string appliance_id;
    Timestamp t;
    TimeRange telemetry_range; // closed
    TimeRange forecast_range;  // half-open [start, end)
    std::map<std::string, bool> labels;

    /// Label for `alarm_id`; throws DataError if that alarm was never labeled.
    bool label(const std::string& alarm_id) const;
};

struct WindowSet {
    std::vector<LabeledWindow> windows;
    bool extent_too_short = false;
};

/// One window per appliance per instant t in [start + T, end - (Ta + Tf)], stepping
/// by `spec.step`. Ordered by appliance, then t. Labels are left empty.
WindowSet enumerate_windows(const CohortDataset& dataset, const WindowSpec& spec);

/// True iff an event of `alarm_id` on the window's appliance falls in its forecast range.
bool label_window(const LabeledWindow& window, const std::vector<AlarmEvent>& alarms, const std::string& alarm_id);

/// Fills `labels[alarm_id]` on every window.
void label_windows(std::vector<LabeledWindow>& windows, const std::vector<AlarmEvent>& alarms,
                   const std::string& alarm_id);

/// `appliance_id,t,telemetry_start,forecast_start,forecast_end,label:<alarm>...`.
std::string window_manifest_csv(const std::vector<LabeledWindow>& windows, std::span<const std::string> alarm_ids);

} // namespace cohortpm
