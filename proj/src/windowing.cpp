#include "cohortpm/windowing.hpp"

#include "cohortpm/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace cohortpm {

void WindowSpec::validate() const {
    if (telemetry <= 0 || action <= 0 || forecast <= 0 || step <= 0) {
        throw ConfigError("window durations must all be strictly positive");
    }
}

bool LabeledWindow::label(const std::string& alarm_id) const {
    const auto it = labels.find(alarm_id);
    if (it == labels.end()) {
        throw DataError("window " + appliance_id + "@" + std::to_string(t.minutes) + " has no label for alarm '" +
                        alarm_id + "'");
    }
    return it->second;
}

WindowSet enumerate_windows(const CohortDataset& dataset, const WindowSpec& spec) {
    spec.validate();
    WindowSet out;
    const Timestamp first = dataset.extent.start + spec.telemetry;
    const Timestamp last = dataset.extent.end - (spec.action + spec.forecast);
    if (last < first) {
        out.extent_too_short = true;
        return out;
    }
    const auto instants = static_cast<std::size_t>((last - first) / spec.step + 1);
    out.windows.reserve(instants * dataset.appliance_count());
    for (std::size_t i = 0; i < dataset.appliance_count(); ++i) {
        for (std::size_t n = 0; n < instants; ++n) {
            LabeledWindow w;
            w.appliance_index = i;
            w.appliance_id = dataset.appliances[i].appliance_id;
            w.t = first + static_cast<Minutes>(n) * spec.step;
            w.telemetry_range = {w.t - spec.telemetry, w.t};
            w.forecast_range = {w.t + spec.action, w.t + spec.action + spec.forecast};
            out.windows.push_back(std::move(w));
        }
    }
    return out;
}

bool label_window(const LabeledWindow& window, const std::vector<AlarmEvent>& alarms, const std::string& alarm_id) {
    return std::any_of(alarms.begin(), alarms.end(), [&](const AlarmEvent& e) {
        return e.appliance_id == window.appliance_id && e.alarm_id == alarm_id &&
               e.at >= window.forecast_range.start && e.at < window.forecast_range.end;
    });
}

void label_windows(std::vector<LabeledWindow>& windows, const std::vector<AlarmEvent>& alarms,
                   const std::string& alarm_id) {
    // Group the relevant event times per appliance, then binary-search each window.
    std::unordered_map<std::string, std::vector<Timestamp>> times;
    for (const auto& e : alarms) {
        if (e.alarm_id == alarm_id) {
            times[e.appliance_id].push_back(e.at);
        }
    }
    for (auto& [id, ts] : times) {
        std::sort(ts.begin(), ts.end());
    }
    for (auto& w : windows) {
        bool positive = false;
        if (const auto it = times.find(w.appliance_id); it != times.end()) {
            const auto lo = std::lower_bound(it->second.begin(), it->second.end(), w.forecast_range.start);
            positive = lo != it->second.end() && *lo < w.forecast_range.end;
        }
        w.labels[alarm_id] = positive;
    }
}

std::string window_manifest_csv(const std::vector<LabeledWindow>& windows, std::span<const std::string> alarm_ids) {
    std::string text = "appliance_id,t,telemetry_start,forecast_start,forecast_end";
    for (const auto& id : alarm_ids) {
        text += ",label:" + id;
    }
    text += '\n';
    for (const auto& w : windows) {
        text += w.appliance_id + "," + std::to_string(w.t.minutes) + "," + std::to_string(w.telemetry_range.start.minutes) +
                "," + std::to_string(w.forecast_range.start.minutes) + "," + std::to_string(w.forecast_range.end.minutes);
        for (const auto& id : alarm_ids) {
            text += w.label(id) ? ",1" : ",0";
        }
        text += '\n';
    }
    return text;
}

} // namespace cohortpm
