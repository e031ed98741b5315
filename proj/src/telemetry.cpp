#include "cohortpm/telemetry.hpp"

#include "cohortpm/error.hpp"
#include "cohortpm/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cohortpm {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::optional<unsigned> fixed_digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) {
        return std::nullopt;
    }
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return std::nullopt;
        }
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    return v;
}

struct CsvFile {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

CsvFile read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header,
                 bool allow_empty = false) {
    if (!std::filesystem::exists(path)) {
        throw DataError("missing file: " + path.string());
    }
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    CsvFile file;
    file.path = path.string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = io::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (file.header.empty()) {
            file.header = io::split_csv_line(t);
            if (file.header != expected_header) {
                std::string want;
                for (const auto& h : expected_header) {
                    want += (want.empty() ? "" : ",") + h;
                }
                throw DataError(file.path + ": expected header '" + want + "'");
            }
            continue;
        }
        file.rows.emplace_back(line_no, io::split_csv_line(t));
    }
    if (file.header.empty() && !allow_empty) {
        throw DataError(file.path + ": empty file, no header");
    }
    return file;
}

// Integer minutes if the first data row's timestamp is all digits.
bool detect_iso(const CsvFile& file, std::size_t column) {
    for (const auto& [line, fields] : file.rows) {
        if (fields.size() > column) {
            return !all_digits(fields[column]);
        }
    }
    return false;
}

Minutes gcd_of_offsets(const std::vector<Minutes>& offsets) {
    Minutes g = 0;
    for (const auto o : offsets) {
        g = std::gcd(g, o);
    }
    return g;
}

} // namespace

std::size_t SensorSeries::missing_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), is_missing));
}

std::optional<std::size_t> CohortDataset::appliance_index(const std::string& id) const {
    for (std::size_t i = 0; i < appliances.size(); ++i) {
        if (appliances[i].appliance_id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> CohortDataset::sensor_index(const std::string& id) const {
    const auto it = std::find(roster.begin(), roster.end(), id);
    if (it == roster.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - roster.begin());
}

void CohortDataset::validate() const {
    if (appliances.size() < 2) {
        throw DataError("cohort needs at least 2 appliances, got " + std::to_string(appliances.size()));
    }
    for (const auto& a : appliances) {
        if (a.series.size() != roster.size()) {
            throw DataError("appliance " + a.appliance_id + " has " + std::to_string(a.series.size()) +
                            " sensors, roster has " + std::to_string(roster.size()));
        }
        for (std::size_t k = 0; k < roster.size(); ++k) {
            if (a.series[k].sensor_id != roster[k]) {
                throw DataError("appliance " + a.appliance_id + ": sensor roster mismatch at '" + roster[k] + "'");
            }
            if (a.series[k].grid_interval <= 0) {
                throw DataError("appliance " + a.appliance_id + " sensor " + roster[k] + ": non-positive grid interval");
            }
        }
    }
}

std::optional<Timestamp> parse_timestamp(const std::string& text, bool iso) {
    const auto s = io::trim(text);
    if (!iso) {
        const auto v = io::parse_int(s);
        if (!v || *v < 0) {
            return std::nullopt;
        }
        return Timestamp{*v};
    }
    // YYYY-MM-DD[THH:MM[:SS[.fff]]][Z]
    const auto y = fixed_digits(s, 0, 4);
    const auto mo = fixed_digits(s, 5, 2);
    const auto d = fixed_digits(s, 8, 2);
    if (!y || !mo || !d || s[4] != '-' || s[7] != '-' || *mo < 1 || *mo > 12 || *d < 1 || *d > 31) {
        return std::nullopt;
    }
    unsigned hh = 0;
    unsigned mm = 0;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        const auto h = fixed_digits(s, pos + 1, 2);
        const auto m = fixed_digits(s, pos + 4, 2);
        if (!h || !m || pos + 3 >= s.size() || s[pos + 3] != ':' || *h > 23 || *m > 59) {
            return std::nullopt;
        }
        hh = *h;
        mm = *m;
        pos += 6;
        if (pos < s.size() && s[pos] == ':') {
            // Seconds are truncated to the minute.
            const auto sec = fixed_digits(s, pos + 1, 2);
            if (!sec || *sec > 60) {
                return std::nullopt;
            }
            pos += 3;
            if (pos < s.size() && s[pos] == '.') {
                ++pos;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                    ++pos;
                }
            }
        }
    }
    if (pos < s.size() && s[pos] == 'Z') {
        ++pos;
    }
    if (pos != s.size()) {
        return std::nullopt;
    }
    const auto days = days_from_civil(*y, *mo, *d);
    const Minutes minutes = days * kMinutesPerDay + hh * kMinutesPerHour + mm;
    if (minutes < 0) {
        return std::nullopt;
    }
    return Timestamp{minutes};
}

std::string format_iso8601(Timestamp t) {
    const auto days = t.minutes / kMinutesPerDay;
    const auto rem = t.minutes % kMinutesPerDay;
    std::int64_t y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 60), static_cast<long long>(rem % 60));
    return buf;
}

LoadedCohort load_cohort(const std::filesystem::path& telemetry_path, const std::filesystem::path& alarms_path) {
    const auto tele = read_csv(telemetry_path, {"timestamp", "appliance_id", "sensor_id", "value"});
    const auto alarm_file = read_csv(alarms_path, {"timestamp", "appliance_id", "alarm_id"}, true);

    LoadedCohort out;
    auto reject = [&](const std::string& file, std::size_t line, std::string msg) {
        out.rejected_rows.push_back({file, line, std::move(msg)});
    };

    struct Sample {
        Minutes at;
        double value;
    };
    // appliance -> sensor -> samples
    std::map<std::string, std::map<std::string, std::vector<Sample>>> raw;
    const bool tele_iso = detect_iso(tele, 0);
    for (const auto& [line, f] : tele.rows) {
        if (f.size() != 4) {
            reject(tele.path, line, "expected 4 fields, got " + std::to_string(f.size()));
            continue;
        }
        const auto ts = parse_timestamp(f[0], tele_iso);
        if (!ts) {
            reject(tele.path, line, "unparseable timestamp '" + f[0] + "'");
            continue;
        }
        if (f[1].empty() || f[2].empty()) {
            reject(tele.path, line, "empty appliance_id or sensor_id");
            continue;
        }
        double value = kMissing;
        if (!f[3].empty()) {
            const auto v = io::parse_double(f[3]);
            if (!v) {
                reject(tele.path, line, "unparseable value '" + f[3] + "'");
                continue;
            }
            value = *v;
        }
        raw[f[1]][f[2]].push_back({ts->minutes, value});
    }

    if (raw.size() < 2) {
        throw DataError(tele.path + ": cohort needs at least 2 appliances, got " + std::to_string(raw.size()));
    }

    // Roster check: every appliance must expose the same sensor set.
    std::vector<std::string> roster;
    for (const auto& [sensor, samples] : raw.begin()->second) {
        roster.push_back(sensor);
    }
    for (const auto& [appliance, sensors] : raw) {
        std::vector<std::string> mine;
        for (const auto& [sensor, samples] : sensors) {
            mine.push_back(sensor);
        }
        if (mine != roster) {
            throw DataError("sensor roster mismatch: appliance " + appliance + " differs from " +
                            raw.begin()->first);
        }
    }

    Minutes first = std::numeric_limits<Minutes>::max();
    for (const auto& [appliance, sensors] : raw) {
        for (const auto& [sensor, samples] : sensors) {
            for (const auto& s : samples) {
                first = std::min(first, s.at);
            }
        }
    }

    // Native grid per series, anchored at the global start.
    Minutes end = first;
    std::map<std::pair<std::string, std::string>, Minutes> interval;
    for (auto& [appliance, sensors] : raw) {
        for (auto& [sensor, samples] : sensors) {
            std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.at < b.at; });
            std::vector<Minutes> offsets;
            offsets.reserve(samples.size());
            for (const auto& s : samples) {
                offsets.push_back(s.at - first);
            }
            Minutes g = gcd_of_offsets(offsets);
            if (g == 0) {
                g = kMinutesPerHour;
            }
            interval[{appliance, sensor}] = g;
            end = std::max(end, samples.back().at + g);
        }
    }

    CohortDataset& ds = out.dataset;
    ds.roster = roster;
    ds.extent = {Timestamp{first}, Timestamp{end}};
    for (const auto& [appliance, sensors] : raw) {
        ApplianceTelemetry a;
        a.appliance_id = appliance;
        for (const auto& [sensor, samples] : sensors) {
            SensorSeries s;
            s.sensor_id = sensor;
            s.grid_interval = interval.at({appliance, sensor});
            s.start = Timestamp{first};
            const auto n = static_cast<std::size_t>((end - first + s.grid_interval - 1) / s.grid_interval);
            s.values.assign(n, kMissing);
            Minutes previous = -1;
            for (const auto& sample : samples) {
                if (sample.at == previous) {
                    throw DataError(tele.path + ": duplicate sample for " + appliance + "/" + sensor + " at " +
                                    std::to_string(sample.at));
                }
                previous = sample.at;
                s.values[static_cast<std::size_t>((sample.at - first) / s.grid_interval)] = sample.value;
            }
            a.series.push_back(std::move(s));
        }
        ds.appliances.push_back(std::move(a));
    }

    const bool alarm_iso = detect_iso(alarm_file, 0);
    for (const auto& [line, f] : alarm_file.rows) {
        if (f.size() != 3) {
            reject(alarm_file.path, line, "expected 3 fields, got " + std::to_string(f.size()));
            continue;
        }
        const auto ts = parse_timestamp(f[0], alarm_iso);
        if (!ts) {
            reject(alarm_file.path, line, "unparseable timestamp '" + f[0] + "'");
            continue;
        }
        if (f[1].empty() || f[2].empty()) {
            reject(alarm_file.path, line, "empty appliance_id or alarm_id");
            continue;
        }
        if (!ds.appliance_index(f[1])) {
            reject(alarm_file.path, line, "unknown appliance '" + f[1] + "'");
            continue;
        }
        if (*ts < ds.extent.start || *ts > ds.extent.end) {
            reject(alarm_file.path, line, "alarm outside the telemetry extent");
            continue;
        }
        ds.alarms.push_back({f[1], f[2], *ts});
    }

    ds.validate();
    return out;
}

SensorSeries resample(const SensorSeries& series, Minutes target_interval) {
    if (target_interval <= 0) {
        throw ConfigError("resample: target interval must be positive");
    }
    if (target_interval < series.grid_interval) {
        throw ConfigError("resample: target interval " + std::to_string(target_interval) +
                          " is finer than the native interval " + std::to_string(series.grid_interval));
    }
    SensorSeries out;
    out.sensor_id = series.sensor_id;
    out.grid_interval = target_interval;
    out.start = series.start;
    const auto n = static_cast<Minutes>(series.values.size());
    const auto span = n * series.grid_interval;
    const auto bins = static_cast<std::size_t>((span + target_interval - 1) / target_interval);
    std::vector<double> sum(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    for (Minutes i = 0; i < n; ++i) {
        const double v = series.values[static_cast<std::size_t>(i)];
        if (is_missing(v)) {
            continue;
        }
        const auto b = static_cast<std::size_t>(i * series.grid_interval / target_interval);
        sum[b] += v;
        ++count[b];
    }
    out.values.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out.values[b] = count[b] == 0 ? kMissing : sum[b] / static_cast<double>(count[b]);
    }
    return out;
}

double observed_median(const std::vector<double>& values) {
    std::vector<double> seen;
    seen.reserve(values.size());
    for (const double v : values) {
        if (!is_missing(v)) {
            seen.push_back(v);
        }
    }
    if (seen.empty()) {
        throw DataError("median of an all-missing series");
    }
    const auto mid = seen.size() / 2;
    std::nth_element(seen.begin(), seen.begin() + static_cast<std::ptrdiff_t>(mid), seen.end());
    const double upper = seen[mid];
    if (seen.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(seen.begin(), seen.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

SensorSeries impute_median(const SensorSeries& series) {
    SensorSeries out = series;
    if (series.missing_count() == 0) {
        return out;
    }
    if (series.missing_count() == series.values.size()) {
        throw DataError("unimputable series '" + series.sensor_id + "': every value is missing");
    }
    const double median = observed_median(series.values);
    for (auto& v : out.values) {
        if (is_missing(v)) {
            v = median;
        }
    }
    return out;
}

CohortDataset prepare_cohort(const CohortDataset& dataset, Minutes grid_interval) {
    dataset.validate();
    if (grid_interval <= 0) {
        throw ConfigError("grid interval must be positive");
    }
    CohortDataset out;
    out.roster = dataset.roster;
    out.alarms = dataset.alarms;
    const auto span = dataset.extent.length();
    const auto bins = static_cast<std::size_t>((span + grid_interval - 1) / grid_interval);
    out.extent = {dataset.extent.start, dataset.extent.start + static_cast<Minutes>(bins) * grid_interval};
    for (const auto& a : dataset.appliances) {
        ApplianceTelemetry prepared;
        prepared.appliance_id = a.appliance_id;
        for (const auto& s : a.series) {
            if (s.start != dataset.extent.start) {
                throw DataError("series " + a.appliance_id + "/" + s.sensor_id + " does not start at the extent start");
            }
            auto r = resample(s, grid_interval);
            r.values.resize(bins, kMissing);
            try {
                prepared.series.push_back(impute_median(r));
            } catch (const DataError& e) {
                throw DataError("appliance " + a.appliance_id + ": " + e.what());
            }
        }
        out.appliances.push_back(std::move(prepared));
    }
    return out;
}

bool AlarmExclusion::matches(const AlarmEvent& e) const {
    return (appliance_id == "*" || appliance_id == e.appliance_id) && (alarm_id == "*" || alarm_id == e.alarm_id) &&
           e.at >= from && e.at <= to;
}

std::vector<AlarmEvent> filter_alarms(const std::vector<AlarmEvent>& alarms,
                                      const std::vector<AlarmExclusion>& exclusions) {
    std::vector<AlarmEvent> kept;
    kept.reserve(alarms.size());
    for (const auto& a : alarms) {
        const bool excluded =
            std::any_of(exclusions.begin(), exclusions.end(), [&](const AlarmExclusion& x) { return x.matches(a); });
        if (!excluded) {
            kept.push_back(a);
        }
    }
    return kept;
}

std::vector<AlarmExclusion> load_exclusions(const std::filesystem::path& path) {
    const auto file = read_csv(path, {"appliance_id", "alarm_id", "from", "to"});
    const bool iso = detect_iso(file, 2);
    std::vector<AlarmExclusion> out;
    for (const auto& [line, f] : file.rows) {
        const auto where = file.path + ":" + std::to_string(line);
        if (f.size() != 4) {
            throw DataError(where + ": expected 4 fields");
        }
        const auto from = parse_timestamp(f[2], iso);
        const auto to = parse_timestamp(f[3], iso);
        if (!from || !to || f[0].empty() || f[1].empty()) {
            throw DataError(where + ": unparseable exclusion");
        }
        if (*to < *from) {
            throw DataError(where + ": exclusion range ends before it starts");
        }
        out.push_back({f[0], f[1], *from, *to});
    }
    return out;
}

std::string telemetry_csv(const CohortDataset& dataset) {
    std::string text = "timestamp,appliance_id,sensor_id,value\n";
    for (const auto& a : dataset.appliances) {
        for (const auto& s : a.series) {
            for (std::size_t i = 0; i < s.values.size(); ++i) {
                text += std::to_string(s.time_at(i).minutes);
                text += ',';
                text += a.appliance_id;
                text += ',';
                text += s.sensor_id;
                text += ',';
                if (!is_missing(s.values[i])) {
                    text += io::format_double(s.values[i]);
                }
                text += '\n';
            }
        }
    }
    return text;
}

std::string alarms_csv(const std::vector<AlarmEvent>& alarms) {
    std::string text = "timestamp,appliance_id,alarm_id\n";
    for (const auto& a : alarms) {
        text += std::to_string(a.at.minutes) + "," + a.appliance_id + "," + a.alarm_id + "\n";
    }
    return text;
}

void write_telemetry_csv(const CohortDataset& dataset, const std::filesystem::path& path) {
    io::write_file_atomic(path, telemetry_csv(dataset));
}

void write_alarms_csv(const std::vector<AlarmEvent>& alarms, const std::filesystem::path& path) {
    io::write_file_atomic(path, alarms_csv(alarms));
}

} // namespace cohortpm
