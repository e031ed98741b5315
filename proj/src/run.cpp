#include "cohortpm/run.hpp"

#include "cohortpm/error.hpp"
#include "cohortpm/io.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace cohortpm {

namespace fs = std::filesystem;

namespace {

// Rethrows with `where` prefixed, keeping the error category.
template <class F>
auto in_stage(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(where + ": " + e.what());
    }
}

std::vector<std::string> split_list(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto next = std::min(text.find(sep, pos), text.size());
        const auto item = io::trim(text.substr(pos, next - pos));
        if (!item.empty()) {
            out.emplace_back(item);
        }
        pos = next + 1;
    }
    return out;
}

std::vector<std::string> split_words(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> out;
    std::string w;
    while (in >> w) {
        out.push_back(w);
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? std::string(sep) : std::string()) + items[i];
    }
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string safe_name(std::string_view id) {
    std::string out(id);
    for (auto& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') {
            c = '_';
        }
    }
    return out;
}

struct KeyContext {
    std::string section;
    std::string key;
    std::string value;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("[" + section + "] " + key + ": " + what + ", got '" + value + "'");
    }

    std::int64_t integer(std::int64_t lo = std::numeric_limits<std::int64_t>::min()) const {
        const auto v = io::parse_int(value);
        if (!v) {
            fail("expected an integer");
        }
        if (*v < lo) {
            fail("expected an integer >= " + std::to_string(lo));
        }
        return *v;
    }

    double real() const {
        const auto v = io::parse_double(value);
        if (!v) {
            fail("expected a finite number");
        }
        return *v;
    }

    Minutes duration() const {
        try {
            return parse_duration(value);
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }

    Timestamp timestamp() const {
        const auto t = parse_timestamp(value, !all_digits(value));
        if (!t) {
            fail("expected integer minutes or an ISO-8601 time");
        }
        return *t;
    }
};

// fault = <appliance> <alarm> <time> <lead> <mode> <severity> <sensor,...|*>
struct RawFault {
    KeyContext where;
    std::vector<std::string> words;
};

FaultScript resolve_fault(const RawFault& raw, const SimConfig& sim) {
    const auto& w = raw.words;
    if (w.size() != 7) {
        raw.where.fail("expected '<appliance> <alarm> <time> <lead> <mode> <severity> <sensors>'");
    }
    FaultScript f;
    f.appliance_id = w[0];
    f.alarm_id = w[1];
    KeyContext part = raw.where;
    if (w[2].front() == '+') {
        part.value = w[2].substr(1);
        f.fault_time = sim.start + part.duration();
    } else {
        part.value = w[2];
        f.fault_time = part.timestamp();
    }
    part.value = w[3];
    f.lead = part.duration();
    const auto mode = parse_fault_mode(w[4]);
    if (!mode) {
        raw.where.fail("unknown fault mode '" + w[4] + "'");
    }
    f.mode = *mode;
    part.value = w[5];
    f.severity = part.real();
    f.affected_sensors = w[6] == "*" ? sensor_names(sim.n_sensors) : split_list(w[6], ',');
    return f;
}

std::string provenance(std::string_view command, const RunConfig& config, const std::string& input_hash,
                       bool with_simulate = false) {
    std::string out = "# cohortpm " + std::string(command) + "\n# input_fnv1a " + input_hash + "\n";
    std::istringstream in(canonical_config(config, with_simulate));
    std::string line;
    while (std::getline(in, line)) {
        out += line.empty() ? "#\n" : "# " + line + "\n";
    }
    return out;
}

std::string hash_files(std::initializer_list<fs::path> paths) {
    io::Fnv1a h;
    for (const auto& p : paths) {
        if (!p.empty()) {
            h.update(io::read_file(p));
        }
        h.update(std::string_view("\0", 1));
    }
    return h.hex();
}

} // namespace

Minutes parse_duration(std::string_view text) {
    const auto t = io::trim(text);
    if (t.empty()) {
        throw ConfigError("empty duration");
    }
    Minutes unit = 1;
    auto digits = t;
    switch (t.back()) {
    case 'd':
        unit = kMinutesPerDay;
        digits.remove_suffix(1);
        break;
    case 'h':
        unit = kMinutesPerHour;
        digits.remove_suffix(1);
        break;
    case 'm':
        digits.remove_suffix(1);
        break;
    default:
        break;
    }
    const auto v = all_digits(digits) ? io::parse_int(digits) : std::nullopt;
    if (!v) {
        throw ConfigError("bad duration '" + std::string(t) + "' (use e.g. 14d, 6h, 30m)");
    }
    return *v * unit;
}

std::string format_duration(Minutes m) {
    if (m != 0 && m % kMinutesPerDay == 0) {
        return std::to_string(m / kMinutesPerDay) + "d";
    }
    if (m != 0 && m % kMinutesPerHour == 0) {
        return std::to_string(m / kMinutesPerHour) + "h";
    }
    return std::to_string(m) + "m";
}

void RunConfig::validate() const {
    window.validate();
    if (grid <= 0) {
        throw ConfigError("[window] grid must be positive");
    }
    if (feature_sets.empty()) {
        throw ConfigError("[features] sets is empty");
    }
    train.validate();
    if (cost) {
        cost->validate();
    }
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
    RunConfig c;
    static const std::map<std::string, std::set<std::string>> kKeys = {
        {"paths", {"telemetry", "alarms", "exclusions", "output"}},
        {"window", {"telemetry", "action", "forecast", "step", "grid"}},
        {"features", {"sets"}},
        {"train", {"n_rounds", "max_depth", "min_samples_leaf", "epsilon_clamp", "seed", "positive_weight"}},
        {"cost", {"unnecessary_maintenance", "unprevented_fault"}},
        {"run", {"alarms", "threads"}},
        {"simulate",
         {"n_appliances", "n_sensors", "days", "grid", "start", "seasonal_amplitude", "daily_amplitude", "bias_spread",
          "noise_std", "quantum", "seed", "seasonal_shift", "fault"}},
    };
    const auto path = [&](const std::string& v) -> fs::path {
        if (v.empty()) {
            return {};
        }
        const fs::path p(v);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };

    std::string section;
    std::set<std::string> seen;
    std::vector<RawFault> faults;
    CostModel cost;
    bool have_cost = false;
    std::istringstream in{std::string(text)};
    std::string raw_line;
    std::size_t line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        const auto line = io::trim(raw_line);
        if (line.empty() || line.front() == '#' || line.front() == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            }
            section = std::string(io::trim(line.substr(1, line.size() - 2)));
            if (!kKeys.count(section)) {
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        if (section.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        }
        const KeyContext k{section, std::string(io::trim(line.substr(0, eq))), std::string(io::trim(line.substr(eq + 1)))};
        if (!kKeys.at(section).count(k.key)) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + k.key + "' in [" + section + "]");
        }
        if (k.key != "fault" && !seen.insert(section + "." + k.key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + k.key + "' in [" + section + "]");
        }

        if (section == "paths") {
            auto& target = k.key == "telemetry" ? c.paths.telemetry
                           : k.key == "alarms"  ? c.paths.alarms
                           : k.key == "output"  ? c.paths.output
                                                : c.paths.exclusions;
            target = path(k.value);
        } else if (section == "window") {
            const auto d = k.duration();
            if (k.key == "telemetry") {
                c.window.telemetry = d;
            } else if (k.key == "action") {
                c.window.action = d;
            } else if (k.key == "forecast") {
                c.window.forecast = d;
            } else if (k.key == "step") {
                c.window.step = d;
            } else {
                c.grid = d;
            }
        } else if (section == "features") {
            c.feature_sets.clear();
            for (const auto& name : split_list(k.value, ',')) {
                const auto s = parse_feature_set(name);
                if (!s) {
                    k.fail("unknown feature set '" + name + "'");
                }
                if (std::find(c.feature_sets.begin(), c.feature_sets.end(), *s) == c.feature_sets.end()) {
                    c.feature_sets.push_back(*s);
                }
            }
        } else if (section == "train") {
            if (k.key == "n_rounds") {
                c.train.n_rounds = static_cast<int>(k.integer(1));
            } else if (k.key == "max_depth") {
                c.train.tree.max_depth = static_cast<int>(k.integer(1));
            } else if (k.key == "min_samples_leaf") {
                c.train.tree.min_samples_leaf = static_cast<int>(k.integer(1));
            } else if (k.key == "epsilon_clamp") {
                c.train.epsilon_clamp = k.real();
            } else if (k.key == "seed") {
                c.train.seed = static_cast<std::uint64_t>(k.integer(0));
            } else {
                c.train.positive_weight = k.real();
            }
        } else if (section == "cost") {
            have_cost = true;
            (k.key == "unnecessary_maintenance" ? cost.unnecessary_maintenance : cost.unprevented_fault) = k.real();
        } else if (section == "run") {
            if (k.key == "alarms") {
                c.alarm_ids = split_list(k.value, ',');
            } else {
                c.threads = static_cast<unsigned>(k.integer(0));
            }
        } else { // simulate
            auto& s = c.simulate;
            if (k.key == "n_appliances") {
                s.n_appliances = static_cast<std::size_t>(k.integer(0));
            } else if (k.key == "n_sensors") {
                s.n_sensors = static_cast<std::size_t>(k.integer(0));
            } else if (k.key == "days") {
                s.days = static_cast<int>(k.integer(1));
            } else if (k.key == "grid") {
                s.grid_interval = k.duration();
            } else if (k.key == "start") {
                s.start = k.timestamp();
            } else if (k.key == "seasonal_amplitude") {
                s.seasonal_amplitude = k.real();
            } else if (k.key == "daily_amplitude") {
                s.daily_amplitude = k.real();
            } else if (k.key == "bias_spread") {
                s.bias_spread = k.real();
            } else if (k.key == "noise_std") {
                s.noise_std = k.real();
            } else if (k.key == "quantum") {
                s.quantum = k.real();
            } else if (k.key == "seed") {
                s.seed = static_cast<std::uint64_t>(k.integer(0));
            } else if (k.key == "seasonal_shift") {
                s.seasonal_shift_days.clear();
                for (const auto& item : split_list(k.value, ',')) {
                    KeyContext part = k;
                    part.value = item;
                    s.seasonal_shift_days.push_back(part.real());
                }
            } else {
                faults.push_back({k, split_words(k.value)});
            }
        }
    }
    if (have_cost) {
        c.cost = cost;
    }
    for (const auto& f : faults) {
        c.simulate.faults.push_back(resolve_fault(f, c.simulate));
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    return parse_run_config(io::read_file(path), path.parent_path());
}

void apply_path_overrides(RunConfig& config, const std::function<const char*(const char*)>& getenv) {
    const std::pair<const char*, fs::path*> vars[] = {
        {"COHORTPM_TELEMETRY", &config.paths.telemetry},
        {"COHORTPM_ALARMS", &config.paths.alarms},
        {"COHORTPM_EXCLUSIONS", &config.paths.exclusions},
        {"COHORTPM_OUTPUT", &config.paths.output},
    };
    for (const auto& [name, target] : vars) {
        if (const char* v = getenv(name); v != nullptr) {
            *target = v;
        }
    }
}

std::string canonical_config(const RunConfig& c, bool with_simulate) {
    std::vector<std::string> sets;
    for (const auto s : c.feature_sets) {
        sets.emplace_back(feature_set_name(s));
    }
    std::string out;
    out += "[paths]\n";
    out += "telemetry = " + c.paths.telemetry.string() + "\n";
    out += "alarms = " + c.paths.alarms.string() + "\n";
    out += "exclusions = " + c.paths.exclusions.string() + "\n";
    out += "output = " + c.paths.output.string() + "\n";
    out += "\n[window]\n";
    out += "telemetry = " + format_duration(c.window.telemetry) + "\n";
    out += "action = " + format_duration(c.window.action) + "\n";
    out += "forecast = " + format_duration(c.window.forecast) + "\n";
    out += "step = " + format_duration(c.window.step) + "\n";
    out += "grid = " + format_duration(c.grid) + "\n";
    out += "\n[features]\nsets = " + join(sets, ", ") + "\n";
    out += "\n[train]\n";
    out += "n_rounds = " + std::to_string(c.train.n_rounds) + "\n";
    out += "max_depth = " + std::to_string(c.train.tree.max_depth) + "\n";
    out += "min_samples_leaf = " + std::to_string(c.train.tree.min_samples_leaf) + "\n";
    out += "epsilon_clamp = " + io::format_double(c.train.epsilon_clamp) + "\n";
    out += "seed = " + std::to_string(c.train.seed) + "\n";
    out += "positive_weight = " + io::format_double(c.train.positive_weight) + "\n";
    if (c.cost) {
        out += "\n[cost]\n";
        out += "unnecessary_maintenance = " + io::format_double(c.cost->unnecessary_maintenance) + "\n";
        out += "unprevented_fault = " + io::format_double(c.cost->unprevented_fault) + "\n";
    }
    out += "\n[run]\n";
    out += "alarms = " + join(c.alarm_ids, ", ") + "\n";
    out += "threads = " + std::to_string(c.threads) + "\n";
    if (with_simulate) {
        const auto& s = c.simulate;
        out += "\n[simulate]\n";
        out += "n_appliances = " + std::to_string(s.n_appliances) + "\n";
        out += "n_sensors = " + std::to_string(s.n_sensors) + "\n";
        out += "days = " + std::to_string(s.days) + "\n";
        out += "grid = " + format_duration(s.grid_interval) + "\n";
        out += "start = " + std::to_string(s.start.minutes) + "\n";
        out += "seasonal_amplitude = " + io::format_double(s.seasonal_amplitude) + "\n";
        out += "daily_amplitude = " + io::format_double(s.daily_amplitude) + "\n";
        out += "bias_spread = " + io::format_double(s.bias_spread) + "\n";
        out += "noise_std = " + io::format_double(s.noise_std) + "\n";
        out += "quantum = " + io::format_double(s.quantum) + "\n";
        out += "seed = " + std::to_string(s.seed) + "\n";
        if (!s.seasonal_shift_days.empty()) {
            std::vector<std::string> shifts;
            for (const double d : s.seasonal_shift_days) {
                shifts.push_back(io::format_double(d));
            }
            out += "seasonal_shift = " + join(shifts, ", ") + "\n";
        }
        for (const auto& f : s.faults) {
            out += "fault = " + f.appliance_id + " " + f.alarm_id + " " + std::to_string(f.fault_time.minutes) + " " +
                   format_duration(f.lead) + " " + std::string(fault_mode_name(f.mode)) + " " +
                   io::format_double(f.severity) + " " + join(f.affected_sensors, ",") + "\n";
        }
    }
    return out;
}

PreparedRun prepare_run(const RunConfig& config) {
    config.validate();
    PreparedRun run;
    auto loaded = in_stage("telemetry", [&] { return load_cohort(config.paths.telemetry, config.paths.alarms); });
    run.rejected_rows = std::move(loaded.rejected_rows);
    run.input_hash = hash_files({config.paths.telemetry, config.paths.alarms, config.paths.exclusions});
    auto& raw = loaded.dataset;
    if (!config.paths.exclusions.empty()) {
        raw.alarms = in_stage("telemetry", [&] { return filter_alarms(raw.alarms, load_exclusions(config.paths.exclusions)); });
    }
    run.dataset = in_stage("telemetry", [&] { return prepare_cohort(raw, config.grid); });

    run.alarm_ids = config.alarm_ids;
    if (run.alarm_ids.empty()) {
        std::set<std::string> ids;
        for (const auto& a : run.dataset.alarms) {
            ids.insert(a.alarm_id);
        }
        run.alarm_ids.assign(ids.begin(), ids.end());
    }
    if (run.alarm_ids.empty()) {
        throw DataError("telemetry: no alarms to evaluate");
    }

    auto ws = in_stage("windowing", [&] { return enumerate_windows(run.dataset, config.window); });
    if (ws.extent_too_short) {
        throw DataError("windowing: dataset extent " + format_duration(run.dataset.extent.length()) +
                        " is shorter than T + Ta + Tf = " + format_duration(config.window.span()));
    }
    run.windows = std::move(ws.windows);
    for (const auto& id : run.alarm_ids) {
        label_windows(run.windows, run.dataset.alarms, id);
    }
    return run;
}

std::vector<fs::path> cmd_simulate(const RunConfig& config) {
    const auto sim = in_stage("simulate", [&] { return generate_cohort(config.simulate); });
    io::Fnv1a h;
    h.update(canonical_config(config, true));
    const auto header = provenance("simulate", config, h.hex(), true);
    io::write_file_atomic(config.paths.telemetry, header + telemetry_csv(sim.dataset));
    io::write_file_atomic(config.paths.alarms, header + alarms_csv(sim.ground_truth));
    return {config.paths.telemetry, config.paths.alarms};
}

std::vector<fs::path> cmd_featurize(const RunConfig& config) {
    const auto run = prepare_run(config);
    const auto header = provenance("featurize", config, run.input_hash);
    const auto& out = config.paths.output;
    std::vector<fs::path> written;

    std::string rejected = "file,line,message\n";
    for (const auto& r : run.rejected_rows) {
        rejected += r.file + "," + std::to_string(r.line) + ",\"" + r.message + "\"\n";
    }
    written.push_back(out / "rejected_rows.csv");
    io::write_file_atomic(written.back(), header + rejected);
    written.push_back(out / "windows.csv");
    io::write_file_atomic(written.back(), header + window_manifest_csv(run.windows, run.alarm_ids));

    const FeatureBank bank = in_stage("features", [&] {
        return FeatureBank(run.dataset, run.windows, config.feature_sets, config.threads);
    });
    for (const auto set : config.feature_sets) {
        written.push_back(out / "features" / (std::string(feature_set_slug(set)) + ".csv"));
        io::write_file_atomic(written.back(), header + feature_matrix_csv(bank.matrix(set), run.windows, run.alarm_ids));
    }
    return written;
}

std::vector<fs::path> cmd_train(const RunConfig& config) {
    const auto run = prepare_run(config);
    const auto header = provenance("train", config, run.input_hash);
    const FeatureBank bank = in_stage("features", [&] {
        return FeatureBank(run.dataset, run.windows, config.feature_sets, config.threads);
    });
    std::vector<fs::path> written;
    for (const auto& alarm : run.alarm_ids) {
        std::vector<int> labels;
        labels.reserve(run.windows.size());
        for (const auto& w : run.windows) {
            labels.push_back(w.label(alarm) ? 1 : -1);
        }
        for (const auto set : config.feature_sets) {
            const auto where = "model: alarm " + alarm + ", " + std::string(feature_set_name(set));
            const auto model = in_stage(where, [&] {
                const TrainingData data(bank.matrix(set), labels);
                return train_adaboost(data, config.train);
            });
            written.push_back(config.paths.output / "models" / safe_name(alarm) /
                              (std::string(feature_set_slug(set)) + ".model"));
            io::write_file_atomic(written.back(), header + serialize_model(model));
        }
    }
    return written;
}

std::vector<fs::path> cmd_evaluate(const RunConfig& config) {
    const auto run = prepare_run(config);
    const auto header = provenance("evaluate", config, run.input_hash);
    const FeatureBank bank = in_stage("features", [&] {
        return FeatureBank(run.dataset, run.windows, config.feature_sets, config.threads);
    });
    const auto& out = config.paths.output;
    std::vector<fs::path> written;
    std::string report = "alarm,features,mean_auc\n";
    std::string folds = "alarm,features,appliance_id,auc,test_windows,positive_windows\n";
    std::string thresholds = "alarm,features,appliance_id,threshold,cost,n_um,n_uoc\n";
    for (const auto& alarm : run.alarm_ids) {
        for (const auto set : config.feature_sets) {
            const std::string name(feature_set_name(set));
            const auto result = in_stage("eval: alarm " + alarm + ", " + name, [&] {
                return run_folds(bank.matrix(set), run.windows, alarm, set, config.train, config.cost, config.threads);
            });
            report += alarm + "," + name + "," + io::format_double(result.mean_auc) + "\n";
            for (const auto& f : result.folds) {
                const auto pos = std::count(f.labels.begin(), f.labels.end(), std::uint8_t{1});
                folds += alarm + "," + name + "," + f.appliance_id + "," + io::format_double(f.auc) + "," +
                         std::to_string(f.test_rows.size()) + "," + std::to_string(pos) + "\n";
                if (f.threshold) {
                    thresholds += alarm + "," + name + "," + f.appliance_id + "," +
                                  io::format_double(f.threshold->threshold) + "," +
                                  io::format_double(f.threshold->cost) + "," + std::to_string(f.threshold->n_um) +
                                  "," + std::to_string(f.threshold->n_uoc) + "\n";
                }
            }
            std::string roc = "fpr,tpr\n";
            for (const auto& p : result.average.points) {
                roc += io::format_double(p.fpr) + "," + io::format_double(p.tpr) + "\n";
            }
            written.push_back(out / "roc" / safe_name(alarm) / (std::string(feature_set_slug(set)) + ".csv"));
            io::write_file_atomic(written.back(), header + roc);
        }
    }
    written.push_back(out / "folds.csv");
    io::write_file_atomic(written.back(), header + folds);
    if (config.cost) {
        written.push_back(out / "thresholds.csv");
        io::write_file_atomic(written.back(), header + thresholds);
    }
    written.push_back(out / "report.csv");
    io::write_file_atomic(written.back(), header + report);
    return written;
}

std::string cmd_report(const RunConfig& config) {
    const auto path = config.paths.output / "report.csv";
    if (!fs::exists(path)) {
        throw DataError("report: " + path.string() + " not found; run evaluate first");
    }
    const auto text = io::read_file(path);
    std::istringstream in(text);
    std::string line;
    bool header = false;
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<std::string, double>>> rows;
    std::size_t width = std::string_view("Features").size();
    while (std::getline(in, line)) {
        const auto t = io::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto fields = io::split_csv_line(t);
        if (!header) {
            if (fields != std::vector<std::string>{"alarm", "features", "mean_auc"}) {
                throw DataError("report: unexpected header in " + path.string());
            }
            header = true;
            continue;
        }
        const auto auc_value = fields.size() == 3 ? io::parse_double(fields[2]) : std::nullopt;
        if (!auc_value) {
            throw DataError("report: malformed row '" + std::string(t) + "'");
        }
        if (!rows.count(fields[0])) {
            order.push_back(fields[0]);
        }
        rows[fields[0]].emplace_back(fields[1], *auc_value);
        width = std::max(width, fields[1].size());
    }
    std::size_t alarm_width = std::string_view("Alarm").size();
    for (const auto& a : order) {
        alarm_width = std::max(alarm_width, a.size());
    }
    const auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::string table = pad("Alarm", alarm_width) + "  " + pad("Features", width) + "  Average AUC\n";
    for (const auto& a : order) {
        bool first = true;
        for (const auto& [set, value] : rows[a]) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", value);
            table += pad(first ? a : "", alarm_width) + "  " + pad(set, width) + "  " + buf + "\n";
            first = false;
        }
    }
    io::Fnv1a h;
    h.update(text);
    io::write_file_atomic(config.paths.output / "table.txt", provenance("report", config, h.hex()) + table);
    return table;
}

} // namespace cohortpm
