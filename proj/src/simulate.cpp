#include "cohortpm/simulate.hpp"

#include "cohortpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cohortpm {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s_) {
        word = sm.next();
    }
}

std::uint64_t Xoshiro256::next() {
    const auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256::gaussian() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = SplitMix64(master ^ purpose).next();
    s = SplitMix64(s ^ a).next();
    return SplitMix64(s ^ b).next();
}

std::string_view fault_mode_name(FaultMode mode) {
    switch (mode) {
    case FaultMode::drift:
        return "drift";
    case FaultMode::decorrelate:
        return "decorrelate";
    case FaultMode::flatline:
        return "flatline";
    }
    return "?";
}

std::optional<FaultMode> parse_fault_mode(std::string_view name) {
    for (const auto m : {FaultMode::drift, FaultMode::decorrelate, FaultMode::flatline}) {
        if (fault_mode_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::string appliance_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "hvac%02zu", index + 1);
    return buf;
}

std::vector<std::string> sensor_names(std::size_t count) {
    static const char* const kRoster[] = {"ComValvFred", "ComValvPre",   "ComValvUmid",  "PortataMand", "PortataRip",
                                          "PresManWilso", "PresRipWilso", "SgnIVM1",      "SgnIVM2",     "SgnIVR1",
                                          "SgnIVR2",     "TempMand",     "TempRip",      "UmidMand",    "UmidRip"};
    std::vector<std::string> out;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(k < std::size(kRoster) ? std::string(kRoster[k]) : "sensor" + std::to_string(k + 1));
    }
    return out;
}

TimeRange SimConfig::extent() const {
    return {start, start + static_cast<Minutes>(days) * kMinutesPerDay};
}

void SimConfig::validate() const {
    if (n_appliances < 2) {
        throw ConfigError("simulation needs at least 2 appliances");
    }
    if (n_sensors < 1) {
        throw ConfigError("simulation needs at least 1 sensor");
    }
    if (days < 1 || grid_interval <= 0 || (static_cast<Minutes>(days) * kMinutesPerDay) % grid_interval != 0) {
        throw ConfigError("days must be positive and a whole number of grid intervals");
    }
    if (start.minutes < 0) {
        throw ConfigError("start must be non-negative");
    }
    if (!(noise_std >= 0.0) || !(quantum >= 0.0) || !(bias_spread >= 0.0)) {
        throw ConfigError("noise_std, bias_spread and quantum must be non-negative");
    }
    if (!seasonal_shift_days.empty() && seasonal_shift_days.size() != n_appliances) {
        throw ConfigError("seasonal_shift_days needs one entry per appliance");
    }
    const auto ext = extent();
    const auto roster = sensor_names(n_sensors);
    for (const auto& f : faults) {
        if (f.lead <= 0) {
            throw ConfigError("fault lead must be positive");
        }
        if (f.fault_time - f.lead < ext.start || f.fault_time > ext.end) {
            throw ConfigError("fault script for " + f.appliance_id + " lies outside the extent");
        }
        bool known = false;
        for (std::size_t i = 0; i < n_appliances; ++i) {
            known |= appliance_name(i) == f.appliance_id;
        }
        if (!known) {
            throw ConfigError("fault script names unknown appliance '" + f.appliance_id + "'");
        }
        if (f.alarm_id.empty()) {
            throw ConfigError("fault script needs an alarm id");
        }
        for (const auto& s : f.affected_sensors) {
            if (std::find(roster.begin(), roster.end(), s) == roster.end()) {
                throw ConfigError("fault script names unknown sensor '" + s + "'");
            }
        }
        if (!(f.severity >= 0.0)) {
            throw ConfigError("fault severity must be non-negative");
        }
    }
}

namespace {

enum Purpose : std::uint64_t { kSensorShape = 1, kBias = 2, kNoise = 3, kFaultNoise = 4 };

constexpr double kTwoPi = 2.0 * std::numbers::pi;

} // namespace

SimulatedCohort generate_cohort(const SimConfig& config) {
    config.validate();
    const auto n = config.n_appliances;
    const auto m = config.n_sensors;
    const auto ext = config.extent();
    const auto samples = static_cast<std::size_t>(ext.length() / config.grid_interval);

    struct SensorShape {
        double base;
        double yearly_phase;
        double daily_phase;
    };
    std::vector<SensorShape> shape(m);
    for (std::size_t k = 0; k < m; ++k) {
        Xoshiro256 rng(derive_seed(config.seed, kSensorShape, 0, k));
        shape[k].base = 20.0 + 60.0 * rng.uniform();
        shape[k].yearly_phase = kTwoPi * rng.uniform();
        shape[k].daily_phase = kTwoPi * rng.uniform();
    }

    // seasonal + daily part, identical across appliances up to the seasonal shift
    const double year = 365.0;
    const auto shared = [&](std::size_t i, std::size_t k, double day) {
        const double shift = config.seasonal_shift_days.empty() ? 0.0 : config.seasonal_shift_days[i];
        return config.seasonal_amplitude * std::sin(kTwoPi * (day + shift) / year + shape[k].yearly_phase) +
               config.daily_amplitude * std::sin(kTwoPi * day + shape[k].daily_phase);
    };

    SimulatedCohort out;
    auto& ds = out.dataset;
    ds.roster = sensor_names(m);
    ds.extent = ext;
    for (std::size_t i = 0; i < n; ++i) {
        ApplianceTelemetry a;
        a.appliance_id = appliance_name(i);
        for (std::size_t k = 0; k < m; ++k) {
            Xoshiro256 bias_rng(derive_seed(config.seed, kBias, i, k));
            Xoshiro256 noise_rng(derive_seed(config.seed, kNoise, i, k));
            const double bias = config.bias_spread * (2.0 * bias_rng.uniform() - 1.0);
            SensorSeries s;
            s.sensor_id = ds.roster[k];
            s.grid_interval = config.grid_interval;
            s.start = ext.start;
            s.values.resize(samples);
            for (std::size_t j = 0; j < samples; ++j) {
                const double day = static_cast<double>(s.time_at(j).minutes) / static_cast<double>(kMinutesPerDay);
                s.values[j] = shape[k].base + shared(i, k, day) + bias + config.noise_std * noise_rng.gaussian();
            }
            a.series.push_back(std::move(s));
        }
        ds.appliances.push_back(std::move(a));
    }

    for (std::size_t f = 0; f < config.faults.size(); ++f) {
        const auto& script = config.faults[f];
        const auto a_index = *ds.appliance_index(script.appliance_id);
        auto& a = ds.appliances[a_index];
        const Timestamp onset = script.fault_time - script.lead;
        for (const auto& sensor : script.affected_sensors) {
            const auto k = *ds.sensor_index(sensor);
            auto& s = a.series[k];
            Xoshiro256 rng(derive_seed(config.seed, kFaultNoise, f, k));
            const double swap_std =
                std::hypot(config.seasonal_amplitude, config.daily_amplitude) / std::numbers::sqrt2;
            std::optional<double> held;
            for (std::size_t j = 0; j < samples; ++j) {
                const Timestamp t = s.time_at(j);
                if (t < onset || t > script.fault_time) {
                    continue;
                }
                const double day = static_cast<double>(t.minutes) / static_cast<double>(kMinutesPerDay);
                switch (script.mode) {
                case FaultMode::drift:
                    s.values[j] += script.severity * static_cast<double>(t - onset) / static_cast<double>(kMinutesPerDay);
                    break;
                case FaultMode::decorrelate:
                    s.values[j] += script.severity * (swap_std * rng.gaussian() - shared(a_index, k, day));
                    break;
                case FaultMode::flatline:
                    if (!held) {
                        held = s.values[j];
                    }
                    s.values[j] = *held;
                    break;
                }
            }
        }
        out.ground_truth.push_back({script.appliance_id, script.alarm_id, script.fault_time});
    }

    if (config.quantum > 0.0) {
        for (auto& a : ds.appliances) {
            for (auto& s : a.series) {
                for (auto& v : s.values) {
                    v = std::round(v / config.quantum) * config.quantum;
                }
            }
        }
    }
    ds.alarms = out.ground_truth;
    ds.validate();
    return out;
}

} // namespace cohortpm
