#pragma once

#include "cohortpm/telemetry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cohortpm {

/// SplitMix64; used only to expand seeds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();

private:
    std::uint64_t state_;
};

/// xoshiro256** seeded from four SplitMix64 outputs.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed);
    std::uint64_t next();
    /// 53-bit uniform in [0, 1).
    double uniform();
    /// Box-Muller cosine branch; one standard normal per two uniforms.
    double gaussian();

private:
    std::array<std::uint64_t, 4> s_{};
};

/// Seed of the stream (purpose, a, b) under `master`: three chained SplitMix64 steps.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t a, std::uint64_t b);

enum class FaultMode { drift, decorrelate, flatline };

std::string_view fault_mode_name(FaultMode mode);
std::optional<FaultMode> parse_fault_mode(std::string_view name);

/// Perturbs `affected_sensors` of one appliance over [fault_time - lead, fault_time]
/// and raises `alarm_id` at fault_time.
///   drift:       adds severity * (days since onset)
///   decorrelate: replaces `severity` of the shared seasonal and daily cycle
///                with independent noise of matching standard deviation
///   flatline:    holds the value reached at onset
struct FaultScript {
    std::string appliance_id;
    std::string alarm_id;
    Timestamp fault_time;
    Minutes lead = 0;
    std::vector<std::string> affected_sensors;
    FaultMode mode = FaultMode::decorrelate;
    double severity = 1.0;
};

struct SimConfig {
    std::size_t n_appliances = 17;
    std::size_t n_sensors = 15;
    int days = 365;
    Minutes grid_interval = kMinutesPerHour;
    Timestamp start{0};
    double seasonal_amplitude = 10.0;
    double daily_amplitude = 5.0;
    double bias_spread = 3.0;
    double noise_std = 1.0;
    /// Output values are rounded to multiples of this step; 0 disables rounding.
    double quantum = 1.0 / 1024.0;
    std::vector<FaultScript> faults;
    std::uint64_t seed = 1;
    /// Optional per-appliance phase shift of the yearly component, in days.
    std::vector<double> seasonal_shift_days;

    void validate() const;
    TimeRange extent() const;
};

struct SimulatedCohort {
    CohortDataset dataset;
    std::vector<AlarmEvent> ground_truth;
};

/// s_i^k(t) = base_k + A_s sin(2pi (t + shift_i)/365d + phi_k) + A_d sin(2pi t/1d + psi_k)
///            + bias_ik + noise, then fault perturbations, then rounding to `quantum`.
SimulatedCohort generate_cohort(const SimConfig& config);

/// "hvac01", "hvac02", ...
std::string appliance_name(std::size_t index);

/// The 15-sensor HVAC roster, extended with "sensor16"... beyond that.
std::vector<std::string> sensor_names(std::size_t count);

} // namespace cohortpm
