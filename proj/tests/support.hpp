#pragma once

// Shared fixtures and reference implementations for the test binaries.
// The oracles use the textbook formulas directly, in long double, with no
// code shared with the library.

#include "cohortpm/telemetry.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

using cohortpm::CohortDataset;
using cohortpm::Minutes;

/// Directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("cohortpm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

/// N appliances x M sensors on an hourly grid from t=0, value(i, k, j).
inline CohortDataset make_dataset(std::size_t n, std::size_t m, std::size_t samples,
                                  const std::function<double(std::size_t, std::size_t, std::size_t)>& value,
                                  Minutes grid = cohortpm::kMinutesPerHour) {
    CohortDataset ds;
    for (std::size_t k = 0; k < m; ++k) {
        ds.roster.push_back("s" + std::to_string(k));
    }
    for (std::size_t i = 0; i < n; ++i) {
        cohortpm::ApplianceTelemetry a;
        a.appliance_id = "a" + std::to_string(i);
        for (std::size_t k = 0; k < m; ++k) {
            cohortpm::SensorSeries s;
            s.sensor_id = ds.roster[k];
            s.grid_interval = grid;
            for (std::size_t j = 0; j < samples; ++j) {
                s.values.push_back(value(i, k, j));
            }
            a.series.push_back(std::move(s));
        }
        ds.appliances.push_back(std::move(a));
    }
    ds.extent = {cohortpm::Timestamp{0}, cohortpm::Timestamp{static_cast<Minutes>(samples) * grid}};
    return ds;
}

/// r = sum (x - mx)(y - my) / sqrt(sum (x - mx)^2 sum (y - my)^2); nullopt for zero variance.
/// Works on offsets from the first element (exact), which leaves r unchanged and
/// keeps large offsets from swamping a small spread.
inline std::optional<long double> pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<long double> dx(n), dy(n);
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = static_cast<long double>(x[i]) - x[0];
        dy[i] = static_cast<long double>(y[i]) - y[0];
        mx += dx[i];
        my += dy[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (dx[i] - mx) * (dy[i] - my);
        sxx += (dx[i] - mx) * (dx[i] - mx);
        syy += (dy[i] - my) * (dy[i] - my);
    }
    if (sxx == 0 || syy == 0) {
        return std::nullopt;
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double pearson_dissim_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const auto r = pearson_oracle(x, y);
    return r ? static_cast<double>(1.0L - *r) : 1.0;
}

/// rank_i = 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2, by counting.
inline std::vector<double> rank_oracle(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (const double v : x) {
            less += v < x[i];
            equal += v == x[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

inline double spearman_dissim_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson_dissim_oracle(rank_oracle(x), rank_oracle(y));
}

/// P(score_pos > score_neg) + P(tie) / 2 over all (positive, negative) pairs.
inline double mann_whitney_oracle(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] && !y[j]) {
                pairs += 1;
                wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
        }
    }
    return wins / pairs;
}

/// Alarm iff score > tr; counts by direct loop.
struct CostCount {
    std::size_t n_um = 0;
    std::size_t n_uoc = 0;
};
inline CostCount count_errors(const std::vector<double>& s, const std::vector<std::uint8_t>& y, double tr) {
    CostCount c;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool alarm = s[i] > tr;
        c.n_um += alarm && !y[i];
        c.n_uoc += !alarm && y[i];
    }
    return c;
}

/// Series of length n with a mix of continuous values, heavy ties, and constant runs.
inline std::vector<double> random_series(std::mt19937_64& rng, std::size_t n, int kind) {
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::uniform_int_distribution<int> small(0, 4);
    std::vector<double> out(n);
    switch (kind % 4) {
    case 0:
        for (auto& v : out) v = u(rng);
        break;
    case 1: // ties
        for (auto& v : out) v = small(rng);
        break;
    case 2: // constant
        std::fill(out.begin(), out.end(), u(rng));
        break;
    default: // large offset, small spread
        for (auto& v : out) v = 1e6 + u(rng) * 1e-3;
        break;
    }
    return out;
}

} // namespace testsupport
