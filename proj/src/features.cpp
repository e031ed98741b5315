#include "cohortpm/features.hpp"

#include "cohortpm/error.hpp"
#include "cohortpm/io.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace cohortpm {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DataError("dissimilarity: length mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw DataError("dissimilarity: need at least 2 samples");
    }
}

std::string two_digits(std::size_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%02zu", v);
    return buf;
}

std::string_view measure_name(Measure m) {
    return m == Measure::pearson ? "pearson" : "spearman";
}

std::vector<Measure> expand(Measure m) {
    if (m == Measure::both) {
        return {Measure::pearson, Measure::spearman};
    }
    return {m};
}

constexpr const char* kStatNames[] = {"max", "min", "mean", "std", "skew", "kurt"};

void check_window(const LabeledWindow& window, const CohortDataset& dataset) {
    if (window.appliance_index >= dataset.appliance_count() ||
        dataset.appliances[window.appliance_index].appliance_id != window.appliance_id) {
        throw DataError("window appliance '" + window.appliance_id + "' is not part of the dataset");
    }
}

} // namespace

std::uint64_t FeatureSchema::fingerprint() const {
    io::Fnv1a h;
    for (const auto& n : names) {
        h.update(n);
        h.update("\n");
    }
    return h.digest();
}

std::optional<double> pearson_correlation(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    const auto n = static_cast<double>(x.size());
    const double x0 = x[0];
    const double y0 = y[0];
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i] - x0;
        sy += y[i] - y0;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = (x[i] - x0) - mx;
        const double dy = (y[i] - y0) - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double pearson_dissim(std::span<const double> x, std::span<const double> y) {
    const auto r = pearson_correlation(x, y);
    return r ? 1.0 - *r : 1.0;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && x[order[j]] == x[order[i]]) {
            ++j;
        }
        // positions i..j-1 hold ranks i+1..j
        const double r = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t p = i; p < j; ++p) {
            ranks[order[p]] = r;
        }
        i = j;
    }
    return ranks;
}

double spearman_dissim(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson_dissim(rx, ry);
}

std::span<const double> telemetry_slice(const CohortDataset& dataset, std::size_t appliance, std::size_t sensor,
                                        TimeRange range) {
    const auto& a = dataset.appliances.at(appliance);
    const auto& s = a.series.at(sensor);
    const auto fail = [&](const std::string& why) {
        return DataError("coverage error: appliance " + a.appliance_id + " sensor " + s.sensor_id + ": " + why);
    };
    const Minutes g = s.grid_interval;
    const Minutes from = range.start - s.start;
    const Minutes to = range.end - s.start;
    if (from < 0 || to < from) {
        throw fail("telemetry range starts before the series");
    }
    const auto lo = static_cast<std::size_t>((from + g - 1) / g);
    const auto hi = static_cast<std::size_t>(to / g);
    if (hi >= s.values.size() || hi < lo) {
        throw fail("telemetry range extends past the series");
    }
    std::span<const double> slice(s.values.data() + lo, hi - lo + 1);
    if (std::any_of(slice.begin(), slice.end(), is_missing)) {
        throw fail("missing samples in the telemetry range (series not imputed)");
    }
    return slice;
}

FeatureSchema cohort_schema(const CohortDataset& dataset, Measure measure) {
    FeatureSchema schema;
    const auto n = dataset.appliance_count();
    for (const auto m : expand(measure)) {
        for (std::size_t p = 1; p < n; ++p) {
            for (const auto& sensor : dataset.roster) {
                schema.names.push_back("cohort." + std::string(measure_name(m)) + ".peer" + two_digits(p) + "." +
                                       sensor);
            }
        }
    }
    return schema;
}

FeatureSchema baseline_schema(const CohortDataset& dataset) {
    FeatureSchema schema;
    for (const auto& sensor : dataset.roster) {
        for (const auto* stat : kStatNames) {
            schema.names.push_back("baseline." + std::string(stat) + "." + sensor);
        }
    }
    const auto& r = dataset.roster;
    for (std::size_t a = 0; a < r.size(); ++a) {
        for (std::size_t b = a + 1; b < r.size(); ++b) {
            schema.names.push_back("baseline.cov." + r[a] + "." + r[b]);
        }
    }
    return schema;
}

FeatureVector cohort_features(const LabeledWindow& window, const CohortDataset& dataset,
                              const DissimilarityConfig& config) {
    check_window(window, dataset);
    FeatureVector out;
    out.schema = std::make_shared<const FeatureSchema>(cohort_schema(dataset, config.measure));
    out.values.reserve(out.schema->size());
    const auto i = window.appliance_index;
    for (const auto m : expand(config.measure)) {
        for (std::size_t j = 0; j < dataset.appliance_count(); ++j) {
            if (j == i) {
                continue;
            }
            for (std::size_t k = 0; k < dataset.sensor_count(); ++k) {
                const auto own = telemetry_slice(dataset, i, k, window.telemetry_range);
                const auto peer = telemetry_slice(dataset, j, k, window.telemetry_range);
                out.values.push_back(m == Measure::pearson ? pearson_dissim(own, peer) : spearman_dissim(own, peer));
            }
        }
    }
    return out;
}

MomentSummary summarize(std::span<const double> x) {
    MomentSummary s;
    if (x.empty()) {
        return s;
    }
    const auto n = static_cast<double>(x.size());
    const double x0 = x[0];
    double sum = 0.0;
    s.max = x[0];
    s.min = x[0];
    for (const double v : x) {
        sum += v - x0;
        s.max = std::max(s.max, v);
        s.min = std::min(s.min, v);
    }
    const double shift = sum / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (const double v : x) {
        const double d = (v - x0) - shift;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    s.mean = x0 + shift;
    s.stddev = x.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DataError("covariance: length mismatch");
    }
    if (x.size() < 2) {
        return 0.0;
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i] - x[0];
        sy += y[i] - y[0];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += ((x[i] - x[0]) - mx) * ((y[i] - y[0]) - my);
    }
    return sxy / (n - 1.0);
}

namespace {

void fill_baseline(const LabeledWindow& window, const CohortDataset& dataset, std::span<double> out) {
    const auto m = dataset.sensor_count();
    std::vector<std::span<const double>> slices;
    slices.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        slices.push_back(telemetry_slice(dataset, window.appliance_index, k, window.telemetry_range));
    }
    std::size_t c = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const auto s = summarize(slices[k]);
        for (const double v : {s.max, s.min, s.mean, s.stddev, s.skewness, s.excess_kurtosis}) {
            out[c++] = v;
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            out[c++] = sample_covariance(slices[a], slices[b]);
        }
    }
}

} // namespace

FeatureVector baseline_features(const LabeledWindow& window, const CohortDataset& dataset) {
    check_window(window, dataset);
    FeatureVector out;
    out.schema = std::make_shared<const FeatureSchema>(baseline_schema(dataset));
    out.values.resize(out.schema->size());
    fill_baseline(window, dataset, out.values);
    return out;
}

FeatureVector combine(std::span<const FeatureVector> parts) {
    if (parts.size() == 1) {
        return parts.front();
    }
    auto schema = std::make_shared<FeatureSchema>();
    FeatureVector out;
    std::set<std::string> seen;
    for (const auto& p : parts) {
        if (!p.schema || p.schema->size() != p.values.size()) {
            throw DataError("combine: part without a matching schema");
        }
        for (const auto& name : p.schema->names) {
            if (!seen.insert(name).second) {
                throw DataError("combine: duplicate feature name '" + name + "'");
            }
            schema->names.push_back(name);
        }
        out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    }
    out.schema = std::move(schema);
    return out;
}

std::string_view feature_set_name(FeatureSet set) {
    switch (set) {
    case FeatureSet::baseline:
        return "Baseline";
    case FeatureSet::cohort_pearson:
        return "Cohort_Pearson";
    case FeatureSet::cohort_spearman:
        return "Cohort_Spearman";
    case FeatureSet::cohort_ps:
        return "Cohort_P&S";
    case FeatureSet::comb:
        return "Comb";
    }
    return "?";
}

std::string_view feature_set_slug(FeatureSet set) {
    switch (set) {
    case FeatureSet::baseline:
        return "baseline";
    case FeatureSet::cohort_pearson:
        return "cohort_pearson";
    case FeatureSet::cohort_spearman:
        return "cohort_spearman";
    case FeatureSet::cohort_ps:
        return "cohort_ps";
    case FeatureSet::comb:
        return "comb";
    }
    return "?";
}

std::optional<FeatureSet> parse_feature_set(std::string_view name) {
    for (const auto s : kAllFeatureSets) {
        if (feature_set_name(s) == name || feature_set_slug(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

namespace {

FeatureMatrix empty_matrix(FeatureSchema schema, std::size_t rows) {
    FeatureMatrix m;
    m.schema = std::make_shared<const FeatureSchema>(std::move(schema));
    m.rows = rows;
    m.data.assign(rows * m.cols(), 0.0);
    return m;
}

FeatureMatrix hconcat(std::initializer_list<const FeatureMatrix*> blocks) {
    FeatureSchema schema;
    std::size_t rows = 0;
    for (const auto* b : blocks) {
        schema.names.insert(schema.names.end(), b->schema->names.begin(), b->schema->names.end());
        rows = b->rows;
    }
    auto out = empty_matrix(std::move(schema), rows);
    for (std::size_t r = 0; r < rows; ++r) {
        auto dst = out.row(r).begin();
        for (const auto* b : blocks) {
            const auto src = b->row(r);
            dst = std::copy(src.begin(), src.end(), dst);
        }
    }
    return out;
}

} // namespace

FeatureBank::FeatureBank(const CohortDataset& dataset, const std::vector<LabeledWindow>& windows,
                         std::span<const FeatureSet> sets, unsigned threads) {
    bool want_baseline = false;
    bool want_pearson = false;
    bool want_spearman = false;
    for (const auto s : sets) {
        want_baseline |= s == FeatureSet::baseline || s == FeatureSet::comb;
        want_pearson |= s != FeatureSet::baseline && s != FeatureSet::cohort_spearman;
        want_spearman |= s != FeatureSet::baseline && s != FeatureSet::cohort_pearson;
    }
    for (const auto& w : windows) {
        check_window(w, dataset);
    }
    const auto n = dataset.appliance_count();
    const auto m = dataset.sensor_count();

    if (want_baseline) {
        baseline_ = empty_matrix(baseline_schema(dataset), windows.size());
        detail::parallel_for(windows.size(), threads,
                             [&](std::size_t r) { fill_baseline(windows[r], dataset, baseline_.row(r)); });
    }
    if (!want_pearson && !want_spearman) {
        return;
    }
    if (want_pearson) {
        pearson_ = empty_matrix(cohort_schema(dataset, Measure::pearson), windows.size());
    }
    if (want_spearman) {
        spearman_ = empty_matrix(cohort_schema(dataset, Measure::spearman), windows.size());
    }

    // Windows sharing a telemetry range share every pairwise dissimilarity.
    std::map<std::pair<Minutes, Minutes>, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < windows.size(); ++r) {
        const auto& tr = windows[r].telemetry_range;
        groups[{tr.start.minutes, tr.end.minutes}].push_back(r);
    }
    std::vector<const std::vector<std::size_t>*> group_list;
    for (const auto& [key, rows] : groups) {
        group_list.push_back(&rows);
    }

    detail::parallel_for(group_list.size(), threads, [&](std::size_t g) {
        const auto& rows = *group_list[g];
        const auto range = windows[rows.front()].telemetry_range;
        std::vector<std::span<const double>> slices(n * m);
        std::vector<std::vector<double>> ranks(want_spearman ? n * m : 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < m; ++k) {
                slices[i * m + k] = telemetry_slice(dataset, i, k, range);
                if (want_spearman) {
                    ranks[i * m + k] = average_ranks(slices[i * m + k]);
                }
            }
        }
        if (slices.front().size() < 2) {
            throw DataError("telemetry window holds fewer than 2 samples");
        }
        // Pair tables indexed [min(i,j)][max(i,j)][k], filled on first use.
        std::vector<double> dp(want_pearson ? n * n * m : 0, kMissing);
        std::vector<double> ds(want_spearman ? n * n * m : 0, kMissing);
        for (const auto r : rows) {
            const auto i = windows[r].appliance_index;
            std::size_t col = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                const auto lo = std::min(i, j);
                const auto hi = std::max(i, j);
                for (std::size_t k = 0; k < m; ++k, ++col) {
                    const auto cell = (lo * n + hi) * m + k;
                    if (want_pearson) {
                        if (is_missing(dp[cell])) {
                            dp[cell] = pearson_dissim(slices[i * m + k], slices[j * m + k]);
                        }
                        pearson_.row(r)[col] = dp[cell];
                    }
                    if (want_spearman) {
                        if (is_missing(ds[cell])) {
                            ds[cell] = pearson_dissim(ranks[i * m + k], ranks[j * m + k]);
                        }
                        spearman_.row(r)[col] = ds[cell];
                    }
                }
            }
        }
    });
}

FeatureMatrix FeatureBank::matrix(FeatureSet set) const {
    const auto need = [](const FeatureMatrix& m, const char* what) -> const FeatureMatrix& {
        if (!m.schema) {
            throw InvariantError(std::string("feature bank was built without the ") + what + " block");
        }
        return m;
    };
    switch (set) {
    case FeatureSet::baseline:
        return need(baseline_, "baseline");
    case FeatureSet::cohort_pearson:
        return need(pearson_, "pearson");
    case FeatureSet::cohort_spearman:
        return need(spearman_, "spearman");
    case FeatureSet::cohort_ps:
        return hconcat({&need(pearson_, "pearson"), &need(spearman_, "spearman")});
    case FeatureSet::comb:
        return hconcat({&need(baseline_, "baseline"), &need(pearson_, "pearson"), &need(spearman_, "spearman")});
    }
    throw InvariantError("unknown feature set");
}

FeatureMatrix featurize(const CohortDataset& dataset, const std::vector<LabeledWindow>& windows, FeatureSet set,
                        unsigned threads) {
    const FeatureSet sets[] = {set};
    return FeatureBank(dataset, windows, sets, threads).matrix(set);
}

std::string feature_matrix_csv(const FeatureMatrix& matrix, const std::vector<LabeledWindow>& windows,
                               std::span<const std::string> alarm_ids) {
    if (matrix.rows != windows.size()) {
        throw InvariantError("feature matrix rows do not match the window list");
    }
    std::string text = "appliance_id,t";
    for (const auto& id : alarm_ids) {
        text += ",label:" + id;
    }
    for (const auto& n : matrix.schema->names) {
        text += ',';
        text += n;
    }
    text += '\n';
    for (std::size_t r = 0; r < matrix.rows; ++r) {
        text += windows[r].appliance_id;
        text += ',';
        text += std::to_string(windows[r].t.minutes);
        for (const auto& id : alarm_ids) {
            text += windows[r].label(id) ? ",1" : ",0";
        }
        for (const double v : matrix.row(r)) {
            text += ',';
            text += io::format_double(v);
        }
        text += '\n';
    }
    return text;
}

} // namespace cohortpm
