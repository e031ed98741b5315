#pragma once

#include "cohortpm/telemetry.hpp"
#include "cohortpm/windowing.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cohortpm {

enum class Measure { pearson, spearman, both };

struct DissimilarityConfig {
    Measure measure = Measure::both;
};

/// Ordered, uniquely named feature columns.
struct FeatureSchema {
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }
    /// FNV-1a over the names, newline separated.
    std::uint64_t fingerprint() const;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

struct FeatureVector {
    SchemaPtr schema;
    std::vector<double> values;
};

/// Sample Pearson correlation; nullopt when either input has zero variance.
///
/// Both inputs are re-expressed relative to their first element before the
/// two-pass computation, so exact shifts and power-of-two scalings of an input
/// leave the result bit-identical.
std::optional<double> pearson_correlation(std::span<const double> x, std::span<const double> y);

/// 1 - r, in [0, 2]; 1 when either input is constant.
double pearson_dissim(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> x);

/// 1 - rho, with rho the Pearson correlation of average ranks; 1 when a rank vector is constant.
double spearman_dissim(std::span<const double> x, std::span<const double> y);

/// Samples of one series whose timestamps fall in the closed range.
/// Throws DataError naming the appliance and sensor when the range is not covered.
std::span<const double> telemetry_slice(const CohortDataset& dataset, std::size_t appliance, std::size_t sensor,
                                        TimeRange range);

/// Column names: `cohort.<measure>.peerNN.<sensor>`, peers in ascending appliance order, self excluded.
FeatureSchema cohort_schema(const CohortDataset& dataset, Measure measure);

/// Column names: `baseline.<stat>.<sensor>` for max,min,mean,std,skew,kurt, then
/// `baseline.cov.<a>.<b>` for each unordered sensor pair.
FeatureSchema baseline_schema(const CohortDataset& dataset);

FeatureVector cohort_features(const LabeledWindow& window, const CohortDataset& dataset,
                              const DissimilarityConfig& config);

FeatureVector baseline_features(const LabeledWindow& window, const CohortDataset& dataset);

/// Concatenates parts in order. Throws DataError on duplicate names.
FeatureVector combine(std::span<const FeatureVector> parts);

/// Per-sensor statistics of one slice, in the order of the baseline schema.
struct MomentSummary {
    double max = 0;
    double min = 0;
    double mean = 0;
    double stddev = 0;
    double skewness = 0;
    double excess_kurtosis = 0;
};
MomentSummary summarize(std::span<const double> x);

/// Sample covariance (n - 1 denominator); 0 for fewer than two samples.
double sample_covariance(std::span<const double> x, std::span<const double> y);

/// The five feature sets reported per alarm.
enum class FeatureSet { baseline, cohort_pearson, cohort_spearman, cohort_ps, comb };

inline constexpr FeatureSet kAllFeatureSets[] = {FeatureSet::baseline, FeatureSet::cohort_pearson,
                                                 FeatureSet::cohort_spearman, FeatureSet::cohort_ps,
                                                 FeatureSet::comb};

std::string_view feature_set_name(FeatureSet set);
/// File-name form: baseline, cohort_pearson, cohort_spearman, cohort_ps, comb.
std::string_view feature_set_slug(FeatureSet set);
/// Accepts either the display name or the slug.
std::optional<FeatureSet> parse_feature_set(std::string_view name);

/// Row-major matrix with one row per window.
struct FeatureMatrix {
    SchemaPtr schema;
    std::size_t rows = 0;
    std::vector<double> data;

    std::size_t cols() const { return schema ? schema->size() : 0; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols(), cols()}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols(), cols()}; }
    FeatureVector vector(std::size_t r) const { return {schema, {row(r).begin(), row(r).end()}}; }
};

/// Computes the baseline, Pearson and Spearman blocks once for a window list
/// and assembles any feature set from them. Pairwise dissimilarities are shared
/// between the two windows of a pair at the same instant; results equal the
/// per-window functions bit for bit.
class FeatureBank {
public:
    FeatureBank(const CohortDataset& dataset, const std::vector<LabeledWindow>& windows,
                std::span<const FeatureSet> sets, unsigned threads = 0);

    FeatureMatrix matrix(FeatureSet set) const;

private:
    FeatureMatrix baseline_;
    FeatureMatrix pearson_;
    FeatureMatrix spearman_;
};

FeatureMatrix featurize(const CohortDataset& dataset, const std::vector<LabeledWindow>& windows, FeatureSet set,
                        unsigned threads = 0);

/// `appliance_id,t,label:<alarm>...,<names...>`.
std::string feature_matrix_csv(const FeatureMatrix& matrix, const std::vector<LabeledWindow>& windows,
                               std::span<const std::string> alarm_ids);

} // namespace cohortpm
