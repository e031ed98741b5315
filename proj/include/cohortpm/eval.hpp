#pragma once

#include "cohortpm/features.hpp"
#include "cohortpm/model.hpp"
#include "cohortpm/windowing.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohortpm {

struct Fold {
    std::size_t test_appliance = 0;
    std::string test_appliance_id;
    std::vector<std::size_t> train_appliances;
};

/// One fold per appliance holding at least one positive window for the alarm.
struct FoldPlan {
    std::string alarm_id;
    std::vector<Fold> folds;
};

/// Throws DataError ("empty fold plan") when no appliance has a positive window.
FoldPlan make_folds(const std::vector<LabeledWindow>& windows, const std::string& alarm_id);

// Labels are 0/1 bytes throughout; nonzero means positive.

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0; // predict positive iff score >= threshold
};

struct RocCurve {
    std::vector<RocPoint> points;
};

/// Sweeps one threshold per distinct score, highest first; (0,0) is prepended and
/// the curve ends at (1,1). Throws DataError when labels hold a single class.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

/// Linear interpolation of tpr at `fpr`; on a vertical segment the highest tpr is taken.
double interpolate_tpr(const RocCurve& curve, double fpr);

struct CostModel {
    double unnecessary_maintenance = 0.0; // C_UM, per false positive
    double unprevented_fault = 0.0;       // C_UOC, per false negative

    void validate() const;
};

double expected_cost(double n_um, double n_uoc, const CostModel& cm);

struct ThresholdChoice {
    double threshold = 1.0;
    double cost = 0.0;
    std::size_t n_um = 0;
    std::size_t n_uoc = 0;
};

/// Minimises expected cost over thresholds {0, 1, midpoints of consecutive distinct
/// scores}, alarming when score > threshold. Equal costs resolve to the largest threshold.
ThresholdChoice select_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                 const CostModel& cm);

struct FoldResult {
    std::string appliance_id;
    RocCurve roc;
    double auc = 0.0;
    std::vector<double> scores;
    std::vector<std::uint8_t> labels; // 1 = positive
    std::vector<std::size_t> test_rows;
    std::vector<std::size_t> train_rows;
    std::optional<ThresholdChoice> threshold;
};

/// Vertical averaging on a uniform fpr grid of `grid_size` points from 0 to 1.
RocCurve average_roc(std::span<const FoldResult> folds, std::size_t grid_size = 101);

/// Trains on every window outside the fold's test appliance and scores the test
/// appliance's windows. `matrix` rows align with `windows`.
FoldResult evaluate_fold(const FeatureMatrix& matrix, const std::vector<LabeledWindow>& windows,
                         const std::string& alarm_id, const Fold& fold, const TrainConfig& config,
                         const std::optional<CostModel>& cost = std::nullopt);

struct ExperimentResult {
    std::string alarm_id;
    FeatureSet feature_set = FeatureSet::comb;
    std::vector<FoldResult> folds;
    RocCurve average;
    double mean_auc = 0.0;
};

/// Leave-one-appliance-out run over precomputed features. Folds run in parallel
/// on `threads` workers (0 = hardware concurrency); results do not depend on it.
ExperimentResult run_folds(const FeatureMatrix& matrix, const std::vector<LabeledWindow>& windows,
                           const std::string& alarm_id, FeatureSet set, const TrainConfig& config,
                           const std::optional<CostModel>& cost = std::nullopt, unsigned threads = 0);

/// Full pipeline: enumerate and label windows on a prepared dataset, featurize, run folds.
ExperimentResult run_experiment(const CohortDataset& dataset, const WindowSpec& spec, FeatureSet set,
                                const TrainConfig& config, const std::string& alarm_id,
                                const std::optional<CostModel>& cost = std::nullopt, unsigned threads = 0);

} // namespace cohortpm
