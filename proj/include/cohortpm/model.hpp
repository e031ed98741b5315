#pragma once

#include "cohortpm/features.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cohortpm {

struct TreeParams {
    int max_depth = 3;
    int min_samples_leaf = 1;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = -1; // -1 or +1

    bool is_leaf() const { return feature < 0; }
};

/// Binary tree; `x[feature] <= threshold` goes left. Node 0 is the root.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(std::span<const double> x) const;
    int depth() const;
    /// Largest feature index referenced, or -1 for a single leaf.
    int max_feature() const;
};

/// Column-major copy of selected matrix rows with per-feature presorted order,
/// reused by every boosting round.
class TrainingData {
public:
    TrainingData(const FeatureMatrix& matrix, std::span<const std::size_t> rows, std::span<const int> labels);
    TrainingData(const FeatureMatrix& matrix, std::span<const int> labels);

    std::size_t samples() const { return labels_.size(); }
    std::size_t features() const { return columns_.size(); }
    double value(std::size_t feature, std::size_t sample) const { return columns_[feature][sample]; }
    int label(std::size_t sample) const { return labels_[sample]; }
    std::span<const int> labels() const { return labels_; }
    std::span<const std::uint32_t> order(std::size_t feature) const { return order_[feature]; }
    std::uint64_t schema_fingerprint() const { return fingerprint_; }

    int predict(const DecisionTree& tree, std::size_t sample) const;

private:
    void build(const FeatureMatrix& matrix, std::span<const std::size_t> rows, std::span<const int> labels);

    std::vector<std::vector<double>> columns_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<int> labels_;
    std::uint64_t fingerprint_ = 0;
};

/// Greedy weighted-Gini tree. Candidate thresholds are midpoints between
/// consecutive distinct values; ties go to the lowest feature, then the lowest
/// threshold. Leaves take the weighted-majority class, -1 on an exact tie.
DecisionTree train_tree(const TrainingData& data, std::span<const double> weights, const TreeParams& params);
DecisionTree train_tree(const FeatureMatrix& X, std::span<const int> y, std::span<const double> weights,
                        const TreeParams& params);

struct TrainConfig {
    int n_rounds = 100;
    TreeParams tree;
    double epsilon_clamp = 1e-10;
    std::uint64_t seed = 0;      // reserved; training consumes no randomness
    double positive_weight = 1.0; // initial weight multiplier for +1 samples

    void validate() const;
};

struct BoostRound {
    DecisionTree tree;
    double alpha = 0.0;
    double error = 0.0; // unclamped weighted error
};

struct AdaBoostModel {
    std::vector<BoostRound> rounds;
    std::uint64_t schema_fingerprint = 0;
    std::size_t n_features = 0;
    TrainConfig config;

    double alpha_sum() const;
    /// prod_t 2 sqrt(e_t (1 - e_t)) with e_t clamped as during training.
    double training_error_bound() const;
};

/// Discrete AdaBoost over depth-limited trees. Stops after a perfect round
/// (kept) or at the first round with error >= 0.5 (discarded).
/// Throws DataError on a single-class set or when the first round is no better than chance.
AdaBoostModel train_adaboost(const TrainingData& data, const TrainConfig& config);
AdaBoostModel train_adaboost(const FeatureMatrix& X, std::span<const int> y, const TrainConfig& config);

/// (sum_t alpha_t h_t(x) / sum_t alpha_t + 1) / 2, in [0, 1].
double score(const AdaBoostModel& model, std::span<const double> x);
/// Same, after checking the vector's schema fingerprint against the model.
double score(const AdaBoostModel& model, const FeatureVector& x);

/// score > threshold.
bool classify(const AdaBoostModel& model, const FeatureVector& x, double threshold);

/// Fraction of samples whose ensemble decision (score > 0.5) disagrees with the label.
double training_error(const AdaBoostModel& model, const TrainingData& data);

/// Self-describing text; doubles in hex-float so reloading is bit-exact.
std::string serialize_model(const AdaBoostModel& model);
AdaBoostModel parse_model(const std::string& text);

} // namespace cohortpm
