#include "cohortpm/eval.hpp"

#include "cohortpm/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace cohortpm {

namespace {

void check_scores(std::span<const double> scores, std::span<const std::uint8_t> labels, bool need_both = true) {
    if (scores.size() != labels.size()) {
        throw DataError("scores and labels differ in length");
    }
    if (scores.empty()) {
        throw DataError("no scores");
    }
    const auto pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; }));
    if (need_both && (pos == 0 || pos == labels.size())) {
        throw DataError("need at least one positive and one negative label");
    }
    for (const double s : scores) {
        if (std::isnan(s)) {
            throw DataError("NaN score");
        }
    }
}

} // namespace

FoldPlan make_folds(const std::vector<LabeledWindow>& windows, const std::string& alarm_id) {
    FoldPlan plan;
    plan.alarm_id = alarm_id;
    std::set<std::size_t> appliances;
    std::set<std::size_t> positive;
    std::vector<std::string> ids;
    for (const auto& w : windows) {
        appliances.insert(w.appliance_index);
        if (ids.size() <= w.appliance_index) {
            ids.resize(w.appliance_index + 1);
        }
        ids[w.appliance_index] = w.appliance_id;
        if (w.label(alarm_id)) {
            positive.insert(w.appliance_index);
        }
    }
    if (positive.empty()) {
        throw DataError("empty fold plan: no appliance has a positive window for alarm '" + alarm_id + "'");
    }
    for (const auto test : positive) {
        Fold f;
        f.test_appliance = test;
        f.test_appliance_id = ids[test];
        for (const auto a : appliances) {
            if (a != test) {
                f.train_appliances.push_back(a);
            }
        }
        plan.folds.push_back(std::move(f));
    }
    return plan;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_scores(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; }));
    const auto neg = static_cast<double>(labels.size()) - pos;

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos, s});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

double interpolate_tpr(const RocCurve& curve, double fpr) {
    const auto& p = curve.points;
    if (p.empty()) {
        throw DataError("interpolate_tpr: empty curve");
    }
    // first point strictly to the right
    const auto right = std::upper_bound(p.begin(), p.end(), fpr, [](double f, const RocPoint& q) { return f < q.fpr; });
    if (right == p.begin()) {
        return p.front().tpr;
    }
    const auto left = right - 1;
    if (left->fpr == fpr || right == p.end()) {
        return left->tpr; // top of a vertical run, or step extension past the end
    }
    const double t = (fpr - left->fpr) / (right->fpr - left->fpr);
    return left->tpr + t * (right->tpr - left->tpr);
}

RocCurve average_roc(std::span<const FoldResult> folds, std::size_t grid_size) {
    if (folds.empty()) {
        throw DataError("average_roc: no folds");
    }
    if (grid_size < 2) {
        throw ConfigError("average_roc: grid needs at least 2 points");
    }
    RocCurve out;
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double f = static_cast<double>(g) / static_cast<double>(grid_size - 1);
        double sum = 0.0;
        for (const auto& fold : folds) {
            sum += interpolate_tpr(fold.roc, f);
        }
        out.points.push_back({f, sum / static_cast<double>(folds.size()), std::numeric_limits<double>::quiet_NaN()});
    }
    return out;
}

void CostModel::validate() const {
    if (!(unnecessary_maintenance >= 0.0) || !(unprevented_fault >= 0.0)) {
        throw ConfigError("unit costs must be non-negative");
    }
}

double expected_cost(double n_um, double n_uoc, const CostModel& cm) {
    return n_um * cm.unnecessary_maintenance + n_uoc * cm.unprevented_fault;
}

ThresholdChoice select_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels, const CostModel& cm) {
    check_scores(scores, labels, false);
    cm.validate();
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (labels[i] ? pos : neg).push_back(scores[i]);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());

    std::vector<double> distinct(scores.begin(), scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates{0.0};
    for (std::size_t i = 1; i < distinct.size(); ++i) {
        candidates.push_back(std::midpoint(distinct[i - 1], distinct[i]));
    }
    candidates.push_back(1.0);
    std::sort(candidates.begin(), candidates.end());

    ThresholdChoice best;
    bool have = false;
    for (const double c : candidates) {
        // alarm iff score > c
        const auto n_um = static_cast<std::size_t>(neg.end() - std::upper_bound(neg.begin(), neg.end(), c));
        const auto n_uoc = static_cast<std::size_t>(std::upper_bound(pos.begin(), pos.end(), c) - pos.begin());
        const double cost = expected_cost(static_cast<double>(n_um), static_cast<double>(n_uoc), cm);
        if (!have || cost <= best.cost) {
            best = {c, cost, n_um, n_uoc};
            have = true;
        }
    }
    return best;
}

FoldResult evaluate_fold(const FeatureMatrix& matrix, const std::vector<LabeledWindow>& windows,
                         const std::string& alarm_id, const Fold& fold, const TrainConfig& config,
                         const std::optional<CostModel>& cost) {
    if (matrix.rows != windows.size()) {
        throw InvariantError("feature matrix rows do not match the window list");
    }
    FoldResult out;
    out.appliance_id = fold.test_appliance_id;
    std::vector<int> train_labels;
    for (std::size_t r = 0; r < windows.size(); ++r) {
        if (windows[r].appliance_index == fold.test_appliance) {
            out.test_rows.push_back(r);
            out.labels.push_back(windows[r].label(alarm_id) ? 1 : 0);
        } else {
            out.train_rows.push_back(r);
            train_labels.push_back(windows[r].label(alarm_id) ? 1 : -1);
        }
    }
    if (std::find(train_labels.begin(), train_labels.end(), 1) == train_labels.end()) {
        throw DataError("fold " + fold.test_appliance_id + ": no positive training window for alarm '" + alarm_id +
                        "' outside the test appliance");
    }
    const TrainingData data(matrix, out.train_rows, train_labels);
    const auto model = train_adaboost(data, config);
    out.scores.reserve(out.test_rows.size());
    for (const auto r : out.test_rows) {
        out.scores.push_back(score(model, matrix.row(r)));
    }
    out.roc = roc_curve(out.scores, out.labels);
    out.auc = auc(out.roc);
    if (cost) {
        out.threshold = select_threshold(out.scores, out.labels, *cost);
    }
    return out;
}

ExperimentResult run_folds(const FeatureMatrix& matrix, const std::vector<LabeledWindow>& windows,
                           const std::string& alarm_id, FeatureSet set, const TrainConfig& config,
                           const std::optional<CostModel>& cost, unsigned threads) {
    config.validate();
    const auto plan = make_folds(windows, alarm_id);
    ExperimentResult out;
    out.alarm_id = alarm_id;
    out.feature_set = set;
    out.folds.resize(plan.folds.size());
    detail::parallel_for(plan.folds.size(), threads, [&](std::size_t f) {
        out.folds[f] = evaluate_fold(matrix, windows, alarm_id, plan.folds[f], config, cost);
    });
    double sum = 0.0;
    for (const auto& f : out.folds) {
        sum += f.auc;
    }
    out.mean_auc = sum / static_cast<double>(out.folds.size());
    out.average = average_roc(out.folds);
    return out;
}

ExperimentResult run_experiment(const CohortDataset& dataset, const WindowSpec& spec, FeatureSet set,
                                const TrainConfig& config, const std::string& alarm_id,
                                const std::optional<CostModel>& cost, unsigned threads) {
    auto ws = enumerate_windows(dataset, spec);
    if (ws.extent_too_short) {
        throw DataError("dataset extent is shorter than the window span");
    }
    label_windows(ws.windows, dataset.alarms, alarm_id);
    const auto matrix = featurize(dataset, ws.windows, set, threads);
    return run_folds(matrix, ws.windows, alarm_id, set, config, cost, threads);
}

} // namespace cohortpm
