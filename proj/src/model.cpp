#include "cohortpm/model.hpp"

#include "cohortpm/error.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

namespace cohortpm {

int DecisionTree::predict(std::span<const double> x) const {
    int n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(n)];
        n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(n)].leaf_class;
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
        deepest = std::max(deepest, d[i]);
    }
    return deepest;
}

int DecisionTree::max_feature() const {
    int f = -1;
    for (const auto& n : nodes) {
        f = std::max(f, n.feature);
    }
    return f;
}

TrainingData::TrainingData(const FeatureMatrix& matrix, std::span<const std::size_t> rows,
                           std::span<const int> labels) {
    build(matrix, rows, labels);
}

TrainingData::TrainingData(const FeatureMatrix& matrix, std::span<const int> labels) {
    std::vector<std::size_t> rows(matrix.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    build(matrix, rows, labels);
}

void TrainingData::build(const FeatureMatrix& matrix, std::span<const std::size_t> rows, std::span<const int> labels) {
    if (rows.size() != labels.size()) {
        throw DataError("training data: " + std::to_string(rows.size()) + " rows but " +
                        std::to_string(labels.size()) + " labels");
    }
    if (rows.empty()) {
        throw DataError("training data: no samples");
    }
    for (const int y : labels) {
        if (y != 1 && y != -1) {
            throw DataError("training data: labels must be -1 or +1");
        }
    }
    fingerprint_ = matrix.schema ? matrix.schema->fingerprint() : 0;
    labels_.assign(labels.begin(), labels.end());
    const auto d = matrix.cols();
    columns_.assign(d, std::vector<double>(rows.size()));
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s] >= matrix.rows) {
            throw DataError("training data: row index out of range");
        }
        const auto r = matrix.row(rows[s]);
        for (std::size_t f = 0; f < d; ++f) {
            if (!std::isfinite(r[f])) {
                throw DataError("training data: non-finite feature value");
            }
            columns_[f][s] = r[f];
        }
    }
    order_.assign(d, {});
    for (std::size_t f = 0; f < d; ++f) {
        auto& o = order_[f];
        o.resize(rows.size());
        std::iota(o.begin(), o.end(), std::uint32_t{0});
        const auto& col = columns_[f];
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
}

int TrainingData::predict(const DecisionTree& tree, std::size_t sample) const {
    int n = 0;
    while (!tree.nodes[static_cast<std::size_t>(n)].is_leaf()) {
        const auto& node = tree.nodes[static_cast<std::size_t>(n)];
        n = columns_[static_cast<std::size_t>(node.feature)][sample] <= node.threshold ? node.left : node.right;
    }
    return tree.nodes[static_cast<std::size_t>(n)].leaf_class;
}

namespace {

struct Split {
    double impurity = std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
};

// Sum of the children's weighted Gini impurities, W * (1 - p+^2 - p-^2) each.
double children_impurity(double lp, double ln, double rp, double rn) {
    double total = 0.0;
    const double wl = lp + ln;
    const double wr = rp + rn;
    if (wl > 0.0) {
        total += wl - (lp * lp + ln * ln) / wl;
    }
    if (wr > 0.0) {
        total += wr - (rp * rp + rn * rn) / wr;
    }
    return total;
}

double split_point(double lo, double hi) {
    const double mid = std::midpoint(lo, hi);
    return mid < hi ? mid : lo;
}

struct NodeStats {
    double pos = 0.0;
    double neg = 0.0;
    std::size_t count = 0;
};

} // namespace

DecisionTree train_tree(const TrainingData& data, std::span<const double> weights, const TreeParams& params) {
    const auto n = data.samples();
    if (n == 0) {
        throw DataError("train_tree: empty input");
    }
    if (weights.size() != n) {
        throw DataError("train_tree: weight count does not match sample count");
    }
    double total = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DataError("train_tree: weights must be finite and non-negative");
        }
        total += w;
    }
    if (total <= 0.0) {
        throw DataError("train_tree: all weights are zero");
    }
    if (params.max_depth < 1 || params.min_samples_leaf < 1) {
        throw ConfigError("train_tree: max_depth and min_samples_leaf must be >= 1");
    }
    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);

    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, 0);
    std::vector<int> frontier{0};

    // Grows one level at a time: one pass over each presorted column serves every frontier node.
    for (int depth = 0; !frontier.empty(); ++depth) {
        std::vector<int> local(tree.nodes.size(), -1);
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            local[static_cast<std::size_t>(frontier[i])] = static_cast<int>(i);
        }
        std::vector<NodeStats> stats(frontier.size());
        for (std::size_t s = 0; s < n; ++s) {
            const int v = node_of[s] < 0 ? -1 : local[static_cast<std::size_t>(node_of[s])];
            if (v < 0) {
                continue;
            }
            auto& st = stats[static_cast<std::size_t>(v)];
            (data.label(s) > 0 ? st.pos : st.neg) += weights[s];
            ++st.count;
        }

        std::vector<char> active(frontier.size(), 0);
        bool any_active = false;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            auto& node = tree.nodes[static_cast<std::size_t>(frontier[i])];
            node.leaf_class = stats[i].pos > stats[i].neg ? 1 : -1;
            const bool pure = stats[i].pos == 0.0 || stats[i].neg == 0.0;
            active[i] = depth < params.max_depth && !pure && stats[i].count >= 2 * min_leaf;
            any_active |= active[i] != 0;
        }
        if (!any_active) {
            break;
        }

        std::vector<Split> best(frontier.size());
        std::vector<NodeStats> left(frontier.size());
        std::vector<double> last(frontier.size());
        for (std::size_t f = 0; f < data.features(); ++f) {
            std::fill(left.begin(), left.end(), NodeStats{});
            for (const auto s : data.order(f)) {
                const int nid = node_of[s];
                if (nid < 0) {
                    continue;
                }
                const int v = local[static_cast<std::size_t>(nid)];
                if (v < 0 || !active[static_cast<std::size_t>(v)]) {
                    continue;
                }
                const auto vi = static_cast<std::size_t>(v);
                const double x = data.value(f, s);
                auto& l = left[vi];
                if (l.count > 0 && x > last[vi] && l.count >= min_leaf && stats[vi].count - l.count >= min_leaf) {
                    const double imp =
                        children_impurity(l.pos, l.neg, stats[vi].pos - l.pos, stats[vi].neg - l.neg);
                    if (imp < best[vi].impurity) {
                        best[vi] = {imp, static_cast<int>(f), split_point(last[vi], x)};
                    }
                }
                (data.label(s) > 0 ? l.pos : l.neg) += weights[s];
                ++l.count;
                last[vi] = x;
            }
        }

        std::vector<int> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            if (!active[i] || best[i].feature < 0) {
                continue;
            }
            const auto id = static_cast<std::size_t>(frontier[i]);
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[id];
            node.feature = best[i].feature;
            node.threshold = best[i].threshold;
            node.left = l;
            node.right = l + 1;
            next.push_back(l);
            next.push_back(l + 1);
        }
        for (std::size_t s = 0; s < n; ++s) {
            if (node_of[s] < 0) {
                continue;
            }
            const auto& node = tree.nodes[static_cast<std::size_t>(node_of[s])];
            if (node.is_leaf()) {
                node_of[s] = -1;
            } else {
                node_of[s] = data.value(static_cast<std::size_t>(node.feature), s) <= node.threshold ? node.left
                                                                                                    : node.right;
            }
        }
        frontier = std::move(next);
    }
    return tree;
}

DecisionTree train_tree(const FeatureMatrix& X, std::span<const int> y, std::span<const double> weights,
                        const TreeParams& params) {
    return train_tree(TrainingData(X, y), weights, params);
}

void TrainConfig::validate() const {
    if (n_rounds < 1) {
        throw ConfigError("n_rounds must be >= 1");
    }
    if (tree.max_depth < 1 || tree.min_samples_leaf < 1) {
        throw ConfigError("max_depth and min_samples_leaf must be >= 1");
    }
    if (!(epsilon_clamp > 0.0 && epsilon_clamp < 0.5)) {
        throw ConfigError("epsilon_clamp must lie in (0, 0.5)");
    }
    if (!(positive_weight > 0.0) || !std::isfinite(positive_weight)) {
        throw ConfigError("positive_weight must be positive");
    }
}

double AdaBoostModel::alpha_sum() const {
    double s = 0.0;
    for (const auto& r : rounds) {
        s += r.alpha;
    }
    return s;
}

double AdaBoostModel::training_error_bound() const {
    double b = 1.0;
    for (const auto& r : rounds) {
        const double e = std::clamp(r.error, config.epsilon_clamp, 1.0 - config.epsilon_clamp);
        b *= 2.0 * std::sqrt(e * (1.0 - e));
    }
    return b;
}

AdaBoostModel train_adaboost(const TrainingData& data, const TrainConfig& config) {
    config.validate();
    const auto n = data.samples();
    const auto labels = data.labels();
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!has_pos || !has_neg) {
        throw DataError("train_adaboost: training set holds a single class");
    }

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = labels[i] > 0 ? config.positive_weight : 1.0;
    }
    const double w0 = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) {
        v /= w0;
    }

    AdaBoostModel model;
    model.schema_fingerprint = data.schema_fingerprint();
    model.n_features = data.features();
    model.config = config;

    std::vector<int> pred(n);
    for (int t = 0; t < config.n_rounds; ++t) {
        auto tree = train_tree(data, w, config.tree);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = data.predict(tree, i);
            if (pred[i] != labels[i]) {
                err += w[i];
            }
        }
        if (err >= 0.5) {
            break;
        }
        const double e = std::clamp(err, config.epsilon_clamp, 1.0 - config.epsilon_clamp);
        const double alpha = 0.5 * std::log((1.0 - e) / e);
        model.rounds.push_back({std::move(tree), alpha, err});
        if (err == 0.0) {
            break;
        }
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(-alpha * labels[i] * pred[i]);
            z += w[i];
        }
        for (auto& v : w) {
            v /= z;
        }
    }
    if (model.rounds.empty()) {
        throw DataError("train_adaboost: the first weak learner is no better than chance (weighted error >= 0.5)");
    }
    return model;
}

AdaBoostModel train_adaboost(const FeatureMatrix& X, std::span<const int> y, const TrainConfig& config) {
    return train_adaboost(TrainingData(X, y), config);
}

double score(const AdaBoostModel& model, std::span<const double> x) {
    if (x.size() != model.n_features) {
        throw DataError("score: expected " + std::to_string(model.n_features) + " features, got " +
                        std::to_string(x.size()));
    }
    double margin = 0.0;
    for (const auto& r : model.rounds) {
        margin += r.alpha * r.tree.predict(x);
    }
    const double m = std::clamp(margin / model.alpha_sum(), -1.0, 1.0);
    return (m + 1.0) / 2.0;
}

double score(const AdaBoostModel& model, const FeatureVector& x) {
    if (!x.schema || x.schema->fingerprint() != model.schema_fingerprint) {
        throw DataError("score: feature schema does not match the model's training schema");
    }
    return score(model, std::span<const double>(x.values));
}

bool classify(const AdaBoostModel& model, const FeatureVector& x, double threshold) {
    return score(model, x) > threshold;
}

double training_error(const AdaBoostModel& model, const TrainingData& data) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.samples(); ++i) {
        double margin = 0.0;
        for (const auto& r : model.rounds) {
            margin += r.alpha * data.predict(r.tree, i);
        }
        const int decided = margin > 0.0 ? 1 : -1;
        if (decided != data.label(i)) {
            ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(data.samples());
}

namespace {

std::string hexf(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double read_double(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) {
        throw DataError(std::string("model file: missing ") + what);
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw DataError(std::string("model file: bad ") + what + " '" + tok + "'");
    }
    return v;
}

template <class T>
T read_int(std::istream& in, const char* what) {
    long long v = 0;
    if (!(in >> v)) {
        throw DataError(std::string("model file: bad ") + what);
    }
    return static_cast<T>(v);
}

void expect(std::istream& in, const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) {
        throw DataError("model file: expected '" + word + "', got '" + tok + "'");
    }
}

} // namespace

std::string serialize_model(const AdaBoostModel& model) {
    std::ostringstream out;
    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016" PRIx64, model.schema_fingerprint);
    const auto& c = model.config;
    out << "cohortpm-adaboost 1\n";
    out << "schema_fingerprint " << fp << "\n";
    out << "n_features " << model.n_features << "\n";
    out << "config n_rounds " << c.n_rounds << " max_depth " << c.tree.max_depth << " min_samples_leaf "
        << c.tree.min_samples_leaf << " epsilon_clamp " << hexf(c.epsilon_clamp) << " seed " << c.seed
        << " positive_weight " << hexf(c.positive_weight) << "\n";
    out << "rounds " << model.rounds.size() << "\n";
    for (const auto& r : model.rounds) {
        out << "round alpha " << hexf(r.alpha) << " error " << hexf(r.error) << " nodes " << r.tree.nodes.size()
            << "\n";
        for (const auto& n : r.tree.nodes) {
            if (n.is_leaf()) {
                out << "leaf " << n.leaf_class << "\n";
            } else {
                out << "split " << n.feature << " " << hexf(n.threshold) << " " << n.left << " " << n.right << "\n";
            }
        }
    }
    out << "end\n";
    return out.str();
}

AdaBoostModel parse_model(const std::string& text) {
    std::size_t body = 0;
    while (body < text.size() && text[body] == '#') { // provenance lines
        const auto nl = text.find('\n', body);
        body = nl == std::string::npos ? text.size() : nl + 1;
    }
    std::istringstream in(text.substr(body));
    AdaBoostModel m;
    expect(in, "cohortpm-adaboost");
    if (read_int<int>(in, "version") != 1) {
        throw DataError("model file: unsupported version");
    }
    expect(in, "schema_fingerprint");
    std::string fp;
    in >> fp;
    char* end = nullptr;
    m.schema_fingerprint = std::strtoull(fp.c_str(), &end, 16);
    if (fp.empty() || *end != '\0') {
        throw DataError("model file: bad schema fingerprint");
    }
    expect(in, "n_features");
    m.n_features = read_int<std::size_t>(in, "n_features");
    expect(in, "config");
    expect(in, "n_rounds");
    m.config.n_rounds = read_int<int>(in, "n_rounds");
    expect(in, "max_depth");
    m.config.tree.max_depth = read_int<int>(in, "max_depth");
    expect(in, "min_samples_leaf");
    m.config.tree.min_samples_leaf = read_int<int>(in, "min_samples_leaf");
    expect(in, "epsilon_clamp");
    m.config.epsilon_clamp = read_double(in, "epsilon_clamp");
    expect(in, "seed");
    unsigned long long seed = 0;
    if (!(in >> seed)) {
        throw DataError("model file: bad seed");
    }
    m.config.seed = seed;
    expect(in, "positive_weight");
    m.config.positive_weight = read_double(in, "positive_weight");
    expect(in, "rounds");
    const auto rounds = read_int<std::size_t>(in, "round count");
    if (rounds == 0) {
        throw DataError("model file: a model needs at least one round");
    }
    for (std::size_t r = 0; r < rounds; ++r) {
        BoostRound round;
        expect(in, "round");
        expect(in, "alpha");
        round.alpha = read_double(in, "alpha");
        expect(in, "error");
        round.error = read_double(in, "error");
        expect(in, "nodes");
        const auto count = read_int<std::size_t>(in, "node count");
        for (std::size_t i = 0; i < count; ++i) {
            std::string kind;
            in >> kind;
            TreeNode node;
            if (kind == "leaf") {
                node.leaf_class = read_int<int>(in, "leaf class");
            } else if (kind == "split") {
                node.feature = read_int<int>(in, "feature");
                node.threshold = read_double(in, "threshold");
                node.left = read_int<int>(in, "left");
                node.right = read_int<int>(in, "right");
            } else {
                throw DataError("model file: bad node kind '" + kind + "'");
            }
            round.tree.nodes.push_back(node);
        }
        for (const auto& node : round.tree.nodes) {
            const auto limit = static_cast<int>(round.tree.nodes.size());
            if (!node.is_leaf() && (node.left <= 0 || node.right <= 0 || node.left >= limit || node.right >= limit ||
                                    static_cast<std::size_t>(node.feature) >= m.n_features)) {
                throw DataError("model file: inconsistent tree structure");
            }
        }
        if (!std::isfinite(round.alpha) || round.alpha < 0.0) {
            throw DataError("model file: alpha must be finite and non-negative");
        }
        m.rounds.push_back(std::move(round));
    }
    expect(in, "end");
    return m;
}

} // namespace cohortpm
