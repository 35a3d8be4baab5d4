#include "pecopt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pecopt {

RegressionTree RegressionTree::fit(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                                   const std::vector<int>& rows, const TreeConfig& cfg, Rng& rng) {
    if (rows.empty()) {
        throw std::invalid_argument("RegressionTree::fit: no rows");
    }
    RegressionTree tree;
    std::vector<int> work = rows;
    tree.build(x, y, work, 0, static_cast<int>(work.size()), 0, cfg, rng);
    return tree;
}

int RegressionTree::build(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                          std::vector<int>& rows, int begin, int end, int depth,
                          const TreeConfig& cfg, Rng& rng) {
    const int n = end - begin;
    double sum = 0.0;
    for (int i = begin; i < end; ++i) sum += y[rows[i]];
    const double mean = sum / n;

    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{-1, 0.0, -1, -1, mean});

    if (depth >= cfg.max_depth || n < 2 * cfg.min_leaf) {
        return node_id;
    }

    // Extra-trees split search: one uniform threshold per feature within
    // the node's value range; score by weighted variance reduction.
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int f = 0; f < kNumDesignParams; ++f) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int i = begin; i < end; ++i) {
            lo = std::min(lo, x[rows[i]][f]);
            hi = std::max(hi, x[rows[i]][f]);
        }
        if (!(hi > lo)) continue;
        const double threshold = rng.uniform(lo, hi);

        double sum_l = 0.0, sq_l = 0.0;
        double sum_r = 0.0, sq_r = 0.0;
        int n_l = 0;
        for (int i = begin; i < end; ++i) {
            const double v = y[rows[i]];
            if (x[rows[i]][f] < threshold) {
                sum_l += v;
                sq_l += v * v;
                ++n_l;
            } else {
                sum_r += v;
                sq_r += v * v;
            }
        }
        const int n_r = n - n_l;
        if (n_l < cfg.min_leaf || n_r < cfg.min_leaf) continue;
        // SSE reduction = parent SSE - (left SSE + right SSE); comparing
        // -sum of child SSEs is equivalent within one node.
        const double sse_l = sq_l - sum_l * sum_l / n_l;
        const double sse_r = sq_r - sum_r * sum_r / n_r;
        const double score = -(sse_l + sse_r);
        if (score > best_score) {
            best_score = score;
            best_feature = f;
            best_threshold = threshold;
        }
    }

    if (best_feature < 0) {
        return node_id;
    }

    auto mid_it = std::partition(rows.begin() + begin, rows.begin() + end,
                                 [&](int r) { return x[r][best_feature] < best_threshold; });
    const int mid = static_cast<int>(mid_it - rows.begin());

    nodes_[node_id].feature = best_feature;
    nodes_[node_id].threshold = best_threshold;
    const int left = build(x, y, rows, begin, mid, depth + 1, cfg, rng);
    nodes_[node_id].left = left;
    const int right = build(x, y, rows, mid, end, depth + 1, cfg, rng);
    nodes_[node_id].right = right;
    return node_id;
}

double RegressionTree::predict(const FeatureRow& x) const {
    int node = 0;
    while (nodes_[node].feature >= 0) {
        node = x[nodes_[node].feature] < nodes_[node].threshold ? nodes_[node].left
                                                                : nodes_[node].right;
    }
    return nodes_[node].value;
}

int RegressionTree::depth() const {
    // iterative depth over the node array
    std::vector<std::pair<int, int>> stack{{0, 1}};
    int best = 0;
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (nodes_[id].feature >= 0) {
            stack.push_back({nodes_[id].left, d + 1});
            stack.push_back({nodes_[id].right, d + 1});
        }
    }
    return best;
}

}  // namespace pecopt
