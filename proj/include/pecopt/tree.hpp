#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pecopt/converter.hpp"
#include "pecopt/rng.hpp"

namespace pecopt {

using FeatureRow = std::array<double, kNumDesignParams>;

struct TreeConfig {
    int max_depth = 4;
    int min_leaf = 5;
};

/// Axis-aligned regression tree with extra-trees splits: one random
/// threshold per candidate feature, best variance reduction wins.
/// Leaves hold the mean target of their rows.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    RegressionTree() = default;

    static RegressionTree fit(const std::vector<FeatureRow>& x, const std::vector<double>& y,
                              const std::vector<int>& rows, const TreeConfig& cfg, Rng& rng);

    double predict(const FeatureRow& x) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    std::vector<Node>& nodes() { return nodes_; }
    int depth() const;

private:
    std::vector<Node> nodes_;

    int build(const std::vector<FeatureRow>& x, const std::vector<double>& y,
              std::vector<int>& rows, int begin, int end, int depth, const TreeConfig& cfg,
              Rng& rng);
};

}  // namespace pecopt
