#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pecopt/converter.hpp"

namespace pecopt {

// Column layout shared by the dataset, the scaler and the CSV schema:
// x1..x9, y1 (efficiency), y2 (temperature).
inline constexpr int kNumTargets = 2;
inline constexpr int kNumColumns = kNumDesignParams + kNumTargets;
inline constexpr int kColEfficiency = kNumDesignParams;      // 9
inline constexpr int kColTemperature = kNumDesignParams + 1; // 10

struct LabeledSample {
    DesignPoint x;
    double efficiency;   // y1
    double temperature;  // y2
    bool feasible;

    std::array<double, kNumColumns> columns() const {
        auto xs = x.as_array();
        std::array<double, kNumColumns> c{};
        for (int i = 0; i < kNumDesignParams; ++i) c[i] = xs[i];
        c[kColEfficiency] = efficiency;
        c[kColTemperature] = temperature;
        return c;
    }
};

using Dataset = std::vector<LabeledSample>;

/// Feasibility rule: 0 <= y1 <= 1 and y2 <= 125 degC. Throws on NaN input.
bool label_feasibility(double y1, double y2);

inline constexpr double kFeasibleTemperatureLimit = 125.0;

/// Draw n designs uniformly within bounds, simulate each, and label.
/// Sample i uses an RNG stream derived from (seed, i), so the output is
/// bit-identical for a fixed seed regardless of evaluation order.
Dataset generate_dataset(std::size_t n, const ParameterBounds& bounds, std::uint64_t seed,
                         const DeviceConstants& dev = {});

// --- Z-standardization ------------------------------------------------

/// Per-column mean and population (1/N) standard deviation for the nine
/// features and two targets. Columns with zero spread keep stddev == 0;
/// they standardize to 0 and invert back to the stored mean.
struct ScalerParams {
    std::array<double, kNumColumns> mean{};
    std::array<double, kNumColumns> stddev{};

    bool is_constant(int col) const { return stddev[col] == 0.0; }
    double apply(int col, double v) const;
    double invert(int col, double v) const;
    std::array<double, kNumDesignParams> standardize_features(const DesignPoint& d) const;
};

/// Fit on >= 2 rows (typically the training split only).
ScalerParams fit_standardizer(const Dataset& rows);

std::vector<std::array<double, kNumColumns>> apply_standardizer(const ScalerParams& s,
                                                                const Dataset& rows);

// --- Splits ------------------------------------------------------------

struct SplitSpec {
    double test_fraction = 0.2;  // in (0,1)
    int kfold = 5;               // >= 2
    std::uint64_t seed = 0;
};

/// Shuffled train/test index partition, deterministic per seed.
std::pair<std::vector<int>, std::vector<int>> train_test_split(std::size_t n,
                                                               double test_fraction,
                                                               std::uint64_t seed);

/// k disjoint folds covering 0..n-1 whose sizes differ by at most one;
/// earlier folds take the remainder. Deterministic per seed.
std::vector<std::vector<int>> kfold_indices(std::size_t n, int k, std::uint64_t seed);

Dataset select_rows(const Dataset& rows, const std::vector<int>& idx);
Dataset feasible_rows(const Dataset& rows);

// --- CSV persistence ----------------------------------------------------

/// Header is exactly "x1,...,x9,y1,y2,feasible"; floats at full precision
/// (%.17g) so save/load round-trips bitwise; feasible serialized as 0/1.
void save_csv(const std::string& path, const Dataset& rows);
Dataset load_csv(const std::string& path);

inline constexpr const char* kCsvHeader =
    "x1,x2,x3,x4,x5,x6,x7,x8,x9,y1,y2,feasible";

}  // namespace pecopt
