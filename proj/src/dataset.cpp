#include "pecopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pecopt/rng.hpp"

namespace pecopt {

bool label_feasibility(double y1, double y2) {
    if (std::isnan(y1) || std::isnan(y2)) {
        throw std::invalid_argument("label_feasibility: NaN input");
    }
    return y1 >= 0.0 && y1 <= 1.0 && y2 <= kFeasibleTemperatureLimit;
}

Dataset generate_dataset(std::size_t n, const ParameterBounds& bounds, std::uint64_t seed,
                         const DeviceConstants& dev) {
    if (n < 1) {
        throw std::invalid_argument("generate_dataset: n must be >= 1");
    }
    bounds.validate();

    Dataset rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        std::array<double, kNumDesignParams> x{};
        for (int j = 0; j < kNumDesignParams; ++j) {
            x[j] = rng.uniform(bounds.lower[j], bounds.upper[j]);
        }
        const DesignPoint d = DesignPoint::from_array(x);
        const SimulationResult sim = evaluate_design(d, bounds, dev);
        rows[i] = {d, sim.efficiency, sim.temperature,
                   label_feasibility(sim.efficiency, sim.temperature)};
    }
    return rows;
}

// --- Scaler --------------------------------------------------------------

double ScalerParams::apply(int col, double v) const {
    if (is_constant(col)) return 0.0;
    return (v - mean[col]) / stddev[col];
}

double ScalerParams::invert(int col, double v) const {
    if (is_constant(col)) return mean[col];
    return v * stddev[col] + mean[col];
}

std::array<double, kNumDesignParams> ScalerParams::standardize_features(
    const DesignPoint& d) const {
    const auto xs = d.as_array();
    std::array<double, kNumDesignParams> out{};
    for (int j = 0; j < kNumDesignParams; ++j) out[j] = apply(j, xs[j]);
    return out;
}

ScalerParams fit_standardizer(const Dataset& rows) {
    if (rows.size() < 2) {
        throw std::invalid_argument("fit_standardizer: need at least 2 rows");
    }
    ScalerParams s;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        const auto c = r.columns();
        for (int j = 0; j < kNumColumns; ++j) s.mean[j] += c[j];
    }
    for (int j = 0; j < kNumColumns; ++j) s.mean[j] /= n;
    for (const auto& r : rows) {
        const auto c = r.columns();
        for (int j = 0; j < kNumColumns; ++j) {
            const double d = c[j] - s.mean[j];
            s.stddev[j] += d * d;
        }
    }
    for (int j = 0; j < kNumColumns; ++j) s.stddev[j] = std::sqrt(s.stddev[j] / n);
    return s;
}

std::vector<std::array<double, kNumColumns>> apply_standardizer(const ScalerParams& s,
                                                                const Dataset& rows) {
    std::vector<std::array<double, kNumColumns>> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto c = rows[i].columns();
        for (int j = 0; j < kNumColumns; ++j) out[i][j] = s.apply(j, c[j]);
    }
    return out;
}

// --- Splits ---------------------------------------------------------------

std::pair<std::vector<int>, std::vector<int>> train_test_split(std::size_t n,
                                                               double test_fraction,
                                                               std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("train_test_split: test_fraction must lie in (0,1)");
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0x5417u));
    rng.shuffle(idx);
    const std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * n));
    std::vector<int> test(idx.begin(), idx.begin() + n_test);
    std::vector<int> train(idx.begin() + n_test, idx.end());
    return {train, test};
}

std::vector<std::vector<int>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) {
        throw std::invalid_argument("kfold_indices: k must be >= 2");
    }
    if (static_cast<std::size_t>(k) > n) {
        throw std::invalid_argument("kfold_indices: k exceeds row count");
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0xf01d5));
    rng.shuffle(idx);

    std::vector<std::vector<int>> folds(k);
    const std::size_t base = n / k;
    const std::size_t rem = n % k;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
        folds[f].assign(idx.begin() + pos, idx.begin() + pos + size);
        pos += size;
    }
    return folds;
}

Dataset select_rows(const Dataset& rows, const std::vector<int>& idx) {
    Dataset out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(rows[static_cast<std::size_t>(i)]);
    return out;
}

Dataset feasible_rows(const Dataset& rows) {
    Dataset out;
    for (const auto& r : rows) {
        if (r.feasible) out.push_back(r);
    }
    return out;
}

// --- CSV -------------------------------------------------------------------

namespace {

void format_double(std::string& buf, double v) {
    char tmp[40];
    std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    buf += tmp;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void save_csv(const std::string& path, const Dataset& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_csv: cannot open " + path + " for writing");
    }
    std::string buf;
    buf.reserve(rows.size() * 128 + 64);
    buf += kCsvHeader;
    buf += '\n';
    for (const auto& r : rows) {
        const auto c = r.columns();
        for (int j = 0; j < kNumColumns; ++j) {
            format_double(buf, c[j]);
            buf += ',';
        }
        buf += r.feasible ? '1' : '0';
        buf += '\n';
    }
    out << buf;
    if (!out) {
        throw std::runtime_error("save_csv: write failed for " + path);
    }
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        parse_fail(path, 1, "empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
        parse_fail(path, 1, "header mismatch, expected \"" + std::string(kCsvHeader) + "\"");
    }

    Dataset rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::array<double, kNumColumns> cols{};
        int field = 0;
        bool feasible = false;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (field < kNumColumns) {
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (end == cell.c_str() || *end != '\0') {
                    parse_fail(path, lineno, "non-numeric cell \"" + cell + "\"");
                }
                cols[field] = v;
            } else if (field == kNumColumns) {
                if (cell == "0") {
                    feasible = false;
                } else if (cell == "1") {
                    feasible = true;
                } else {
                    parse_fail(path, lineno, "feasible flag must be 0 or 1, got \"" + cell + "\"");
                }
            } else {
                parse_fail(path, lineno, "too many columns");
            }
            ++field;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != kNumColumns + 1) {
            parse_fail(path, lineno, "expected " + std::to_string(kNumColumns + 1) +
                                         " columns, got " + std::to_string(field));
        }

        std::array<double, kNumDesignParams> xs{};
        for (int j = 0; j < kNumDesignParams; ++j) xs[j] = cols[j];
        rows.push_back({DesignPoint::from_array(xs), cols[kColEfficiency],
                        cols[kColTemperature], feasible});
    }
    return rows;
}

}  // namespace pecopt
