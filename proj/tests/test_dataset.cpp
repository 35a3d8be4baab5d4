#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pecopt/dataset.hpp"
#include "pecopt/rng.hpp"

using namespace pecopt;

namespace {

LabeledSample sample_with(double x1, double y1, double y2) {
    DesignPoint d{x1, 0.5, 10.0, 0.8, 2e4, 10.0, 25.0, 1.0, 0.1};
    return {d, y1, y2, label_feasibility(y1, y2)};
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("feasibility rule") {
    CHECK(label_feasibility(0.95, 80.0));
    CHECK_FALSE(label_feasibility(0.99, 130.0));
    CHECK_FALSE(label_feasibility(1.2, 60.0));
    CHECK_FALSE(label_feasibility(-0.1, 60.0));
    CHECK(label_feasibility(0.0, 125.0));
    CHECK_THROWS_AS(label_feasibility(std::nan(""), 50.0), std::invalid_argument);
    CHECK_THROWS_AS(label_feasibility(0.5, std::nan("")), std::invalid_argument);
}

TEST_CASE("standardizer uses population std and round-trips") {
    SUBCASE("column {1,2,3} standardizes to +-1.2247") {
        Dataset rows = {sample_with(1.0, 0.9, 50.0), sample_with(2.0, 0.9, 50.0),
                        sample_with(3.0, 0.9, 50.0)};
        const auto s = fit_standardizer(rows);
        CHECK(s.mean[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(s.apply(0, 1.0) == doctest::Approx(-1.2247448713915889).epsilon(1e-12));
        CHECK(s.apply(0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.apply(0, 3.0) == doctest::Approx(1.2247448713915889).epsilon(1e-12));
    }

    SUBCASE("constant columns standardize to zero and invert to the constant") {
        Dataset rows = {sample_with(5.0, 0.9, 50.0), sample_with(5.0, 0.8, 60.0)};
        const auto s = fit_standardizer(rows);
        CHECK(s.is_constant(0));
        CHECK(s.apply(0, 5.0) == 0.0);
        CHECK(s.invert(0, 0.0) == 5.0);
        CHECK(s.invert(0, 123.0) == 5.0);
    }

    SUBCASE("apply/invert identity and unit moments on random data") {
        Rng rng(11);
        Dataset rows;
        for (int i = 0; i < 1000; ++i) {
            rows.push_back(sample_with(rng.uniform(200, 800), rng.uniform(0.2, 1.0),
                                       rng.uniform(10, 200)));
        }
        const auto s = fit_standardizer(rows);
        const auto std_rows = apply_standardizer(s, rows);

        for (int col : {0, kColEfficiency, kColTemperature}) {
            double mean = 0.0, var = 0.0;
            for (const auto& r : std_rows) mean += r[col];
            mean /= static_cast<double>(std_rows.size());
            for (const auto& r : std_rows) var += (r[col] - mean) * (r[col] - mean);
            var /= static_cast<double>(std_rows.size());
            CHECK(std::abs(mean) < 1e-9);
            CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
        }

        double max_err = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto orig = rows[i].columns();
            for (int col = 0; col < kNumColumns; ++col) {
                max_err = std::max(max_err,
                                   std::abs(s.invert(col, std_rows[i][col]) - orig[col]));
            }
        }
        CHECK(max_err < 1e-9);
    }

    CHECK_THROWS_AS(fit_standardizer(Dataset{sample_with(1, 0.9, 50)}), std::invalid_argument);
}

TEST_CASE("train/test split and k-fold indices") {
    SUBCASE("10 rows, k=5 gives five folds of two") {
        const auto folds = kfold_indices(10, 5, 3);
        REQUIRE(folds.size() == 5);
        for (const auto& f : folds) CHECK(f.size() == 2);
    }

    SUBCASE("11 rows, k=5 gives sizes {3,2,2,2,2}") {
        const auto folds = kfold_indices(11, 5, 3);
        REQUIRE(folds.size() == 5);
        CHECK(folds[0].size() == 3);
        for (int f = 1; f < 5; ++f) CHECK(folds[f].size() == 2);
    }

    SUBCASE("folds are disjoint, cover everything, and repeat per seed") {
        const auto folds = kfold_indices(503, 7, 99);
        const auto again = kfold_indices(503, 7, 99);
        CHECK(folds == again);
        std::vector<int> seen(503, 0);
        for (const auto& f : folds) {
            for (int i : f) ++seen[i];
        }
        for (int c : seen) CHECK(c == 1);
    }

    SUBCASE("split fractions and determinism") {
        const auto [train, test] = train_test_split(100, 0.2, 5);
        CHECK(train.size() == 80);
        CHECK(test.size() == 20);
        const auto [train2, test2] = train_test_split(100, 0.2, 5);
        CHECK(train == train2);
        CHECK(test == test2);
    }

    CHECK_THROWS_AS(kfold_indices(3, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(kfold_indices(10, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(train_test_split(10, 0.0, 0), std::invalid_argument);
}

TEST_CASE("csv round trip is bitwise lossless") {
    Rng rng(8);
    Dataset rows;
    for (int i = 0; i < 100; ++i) {
        rows.push_back(sample_with(rng.uniform(200, 800), rng.uniform(0.0, 1.1),
                                   rng.uniform(10, 260)));
    }
    const std::string path = temp_path("pecopt_roundtrip.csv");
    save_csv(path, rows);
    const auto loaded = load_csv(path);
    REQUIRE(loaded.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded[i].x.as_array() == rows[i].x.as_array());
        CHECK(loaded[i].efficiency == rows[i].efficiency);
        CHECK(loaded[i].temperature == rows[i].temperature);
        CHECK(loaded[i].feasible == rows[i].feasible);
        // relabeling reproduces the stored flag
        CHECK(label_feasibility(loaded[i].efficiency, loaded[i].temperature) ==
              loaded[i].feasible);
    }

    // header exactness
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == std::string(kCsvHeader));
    std::filesystem::remove(path);
}

TEST_CASE("csv parse errors name the offending line") {
    const std::string path = temp_path("pecopt_bad.csv");

    SUBCASE("wrong header") {
        std::ofstream(path) << "a,b,c\n";
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains(":1:"), std::runtime_error);
    }
    SUBCASE("wrong column count") {
        std::ofstream(path) << kCsvHeader << "\n1,2,3,4,5,6,7,8,9,0.9,50,1\n1,2,3\n";
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains(":3:"), std::runtime_error);
    }
    SUBCASE("non-numeric cell") {
        std::ofstream(path) << kCsvHeader << "\n1,2,x,4,5,6,7,8,9,0.9,50,1\n";
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains(":2:"), std::runtime_error);
    }
    SUBCASE("bad feasible flag") {
        std::ofstream(path) << kCsvHeader << "\n1,2,3,4,5,6,7,8,9,0.9,50,2\n";
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("feasible"), std::runtime_error);
    }
    std::filesystem::remove(path);
}

TEST_CASE("scaler fitted on train applies unchanged to test data") {
    const auto rows = generate_dataset(300, ParameterBounds::defaults(), 17);
    const auto [train_idx, test_idx] = train_test_split(rows.size(), 0.25, 17);
    const auto train = select_rows(rows, train_idx);
    const auto test = select_rows(rows, test_idx);

    const auto s1 = fit_standardizer(train);
    const auto s2 = fit_standardizer(train);
    const auto t1 = apply_standardizer(s1, test);
    const auto t2 = apply_standardizer(s2, test);
    CHECK(t1 == t2);
}
