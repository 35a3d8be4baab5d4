#include "pecopt/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pecopt/metrics.hpp"

namespace pecopt {

namespace {

void check_two_classes(const Dataset& rows, const char* where) {
    bool any_pos = false, any_neg = false;
    for (const auto& r : rows) {
        (r.feasible ? any_pos : any_neg) = true;
        if (any_pos && any_neg) return;
    }
    throw std::invalid_argument(std::string(where) + ": training data contains a single class");
}

std::vector<std::vector<double>> standardized_features(const ScalerParams& s,
                                                       const Dataset& rows) {
    std::vector<std::vector<double>> x(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto f = s.standardize_features(rows[i].x);
        x[i].assign(f.begin(), f.end());
    }
    return x;
}

std::vector<std::vector<double>> labels_of(const Dataset& rows) {
    std::vector<std::vector<double>> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y[i] = {rows[i].feasible ? 1.0 : 0.0};
    }
    return y;
}

}  // namespace

FeasibilityClassifier FeasibilityClassifier::train(const Dataset& train_rows,
                                                   const ClassifierConfig& cfg) {
    check_two_classes(train_rows, "FeasibilityClassifier::train");

    FeasibilityClassifier model;
    model.kind_ = Kind::ann;
    model.scaler_ = fit_standardizer(train_rows);

    // carve a validation slice off the end of a shuffled copy for curves
    std::vector<int> idx(train_rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    Rng rng(derive_seed(cfg.seed, 0xc1a55));
    rng.shuffle(idx);
    const std::size_t n_val =
        cfg.val_fraction > 0.0
            ? static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(idx.size()))
            : 0;
    std::vector<int> fit_idx(idx.begin(), idx.end() - n_val);
    std::vector<int> val_idx(idx.end() - n_val, idx.end());
    const Dataset fit_rows = select_rows(train_rows, fit_idx);
    const Dataset val_rows = select_rows(train_rows, val_idx);

    NetworkSpec spec;
    spec.input_size = kNumDesignParams;
    for (int h : cfg.hidden) spec.layers.push_back({h, Activation::relu, 0.0});
    spec.layers.push_back({1, Activation::sigmoid, 0.0});
    spec.loss = LossKind::binary_cross_entropy;

    model.net_ = Network(spec, derive_seed(cfg.seed, 0x1417));
    TrainConfig tc{cfg.epochs, cfg.learning_rate, cfg.batch_size, cfg.seed};
    model.history_ = train_network(model.net_, standardized_features(model.scaler_, fit_rows),
                                   labels_of(fit_rows),
                                   standardized_features(model.scaler_, val_rows),
                                   labels_of(val_rows), tc);
    return model;
}

FeasibilityClassifier FeasibilityClassifier::train_logistic(const Dataset& train_rows,
                                                            const LogisticConfig& cfg) {
    check_two_classes(train_rows, "FeasibilityClassifier::train_logistic");

    FeasibilityClassifier model;
    model.kind_ = Kind::logistic;
    model.scaler_ = fit_standardizer(train_rows);
    model.logit_weights_.assign(kNumDesignParams + 1, 0.0);

    const auto x = standardized_features(model.scaler_, train_rows);
    const auto y = labels_of(train_rows);
    const double n = static_cast<double>(x.size());
    std::vector<double> grad(kNumDesignParams + 1, 0.0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        long correct = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = model.logit_weights_[kNumDesignParams];
            for (int j = 0; j < kNumDesignParams; ++j) z += model.logit_weights_[j] * x[i][j];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double err = p - y[i][0];
            for (int j = 0; j < kNumDesignParams; ++j) grad[j] += err * x[i][j];
            grad[kNumDesignParams] += err;
            const double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
            loss -= y[i][0] * std::log(pc) + (1.0 - y[i][0]) * std::log(1.0 - pc);
            if ((p >= 0.5) == (y[i][0] >= 0.5)) ++correct;
        }
        for (std::size_t j = 0; j < grad.size(); ++j) {
            model.logit_weights_[j] -= cfg.learning_rate * grad[j] / n;
        }
        EpochStats st;
        st.train_loss = loss / n;
        st.train_accuracy = static_cast<double>(correct) / n;
        model.history_.push_back(st);
    }
    return model;
}

double FeasibilityClassifier::predict_proba(const DesignPoint& d) const {
    for (double v : d.as_array()) {
        if (std::isnan(v)) {
            throw std::invalid_argument("predict_proba: NaN design parameter");
        }
    }
    const auto x = scaler_.standardize_features(d);
    if (kind_ == Kind::ann) {
        return net_.forward(std::span<const double>(x.data(), x.size()))[0];
    }
    double z = logit_weights_[kNumDesignParams];
    for (int j = 0; j < kNumDesignParams; ++j) z += logit_weights_[j] * x[j];
    return 1.0 / (1.0 + std::exp(-z));
}

CvReport cross_validate(const Dataset& rows, int k, const ClassifierConfig& cfg) {
    if (k < 2) {
        throw std::invalid_argument("cross_validate: k must be >= 2");
    }
    const auto folds = kfold_indices(rows.size(), k, cfg.seed);

    CvReport report;
    report.folds.resize(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<int> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g == f) continue;
            train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        }
        ClassifierConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, f);
        fold_cfg.val_fraction = 0.0;  // the held-out fold is the validation set
        const auto model = FeasibilityClassifier::train(select_rows(rows, train_idx), fold_cfg);

        const Dataset val = select_rows(rows, folds[f]);
        std::vector<double> probs(val.size());
        std::vector<int> labels(val.size());
        for (std::size_t i = 0; i < val.size(); ++i) {
            probs[i] = model.predict_proba(val[i].x);
            labels[i] = val[i].feasible ? 1 : 0;
        }
        const auto m = classification_metrics(probs, labels);
        report.folds[f] = {m.bce, m.accuracy};
    }

    report.best = {report.folds[0].bce, report.folds[0].accuracy};
    for (const auto& fs : report.folds) {
        report.mean.bce += fs.bce;
        report.mean.accuracy += fs.accuracy;
        report.best.bce = std::min(report.best.bce, fs.bce);
        report.best.accuracy = std::max(report.best.accuracy, fs.accuracy);
    }
    report.mean.bce /= static_cast<double>(report.folds.size());
    report.mean.accuracy /= static_cast<double>(report.folds.size());
    return report;
}

// --- serialization -----------------------------------------------------------

namespace {

constexpr char kClfMagic[8] = {'P', 'E', 'C', 'C', 'L', 'F', '0', '1'};

void push_scaler(std::vector<unsigned char>& out, const ScalerParams& s) {
    for (double v : s.mean) {
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        out.insert(out.end(), p, p + sizeof(double));
    }
    for (double v : s.stddev) {
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        out.insert(out.end(), p, p + sizeof(double));
    }
}

ScalerParams read_scaler(const unsigned char*& p, const unsigned char* end) {
    ScalerParams s;
    auto read_d = [&]() {
        if (p + sizeof(double) > end) {
            throw std::runtime_error("scaler deserialization: truncated data");
        }
        double v;
        std::memcpy(&v, p, sizeof(double));
        p += sizeof(double);
        return v;
    };
    for (auto& v : s.mean) v = read_d();
    for (auto& v : s.stddev) v = read_d();
    return s;
}

}  // namespace

void FeasibilityClassifier::save(const std::string& path) const {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kClfMagic, kClfMagic + sizeof(kClfMagic));
    buf.push_back(kind_ == Kind::ann ? 0 : 1);
    push_scaler(buf, scaler_);
    if (kind_ == Kind::ann) {
        write_network(buf, net_);
    } else {
        for (double v : logit_weights_) {
            const auto* p = reinterpret_cast<const unsigned char*>(&v);
            buf.insert(buf.end(), p, p + sizeof(double));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("FeasibilityClassifier::save: cannot open " + path);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw std::runtime_error("FeasibilityClassifier::save: write failed for " + path);
    }
}

FeasibilityClassifier FeasibilityClassifier::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("FeasibilityClassifier::load: cannot open " + path);
    }
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    const unsigned char* p = buf.data();
    const unsigned char* end = buf.data() + buf.size();
    if (p + sizeof(kClfMagic) > end || std::memcmp(p, kClfMagic, sizeof(kClfMagic)) != 0) {
        throw std::runtime_error("FeasibilityClassifier::load: bad magic in " + path);
    }
    p += sizeof(kClfMagic);
    if (p >= end) {
        throw std::runtime_error("FeasibilityClassifier::load: truncated file");
    }
    FeasibilityClassifier model;
    model.kind_ = *p++ == 0 ? Kind::ann : Kind::logistic;
    model.scaler_ = read_scaler(p, end);
    if (model.kind_ == Kind::ann) {
        model.net_ = read_network(p, end);
    } else {
        model.logit_weights_.resize(kNumDesignParams + 1);
        for (auto& v : model.logit_weights_) {
            if (p + sizeof(double) > end) {
                throw std::runtime_error("FeasibilityClassifier::load: truncated file");
            }
            std::memcpy(&v, p, sizeof(double));
            p += sizeof(double);
        }
    }
    return model;
}

}  // namespace pecopt
