#include "pecopt/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "serialize_util.hpp"

namespace pecopt {

namespace {

using detail::push_pod;
using detail::read_pod;

struct StandardizedTrainData {
    ScalerParams scaler;
    std::vector<FeatureRow> x;
    std::vector<double> y_eff;
    std::vector<double> y_temp;
};

// Regressors train on feasible rows only, in standardized feature and
// target space.
StandardizedTrainData standardize_feasible(const Dataset& rows) {
    const Dataset feas = feasible_rows(rows);
    if (feas.size() < 10) {
        throw std::invalid_argument("regressor training requires >= 10 feasible rows");
    }
    StandardizedTrainData out;
    out.scaler = fit_standardizer(feas);
    out.x.resize(feas.size());
    out.y_eff.resize(feas.size());
    out.y_temp.resize(feas.size());
    for (std::size_t i = 0; i < feas.size(); ++i) {
        out.x[i] = out.scaler.standardize_features(feas[i].x);
        out.y_eff[i] = out.scaler.apply(kColEfficiency, feas[i].efficiency);
        out.y_temp[i] = out.scaler.apply(kColTemperature, feas[i].temperature);
    }
    return out;
}

GaussianPrediction to_physical(const ScalerParams& s, int col, const GaussianPrediction& p) {
    return {s.invert(col, p.mean), p.stddev * s.stddev[col]};
}

void push_tree(std::vector<unsigned char>& buf, const RegressionTree& t) {
    push_pod<std::uint32_t>(buf, static_cast<std::uint32_t>(t.nodes().size()));
    for (const auto& n : t.nodes()) {
        push_pod<std::int32_t>(buf, n.feature);
        push_pod<double>(buf, n.threshold);
        push_pod<std::int32_t>(buf, n.left);
        push_pod<std::int32_t>(buf, n.right);
        push_pod<double>(buf, n.value);
    }
}

RegressionTree read_tree(const unsigned char*& p, const unsigned char* end) {
    RegressionTree t;
    const auto n_nodes = read_pod<std::uint32_t>(p, end);
    t.nodes().resize(n_nodes);
    for (auto& n : t.nodes()) {
        n.feature = read_pod<std::int32_t>(p, end);
        n.threshold = read_pod<double>(p, end);
        n.left = read_pod<std::int32_t>(p, end);
        n.right = read_pod<std::int32_t>(p, end);
        n.value = read_pod<double>(p, end);
    }
    return t;
}

void push_ngboost(std::vector<unsigned char>& buf, const NgboostModel& m) {
    push_pod<double>(buf, m.initial_mu());
    push_pod<double>(buf, m.initial_log_sigma());
    push_pod<double>(buf, m.config().learning_rate);
    push_pod<double>(buf, m.config().sigma_floor);
    push_pod<std::uint32_t>(buf, static_cast<std::uint32_t>(m.stages().size()));
    for (const auto& st : m.stages()) {
        push_pod<double>(buf, st.scale);
        push_tree(buf, st.mu_tree);
        push_tree(buf, st.log_sigma_tree);
    }
}

NgboostModel read_ngboost(const unsigned char*& p, const unsigned char* end) {
    NgboostModel m;
    const double mu0 = read_pod<double>(p, end);
    const double ls0 = read_pod<double>(p, end);
    NgboostConfig cfg;
    cfg.learning_rate = read_pod<double>(p, end);
    cfg.sigma_floor = read_pod<double>(p, end);
    m.set_config(cfg);
    m.set_initial(mu0, ls0);
    const auto n_stages = read_pod<std::uint32_t>(p, end);
    m.stages().resize(n_stages);
    for (auto& st : m.stages()) {
        st.scale = read_pod<double>(p, end);
        st.mu_tree = read_tree(p, end);
        st.log_sigma_tree = read_tree(p, end);
    }
    return m;
}

constexpr char kNgbMagic[8] = {'P', 'E', 'C', 'N', 'G', 'B', '0', '1'};
constexpr char kGprMagic[8] = {'P', 'E', 'C', 'G', 'P', 'R', '0', '1'};
constexpr char kMcdMagic[8] = {'P', 'E', 'C', 'M', 'C', 'D', '0', '1'};

void check_magic(const unsigned char*& p, const unsigned char* end, const char (&magic)[8],
                 const std::string& path) {
    if (p + 8 > end || std::memcmp(p, magic, 8) != 0) {
        throw std::runtime_error("unexpected model format in " + path);
    }
    p += 8;
}

}  // namespace

std::vector<GaussianPrediction> mc_predict(const Network& net, std::span<const double> input,
                                           int passes, std::uint64_t seed) {
    if (passes < 2) {
        throw std::invalid_argument("mc_predict: passes must be >= 2");
    }
    const std::size_t n_out = static_cast<std::size_t>(net.spec().output_size());
    std::vector<std::vector<double>> outputs(static_cast<std::size_t>(passes));
    Rng rng(seed);
    for (auto& out : outputs) out = net.forward_stochastic(input, rng);

    const double n = static_cast<double>(passes);
    std::vector<GaussianPrediction> preds(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
        double mean = 0.0;
        for (const auto& out : outputs) mean += out[j];
        mean /= n;
        double var = 0.0;
        for (const auto& out : outputs) var += (out[j] - mean) * (out[j] - mean);
        preds[j] = {mean, std::sqrt(var / n)};
    }
    return preds;
}

// --- NGBoost ------------------------------------------------------------------

NgboostRegressor NgboostRegressor::train(const Dataset& rows, const NgboostConfig& cfg) {
    const auto data = standardize_feasible(rows);
    NgboostRegressor reg;
    reg.scaler_ = data.scaler;
    NgboostConfig eff_cfg = cfg;
    eff_cfg.seed = derive_seed(cfg.seed, 1);
    NgboostConfig temp_cfg = cfg;
    temp_cfg.seed = derive_seed(cfg.seed, 2);
    reg.eff_ = NgboostModel::fit(data.x, data.y_eff, eff_cfg);
    reg.temp_ = NgboostModel::fit(data.x, data.y_temp, temp_cfg);
    return reg;
}

TargetPredictions NgboostRegressor::predict(const DesignPoint& d) const {
    const auto x = scaler_.standardize_features(d);
    return {to_physical(scaler_, kColEfficiency, eff_.predict(x)),
            to_physical(scaler_, kColTemperature, temp_.predict(x))};
}

void NgboostRegressor::save(const std::string& path) const {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kNgbMagic, kNgbMagic + 8);
    detail::push_scaler(buf, scaler_);
    push_ngboost(buf, eff_);
    push_ngboost(buf, temp_);
    detail::write_file(path, buf);
}

NgboostRegressor NgboostRegressor::load(const std::string& path) {
    const auto buf = detail::read_file(path);
    const unsigned char* p = buf.data();
    const unsigned char* end = buf.data() + buf.size();
    check_magic(p, end, kNgbMagic, path);
    NgboostRegressor reg;
    reg.scaler_ = detail::read_scaler(p, end);
    reg.eff_ = read_ngboost(p, end);
    reg.temp_ = read_ngboost(p, end);
    return reg;
}

// --- GPR ----------------------------------------------------------------------

GprRegressor GprRegressor::train(const Dataset& rows, const GprRegressorConfig& cfg) {
    const auto data = standardize_feasible(rows);
    GprRegressor reg;
    reg.scaler_ = data.scaler;
    GprFitConfig eff_fit = cfg.fit;
    eff_fit.seed = derive_seed(cfg.fit.seed, 1);
    GprFitConfig temp_fit = cfg.fit;
    temp_fit.seed = derive_seed(cfg.fit.seed, 2);
    if (cfg.grid_search) {
        reg.eff_ = GprModel::fit_with_grid_search(data.x, data.y_eff, eff_fit);
        reg.temp_ = GprModel::fit_with_grid_search(data.x, data.y_temp, temp_fit);
    } else {
        reg.eff_ = GprModel::fit(data.x, data.y_eff, cfg.kernel, eff_fit);
        reg.temp_ = GprModel::fit(data.x, data.y_temp, cfg.kernel, temp_fit);
    }
    return reg;
}

TargetPredictions GprRegressor::predict(const DesignPoint& d) const {
    const auto x = scaler_.standardize_features(d);
    return {to_physical(scaler_, kColEfficiency, eff_.predict(x)),
            to_physical(scaler_, kColTemperature, temp_.predict(x))};
}

namespace {

void push_gpr(std::vector<unsigned char>& buf, const GprModel& m) {
    push_pod<double>(buf, m.kernel().signal_var);
    push_pod<double>(buf, m.kernel().lengthscale);
    push_pod<double>(buf, m.kernel().noise_var);
    push_pod<std::uint32_t>(buf, static_cast<std::uint32_t>(m.training_size()));
    for (const auto& row : m.training_inputs()) {
        for (double v : row) push_pod<double>(buf, v);
    }
    for (double v : m.training_targets()) push_pod<double>(buf, v);
}

GprModel read_gpr(const unsigned char*& p, const unsigned char* end) {
    GprKernelParams kernel;
    kernel.signal_var = read_pod<double>(p, end);
    kernel.lengthscale = read_pod<double>(p, end);
    kernel.noise_var = read_pod<double>(p, end);
    const auto n = read_pod<std::uint32_t>(p, end);
    std::vector<FeatureRow> x(n);
    for (auto& row : x) {
        for (auto& v : row) v = read_pod<double>(p, end);
    }
    std::vector<double> y(n);
    for (auto& v : y) v = read_pod<double>(p, end);
    // refitting on the stored (x, y, kernel) reproduces the factorization
    GprFitConfig cfg;
    cfg.subsample_cap = static_cast<int>(n);
    return GprModel::fit(x, y, kernel, cfg);
}

}  // namespace

void GprRegressor::save(const std::string& path) const {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kGprMagic, kGprMagic + 8);
    detail::push_scaler(buf, scaler_);
    push_gpr(buf, eff_);
    push_gpr(buf, temp_);
    detail::write_file(path, buf);
}

GprRegressor GprRegressor::load(const std::string& path) {
    const auto buf = detail::read_file(path);
    const unsigned char* p = buf.data();
    const unsigned char* end = buf.data() + buf.size();
    check_magic(p, end, kGprMagic, path);
    GprRegressor reg;
    reg.scaler_ = detail::read_scaler(p, end);
    reg.eff_ = read_gpr(p, end);
    reg.temp_ = read_gpr(p, end);
    return reg;
}

// --- MC dropout ----------------------------------------------------------------

McDropoutRegressor McDropoutRegressor::train(const Dataset& rows, const McDropoutConfig& cfg) {
    const auto data = standardize_feasible(rows);
    McDropoutRegressor reg;
    reg.scaler_ = data.scaler;
    reg.passes_ = cfg.passes;
    reg.seed_ = cfg.seed;

    NetworkSpec spec;
    spec.input_size = kNumDesignParams;
    for (int h : cfg.hidden) spec.layers.push_back({h, Activation::relu, cfg.dropout});
    spec.layers.push_back({2, Activation::identity, 0.0});
    spec.loss = LossKind::squared_error;
    reg.net_ = Network(spec, derive_seed(cfg.seed, 0x3cd));

    std::vector<std::vector<double>> x(data.x.size()), y(data.x.size());
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        x[i].assign(data.x[i].begin(), data.x[i].end());
        y[i] = {data.y_eff[i], data.y_temp[i]};
    }
    TrainConfig tc{cfg.epochs, cfg.learning_rate, cfg.batch_size, cfg.seed};
    train_network(reg.net_, x, y, {}, {}, tc);
    return reg;
}

TargetPredictions McDropoutRegressor::predict(const DesignPoint& d) const {
    const auto xs = scaler_.standardize_features(d);
    // key the dropout stream by the candidate so repeated queries agree
    const std::uint64_t stream =
        derive_seed(seed_, hash_doubles(std::span<const double>(xs.data(), xs.size())));
    const auto preds =
        mc_predict(net_, std::span<const double>(xs.data(), xs.size()), passes_, stream);
    return {to_physical(scaler_, kColEfficiency, preds[0]),
            to_physical(scaler_, kColTemperature, preds[1])};
}

void McDropoutRegressor::save(const std::string& path) const {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kMcdMagic, kMcdMagic + 8);
    detail::push_scaler(buf, scaler_);
    push_pod<std::int32_t>(buf, passes_);
    push_pod<std::uint64_t>(buf, seed_);
    write_network(buf, net_);
    detail::write_file(path, buf);
}

McDropoutRegressor McDropoutRegressor::load(const std::string& path) {
    const auto buf = detail::read_file(path);
    const unsigned char* p = buf.data();
    const unsigned char* end = buf.data() + buf.size();
    check_magic(p, end, kMcdMagic, path);
    McDropoutRegressor reg;
    reg.scaler_ = detail::read_scaler(p, end);
    reg.passes_ = read_pod<std::int32_t>(p, end);
    reg.seed_ = read_pod<std::uint64_t>(p, end);
    reg.net_ = read_network(p, end);
    return reg;
}

std::unique_ptr<SurrogateRegressor> load_regressor(const std::string& path) {
    const auto buf = detail::read_file(path);
    if (buf.size() < 8) {
        throw std::runtime_error("load_regressor: truncated file " + path);
    }
    if (std::memcmp(buf.data(), kNgbMagic, 8) == 0) {
        return std::make_unique<NgboostRegressor>(NgboostRegressor::load(path));
    }
    if (std::memcmp(buf.data(), kGprMagic, 8) == 0) {
        return std::make_unique<GprRegressor>(GprRegressor::load(path));
    }
    if (std::memcmp(buf.data(), kMcdMagic, 8) == 0) {
        return std::make_unique<McDropoutRegressor>(McDropoutRegressor::load(path));
    }
    throw std::runtime_error("load_regressor: unknown model format in " + path);
}

}  // namespace pecopt
