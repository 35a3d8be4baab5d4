#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pecopt/converter.hpp"
#include "pecopt/dataset.hpp"
#include "pecopt/rng.hpp"

using namespace pecopt;

namespace {

DesignPoint nominal_design() {
    // mid-range of the default bounds
    return {500.0, 0.55, 25.5, 0.65, 50.5e3, 25.5, 25.0, 1.05, 0.255};
}

DesignPoint random_design(const ParameterBounds& b, Rng& rng) {
    std::array<double, kNumDesignParams> x{};
    for (int j = 0; j < kNumDesignParams; ++j) x[j] = rng.uniform(b.lower[j], b.upper[j]);
    return DesignPoint::from_array(x);
}

}  // namespace

TEST_CASE("output currents match the converter relations") {
    DesignPoint d = nominal_design();

    d.mod_index = 0.8;
    d.vdc = 400.0;
    auto c = output_currents(d, 8.0, 1000.0);
    CHECK(c.i_o == doctest::Approx(20.0).epsilon(1e-12));

    d.mod_index = 0.0;
    c = output_currents(d, 8.0, 0.0);
    CHECK(c.i_o == 0.0);
    CHECK(c.i_or == 0.0);
    CHECK(c.i_orf == 0.0);

    d.mod_index = 1.0;
    d.vdc = 400.0;
    d.power_factor = 1.0;
    c = output_currents(d, 10.0, 500.0);
    CHECK(c.i_orf == doctest::Approx(14.142135623730949).epsilon(1e-12));
    // i_in = P / (Vin * kpf)
    CHECK(c.i_in == doctest::Approx(500.0 / 400.0).epsilon(1e-12));

    CHECK_THROWS_AS(output_currents(d, 0.0, 100.0), std::invalid_argument);
    d.power_factor = 0.0;
    CHECK_THROWS_AS(output_currents(d, 10.0, 100.0), std::invalid_argument);
}

TEST_CASE("loss model closed form") {
    const DesignPoint d = nominal_design();

    SUBCASE("hand-computed nominal values at Tj = 80") {
        const auto loss = loss_model(d, 80.0);
        CHECK(loss.p_out == doctest::Approx(1139.53125).epsilon(1e-12));
        CHECK(loss.conduction == doctest::Approx(25.423074606298663).epsilon(1e-12));
        CHECK(loss.switching == doctest::Approx(19.445025).epsilon(1e-12));
    }

    SUBCASE("lossless limit") {
        DeviceConstants dev;
        dev.vce0 = 0.0;
        dev.r_on25 = 0.0;
        dev.k_switch = 0.0;
        const auto loss = loss_model(d, 40.0, dev);
        CHECK(loss.switching == 0.0);
        CHECK(loss.conduction == 0.0);
    }

    SUBCASE("higher gate resistance raises switching loss strictly") {
        DesignPoint hot = d;
        hot.r_gate = d.r_gate + 5.0;
        CHECK(loss_model(hot, 80.0).switching > loss_model(d, 80.0).switching);
    }

    CHECK_THROWS_AS(loss_model(d, std::nan("")), std::invalid_argument);
}

TEST_CASE("evaluate_design solves the electro-thermal fixed point") {
    const auto bounds = ParameterBounds::defaults();

    SUBCASE("lossless limit reaches unit efficiency at ambient") {
        DeviceConstants dev;
        dev.vce0 = 0.0;
        dev.r_on25 = 0.0;
        dev.k_switch = 0.0;
        const auto res = evaluate_design(nominal_design(), bounds, dev);
        CHECK(res.converged);
        CHECK(res.efficiency == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res.temperature == doctest::Approx(25.0).epsilon(1e-9));
    }

    SUBCASE("nominal design matches an independent bisection oracle") {
        const DesignPoint d = nominal_design();
        const auto res = evaluate_design(d, bounds);
        REQUIRE(res.converged);

        // independent route: bisect the residual T - g(T), which is
        // increasing in T for this model
        const DeviceConstants dev;
        const double rth = dev.rth_jc + d.rth_hc + d.rth_ha;
        auto g = [&](double t) {
            const auto l = loss_model(d, t, dev);
            return d.t_ambient + (l.conduction + l.switching) * rth;
        };
        double lo = d.t_ambient, hi = 250.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) - mid > 0.0 ? lo : hi) = mid;
        }
        const double t_star = 0.5 * (lo + hi);
        CHECK(t_star == doctest::Approx(89.604512002720).epsilon(1e-9));
        CHECK(std::abs(res.temperature - t_star) < 5e-6);

        // fixed-point residual below the solver tolerance
        CHECK(std::abs(res.temperature - g(res.temperature)) < 1e-6);
    }

    SUBCASE("hotter heat-sink path raises temperature strictly") {
        DesignPoint a = nominal_design();
        DesignPoint b = a;
        b.rth_ha = a.rth_ha + 0.4;
        CHECK(evaluate_design(b, bounds).temperature > evaluate_design(a, bounds).temperature);
    }

    SUBCASE("out-of-bounds design is a domain error") {
        DesignPoint d = nominal_design();
        d.vdc = 5000.0;
        CHECK_THROWS_AS(evaluate_design(d, bounds), std::invalid_argument);
    }
}

TEST_CASE("monotonicity properties over random paired designs") {
    const auto bounds = ParameterBounds::defaults();
    Rng rng(2024);
    const int kPairs = 1000;

    int switching_checked = 0;
    for (int it = 0; it < kPairs; ++it) {
        const DesignPoint a = random_design(bounds, rng);

        // temperature non-decreasing in rth_ha, rth_hc, t_ambient
        for (int coord : {7, 8, 6}) {
            auto xs = a.as_array();
            xs[coord] = rng.uniform(xs[coord], bounds.upper[coord]);
            const DesignPoint b = DesignPoint::from_array(xs);
            CHECK(evaluate_design(b, bounds).temperature >=
                  evaluate_design(a, bounds).temperature - 1e-9);
        }

        // switching loss strictly increasing in r_gate and f_sw
        {
            auto xs = a.as_array();
            xs[5] = xs[5] + 0.5 * (bounds.upper[5] - xs[5]) + 1e-6;
            if (xs[5] <= bounds.upper[5]) {
                CHECK(loss_model(DesignPoint::from_array(xs), 80.0).switching >
                      loss_model(a, 80.0).switching);
                ++switching_checked;
            }
            xs = a.as_array();
            xs[4] = xs[4] + 0.5 * (bounds.upper[4] - xs[4]) + 1e-3;
            if (xs[4] <= bounds.upper[4]) {
                CHECK(loss_model(DesignPoint::from_array(xs), 80.0).switching >
                      loss_model(a, 80.0).switching);
            }
        }

        // p_out non-decreasing in modulation index
        {
            auto xs = a.as_array();
            xs[1] = rng.uniform(xs[1], bounds.upper[1]);
            CHECK(loss_model(DesignPoint::from_array(xs), 80.0).p_out >=
                  loss_model(a, 80.0).p_out - 1e-12);
        }

        // total losses non-increasing in power factor at fixed output
        // power: scale the current amplitude to hold p_out constant
        {
            const double kpf_b = rng.uniform(a.power_factor, bounds.upper[3]);
            DesignPoint b = a;
            b.power_factor = kpf_b;
            b.i_out_amp = a.i_out_amp * a.power_factor / kpf_b;
            const auto la = loss_model(a, 80.0);
            const auto lb = loss_model(b, 80.0);
            CHECK(lb.p_out == doctest::Approx(la.p_out).epsilon(1e-9));
            CHECK(lb.conduction + lb.switching <= la.conduction + la.switching + 1e-9);
        }
    }
    CHECK(switching_checked > kPairs / 2);
}

TEST_CASE("efficiency and temperature stay in their physical ranges") {
    const auto bounds = ParameterBounds::defaults();
    Rng rng(77);
    for (int i = 0; i < 2000; ++i) {
        const auto d = random_design(bounds, rng);
        const auto res = evaluate_design(d, bounds);
        CHECK(res.efficiency >= 0.0);
        CHECK(res.efficiency <= 1.0);
        CHECK(res.temperature >= d.t_ambient);
        CHECK(res.p_out >= 0.0);
        CHECK(res.loss_conduction >= 0.0);
        CHECK(res.loss_switching >= 0.0);
        if (!res.converged) {
            CHECK(res.temperature == 250.0);
        }
    }
}

TEST_CASE("generate_dataset is deterministic and spans both classes") {
    const auto bounds = ParameterBounds::defaults();

    SUBCASE("fixed seed reproduces rows bit-identically") {
        const auto a = generate_dataset(50, bounds, 9001);
        const auto b = generate_dataset(50, bounds, 9001);
        REQUIRE(a.size() == 50);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].x.as_array() == b[i].x.as_array());
            CHECK(a[i].efficiency == b[i].efficiency);
            CHECK(a[i].temperature == b[i].temperature);
            CHECK(a[i].feasible == b[i].feasible);
        }
        const auto c = generate_dataset(1, bounds, 123);
        const auto e = generate_dataset(1, bounds, 123);
        CHECK(c[0].efficiency == e[0].efficiency);
    }

    SUBCASE("infeasible fraction on default bounds stays in the frozen band") {
        const auto rows = generate_dataset(5000, bounds, 42);
        long infeasible = 0;
        for (const auto& r : rows) {
            if (!r.feasible) ++infeasible;
        }
        const double frac = static_cast<double>(infeasible) / 5000.0;
        CHECK(frac >= 0.05);
        CHECK(frac <= 0.45);
    }

    CHECK_THROWS_AS(generate_dataset(0, bounds, 1), std::invalid_argument);
}
