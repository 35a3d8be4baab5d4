#include "pecopt/converter.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pecopt {

ParameterBounds ParameterBounds::defaults() {
    ParameterBounds b;
    b.lower = {200.0, 0.1, 1.0, 0.3, 1e3, 1.0, 0.0, 0.1, 0.01};
    b.upper = {800.0, 1.0, 50.0, 1.0, 100e3, 50.0, 50.0, 2.0, 0.5};
    return b;
}

bool ParameterBounds::contains(const DesignPoint& d) const {
    const auto x = d.as_array();
    for (int i = 0; i < kNumDesignParams; ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
}

void ParameterBounds::validate() const {
    for (int i = 0; i < kNumDesignParams; ++i) {
        if (!(lower[i] < upper[i])) {
            throw std::invalid_argument("ParameterBounds: lower must be < upper for x" +
                                        std::to_string(i + 1));
        }
    }
}

OutputCurrents output_currents(const DesignPoint& d, double r_load, double active_power) {
    if (!(r_load > 0.0)) {
        throw std::invalid_argument("output_currents: r_load must be > 0");
    }
    if (!(d.power_factor > 0.0)) {
        throw std::invalid_argument("output_currents: power_factor must be > 0");
    }
    if (!(d.vdc > 0.0)) {
        throw std::invalid_argument("output_currents: vdc must be > 0");
    }
    const double sqrt2 = std::numbers::sqrt2;
    OutputCurrents out;
    out.i_o = d.mod_index * d.vdc / (2.0 * r_load);
    out.i_or = d.mod_index * d.vdc / (2.0 * sqrt2 * r_load);
    out.i_orf = d.mod_index * d.vdc * d.power_factor / (2.0 * sqrt2 * r_load);
    out.i_in = active_power / (d.vdc * d.power_factor);
    return out;
}

LossBreakdown loss_model(const DesignPoint& d, double t_junction, const DeviceConstants& dev) {
    if (!std::isfinite(t_junction)) {
        throw std::invalid_argument("loss_model: t_junction must be finite");
    }
    const double io = d.i_out_amp;
    LossBreakdown out;
    out.p_out = d.mod_index * d.vdc * io * d.power_factor / 4.0;

    // Both switches conduct a half sine each: average |i| = Io/pi,
    // rms^2 = Io^2/4 per switch.
    const double r_on = dev.r_on25 * (1.0 + dev.r_on_alpha * (t_junction - 25.0));
    const double r_on_clamped = r_on > 0.0 ? r_on : 0.0;
    out.conduction = 2.0 * (dev.vce0 * io / std::numbers::pi + r_on_clamped * io * io / 4.0);

    out.switching = dev.k_switch * d.f_sw * d.vdc * io * (1.0 + dev.k_gate * d.r_gate);
    return out;
}

SimulationResult evaluate_design(const DesignPoint& d, const ParameterBounds& bounds,
                                 const DeviceConstants& dev, const ThermalSolverConfig& solver) {
    if (!bounds.contains(d)) {
        throw std::invalid_argument("evaluate_design: design outside parameter bounds");
    }

    const double rth_total = dev.rth_jc + d.rth_hc + d.rth_ha;

    SimulationResult res{};
    double t = d.t_ambient;
    LossBreakdown loss = loss_model(d, t, dev);
    bool converged = false;
    bool runaway = false;

    for (int it = 0; it < solver.max_iterations; ++it) {
        loss = loss_model(d, t, dev);
        const double total_loss = loss.conduction + loss.switching;
        const double t_target = d.t_ambient + total_loss * rth_total;
        if (std::abs(t_target - t) < solver.tolerance_kelvin) {
            converged = true;
            break;
        }
        const double t_next = t + solver.damping * (t_target - t);
        if (t_next > solver.runaway_ceiling) {
            runaway = true;
            t = t_next;
            break;
        }
        t = t_next;
    }

    loss = loss_model(d, t, dev);
    const double total_loss = loss.conduction + loss.switching;
    const double denom = loss.p_out + total_loss;
    double efficiency = denom > 0.0 ? loss.p_out / denom : 0.0;

    if (!converged) {
        t = solver.runaway_ceiling;
        if (efficiency < 0.0) efficiency = 0.0;
        if (efficiency > 1.0) efficiency = 1.0;
    }
    (void)runaway;

    res.efficiency = efficiency;
    res.temperature = t;
    res.loss_conduction = loss.conduction;
    res.loss_switching = loss.switching;
    res.p_out = loss.p_out;
    res.converged = converged;
    return res;
}

}  // namespace pecopt
