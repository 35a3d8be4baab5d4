#pragma once

#include <array>
#include <cstdint>

namespace pecopt {

inline constexpr int kNumDesignParams = 9;

/// The nine design parameters of the half-bridge stage, physical units.
struct DesignPoint {
    double vdc;           // DC link voltage [V]                    (x1)
    double mod_index;     // modulation index amplitude, (0,1]      (x2)
    double i_out_amp;     // output current amplitude [A]           (x3)
    double power_factor;  // load power factor, (0,1]               (x4)
    double f_sw;          // switching frequency [Hz]               (x5)
    double r_gate;        // gate resistance [ohm]                  (x6)
    double t_ambient;     // ambient temperature [degC]             (x7)
    double rth_ha;        // Rth heat sink -> ambient [K/W]         (x8)
    double rth_hc;        // Rth heat sink -> case [K/W]            (x9)

    std::array<double, kNumDesignParams> as_array() const {
        return {vdc, mod_index, i_out_amp, power_factor, f_sw,
                r_gate, t_ambient, rth_ha, rth_hc};
    }
    static DesignPoint from_array(const std::array<double, kNumDesignParams>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
    }
};

/// Per-parameter search-space limits, physical units.
struct ParameterBounds {
    std::array<double, kNumDesignParams> lower{};
    std::array<double, kNumDesignParams> upper{};

    /// Documented default ranges; they span both feasible and infeasible
    /// operating regions of the loss/thermal model.
    static ParameterBounds defaults();

    bool contains(const DesignPoint& d) const;
    void validate() const;  // throws unless lower < upper everywhere
};

/// Device and loss-model constants for the analytic electro-thermal model.
/// Values are frozen here (and in tests): mid-range designs land near
/// 90-99 % efficiency and 30-130 degC junction temperature.
struct DeviceConstants {
    double vce0 = 0.8;        // on-state knee voltage [V]
    double r_on25 = 0.03;     // on-resistance at 25 degC [ohm]
    double r_on_alpha = 0.005;  // linear temperature coefficient of r_on [1/K]
    double k_switch = 2.0e-8; // switching-loss scale [W/(Hz*V*A)]
    double k_gate = 0.02;     // gate-resistance loss coefficient [1/ohm]
    double rth_jc = 0.12;     // junction -> case thermal resistance [K/W]
};

/// Fixed-point solver settings for the electro-thermal coupling.
struct ThermalSolverConfig {
    double damping = 0.5;
    double tolerance_kelvin = 1e-6;
    int max_iterations = 200;
    double runaway_ceiling = 250.0;  // degC
};

struct OutputCurrents {
    double i_o;    // peak output current m*Vdc/(2*RL)
    double i_or;   // RMS output current m*Vdc/(2*sqrt(2)*RL)
    double i_orf;  // power-factor-weighted RMS current
    double i_in;   // input current P/(Vin*kpf)
};

/// Converter terminal currents for a load resistance and delivered active
/// power. R_L and P are auxiliary inputs, not design parameters.
OutputCurrents output_currents(const DesignPoint& d, double r_load, double active_power);

struct LossBreakdown {
    double conduction;  // [W]
    double switching;   // [W]
    double p_out;       // delivered output power [W]
};

/// Closed-form loss model at a given junction temperature.
///   p_out      = m * Vdc * Io * kpf / 4
///   conduction = 2 * (vce0 * Io/pi + r_on(T) * Io^2/4),
///                r_on(T) = r_on25 * (1 + alpha * (T - 25))
///   switching  = k_switch * f_sw * Vdc * Io * (1 + k_gate * r_gate)
LossBreakdown loss_model(const DesignPoint& d, double t_junction,
                         const DeviceConstants& dev = {});

struct SimulationResult {
    double efficiency;       // y1, dimensionless
    double temperature;      // y2, junction temperature [degC]
    double loss_conduction;  // [W]
    double loss_switching;   // [W]
    double p_out;            // [W]
    bool converged;
};

/// Steady-state electro-thermal solution: damped Picard iteration on
/// T = t_ambient + P_loss(T) * (rth_jc + rth_hc + rth_ha). Non-converged
/// runs (runaway past the ceiling or iteration cap) report the ceiling
/// temperature and the last efficiency iterate clamped to [0,1].
SimulationResult evaluate_design(const DesignPoint& d, const ParameterBounds& bounds,
                                 const DeviceConstants& dev = {},
                                 const ThermalSolverConfig& solver = {});

}  // namespace pecopt
