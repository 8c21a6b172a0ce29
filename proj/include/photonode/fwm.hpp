#pragma once

#include "photonode/resonator.hpp"

#include <complex>
#include <string>
#include <vector>

namespace photonode::fwm {

using resonator::Band;
using resonator::IdlerBranch;
using resonator::ResonatorConfig;

struct PumpConfig {
    double total_power_W = 0.0;
    double split_fraction = 0.5;   // fraction of total power in pump 1 (946 nm band)
    double detuning1_rad_s = 0.0;  // offset of pump 1 from its Kerr-shifted resonance
    double detuning2_rad_s = 0.0;

    void validate() const;
    double p1_W() const { return split_fraction * total_power_W; }
    double p2_W() const { return (1.0 - split_fraction) * total_power_W; }
};

struct SignalSpec {
    double power_W = 1e-6;
    int mu = 1;                    // pump-signal resonance separation in the 946 band
    double detuning_rad_s = 0.0;   // offset of the signal laser from the cold mu resonance
};

/// Complex intracavity amplitudes with |E|^2 = circulating power in watts.
struct CMEState {
    std::complex<double> E_s, E_sp, E_ip, E_im;   // signal, auxiliary signal, idlers
    std::complex<double> E_p1, E_p2;              // fixed pump amplitudes
    // effective detunings and per-band losses used for the solve
    double dphi_s = 0, dphi_sp = 0, dphi_ip = 0, dphi_im = 0;
    double alpha1 = 0, alpha2 = 0, theta1 = 0, theta2 = 0;
    double omega_s = 0, omega_sp = 0, omega_ip = 0, omega_im = 0;   // actual optical frequencies
    double signal_power_W = 0;
    // diagnostics
    std::string method;
    double residual = 0;
    int iterations = 0;
    bool converged = false;
};

enum class OutputMode { i_plus, i_minus, s_prime, s_transmitted };

/// Intracavity pump amplitudes |E_p|^2 = theta_p P_p / (alpha_p^2 + dphi_p^2), phases zero.
/// Pumps are parked on their own SPM+XPM Kerr-shifted resonances; the PumpConfig detunings
/// are measured from those shifted resonances.
std::pair<std::complex<double>, std::complex<double>>
pump_intracavity_fields(const ResonatorConfig& cfg, const PumpConfig& pumps);

/// Steady state of the four weak-mode coupled equations as a stacked 4x4 complex linear
/// system in (E_s, E_s'*, E_i+, E_i-*). Residual of the un-stacked equations is checked
/// against 1e-12 of the drive magnitude.
CMEState steady_state_linear(const ResonatorConfig& cfg, const PumpConfig& pumps,
                             const SignalSpec& signal);

/// Independent route: explicit RK4 integration of the same equations from zero fields.
/// dt defaults to t_R/10 and t_max to 400 lifetimes; convergence is declared when the
/// relative field change per lifetime drops below 1e-10.
CMEState steady_state_timestep(const ResonatorConfig& cfg, const PumpConfig& pumps,
                               const SignalSpec& signal, double t_max_s = 0.0, double dt_s = 0.0);

/// Photon-flux ratio of Eq.-(10) form: theta_2 |E_i|^2 / (hbar omega_i) over P_s / (hbar omega_s).
/// s_prime uses theta_1; s_transmitted is the input-output power ratio |sqrt(P_s)+i sqrt(theta1) E_s|^2/P_s.
double conversion_efficiency(const CMEState& state, const ResonatorConfig& cfg, OutputMode mode);

/// Net photon flux the input wave delivers to the cavity: 2 sqrt(theta1 P_s) Im(E_s) / (hbar w1).
double delivered_photon_flux(const CMEState& state, const ResonatorConfig& cfg);
/// Manley-Rowe dissipated-flux sum 2a1(|Es|^2-|Es'|^2)/hw1 + 2a2(|Ei+|^2-|Ei-|^2)/hw2
/// with band-centre frequencies; equals delivered_photon_flux when n2 and A_eff match
/// across bands.
double dissipated_photon_flux(const CMEState& state, const ResonatorConfig& cfg);

struct DetuningSweepRow {
    double power_mW;
    double detuning_norm;      // signal detuning in units of the 946-band FWHM
    double eta_iplus;
};
struct DetuningSweepResult {
    std::vector<DetuningSweepRow> rows;
    struct Peak { double power_mW, detuning_norm, eta; };
    std::vector<Peak> peaks;   // golden-section refined, one per power
};

/// Fig.-5(b)-style sweep: signal wavelength swept around the cold mu resonance for each
/// total pump power; detuning grid is in units of the loaded FWHM.
DetuningSweepResult sweep_signal_detuning(const ResonatorConfig& cfg,
                                          const std::vector<double>& pump_powers_W,
                                          int mu, const std::vector<double>& detuning_grid,
                                          double split_fraction = 0.5);

struct MuSweepRow {
    int mu;
    double lambda_out_plus_nm, eta_iplus;
    double lambda_out_minus_nm, eta_iminus;
};
/// Fig.-5(c)-style sweep: per-branch efficiency at per-branch optimal signal detuning.
std::vector<MuSweepRow> sweep_mu(const ResonatorConfig& cfg, double pump_power_W,
                                 int mu_min, int mu_max, double split_fraction = 0.5);

struct QPowerCell {
    double power_mW;
    double Q_L;
    double eta_iplus;          // peak over signal detuning
    bool above_threshold;      // parametric-oscillation region of the no-depletion model
};
struct QPowerResult {
    std::vector<QPowerCell> cells;
    struct ContourPoint { double power_mW; double Q_L; };
    std::vector<ContourPoint> unity_contour;   // first Q_L with eta >= 0.97 per power
};
/// Fig.-5(d)-style map under critical coupling (Q_C = Q_i = 2 Q_L in both bands).
QPowerResult sweep_q_power(const ResonatorConfig& cfg, const std::vector<double>& powers_W,
                           const std::vector<double>& q_loaded);

/// Peak eta_i+ over signal detuning (coarse grid around the Kerr-shifted resonance plus
/// golden-section refinement). Returns {detuning_norm, eta}.
std::pair<double, double> optimize_signal_detuning(const ResonatorConfig& cfg,
                                                   const PumpConfig& pumps, int mu,
                                                   OutputMode branch = OutputMode::i_plus);

/// Normalized detuning x (units of loaded FWHM, red side positive) -> rad/s offset.
double detuning_norm_to_rad_s(const ResonatorConfig& cfg, int mu, double x);

} // namespace photonode::fwm
