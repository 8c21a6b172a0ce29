#pragma once

#include <array>
#include <string>
#include <vector>

namespace photonode::resonator {

/// Taylor expansion of the cold-cavity resonance grid around a central resonance:
/// omega_mu = omega0 + D1*mu + D2*mu^2/2 + D3*mu^3/6, all coefficients in rad/s.
/// mu > 0 is the higher-frequency side (D1 > 0).
struct DispersionModel {
    double omega0 = 0.0;
    double D1 = 0.0;
    double D2 = 0.0;
    double D3 = 0.0;
};

enum class Band { b946, b1550 };
enum class IdlerBranch { plus, minus };

/// Per-band resonator parameters (Table-1 style constants).
struct BandParams {
    DispersionModel dispersion;
    double Q_i = 0.0;        // intrinsic
    double Q_C1 = 0.0;       // coupler 1
    double Q_C2 = 0.0;       // coupler 2
    double n2_m2_per_W = 0.0;
    double A_eff_um2 = 0.0;

    double Q_C() const;      // 1/Q_C = 1/Q_C1 + 1/Q_C2
    double Q_L() const;      // 1/Q_L = 1/Q_i + 1/Q_C
};

struct ResonatorConfig {
    double radius_um = 0.0;
    BandParams band946;
    BandParams band1550;

    const BandParams& band(Band b) const { return b == Band::b946 ? band946 : band1550; }

    double circumference_m() const;      // L = 2 pi R
    double round_trip_time_s() const;    // t_R = 2 pi / D1 (946 band)
    /// Validates Q positivity and the cross-band D1 (round-trip time) consistency (1% gate).
    void validate() const;
};

/// omega_mu of Eq.-(2) form. |mu| > 50 is outside the documented validity window of the
/// cubic expansion and triggers a one-time warning on stderr, not an error.
double resonance_frequency(const DispersionModel& m, int mu);

/// Detuning of idler i+/i- from its nearest (index +/-mu) resonance in the 1550 band,
/// for a pump-signal separation mu >= 1 in the 946 band. rad/s.
double idler_detuning(const DispersionModel& m946, const DispersionModel& m1550,
                      int mu, IdlerBranch branch);

/// Effective coupling quality factor of two couplers: 1/Q_C = 1/q1 + 1/q2.
double combine_coupling_q(double q1, double q2);

/// Dimensionless round-trip amplitude loss alpha = omega_mu t_R / (2 Q_L) for the band's
/// resonance at index mu.
double round_trip_loss(const ResonatorConfig& cfg, Band band, int resonance_index);

/// Dimensionless power coupling ratio theta = omega t_R / Q_C for one coupler of one band.
double coupling_ratio(const ResonatorConfig& cfg, Band band, int coupler);
/// Same with the band's effective (combined) coupling Q; this is the theta of the
/// conversion-efficiency formula.
double coupling_ratio(const ResonatorConfig& cfg, Band band);

/// gamma = n2 * omega / (c * A_eff) in 1/(W m).
double nonlinear_parameter(double n2_m2_per_W, double omega_rad_s, double A_eff_um2);
double nonlinear_parameter(const ResonatorConfig& cfg, Band band);

/// Effective detuning Delta-phi of a weak mode from its nearest cold resonance, including
/// the pump-induced Kerr shift: (omega_hat - omega) t_R - 2 gamma_band L (P1c + P2c).
/// Pump powers are the intracavity |E_p|^2 in watts.
double kerr_shifted_detuning(const ResonatorConfig& cfg, Band band, double laser_omega_rad_s,
                             double pump1_circ_W, double pump2_circ_W);

/// Nearest resonance index of the band's grid to a given angular frequency.
int nearest_resonance_index(const DispersionModel& m, double omega_rad_s);

/// One dispersion-scan sample from the mode solver.
struct ScanPoint {
    double lambda_nm;
    double n_eff;
};

/// Taylor coefficients D1..D3 at the resonance grid point nearest 2*pi*c/center_wavelength,
/// from numerical differentiation of omega(beta) with beta = 2 pi n_eff / lambda, scaled by
/// 1/R^n. Requires >= 5 samples bracketing the centre and strictly monotone beta(lambda).
DispersionModel fit_dispersion_model(const std::vector<ScanPoint>& scan,
                                     double radius_um, double center_wavelength_nm);

/// Table-1 resonator preset (D1 read as GHz; see data/table1.json).
ResonatorConfig table1_config();

} // namespace photonode::resonator
