#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace photonode::purcell {

struct EmitterModel {
    double gamma0_rad_s = 0.0;             // angular spontaneous emission rate
    double beta = 1.0;                     // branching fraction into the coupled transition
    double host_index = 1.0;
    double wavelength_nm = 0.0;
    std::array<double, 3> dipole_axis = {0.0, 1.0, 0.0};   // unit vector

    void validate() const;
};

/// |mu| in C m from the local-field-corrected decay-rate relation
/// Gamma0 = (1/beta) (3n^2/(2n^2+1))^2 n mu^2 w^3/(3 pi eps0 hbar c^3).
double extract_dipole(const EmitterModel& emitter);

/// Forward evaluation of the same relation (round-trip identity partner of extract_dipole).
double decay_rate_from_dipole(double dipole_C_m, double beta, double host_index,
                              double wavelength_nm);

/// 3D sampled complex E-field with a permittivity map. Arbitrary input normalization;
/// normalize_single_photon rescales to the single-photon convention
/// integral eps0 eps_r |E|^2 dV = hbar w / 2.
struct FieldMap {
    int nx = 0, ny = 0, nz = 0;
    double dx_nm = 0, dy_nm = 0, dz_nm = 0;
    std::vector<std::complex<double>> Ex, Ey, Ez;  // index ix*(ny*nz) + iy*nz + iz
    std::vector<double> eps_r;
    double Q = 0.0;
    double wavelength_nm = 0.0;

    std::size_t idx(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * ny + iy) * nz + iz;
    }
    void validate() const;
    /// integral eps0 eps_r |E|^2 dV in joules (trapezoid-free plain Riemann sum).
    double electric_energy_J() const;
};

FieldMap normalize_single_photon(const FieldMap& map);

/// P = 4 g^2 / (kappa Gamma0) with g = |mu . E(r)| / hbar (trilinear interpolation of the
/// macroscopic field), kappa = w/Q. Position in nm relative to grid node (0,0,0).
double purcell_factor(const FieldMap& map, const EmitterModel& emitter,
                      const std::array<double, 3>& position_nm);

struct TradeoffRow {
    double purcell;
    double collection_efficiency;        // P/(P+1)
    double broadened_linewidth_Hz;       // Gamma0 (1+P) / 2pi
    bool exceeds_converter_bandwidth;
};
struct TradeoffTable {
    std::vector<TradeoffRow> rows;
    double threshold_purcell;            // P* where the broadened linewidth meets the converter's
};

TradeoffTable collection_bandwidth_tradeoff(const EmitterModel& emitter,
                                            const std::vector<double>& purcell_range,
                                            double converter_linewidth_Hz);

/// Analytic test modes.
FieldMap make_uniform_box(int n, double spacing_nm, double eps_r, double Q, double wavelength_nm);
FieldMap make_gaussian_mode(int n, double spacing_nm, double waist_nm, double eps_r, double Q,
                            double wavelength_nm);

/// CSV field-map format: comment metadata block (Q, lambda), a dimension header and one
/// row per sample; see data format notes in the README.
void save_fieldmap(const FieldMap& map, const std::string& path);
FieldMap load_fieldmap(const std::string& path);

} // namespace photonode::purcell
