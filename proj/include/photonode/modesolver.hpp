#pragma once

#include "photonode/materials.hpp"
#include "photonode/resonator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace photonode::modesolver {

enum class Polarization { TE, TM };

/// Rectangular core on a semi-infinite substrate with air everywhere else.
/// The simulation window is derived from the margins and rounded to whole cells;
/// the core is centred at y = 0 and sits on the substrate surface z = 0.
struct CrossSection {
    double w_y_nm = 0.0;          // width
    double w_z_nm = 0.0;          // thickness
    materials::Material core;
    materials::Material substrate;
    materials::Material cladding; // air
    double grid_nm = 20.0;
    double margin_nm = 1500.0;    // open-side margin, >= 1500 unless the core spans the window
    double window_y_nm = 0.0;     // 0 = auto (w_y + 2 margin); explicit values allow the slab limit
    double window_z_nm = 0.0;     // 0 = auto

    void validate(double wavelength_nm) const;
    bool slab_limit() const { return window_y_nm > 0.0 && w_y_nm >= window_y_nm; }
};

struct ModeSolution {
    double wavelength_nm = 0.0;
    double n_eff = 0.0;
    Polarization polarization = Polarization::TE;
    bool is_guided = false;
    double e_y_energy_fraction = 0.0;  // electric energy in E_y over total
    double boundary_leakage = 0.0;     // max |E| on the outermost interior nodes / max |E|
    double residual = 0.0;
    int iterations = 0;

    // node-sampled fields and permittivity, row-major with index iy*(nz) + iz
    int ny = 0, nz = 0;                // node counts
    double h_nm = 0.0;
    double y0_nm = 0.0, z0_nm = 0.0;   // coordinates of node (0,0)
    std::vector<double> E_x, E_y, E_z;
    std::vector<double> eps;

    double n_substrate = 0.0;
    double n_core = 0.0;

    std::size_t idx(int iy, int iz) const { return static_cast<std::size_t>(iy) * nz + iz; }
};

/// Highest-n_eff mode of the requested polarization. Polarization is classified from the
/// transverse-H content (E_y-dominant modes carry their magnetic field in H_z).
/// Throws std::runtime_error with a residual report if the eigensolver does not converge.
ModeSolution solve_mode(const CrossSection& xs, double wavelength_nm, Polarization pol);

/// n_g = n_eff - lambda dn_eff/dlambda, central difference with a 1 nm step and one
/// Richardson extrapolation level.
double group_index(const CrossSection& xs, double wavelength_nm, Polarization pol);

/// D = -(lambda/c) d2 n_eff/dlambda2 in ps/(nm km); second-order central difference with a
/// 2 nm step (the wider step keeps eigensolver noise in the second difference below
/// ~0.5 ps/(nm km); see gvd_parameter in modesolver.cpp).
double gvd_parameter(const CrossSection& xs, double wavelength_nm, Polarization pol);

/// Node mask aligned with a ModeSolution grid.
using RegionMask = std::vector<std::uint8_t>;
RegionMask core_mask(const ModeSolution& mode, const CrossSection& xs);

/// A_eff = (iint eps |E|^2)^2 / iint_mask eps^2 |E|^4, numerator over the whole window,
/// in um^2. Throws std::invalid_argument for an empty mask or an unguided mode.
double effective_area(const ModeSolution& mode, const RegionMask& ring_region);

struct MatchingRow {
    double w_y_nm, w_z_nm;
    double n_eff_946, n_eff_1550;
    double n_g_946, n_g_1550;
    double delta_n_g;
    bool cutoff;
};
struct MatchingScan {
    std::vector<MatchingRow> rows;
    struct Crossing { double w_z_nm, w_y_nm; };
    std::vector<Crossing> crossings;   // linear interpolation between sign changes
};

/// Delta n_g(w_y, w_z) sweep between two wavelengths. Cut-off entries (either wavelength)
/// are marked and skipped by the crossing search. Scan entries run concurrently.
MatchingScan group_index_matching_scan(const CrossSection& base,
                                       const std::vector<double>& thickness_nm,
                                       const std::vector<double>& width_nm,
                                       double lambda1_nm = 946.0, double lambda2_nm = 1550.0);

struct DispersionScanResult {
    std::vector<double> lambda_nm, n_eff, n_g, D_ps_nm_km, A_eff_um2;
    std::vector<resonator::ScanPoint> scan_points() const;
};

/// n_eff / n_g / D / A_eff over a wavelength grid. n_g and D are differenced on the scan
/// grid itself (one eigensolve per wavelength); endpoints use one-sided differences.
DispersionScanResult dispersion_scan(const CrossSection& xs, const std::vector<double>& lambda_nm,
                                     Polarization pol);

/// Zero crossings of D(lambda) by linear interpolation on a scan.
std::vector<double> gvd_zero_crossings(const DispersionScanResult& scan);

} // namespace photonode::modesolver
