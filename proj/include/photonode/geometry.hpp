#pragma once

#include <string>
#include <vector>

namespace photonode::geometry {

/// Nanobeam photonic-crystal cavity: parabolic lattice-constant taper over the cavity
/// region plus fixed-period mirror segments, symmetric about x = 0.
struct NanobeamDesign {
    std::string label;
    double w_y_nm = 0, w_z_nm = 0;     // beam cross-section
    double h_x_nm = 0, h_y_nm = 0;     // elliptical hole diameters
    double a_cav_nm = 0, a_mirr_nm = 0;
    int n_cavity_holes = 0;            // total over both sides, even
    int n_mirror_pairs = 0;
    double taper_exponent = 2.0;       // spacing taper power (2 = parabolic)

    void validate() const;
};

struct Hole {
    double x_nm;
    double hx_nm, hy_nm;
};

struct HoleList {
    std::vector<Hole> holes;           // sorted by x, symmetric about 0
    double device_length_nm = 0;       // centre-to-centre span of the outermost holes
};

/// Per-side hole spacings a_k = a_cav + (a_mirr - a_cav) (k/(N-1))^p for k = 0..N-1
/// (a_k = a_cav when N = 1), then n_mirror_pairs spacings at a_mirr; the innermost pair
/// sits at +/- a_cav/2 and centres accumulate outward; mirrored to negative x.
HoleList generate_taper(const NanobeamDesign& design);

/// Paper presets: GaP (400, 380, 59, 128, 171, 184) nm and GaAs (350, 220, 70, 136, 162, 180) nm,
/// both with 20 cavity holes and 20 / 12 mirror pairs respectively.
NanobeamDesign gap_design();
NanobeamDesign gaas_design();

struct CouplerSpec {
    double w_y_nm = 0, w_z_nm = 0;
    double gap_nm = 0;
};

struct RingLayout {
    double radius_um = 0;
    double w_y_nm = 0, w_z_nm = 0;     // ring cross-section
    std::vector<CouplerSpec> couplers;
};

/// Ring plus point couplers. Throws std::invalid_argument on a negative gap.
RingLayout generate_ring_layout(double radius_um, double w_y_nm, double w_z_nm,
                                const std::vector<CouplerSpec>& couplers);

/// Paper layout: 25 um ring, 640x500 nm cross-section, couplers 640x500 @ 210 nm
/// and 380x300 @ 10 nm.
RingLayout paper_ring_layout();

/// JSON serialization with an explicit units field.
std::string to_json(const RingLayout& layout);
RingLayout ring_layout_from_json(const std::string& text);
std::string to_json(const NanobeamDesign& design, const HoleList& holes);

/// CSV hole list: index,x_nm,hx_nm,hy_nm
void save_hole_csv(const HoleList& holes, const std::string& path);

} // namespace photonode::geometry
