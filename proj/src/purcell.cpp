#include "photonode/purcell.hpp"
#include "photonode/constants.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace photonode::purcell {

void EmitterModel::validate() const {
    if (gamma0_rad_s <= 0) throw std::invalid_argument("Gamma0 must be positive");
    if (beta <= 0 || beta > 1) throw std::invalid_argument("beta must lie in (0, 1]");
    if (host_index < 1) throw std::invalid_argument("host index must be >= 1");
    if (wavelength_nm <= 0) throw std::invalid_argument("wavelength must be positive");
    const double n2 = dipole_axis[0] * dipole_axis[0] + dipole_axis[1] * dipole_axis[1] +
                      dipole_axis[2] * dipole_axis[2];
    if (std::abs(n2 - 1.0) > 1e-6) throw std::invalid_argument("dipole axis must be a unit vector");
}

static double local_field_factor(double n) {
    const double f = 3.0 * n * n / (2.0 * n * n + 1.0);
    return f * f;
}

double extract_dipole(const EmitterModel& e) {
    e.validate();
    const double w = 2.0 * pi * c0 / (e.wavelength_nm * 1e-9);
    const double mu2 = e.gamma0_rad_s * e.beta * 3.0 * pi * eps0 * hbar * c0 * c0 * c0 /
                       (w * w * w * e.host_index * local_field_factor(e.host_index));
    return std::sqrt(mu2);
}

double decay_rate_from_dipole(double mu, double beta, double n, double wavelength_nm) {
    const double w = 2.0 * pi * c0 / (wavelength_nm * 1e-9);
    return (1.0 / beta) * local_field_factor(n) * n * mu * mu * w * w * w /
           (3.0 * pi * eps0 * hbar * c0 * c0 * c0);
}

void FieldMap::validate() const {
    if (nx < 2 || ny < 2 || nz < 2) throw std::invalid_argument("field map needs >= 2 samples per axis");
    if (dx_nm <= 0 || dy_nm <= 0 || dz_nm <= 0)
        throw std::invalid_argument("grid spacings must be positive");
    const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
    if (Ex.size() != n || Ey.size() != n || Ez.size() != n || eps_r.size() != n)
        throw std::invalid_argument("field map arrays disagree with the grid dimensions");
    for (double e : eps_r)
        if (e < 1.0) throw std::invalid_argument("relative permittivity must be >= 1");
    if (Q <= 0 || wavelength_nm <= 0)
        throw std::invalid_argument("field map needs positive Q and wavelength metadata");
}

double FieldMap::electric_energy_J() const {
    const double dV = dx_nm * dy_nm * dz_nm * 1e-27;   // m^3
    double u = 0.0;
    for (std::size_t k = 0; k < eps_r.size(); ++k)
        u += eps_r[k] * (std::norm(Ex[k]) + std::norm(Ey[k]) + std::norm(Ez[k]));
    return eps0 * u * dV;
}

FieldMap normalize_single_photon(const FieldMap& map) {
    map.validate();
    const double u = map.electric_energy_J();
    if (u <= 0.0) throw std::invalid_argument("normalize_single_photon: zero-field map");
    const double w = 2.0 * pi * c0 / (map.wavelength_nm * 1e-9);
    const double scale = std::sqrt(hbar * w / 2.0 / u);
    FieldMap out = map;
    for (auto& v : out.Ex) v *= scale;
    for (auto& v : out.Ey) v *= scale;
    for (auto& v : out.Ez) v *= scale;
    return out;
}

namespace {

std::complex<double> trilinear(const FieldMap& m, const std::vector<std::complex<double>>& F,
                               double x, double y, double z) {
    const double fx = x / m.dx_nm, fy = y / m.dy_nm, fz = z / m.dz_nm;
    if (fx < 0 || fy < 0 || fz < 0 || fx > m.nx - 1 || fy > m.ny - 1 || fz > m.nz - 1) {
        std::ostringstream os;
        os << "position (" << x << ", " << y << ", " << z << ") nm outside the field-map grid";
        throw std::out_of_range(os.str());
    }
    const int jx = std::min(static_cast<int>(std::floor(fx)), m.nx - 2);
    const int jy = std::min(static_cast<int>(std::floor(fy)), m.ny - 2);
    const int jz = std::min(static_cast<int>(std::floor(fz)), m.nz - 2);
    const double tx = fx - jx, ty = fy - jy, tz = fz - jz;
    std::complex<double> acc = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                const double wgt = (a ? tx : 1 - tx) * (b ? ty : 1 - ty) * (c ? tz : 1 - tz);
                acc += wgt * F[m.idx(jx + a, jy + b, jz + c)];
            }
    return acc;
}

} // namespace

double purcell_factor(const FieldMap& map, const EmitterModel& emitter,
                      const std::array<double, 3>& pos_nm) {
    map.validate();
    const FieldMap norm = normalize_single_photon(map);
    const double mu = extract_dipole(emitter);
    const std::complex<double> ex = trilinear(norm, norm.Ex, pos_nm[0], pos_nm[1], pos_nm[2]);
    const std::complex<double> ey = trilinear(norm, norm.Ey, pos_nm[0], pos_nm[1], pos_nm[2]);
    const std::complex<double> ez = trilinear(norm, norm.Ez, pos_nm[0], pos_nm[1], pos_nm[2]);
    const std::complex<double> proj = emitter.dipole_axis[0] * ex + emitter.dipole_axis[1] * ey +
                                      emitter.dipole_axis[2] * ez;
    const double g = mu * std::abs(proj) / hbar;
    const double w = 2.0 * pi * c0 / (map.wavelength_nm * 1e-9);
    const double kappa = w / map.Q;
    return 4.0 * g * g / (kappa * emitter.gamma0_rad_s);
}

TradeoffTable collection_bandwidth_tradeoff(const EmitterModel& emitter,
                                            const std::vector<double>& purcell_range,
                                            double converter_linewidth_Hz) {
    emitter.validate();
    if (converter_linewidth_Hz <= 0)
        throw std::invalid_argument("converter linewidth must be positive");
    TradeoffTable out;
    const double g0_Hz = emitter.gamma0_rad_s / (2.0 * pi);
    out.threshold_purcell = converter_linewidth_Hz / g0_Hz - 1.0;
    for (double P : purcell_range) {
        if (P < 0) throw std::invalid_argument("Purcell factors must be nonnegative");
        TradeoffRow row;
        row.purcell = P;
        row.collection_efficiency = P / (P + 1.0);
        row.broadened_linewidth_Hz = g0_Hz * (1.0 + P);
        row.exceeds_converter_bandwidth = row.broadened_linewidth_Hz > converter_linewidth_Hz;
        out.rows.push_back(row);
    }
    return out;
}

FieldMap make_uniform_box(int n, double spacing_nm, double eps_r, double Q, double wavelength_nm) {
    FieldMap m;
    m.nx = m.ny = m.nz = n;
    m.dx_nm = m.dy_nm = m.dz_nm = spacing_nm;
    const std::size_t sz = static_cast<std::size_t>(n) * n * n;
    m.Ex.assign(sz, 0.0);
    m.Ey.assign(sz, 1.0);
    m.Ez.assign(sz, 0.0);
    m.eps_r.assign(sz, eps_r);
    m.Q = Q;
    m.wavelength_nm = wavelength_nm;
    return m;
}

FieldMap make_gaussian_mode(int n, double spacing_nm, double waist_nm, double eps_r, double Q,
                            double wavelength_nm) {
    FieldMap m = make_uniform_box(n, spacing_nm, eps_r, Q, wavelength_nm);
    const double cx = (n - 1) * spacing_nm / 2.0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) {
                const double r2 = std::pow(ix * spacing_nm - cx, 2) +
                                  std::pow(iy * spacing_nm - cx, 2) +
                                  std::pow(iz * spacing_nm - cx, 2);
                m.Ey[m.idx(ix, iy, iz)] = std::exp(-r2 / (waist_nm * waist_nm));
            }
    return m;
}

void save_fieldmap(const FieldMap& map, const std::string& path) {
    map.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[256];
    out << "# fieldmap\n";
    std::snprintf(buf, sizeof buf, "# Q = %.9g\n# lambda_nm = %.9g\n", map.Q, map.wavelength_nm);
    out << buf;
    out << "nx,ny,nz,dx_nm,dy_nm,dz_nm\n";
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.9g,%.9g,%.9g\n", map.nx, map.ny, map.nz,
                  map.dx_nm, map.dy_nm, map.dz_nm);
    out << buf;
    out << "ix,iy,iz,eps_r,Re(Ex),Im(Ex),Re(Ey),Im(Ey),Re(Ez),Im(Ez)\n";
    for (int ix = 0; ix < map.nx; ++ix)
        for (int iy = 0; iy < map.ny; ++iy)
            for (int iz = 0; iz < map.nz; ++iz) {
                const auto k = map.idx(ix, iy, iz);
                std::snprintf(buf, sizeof buf,
                              "%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", ix, iy, iz,
                              map.eps_r[k], map.Ex[k].real(), map.Ex[k].imag(),
                              map.Ey[k].real(), map.Ey[k].imag(), map.Ez[k].real(),
                              map.Ez[k].imag());
                out << buf;
            }
}

FieldMap load_fieldmap(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field map " + path);
    FieldMap m;
    std::string line;
    int lineno = 0;
    bool have_dims = false;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            std::istringstream is(line.substr(1));
            std::string key, eq;
            double val;
            if (is >> key >> eq >> val && eq == "=") {
                if (key == "Q") m.Q = val;
                else if (key == "lambda_nm") m.wavelength_nm = val;
            }
            continue;
        }
        if (line.rfind("nx,", 0) == 0 || line.rfind("ix,", 0) == 0) continue;
        for (auto& c : line)
            if (c == ',') c = ' ';
        std::istringstream is(line);
        if (!have_dims) {
            if (!(is >> m.nx >> m.ny >> m.nz >> m.dx_nm >> m.dy_nm >> m.dz_nm))
                fail("bad dimension row");
            const std::size_t sz = static_cast<std::size_t>(m.nx) * m.ny * m.nz;
            m.Ex.assign(sz, 0.0);
            m.Ey.assign(sz, 0.0);
            m.Ez.assign(sz, 0.0);
            m.eps_r.assign(sz, 1.0);
            have_dims = true;
            continue;
        }
        int ix, iy, iz;
        double er, exr, exi, eyr, eyi, ezr, ezi;
        if (!(is >> ix >> iy >> iz >> er >> exr >> exi >> eyr >> eyi >> ezr >> ezi))
            fail("bad sample row");
        if (ix < 0 || ix >= m.nx || iy < 0 || iy >= m.ny || iz < 0 || iz >= m.nz)
            fail("sample index out of range");
        const auto k = m.idx(ix, iy, iz);
        m.eps_r[k] = er;
        m.Ex[k] = {exr, exi};
        m.Ey[k] = {eyr, eyi};
        m.Ez[k] = {ezr, ezi};
    }
    if (!have_dims) throw std::runtime_error(path + ": missing dimension row");
    m.validate();
    return m;
}

} // namespace photonode::purcell
