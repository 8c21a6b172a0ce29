#include "photonode/resonator.hpp"
#include "photonode/constants.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace photonode::resonator {

double BandParams::Q_C() const { return combine_coupling_q(Q_C1, Q_C2); }

double BandParams::Q_L() const {
    if (Q_i <= 0.0) throw std::invalid_argument("Q_i must be positive");
    return 1.0 / (1.0 / Q_i + 1.0 / Q_C());
}

double ResonatorConfig::circumference_m() const { return 2.0 * pi * radius_um * 1e-6; }

double ResonatorConfig::round_trip_time_s() const { return 2.0 * pi / band946.dispersion.D1; }

void ResonatorConfig::validate() const {
    for (const Band b : {Band::b946, Band::b1550}) {
        const auto& p = band(b);
        if (p.Q_i <= 0 || p.Q_C1 <= 0 || p.Q_C2 <= 0)
            throw std::invalid_argument("quality factors must be positive");
        if (p.dispersion.D1 <= 0)
            throw std::invalid_argument("D1 must be positive");
        if (p.n2_m2_per_W <= 0 || p.A_eff_um2 <= 0)
            throw std::invalid_argument("n2 and A_eff must be positive");
    }
    const double t1 = 2.0 * pi / band946.dispersion.D1;
    const double t2 = 2.0 * pi / band1550.dispersion.D1;
    if (std::abs(t1 - t2) > 0.01 * t1) {
        std::ostringstream os;
        os << "round-trip time from the two bands disagrees by more than 1% (" << t1 << " s vs "
           << t2 << " s); check the D1 entries";
        throw std::invalid_argument(os.str());
    }
    if (radius_um <= 0) throw std::invalid_argument("radius must be positive");
}

double resonance_frequency(const DispersionModel& m, int mu) {
    if (std::abs(mu) > 50) {
        static bool warned = false;
        if (!warned) {
            std::cerr << "warning: |mu| = " << std::abs(mu)
                      << " exceeds the cubic expansion validity window (|mu| <= 50)\n";
            warned = true;
        }
    }
    const double x = static_cast<double>(mu);
    return m.omega0 + m.D1 * x + 0.5 * m.D2 * x * x + m.D3 * x * x * x / 6.0;
}

double idler_detuning(const DispersionModel& m946, const DispersionModel& m1550,
                      int mu, IdlerBranch branch) {
    if (mu < 1) throw std::invalid_argument("idler_detuning requires mu >= 1");
    const double s = branch == IdlerBranch::plus ? 1.0 : -1.0;
    const double x = static_cast<double>(mu);
    return s * (m1550.D1 - m946.D1) * x
         + 0.5 * (m1550.D2 - s * m946.D2) * x * x
         + s * (m1550.D3 - m946.D3) * x * x * x / 6.0;
}

double combine_coupling_q(double q1, double q2) {
    if (q1 <= 0 || q2 <= 0) throw std::invalid_argument("coupling Q must be positive");
    return 1.0 / (1.0 / q1 + 1.0 / q2);
}

double round_trip_loss(const ResonatorConfig& cfg, Band band, int resonance_index) {
    const auto& p = cfg.band(band);
    const double omega = resonance_frequency(p.dispersion, resonance_index);
    return omega * cfg.round_trip_time_s() / (2.0 * p.Q_L());
}

double coupling_ratio(const ResonatorConfig& cfg, Band band, int coupler) {
    const auto& p = cfg.band(band);
    double qc;
    switch (coupler) {
        case 1: qc = p.Q_C1; break;
        case 2: qc = p.Q_C2; break;
        default: throw std::invalid_argument("coupler must be 1 or 2");
    }
    if (qc <= 0) throw std::invalid_argument("coupling Q must be positive");
    return p.dispersion.omega0 * cfg.round_trip_time_s() / qc;
}

double coupling_ratio(const ResonatorConfig& cfg, Band band) {
    const auto& p = cfg.band(band);
    return p.dispersion.omega0 * cfg.round_trip_time_s() / p.Q_C();
}

double nonlinear_parameter(double n2_m2_per_W, double omega_rad_s, double A_eff_um2) {
    if (A_eff_um2 <= 0) throw std::invalid_argument("A_eff must be positive");
    return n2_m2_per_W * omega_rad_s / (c0 * A_eff_um2 * 1e-12);
}

double nonlinear_parameter(const ResonatorConfig& cfg, Band band) {
    const auto& p = cfg.band(band);
    return nonlinear_parameter(p.n2_m2_per_W, p.dispersion.omega0, p.A_eff_um2);
}

int nearest_resonance_index(const DispersionModel& m, double omega_rad_s) {
    int mu = static_cast<int>(std::lround((omega_rad_s - m.omega0) / m.D1));
    double best = std::abs(resonance_frequency(m, mu) - omega_rad_s);
    for (int trial : {mu - 1, mu + 1}) {
        const double d = std::abs(resonance_frequency(m, trial) - omega_rad_s);
        if (d < best) { best = d; mu = trial; }
    }
    return mu;
}

double kerr_shifted_detuning(const ResonatorConfig& cfg, Band band, double laser_omega_rad_s,
                             double pump1_circ_W, double pump2_circ_W) {
    if (pump1_circ_W < 0 || pump2_circ_W < 0)
        throw std::invalid_argument("intracavity pump powers must be nonnegative");
    const auto& p = cfg.band(band);
    const int mu = nearest_resonance_index(p.dispersion, laser_omega_rad_s);
    const double omega_hat = resonance_frequency(p.dispersion, mu);
    const double tR = cfg.round_trip_time_s();
    const double gamma = nonlinear_parameter(cfg, band);
    return (omega_hat - laser_omega_rad_s) * tR
         - 2.0 * gamma * cfg.circumference_m() * (pump1_circ_W + pump2_circ_W);
}

DispersionModel fit_dispersion_model(const std::vector<ScanPoint>& scan,
                                     double radius_um, double center_wavelength_nm) {
    if (scan.size() < 5)
        throw std::invalid_argument("fit_dispersion_model needs at least 5 scan points");
    const double R = radius_um * 1e-6;
    const size_t n = scan.size();
    std::vector<double> beta(n), omega(n);
    for (size_t i = 0; i < n; ++i) {
        const double lam = scan[i].lambda_nm * 1e-9;
        beta[i] = 2.0 * pi * scan[i].n_eff / lam;
        omega[i] = 2.0 * pi * c0 / lam;
    }
    // beta must be strictly monotone in lambda
    const bool decreasing = beta[1] < beta[0];
    for (size_t i = 1; i < n; ++i) {
        if ((beta[i] < beta[i - 1]) != decreasing || beta[i] == beta[i - 1])
            throw std::runtime_error("fit_dispersion_model: beta(lambda) is not strictly monotone");
    }
    const double lam_c = center_wavelength_nm * 1e-9;
    if (scan.front().lambda_nm > center_wavelength_nm || scan.back().lambda_nm < center_wavelength_nm)
        throw std::invalid_argument("scan does not bracket the centre wavelength");

    // Least-squares polynomial omega(beta) of degree <= 5 around the centre, in scaled variables.
    const int deg = static_cast<int>(std::min<size_t>(5, n - 1));
    // interpolate beta at the centre wavelength (linear on the scan) for scaling / m0
    double beta_c = 0.0;
    for (size_t i = 1; i < n; ++i) {
        const double l0 = scan[i - 1].lambda_nm, l1 = scan[i].lambda_nm;
        if (center_wavelength_nm >= std::min(l0, l1) && center_wavelength_nm <= std::max(l0, l1)) {
            const double t = (center_wavelength_nm - l0) / (l1 - l0);
            beta_c = beta[i - 1] + t * (beta[i] - beta[i - 1]);
            break;
        }
    }
    const double bscale = std::abs(beta.back() - beta.front()) / 2.0;
    const double wscale = std::abs(omega.back() - omega.front()) / 2.0;
    Eigen::MatrixXd A(n, deg + 1);
    Eigen::VectorXd rhs(n);
    for (size_t i = 0; i < n; ++i) {
        const double x = (beta[i] - beta_c) / bscale;
        double p = 1.0;
        for (int j = 0; j <= deg; ++j) { A(i, j) = p; p *= x; }
        rhs(i) = (omega[i] - 2.0 * pi * c0 / lam_c) / wscale;
    }
    Eigen::VectorXd coef = A.householderQr().solve(rhs);

    auto eval = [&](double b, int order) {
        const double x = (b - beta_c) / bscale;
        double v = 0.0;
        for (int j = deg; j >= order; --j) {
            double f = 1.0;
            for (int k = 0; k < order; ++k) f *= (j - k);
            v = v * x + coef(j) * f;
        }
        return v * wscale / std::pow(bscale, order);
    };

    // integer angular mode number and the grid point nearest the centre
    const long m0 = std::lround(beta_c * R);
    // solve beta*R = m0 with Newton on the fitted omega(beta) -- equivalently on beta directly
    double b0 = static_cast<double>(m0) / R;
    const double omega_c = 2.0 * pi * c0 / lam_c;
    DispersionModel model;
    model.omega0 = omega_c + eval(b0, 0);
    model.D1 = eval(b0, 1) / R;
    model.D2 = eval(b0, 2) / (R * R);
    model.D3 = eval(b0, 3) / (R * R * R);
    if (model.D1 <= 0)
        throw std::runtime_error("fit_dispersion_model: fitted D1 is not positive");
    return model;
}

ResonatorConfig table1_config() {
    ResonatorConfig cfg;
    cfg.radius_um = 25.0;
    const double twoPi = 2.0 * pi;
    cfg.band946.dispersion = {twoPi * c0 / 946.6e-9, twoPi * 531e9, twoPi * -122e6, twoPi * -0.964e6};
    cfg.band946.Q_i = 7.5e4;
    cfg.band946.Q_C1 = 7.64e4;     // 380x300 point coupler
    cfg.band946.Q_C2 = 3.52e8;     // 946 nm leakage through the telecom coupler
    cfg.band946.n2_m2_per_W = 0.85e-17;
    cfg.band946.A_eff_um2 = 0.196;
    cfg.band1550.dispersion = {twoPi * c0 / 1547.8e-9, twoPi * 531e9, twoPi * -44.2e6, twoPi * 13.1e6};
    cfg.band1550.Q_i = 7.5e4;
    cfg.band1550.Q_C1 = 2.70e7;    // telecom leakage through the 946 nm coupler
    cfg.band1550.Q_C2 = 7.71e4;    // 640x500 point coupler
    cfg.band1550.n2_m2_per_W = 1.1e-17;
    cfg.band1550.A_eff_um2 = 0.292;
    return cfg;
}

} // namespace photonode::resonator
