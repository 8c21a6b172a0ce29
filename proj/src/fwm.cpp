#include "photonode/fwm.hpp"
#include "photonode/constants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace photonode::fwm {

using resonator::resonance_frequency;
using std::complex;
using cplx = std::complex<double>;
static constexpr cplx I{0.0, 1.0};

void PumpConfig::validate() const {
    if (total_power_W < 0) throw std::invalid_argument("pump power must be nonnegative");
    if (split_fraction < 0.0 || split_fraction > 1.0)
        throw std::invalid_argument("split_fraction must lie in [0, 1]");
}

namespace {

// Everything the four coupled equations need, precomputed from the configuration.
struct SystemParams {
    double tR, L;
    double a1, a2, th1, th2, g1, g2;
    cplx E1, E2;
    double dphi_s, dphi_sp, dphi_ip, dphi_im;
    double w_s, w_sp, w_ip, w_im;
    double drive_mag;   // sqrt(theta1 * P_s)
    double Ps;
    double w_b1, w_b2;  // band centres
};

SystemParams assemble(const ResonatorConfig& cfg, const PumpConfig& pumps, const SignalSpec& sig) {
    pumps.validate();
    cfg.validate();
    if (sig.power_W < 0) throw std::invalid_argument("signal power must be nonnegative");
    if (sig.mu < 1) throw std::invalid_argument("signal mu must be >= 1");

    SystemParams p;
    p.tR = cfg.round_trip_time_s();
    p.L = cfg.circumference_m();
    const auto& b1 = cfg.band946;
    const auto& b2 = cfg.band1550;
    p.w_b1 = b1.dispersion.omega0;
    p.w_b2 = b2.dispersion.omega0;
    p.a1 = p.w_b1 * p.tR / (2.0 * b1.Q_L());
    p.a2 = p.w_b2 * p.tR / (2.0 * b2.Q_L());
    p.th1 = resonator::coupling_ratio(cfg, Band::b946);
    p.th2 = resonator::coupling_ratio(cfg, Band::b1550);
    p.g1 = resonator::nonlinear_parameter(cfg, Band::b946);
    p.g2 = resonator::nonlinear_parameter(cfg, Band::b1550);

    auto [E1, E2] = pump_intracavity_fields(cfg, pumps);
    p.E1 = E1;
    p.E2 = E2;
    const double P1c = std::norm(E1), P2c = std::norm(E2);
    const double S = P1c + P2c;
    const double K1 = 2.0 * p.g1 * p.L * S;
    const double K2 = 2.0 * p.g2 * p.L * S;
    // pumps parked on their own SPM+XPM shifted resonances
    const double s1 = -p.g1 * p.L * (P1c + 2.0 * P2c) / p.tR;
    const double s2 = -p.g2 * p.L * (P2c + 2.0 * P1c) / p.tR;
    const double w_p1 = p.w_b1 + s1 + pumps.detuning1_rad_s;
    const double w_p2 = p.w_b2 + s2 + pumps.detuning2_rad_s;

    p.w_s = resonance_frequency(b1.dispersion, sig.mu) + sig.detuning_rad_s;
    p.w_sp = 2.0 * w_p1 - p.w_s;
    p.w_ip = w_p2 + (p.w_s - w_p1);
    p.w_im = w_p2 - (p.w_s - w_p1);
    // nearest grid points carry the Eq.-(3) indices +/-mu
    const double wh_s = resonance_frequency(b1.dispersion, sig.mu);
    const double wh_sp = resonance_frequency(b1.dispersion, -sig.mu);
    const double wh_ip = resonance_frequency(b2.dispersion, sig.mu);
    const double wh_im = resonance_frequency(b2.dispersion, -sig.mu);
    p.dphi_s = (wh_s - p.w_s) * p.tR - K1;
    p.dphi_sp = (wh_sp - p.w_sp) * p.tR - K1;
    p.dphi_ip = (wh_ip - p.w_ip) * p.tR - K2;
    p.dphi_im = (wh_im - p.w_im) * p.tR - K2;
    p.Ps = sig.power_W;
    p.drive_mag = std::sqrt(p.th1 * sig.power_W);
    return p;
}

Eigen::Matrix4cd stacked_matrix(const SystemParams& p) {
    const cplx E1 = p.E1, E2 = p.E2;
    const cplx g1L = p.g1 * p.L, g2L = p.g2 * p.L;
    Eigen::Matrix4cd M;
    M(0, 0) = -(p.a1 + I * p.dphi_s);
    M(0, 1) = I * g1L * E1 * E1;
    M(0, 2) = 2.0 * I * g1L * E1 * std::conj(E2);
    M(0, 3) = 2.0 * I * g1L * E1 * E2;
    M(1, 0) = -I * g1L * std::conj(E1 * E1);
    M(1, 1) = -(p.a1 - I * p.dphi_sp);
    M(1, 2) = -2.0 * I * g1L * std::conj(E1) * std::conj(E2);
    M(1, 3) = -2.0 * I * g1L * std::conj(E1) * E2;
    M(2, 0) = 2.0 * I * g2L * E2 * std::conj(E1);
    M(2, 1) = 2.0 * I * g2L * E2 * E1;
    M(2, 2) = -(p.a2 + I * p.dphi_ip);
    M(2, 3) = I * g2L * E2 * E2;
    M(3, 0) = -2.0 * I * g2L * std::conj(E2) * std::conj(E1);
    M(3, 1) = -2.0 * I * g2L * std::conj(E2) * E1;
    M(3, 2) = -I * g2L * std::conj(E2 * E2);
    M(3, 3) = -(p.a2 - I * p.dphi_im);
    return M;
}

// Right-hand side of the four (un-stacked) equations, times t_R.
struct Fields { cplx s, sp, ip, im; };

Fields rhs(const SystemParams& p, const Fields& f) {
    const cplx E1 = p.E1, E2 = p.E2;
    const double g1L = p.g1 * p.L, g2L = p.g2 * p.L;
    Fields d;
    d.s = -(p.a1 + I * p.dphi_s) * f.s + I * g1L * E1 * E1 * std::conj(f.sp)
        + 2.0 * I * g1L * E1 * (E2 * std::conj(f.im) + std::conj(E2) * f.ip)
        + I * p.drive_mag;
    d.sp = -(p.a1 + I * p.dphi_sp) * f.sp + I * g1L * E1 * E1 * std::conj(f.s)
         + 2.0 * I * g1L * E1 * (E2 * std::conj(f.ip) + std::conj(E2) * f.im);
    d.ip = -(p.a2 + I * p.dphi_ip) * f.ip + I * g2L * E2 * E2 * std::conj(f.im)
         + 2.0 * I * g2L * E2 * (E1 * std::conj(f.sp) + std::conj(E1) * f.s);
    d.im = -(p.a2 + I * p.dphi_im) * f.im + I * g2L * E2 * E2 * std::conj(f.ip)
         + 2.0 * I * g2L * E2 * (E1 * std::conj(f.s) + std::conj(E1) * f.sp);
    return d;
}

double residual_norm(const SystemParams& p, const Fields& f) {
    const Fields r = rhs(p, f);
    return std::sqrt(std::norm(r.s) + std::norm(r.sp) + std::norm(r.ip) + std::norm(r.im));
}

CMEState pack(const SystemParams& p, const Fields& f, const char* method,
              double residual, int iterations, bool converged) {
    CMEState st;
    st.E_s = f.s; st.E_sp = f.sp; st.E_ip = f.ip; st.E_im = f.im;
    st.E_p1 = p.E1; st.E_p2 = p.E2;
    st.dphi_s = p.dphi_s; st.dphi_sp = p.dphi_sp; st.dphi_ip = p.dphi_ip; st.dphi_im = p.dphi_im;
    st.alpha1 = p.a1; st.alpha2 = p.a2; st.theta1 = p.th1; st.theta2 = p.th2;
    st.omega_s = p.w_s; st.omega_sp = p.w_sp; st.omega_ip = p.w_ip; st.omega_im = p.w_im;
    st.signal_power_W = p.Ps;
    st.method = method;
    st.residual = residual;
    st.iterations = iterations;
    st.converged = converged;
    return st;
}

} // namespace

std::pair<cplx, cplx> pump_intracavity_fields(const ResonatorConfig& cfg, const PumpConfig& pumps) {
    pumps.validate();
    const double tR = cfg.round_trip_time_s();
    const double a1 = cfg.band946.dispersion.omega0 * tR / (2.0 * cfg.band946.Q_L());
    const double a2 = cfg.band1550.dispersion.omega0 * tR / (2.0 * cfg.band1550.Q_L());
    const double th1 = resonator::coupling_ratio(cfg, Band::b946);
    const double th2 = resonator::coupling_ratio(cfg, Band::b1550);
    const double d1 = pumps.detuning1_rad_s * tR;
    const double d2 = pumps.detuning2_rad_s * tR;
    const double P1 = th1 * pumps.p1_W() / (a1 * a1 + d1 * d1);
    const double P2 = th2 * pumps.p2_W() / (a2 * a2 + d2 * d2);
    return {cplx(std::sqrt(P1), 0.0), cplx(std::sqrt(P2), 0.0)};
}

CMEState steady_state_linear(const ResonatorConfig& cfg, const PumpConfig& pumps,
                             const SignalSpec& signal) {
    const SystemParams p = assemble(cfg, pumps, signal);
    const Eigen::Matrix4cd M = stacked_matrix(p);
    Eigen::Vector4cd b;
    b << I * p.drive_mag, 0.0, 0.0, 0.0;
    Eigen::PartialPivLU<Eigen::Matrix4cd> lu(M);
    if (std::abs(lu.determinant()) < 1e-300)
        throw std::runtime_error("steady_state_linear: singular coupled-mode system");
    const Eigen::Vector4cd v = lu.solve(-b);
    Fields f{v(0), std::conj(v(1)), v(2), std::conj(v(3))};
    const double res = residual_norm(p, f);
    const double scale = std::max(p.drive_mag, 1e-300);
    if (res > 1e-12 * scale && p.Ps > 0)
        throw std::runtime_error("steady_state_linear: residual " + std::to_string(res / scale) +
                                 " exceeds 1e-12 of the drive");
    return pack(p, f, "linear", res, 1, true);
}

CMEState steady_state_timestep(const ResonatorConfig& cfg, const PumpConfig& pumps,
                               const SignalSpec& signal, double t_max_s, double dt_s) {
    const SystemParams p = assemble(cfg, pumps, signal);
    const double amin = std::min(p.a1, p.a2);
    const double lifetime = p.tR / amin;
    if (dt_s <= 0.0) dt_s = p.tR / 10.0;
    if (dt_s > p.tR / 10.0 + 1e-30)
        throw std::invalid_argument("steady_state_timestep: dt must be <= t_R/10");
    if (t_max_s <= 0.0) t_max_s = 400.0 * lifetime;
    if (t_max_s < 50.0 * lifetime)
        throw std::invalid_argument("steady_state_timestep: t_max must cover >= 50 photon lifetimes");

    Fields f{0, 0, 0, 0};
    auto add = [](const Fields& a, const Fields& b, double w) {
        return Fields{a.s + w * b.s, a.sp + w * b.sp, a.ip + w * b.ip, a.im + w * b.im};
    };
    const int steps_per_check = std::max(1, static_cast<int>(lifetime / dt_s));
    Fields prev = f;
    double t = 0.0;
    int it = 0;
    bool converged = false;
    const double h = dt_s / p.tR;   // equations are written as t_R dE/dt = ...
    while (t < t_max_s) {
        for (int k = 0; k < steps_per_check; ++k) {
            const Fields k1 = rhs(p, f);
            const Fields k2 = rhs(p, add(f, k1, 0.5 * h));
            const Fields k3 = rhs(p, add(f, k2, 0.5 * h));
            const Fields k4 = rhs(p, add(f, k3, h));
            f.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
            f.sp += h / 6.0 * (k1.sp + 2.0 * k2.sp + 2.0 * k3.sp + k4.sp);
            f.ip += h / 6.0 * (k1.ip + 2.0 * k2.ip + 2.0 * k3.ip + k4.ip);
            f.im += h / 6.0 * (k1.im + 2.0 * k2.im + 2.0 * k3.im + k4.im);
            ++it;
        }
        t += steps_per_check * dt_s;
        const double num = std::sqrt(std::norm(f.s - prev.s) + std::norm(f.sp - prev.sp) +
                                     std::norm(f.ip - prev.ip) + std::norm(f.im - prev.im));
        const double den = std::sqrt(std::norm(f.s) + std::norm(f.sp) + std::norm(f.ip) + std::norm(f.im));
        if (den == 0.0 ? num == 0.0 : num / den < 1e-10) {
            converged = true;
            break;
        }
        prev = f;
    }
    const double res = residual_norm(p, f);
    if (!converged) {
        std::ostringstream os;
        os << "steady_state_timestep: no convergence within t_max = " << t_max_s
           << " s (final residual " << res << ")";
        throw std::runtime_error(os.str());
    }
    CMEState st = pack(p, f, "rk4", res, it, true);
    return st;
}

double conversion_efficiency(const CMEState& st, const ResonatorConfig& cfg, OutputMode mode) {
    if (!st.converged)
        throw std::invalid_argument("conversion_efficiency requires a converged state");
    (void)cfg;
    if (st.signal_power_W <= 0.0) {
        return mode == OutputMode::s_transmitted ? 1.0 : 0.0;
    }
    const double Ps = st.signal_power_W;
    switch (mode) {
        case OutputMode::i_plus:
            return st.theta2 * std::norm(st.E_ip) / Ps * (st.omega_s / st.omega_ip);
        case OutputMode::i_minus:
            return st.theta2 * std::norm(st.E_im) / Ps * (st.omega_s / st.omega_im);
        case OutputMode::s_prime:
            return st.theta1 * std::norm(st.E_sp) / Ps * (st.omega_s / st.omega_sp);
        case OutputMode::s_transmitted: {
            const cplx out = std::sqrt(Ps) + I * std::sqrt(st.theta1) * st.E_s;
            return std::norm(out) / Ps;
        }
    }
    throw std::logic_error("unreachable");
}

double delivered_photon_flux(const CMEState& st, const ResonatorConfig& cfg) {
    // band-centre weighting, matching dissipated_photon_flux
    const double w1 = cfg.band946.dispersion.omega0;
    return 2.0 * std::sqrt(st.theta1 * st.signal_power_W) * st.E_s.imag() / (hbar * w1);
}

double dissipated_photon_flux(const CMEState& st, const ResonatorConfig& cfg) {
    // Manley-Rowe current: s and i+ count positive, s' and i- negative; weights are the
    // band-centre frequencies, matching the band-constant gamma of the equations.
    const double w1 = cfg.band946.dispersion.omega0;
    const double w2 = cfg.band1550.dispersion.omega0;
    const double d1 = 2.0 * st.alpha1 * (std::norm(st.E_s) - std::norm(st.E_sp)) / (hbar * w1);
    const double d2 = 2.0 * st.alpha2 * (std::norm(st.E_ip) - std::norm(st.E_im)) / (hbar * w2);
    return d1 + d2;
}

double detuning_norm_to_rad_s(const ResonatorConfig& cfg, int mu, double x) {
    (void)mu;
    const double a1 = cfg.band946.dispersion.omega0 * cfg.round_trip_time_s() /
                      (2.0 * cfg.band946.Q_L());
    return -x * 2.0 * a1 / cfg.round_trip_time_s();
}

namespace {

double eta_at(const ResonatorConfig& cfg, const PumpConfig& pumps, int mu, double x,
              OutputMode branch) {
    SignalSpec sig;
    sig.mu = mu;
    sig.power_W = 1e-6;
    sig.detuning_rad_s = detuning_norm_to_rad_s(cfg, mu, x);
    const CMEState st = steady_state_linear(cfg, pumps, sig);
    return conversion_efficiency(st, cfg, branch);
}

double kerr_peak_guess(const ResonatorConfig& cfg, const PumpConfig& pumps) {
    auto [E1, E2] = pump_intracavity_fields(cfg, pumps);
    const double S = std::norm(E1) + std::norm(E2);
    const double g1 = resonator::nonlinear_parameter(cfg, Band::b946);
    const double K1 = 2.0 * g1 * cfg.circumference_m() * S;
    const double a1 = cfg.band946.dispersion.omega0 * cfg.round_trip_time_s() /
                      (2.0 * cfg.band946.Q_L());
    return K1 / (2.0 * a1);
}

} // namespace

std::pair<double, double> optimize_signal_detuning(const ResonatorConfig& cfg,
                                                   const PumpConfig& pumps, int mu,
                                                   OutputMode branch) {
    // coarse grid of 201 points across +/-2 linewidths around the Kerr-shifted resonance
    // (union with the cold resonance), then golden-section refinement
    const double xk = kerr_peak_guess(cfg, pumps);
    const double lo = std::min(0.0, xk) - 2.0;
    const double hi = std::max(0.0, xk) + 2.0;
    const int npts = 201;
    int best = 0;
    double best_eta = -1.0;
    std::vector<double> xs(npts);
    for (int i = 0; i < npts; ++i) {
        xs[i] = lo + (hi - lo) * i / (npts - 1);
        const double e = eta_at(cfg, pumps, mu, xs[i], branch);
        if (e > best_eta) { best_eta = e; best = i; }
    }
    double a = xs[std::max(0, best - 1)];
    double b = xs[std::min(npts - 1, best + 1)];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    for (int k = 0; k < 80; ++k) {
        if (eta_at(cfg, pumps, mu, c, branch) > eta_at(cfg, pumps, mu, d, branch))
            b = d;
        else
            a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    const double xp = 0.5 * (a + b);
    return {xp, eta_at(cfg, pumps, mu, xp, branch)};
}

DetuningSweepResult sweep_signal_detuning(const ResonatorConfig& cfg,
                                          const std::vector<double>& pump_powers_W,
                                          int mu, const std::vector<double>& detuning_grid,
                                          double split_fraction) {
    if (pump_powers_W.empty())
        throw std::invalid_argument("sweep_signal_detuning: empty pump power list");
    if (detuning_grid.empty())
        throw std::invalid_argument("sweep_signal_detuning: empty detuning grid");
    DetuningSweepResult out;
    for (const double P : pump_powers_W) {
        PumpConfig pumps;
        pumps.total_power_W = P;
        pumps.split_fraction = split_fraction;
        for (const double x : detuning_grid) {
            const double eta = P > 0 ? eta_at(cfg, pumps, mu, x, OutputMode::i_plus) : 0.0;
            out.rows.push_back({P * 1e3, x, eta});
        }
        if (P > 0) {
            auto [xp, ep] = optimize_signal_detuning(cfg, pumps, mu);
            out.peaks.push_back({P * 1e3, xp, ep});
        } else {
            out.peaks.push_back({0.0, 0.0, 0.0});
        }
    }
    return out;
}

std::vector<MuSweepRow> sweep_mu(const ResonatorConfig& cfg, double pump_power_W,
                                 int mu_min, int mu_max, double split_fraction) {
    if (mu_min < 1 || mu_max < mu_min)
        throw std::invalid_argument("sweep_mu: need 1 <= mu_min <= mu_max");
    PumpConfig pumps;
    pumps.total_power_W = pump_power_W;
    pumps.split_fraction = split_fraction;
    std::vector<MuSweepRow> rows;
    for (int mu = mu_min; mu <= mu_max; ++mu) {
        auto [xp, ep] = optimize_signal_detuning(cfg, pumps, mu, OutputMode::i_plus);
        auto [xm, em] = optimize_signal_detuning(cfg, pumps, mu, OutputMode::i_minus);
        SignalSpec sp; sp.mu = mu; sp.detuning_rad_s = detuning_norm_to_rad_s(cfg, mu, xp);
        const CMEState stp = steady_state_linear(cfg, pumps, sp);
        SignalSpec sm; sm.mu = mu; sm.detuning_rad_s = detuning_norm_to_rad_s(cfg, mu, xm);
        const CMEState stm = steady_state_linear(cfg, pumps, sm);
        rows.push_back({mu,
                        2.0 * pi * c0 / stp.omega_ip * 1e9, ep,
                        2.0 * pi * c0 / stm.omega_im * 1e9, em});
    }
    return rows;
}

namespace {

bool stacked_system_stable(const ResonatorConfig& cfg, const PumpConfig& pumps,
                           const SignalSpec& sig) {
    const SystemParams p = assemble(cfg, pumps, sig);
    const Eigen::Matrix4cd M = stacked_matrix(p);
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(M, false);
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()(i).real() >= 0.0) return false;
    return true;
}

} // namespace

QPowerResult sweep_q_power(const ResonatorConfig& cfg, const std::vector<double>& powers_W,
                           const std::vector<double>& q_loaded) {
    QPowerResult out;
    for (const double P : powers_W) {
        double prev_q = 0.0, prev_eta = -1.0;
        bool contour_found = false;
        for (const double QL : q_loaded) {
            ResonatorConfig crit = cfg;
            // critical coupling: effective Q_C = Q_i = 2 Q_L in both bands
            crit.band946.Q_i = 2.0 * QL;
            crit.band946.Q_C1 = 2.0 * QL;
            crit.band946.Q_C2 = 1e18;
            crit.band1550.Q_i = 2.0 * QL;
            crit.band1550.Q_C1 = 1e18;
            crit.band1550.Q_C2 = 2.0 * QL;
            PumpConfig pumps;
            pumps.total_power_W = P;
            auto [xp, eta] = optimize_signal_detuning(crit, pumps, 1);
            SignalSpec sig;
            sig.mu = 1;
            sig.detuning_rad_s = detuning_norm_to_rad_s(crit, 1, xp);
            const bool stable = stacked_system_stable(crit, pumps, sig);
            const bool above = !stable || eta > 1.0 + 1e-9;
            out.cells.push_back({P * 1e3, QL, eta, above});
            if (!contour_found && eta >= 0.97 && prev_eta >= 0.0) {
                const double t = (0.97 - prev_eta) / (eta - prev_eta);
                const double qc = prev_q > 0
                                      ? std::exp(std::log(prev_q) + t * (std::log(QL) - std::log(prev_q)))
                                      : QL;
                out.unity_contour.push_back({P * 1e3, qc});
                contour_found = true;
            }
            if (!contour_found && eta >= 0.97 && prev_eta < 0.0) {
                out.unity_contour.push_back({P * 1e3, QL});
                contour_found = true;
            }
            prev_q = QL;
            prev_eta = eta;
        }
    }
    return out;
}

} // namespace photonode::fwm
