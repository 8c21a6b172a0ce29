#include "photonode/modesolver.hpp"
#include "photonode/constants.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace photonode::modesolver {

using materials::refractive_index;

namespace {

// ---------------------------------------------------------------------------
// geometry sampling

struct Grid {
    int Ny, Nz;          // cell counts
    double h_m;          // spacing in metres
    double y0_nm, z0_nm; // node (0,0)
    double w_y, w_z;     // core in nm
    double eps_core, eps_sub, eps_clad;
};

double overlap1(double lo, double hi, double a, double b) {
    const double v = std::min(hi, b) - std::max(lo, a);
    return v > 0.0 ? v / (hi - lo) : 0.0;
}

// area-averaged permittivity of the h x h cell centred at (y, z), nm coordinates
double eps_cell(const Grid& g, double y, double z) {
    const double h = g.h_m * 1e9;
    const double fy = overlap1(y - h / 2, y + h / 2, -g.w_y / 2, g.w_y / 2);
    const double fzc = overlap1(z - h / 2, z + h / 2, 0.0, g.w_z);
    const double fzs = overlap1(z - h / 2, z + h / 2, -1e12, 0.0);
    const double a_core = fy * fzc;
    const double a_sub = fzs;
    const double a_clad = 1.0 - a_core - a_sub;
    return a_core * g.eps_core + a_sub * g.eps_sub + a_clad * g.eps_clad;
}

Grid make_grid(const CrossSection& xs, double wavelength_nm) {
    xs.validate(wavelength_nm);
    Grid g;
    const double h = xs.grid_nm;
    const double wy_win = xs.window_y_nm > 0 ? xs.window_y_nm : xs.w_y_nm + 2.0 * xs.margin_nm;
    const double margin_z = xs.window_z_nm > 0 ? (xs.window_z_nm - xs.w_z_nm) / 2.0 : xs.margin_nm;
    g.Ny = std::max(4, static_cast<int>(std::lround(wy_win / h)));
    const int nz_bottom = std::max(2, static_cast<int>(std::lround(margin_z / h)));
    g.Nz = nz_bottom + std::max(2, static_cast<int>(std::lround((xs.w_z_nm + margin_z) / h)));
    g.h_m = h * 1e-9;
    g.y0_nm = -g.Ny * h / 2.0;
    g.z0_nm = -nz_bottom * h;
    g.w_y = xs.w_y_nm;
    g.w_z = xs.w_z_nm;
    const double nc = refractive_index(xs.core, wavelength_nm);
    const double ns = refractive_index(xs.substrate, wavelength_nm);
    const double na = refractive_index(xs.cladding, wavelength_nm);
    g.eps_core = nc * nc;
    g.eps_sub = ns * ns;
    g.eps_clad = na * na;
    return g;
}

// ---------------------------------------------------------------------------
// full-vector operator on the staggered grid, transverse H = (H_y, H_z)
//
// beta^2 H_y = k0^2 eps H_y + dy(S) - eps dz(eps^-1 C)
// beta^2 H_z = k0^2 eps H_z + dz(S) + eps dy(eps^-1 C)
// with S = dy H_y + dz H_z (at cell centres) and C = dy H_z - dz H_y (at nodes),
// derived from curl(eps^-1 curl H) = k0^2 H with div H = 0. Dirichlet walls.

struct Assembled {
    Eigen::SparseMatrix<double> A;
    int Ny, Nz, nHy, nHz;
    std::vector<double> eps_hy, eps_hz, eps_node;
    double k0;
};

Assembled assemble(const Grid& g, double wavelength_nm) {
    Assembled as;
    const int Ny = g.Ny, Nz = g.Nz;
    as.Ny = Ny;
    as.Nz = Nz;
    as.nHy = (Ny - 1) * Nz;
    as.nHz = Ny * (Nz - 1);
    as.k0 = 2.0 * pi / (wavelength_nm * 1e-9);
    const double h_nm = g.h_m * 1e9;
    auto ynode = [&](int i) { return g.y0_nm + i * h_nm; };
    auto znode = [&](int j) { return g.z0_nm + j * h_nm; };

    as.eps_node.resize((Ny + 1) * (Nz + 1));
    for (int i = 0; i <= Ny; ++i)
        for (int j = 0; j <= Nz; ++j)
            as.eps_node[i * (Nz + 1) + j] = eps_cell(g, ynode(i), znode(j));
    as.eps_hy.resize(as.nHy);
    for (int i = 1; i < Ny; ++i)
        for (int j = 0; j < Nz; ++j)
            as.eps_hy[(i - 1) * Nz + j] = eps_cell(g, ynode(i), znode(j) + h_nm / 2);
    as.eps_hz.resize(as.nHz);
    for (int i = 0; i < Ny; ++i)
        for (int j = 1; j < Nz; ++j)
            as.eps_hz[i * (Nz - 1) + (j - 1)] = eps_cell(g, ynode(i) + h_nm / 2, znode(j));

    const int N = as.nHy + as.nHz;
    const double inv = 1.0 / g.h_m;
    auto iHy = [&](int i, int j) { return (i - 1) * Nz + j; };
    auto iHz = [&](int i, int j) { return as.nHy + i * (Nz - 1) + (j - 1); };
    auto Hy = [&](int i, int j) { return (1 <= i && i <= Ny - 1 && 0 <= j && j <= Nz - 1) ? iHy(i, j) : -1; };
    auto Hz = [&](int i, int j) { return (0 <= i && i <= Ny - 1 && 1 <= j && j <= Nz - 1) ? iHz(i, j) : -1; };
    auto eps_n = [&](int i, int j) { return as.eps_node[i * (Nz + 1) + j]; };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(N) * 14);
    auto add = [&](int r, int c, double v) { if (c >= 0) trip.emplace_back(r, c, v); };

    for (int i = 1; i < Ny; ++i) {
        for (int j = 0; j < Nz; ++j) {
            const int p = iHy(i, j);
            add(p, p, as.k0 * as.k0 * as.eps_hy[(i - 1) * Nz + j]);
            // dy S, S at (ii+1/2, j+1/2)
            for (const auto& [sgn, ii] : {std::pair{+1, i}, std::pair{-1, i - 1}}) {
                const double c = sgn * inv * inv;
                add(p, Hy(ii + 1, j), c);
                add(p, Hy(ii, j), -c);
                add(p, Hz(ii, j + 1), c);
                add(p, Hz(ii, j), -c);
            }
            // -eps * dz(eps^-1 C), C at node (i, jj)
            const double e_loc = as.eps_hy[(i - 1) * Nz + j];
            for (const auto& [sgn, jj] : {std::pair{+1, j + 1}, std::pair{-1, j}}) {
                const double c = -e_loc * inv * inv * sgn / eps_n(i, jj);
                add(p, Hz(i, jj), c);
                add(p, Hz(i - 1, jj), -c);
                add(p, Hy(i, jj), -c);
                add(p, Hy(i, jj - 1), c);
            }
        }
    }
    for (int i = 0; i < Ny; ++i) {
        for (int j = 1; j < Nz; ++j) {
            const int p = iHz(i, j);
            add(p, p, as.k0 * as.k0 * as.eps_hz[i * (Nz - 1) + (j - 1)]);
            // dz S, S at (i+1/2, jj+1/2)
            for (const auto& [sgn, jj] : {std::pair{+1, j}, std::pair{-1, j - 1}}) {
                const double c = sgn * inv * inv;
                add(p, Hy(i + 1, jj), c);
                add(p, Hy(i, jj), -c);
                add(p, Hz(i, jj + 1), c);
                add(p, Hz(i, jj), -c);
            }
            // +eps * dy(eps^-1 C), C at node (ii, j)
            const double e_loc = as.eps_hz[i * (Nz - 1) + (j - 1)];
            for (const auto& [sgn, ii] : {std::pair{+1, i + 1}, std::pair{-1, i}}) {
                const double c = e_loc * inv * inv * sgn / eps_n(ii, j);
                add(p, Hz(ii, j), c);
                add(p, Hz(ii - 1, j), -c);
                add(p, Hy(ii, j), -c);
                add(p, Hy(ii, j - 1), c);
            }
        }
    }
    as.A.resize(N, N);
    as.A.setFromTriplets(trip.begin(), trip.end());
    return as;
}

// ---------------------------------------------------------------------------
// shift-invert subspace iteration

struct RitzPair {
    double value;               // beta^2
    Eigen::VectorXd vec;
    double residual;
    bool te;                    // H_z-dominant (E_y-dominant mode)
};

std::vector<RitzPair> eigensolve(const Assembled& as, double sigma, int n_wanted,
                                 const Eigen::VectorXd* warm, int* iterations_out) {
    const int N = as.A.rows();
    Eigen::SparseMatrix<double> B = as.A;
    for (int k = 0; k < N; ++k) B.coeffRef(k, k) -= sigma;
    B.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(B);
    lu.factorize(B);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("mode solver: sparse factorization failed");

    const int m = warm ? 4 : 6;
    Eigen::MatrixXd V(N, m);
    // deterministic start block: constants, component split, and odd patterns
    for (int k = 0; k < N; ++k) {
        const bool hy = k < as.nHy;
        const int i = hy ? k / as.Nz + 1 : (k - as.nHy) / (as.Nz - 1);
        const int j = hy ? k % as.Nz : (k - as.nHy) % (as.Nz - 1) + 1;
        const double yc = i - 0.5 * as.Ny;
        V(k, 0) = 1.0;
        V(k, 1) = hy ? 1.0 : -1.0;
        V(k, 2) = yc;
        V(k, 3) = (j % 2 == 0) ? 1.0 : -1.0;
        if (m > 4) {
            V(k, 4) = yc * (hy ? -1.0 : 1.0);
            V(k, 5) = ((i + j) % 3) - 1.0;
        }
    }
    if (warm) V.col(0) = *warm;

    std::vector<RitzPair> out;
    const double tol = 1e-10;
    const int check_every = 4;
    int it = 0;
    for (; it < 400; ++it) {
        Eigen::MatrixXd W(N, m);
        for (int c = 0; c < m; ++c) W.col(c) = lu.solve(V.col(c));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
        V = qr.householderQ() * Eigen::MatrixXd::Identity(N, m);
        if ((it + 1) % check_every != 0 && it != 0) continue;
        // Rayleigh-Ritz on the original operator
        const Eigen::MatrixXd AV = as.A * V;
        const Eigen::MatrixXd G = V.transpose() * AV;
        Eigen::EigenSolver<Eigen::MatrixXd> es(G);
        std::vector<int> order(m);
        for (int k = 0; k < m; ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
        });
        out.clear();
        bool ok = true;
        const int top = std::min(n_wanted, m - 1);
        for (int t = 0; t < top; ++t) {
            const int k = order[t];
            const double lam = es.eigenvalues()(k).real();
            Eigen::VectorXd x = V * es.eigenvectors().col(k).real();
            const double xn = x.norm();
            if (xn < 1e-14) { ok = false; break; }
            x /= xn;
            const double res = (as.A * x - lam * x).norm() / std::max(std::abs(lam), 1.0);
            double hz2 = x.tail(as.nHz).squaredNorm();
            double hy2 = x.head(as.nHy).squaredNorm();
            out.push_back({lam, std::move(x), res, hz2 >= hy2});
            if (res > tol) ok = false;
        }
        if (ok && !out.empty()) break;
    }
    if (iterations_out) *iterations_out = it + 1;
    if (out.empty() || out.front().residual > 1e-8) {
        std::ostringstream os;
        os << "mode solver: subspace iteration did not converge after " << it
           << " iterations (best residual "
           << (out.empty() ? 1.0 : out.front().residual) << ")";
        throw std::runtime_error(os.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// field reconstruction on nodes

void reconstruct(const Assembled& as, const Grid& g, const Eigen::VectorXd& x, double beta,
                 ModeSolution& sol) {
    const int Ny = as.Ny, Nz = as.Nz;
    const double h = g.h_m;
    // padded component grids
    Eigen::MatrixXd HY = Eigen::MatrixXd::Zero(Ny + 1, Nz);      // (node i, half j)
    Eigen::MatrixXd HZ = Eigen::MatrixXd::Zero(Ny, Nz + 1);      // (half i, node j)
    for (int i = 1; i < Ny; ++i)
        for (int j = 0; j < Nz; ++j) HY(i, j) = x((i - 1) * Nz + j);
    for (int i = 0; i < Ny; ++i)
        for (int j = 1; j < Nz; ++j) HZ(i, j) = x(as.nHy + i * (Nz - 1) + (j - 1));

    Eigen::MatrixXd S(Ny, Nz);   // cell centres
    for (int i = 0; i < Ny; ++i)
        for (int j = 0; j < Nz; ++j)
            S(i, j) = (HY(i + 1, j) - HY(i, j)) / h + (HZ(i, j + 1) - HZ(i, j)) / h;

    auto eps_n = [&](int i, int j) { return as.eps_node[i * (Nz + 1) + j]; };

    sol.ny = Ny + 1;
    sol.nz = Nz + 1;
    sol.E_x.assign(static_cast<std::size_t>(sol.ny) * sol.nz, 0.0);
    sol.E_y.assign(sol.E_x.size(), 0.0);
    sol.E_z.assign(sol.E_x.size(), 0.0);
    sol.eps.assign(sol.E_x.size(), 1.0);
    for (int i = 0; i <= Ny; ++i)
        for (int j = 0; j <= Nz; ++j) sol.eps[sol.idx(i, j)] = eps_n(i, j);

    // E_y at H_z points: (beta Hz - dzS/beta)/eps ; E_z at H_y points: (dyS/beta - beta Hy)/eps
    Eigen::MatrixXd EyH = Eigen::MatrixXd::Zero(Ny, Nz + 1);
    for (int i = 0; i < Ny; ++i)
        for (int j = 1; j < Nz; ++j)
            EyH(i, j) = (beta * HZ(i, j) - (S(i, j) - S(i, j - 1)) / h / beta) /
                        as.eps_hz[i * (Nz - 1) + (j - 1)];
    Eigen::MatrixXd EzH = Eigen::MatrixXd::Zero(Ny + 1, Nz);
    for (int i = 1; i < Ny; ++i)
        for (int j = 0; j < Nz; ++j)
            EzH(i, j) = ((S(i, j) - S(i - 1, j)) / h / beta - beta * HY(i, j)) /
                        as.eps_hy[(i - 1) * Nz + j];
    for (int i = 1; i < Ny; ++i) {
        for (int j = 1; j < Nz; ++j) {
            const double dyHz = (HZ(i, j) - HZ(i - 1, j)) / h;
            const double dzHy = (HY(i, j) - HY(i, j - 1)) / h;
            sol.E_x[sol.idx(i, j)] = (dyHz - dzHy) / eps_n(i, j);
            sol.E_y[sol.idx(i, j)] = 0.5 * (EyH(i, j) + EyH(i - 1, j));
            sol.E_z[sol.idx(i, j)] = 0.5 * (EzH(i, j) + EzH(i, j - 1));
        }
    }

    double ey2 = 0, tot2 = 0, emax2 = 0, edge2 = 0;
    for (int i = 0; i <= Ny; ++i) {
        for (int j = 0; j <= Nz; ++j) {
            const auto k = sol.idx(i, j);
            const double e2 = sol.E_x[k] * sol.E_x[k] + sol.E_y[k] * sol.E_y[k] + sol.E_z[k] * sol.E_z[k];
            ey2 += sol.eps[k] * sol.E_y[k] * sol.E_y[k];
            tot2 += sol.eps[k] * e2;
            emax2 = std::max(emax2, e2);
            if (i == 1 || i == Ny - 1 || j == 1 || j == Nz - 1) edge2 = std::max(edge2, e2);
        }
    }
    sol.e_y_energy_fraction = tot2 > 0 ? ey2 / tot2 : 0.0;
    sol.boundary_leakage = emax2 > 0 ? std::sqrt(edge2 / emax2) : 0.0;
}

struct SolveResult {
    ModeSolution sol;
    Eigen::VectorXd vec;
};

SolveResult solve_impl(const CrossSection& xs, double wavelength_nm, Polarization pol,
                       const Eigen::VectorXd* warm) {
    const Grid g = make_grid(xs, wavelength_nm);
    const Assembled as = assemble(g, wavelength_nm);
    const double n_core = std::sqrt(g.eps_core);
    const double n_sub = std::sqrt(std::max(g.eps_sub, g.eps_clad));
    const double n_max = std::max(n_core, n_sub);
    const double sigma = as.k0 * as.k0 * n_max * n_max;
    int iters = 0;
    const auto ritz = eigensolve(as, sigma, 3, warm, &iters);

    const bool want_te = pol == Polarization::TE;
    const RitzPair* pick = nullptr;
    for (const auto& r : ritz) {
        if (r.value > 0 && r.te == want_te) { pick = &r; break; }
    }
    if (!pick)
        throw std::runtime_error("mode solver: no mode of the requested polarization among the "
                                 "leading eigenpairs; enlarge the search block");

    SolveResult out;
    out.vec = pick->vec;
    ModeSolution& sol = out.sol;
    sol.wavelength_nm = wavelength_nm;
    sol.polarization = pol;
    const double beta = std::sqrt(pick->value);
    sol.n_eff = beta / as.k0;
    sol.n_core = n_core;
    sol.n_substrate = n_sub;
    sol.is_guided = sol.n_eff > n_sub + 1e-4;
    sol.residual = pick->residual;
    sol.iterations = iters;
    sol.h_nm = xs.grid_nm;
    sol.y0_nm = g.y0_nm;
    sol.z0_nm = g.z0_nm;
    reconstruct(as, g, pick->vec, beta, sol);
    return out;
}

} // namespace

void CrossSection::validate(double wavelength_nm) const {
    if (w_y_nm <= 0 || w_z_nm <= 0) throw std::invalid_argument("core dimensions must be positive");
    if (grid_nm <= 0) throw std::invalid_argument("grid spacing must be positive");
    if (w_z_nm / grid_nm < 20.0 - 1e-9)
        throw std::invalid_argument("grid must resolve the core thickness with >= 20 points");
    if (!slab_limit() && w_y_nm / grid_nm < 20.0 - 1e-9)
        throw std::invalid_argument("grid must resolve the core width with >= 20 points");
    if (!slab_limit() && margin_nm < 1500.0 - 1e-9 && window_y_nm <= 0 && window_z_nm <= 0)
        throw std::invalid_argument("window margin must be >= 1.5 um on open sides");
    // materials must be valid at this wavelength (throws otherwise)
    refractive_index(core, wavelength_nm);
    refractive_index(substrate, wavelength_nm);
    refractive_index(cladding, wavelength_nm);
}

ModeSolution solve_mode(const CrossSection& xs, double wavelength_nm, Polarization pol) {
    return solve_impl(xs, wavelength_nm, pol, nullptr).sol;
}

namespace {

// n_eff at the stencil wavelengths, warm-started from the centre solve
struct Stencil {
    double n0;
    Eigen::VectorXd v0;
    const CrossSection* xs;
    Polarization pol;
    double lam;

    double at(double dl) const {
        if (dl == 0.0) return n0;
        auto r = solve_impl(*xs, lam + dl, pol, &v0);
        if (!r.sol.is_guided)
            throw std::runtime_error("mode crosses cut-off inside the finite-difference stencil");
        return r.sol.n_eff;
    }
};

Stencil make_stencil(const CrossSection& xs, double wavelength_nm, Polarization pol) {
    auto c = solve_impl(xs, wavelength_nm, pol, nullptr);
    if (!c.sol.is_guided)
        throw std::runtime_error("mode is not guided at the requested wavelength");
    return {c.sol.n_eff, std::move(c.vec), &xs, pol, wavelength_nm};
}

double group_index_from(const Stencil& st) {
    const double d = 1.0; // nm
    const double g1 = st.n0 - st.lam * (st.at(d) - st.at(-d)) / (2.0 * d);
    const double g05 = st.n0 - st.lam * (st.at(d / 2) - st.at(-d / 2)) / d;
    return (4.0 * g05 - g1) / 3.0;
}

} // namespace

double group_index(const CrossSection& xs, double wavelength_nm, Polarization pol) {
    return group_index_from(make_stencil(xs, wavelength_nm, pol));
}

double gvd_parameter(const CrossSection& xs, double wavelength_nm, Polarization pol) {
    // 2 nm step: the eigensolver resolves n_eff to ~1e-10, so the second difference noise
    // stays below ~0.5 ps/(nm km); a 1 nm step with Richardson would amplify it 8-fold.
    const auto st = make_stencil(xs, wavelength_nm, pol);
    const double d = 2.0; // nm
    const double d2n = (st.at(d) - 2.0 * st.n0 + st.at(-d)) / (d * 1e-9 * d * 1e-9);
    return -(wavelength_nm * 1e-9 / c0) * d2n * 1e6; // s/m^2 -> ps/(nm km)
}

RegionMask core_mask(const ModeSolution& mode, const CrossSection& xs) {
    RegionMask mask(static_cast<std::size_t>(mode.ny) * mode.nz, 0);
    for (int i = 0; i < mode.ny; ++i) {
        for (int j = 0; j < mode.nz; ++j) {
            const double y = mode.y0_nm + i * mode.h_nm;
            const double z = mode.z0_nm + j * mode.h_nm;
            if (std::abs(y) <= xs.w_y_nm / 2 + 1e-9 && z >= -1e-9 && z <= xs.w_z_nm + 1e-9)
                mask[mode.idx(i, j)] = 1;
        }
    }
    return mask;
}

double effective_area(const ModeSolution& mode, const RegionMask& ring_region) {
    if (ring_region.size() != mode.eps.size())
        throw std::invalid_argument("mask size does not match the mode grid");
    if (std::find(ring_region.begin(), ring_region.end(), 1) == ring_region.end())
        throw std::invalid_argument("effective_area: empty region mask");
    if (!mode.is_guided)
        throw std::invalid_argument("effective_area requires a guided mode");
    double i2 = 0.0, i4 = 0.0;
    for (std::size_t k = 0; k < mode.eps.size(); ++k) {
        const double e2 = mode.E_x[k] * mode.E_x[k] + mode.E_y[k] * mode.E_y[k] +
                          mode.E_z[k] * mode.E_z[k];
        i2 += mode.eps[k] * e2;
        if (ring_region[k]) i4 += mode.eps[k] * mode.eps[k] * e2 * e2;
    }
    if (i4 <= 0.0) throw std::invalid_argument("effective_area: field vanishes on the mask");
    const double cell_um2 = mode.h_nm * 1e-3 * mode.h_nm * 1e-3;
    return i2 * i2 / i4 * cell_um2;
}

namespace {

template <typename F>
void parallel_for(int n, F&& body) {
    const int workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    if (workers == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::future<void>> futs;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        }));
    }
    for (auto& f : futs) f.get();
}

} // namespace

MatchingScan group_index_matching_scan(const CrossSection& base,
                                       const std::vector<double>& thickness_nm,
                                       const std::vector<double>& width_nm,
                                       double lambda1_nm, double lambda2_nm) {
    MatchingScan out;
    struct Job { double wz, wy; };
    std::vector<Job> jobs;
    for (double wz : thickness_nm)
        for (double wy : width_nm) jobs.push_back({wz, wy});
    std::vector<MatchingRow> rows(jobs.size());

    parallel_for(static_cast<int>(jobs.size()), [&](int k) {
        CrossSection xs = base;
        xs.w_z_nm = jobs[k].wz;
        xs.w_y_nm = jobs[k].wy;
        MatchingRow row{};
        row.w_y_nm = xs.w_y_nm;
        row.w_z_nm = xs.w_z_nm;
        try {
            auto m1 = solve_impl(xs, lambda1_nm, Polarization::TE, nullptr);
            auto m2 = solve_impl(xs, lambda2_nm, Polarization::TE, nullptr);
            row.n_eff_946 = m1.sol.n_eff;
            row.n_eff_1550 = m2.sol.n_eff;
            if (!m1.sol.is_guided || !m2.sol.is_guided) {
                row.cutoff = true;
            } else {
                row.n_g_946 = group_index_from(
                    {m1.sol.n_eff, std::move(m1.vec), &xs, Polarization::TE, lambda1_nm});
                row.n_g_1550 = group_index_from(
                    {m2.sol.n_eff, std::move(m2.vec), &xs, Polarization::TE, lambda2_nm});
                row.delta_n_g = row.n_g_946 - row.n_g_1550;
            }
        } catch (const std::runtime_error&) {
            row.cutoff = true;   // cut-off inside a stencil counts as a cut-off entry
        }
        rows[k] = row;
    });
    out.rows = rows;

    // zero crossings per thickness, linear interpolation between adjacent non-cutoff entries
    for (double wz : thickness_nm) {
        const MatchingRow* prev = nullptr;
        for (const auto& r : out.rows) {
            if (r.w_z_nm != wz) continue;
            if (r.cutoff) { prev = nullptr; continue; }
            if (r.delta_n_g == 0.0) {
                out.crossings.push_back({wz, r.w_y_nm});
            } else if (prev && prev->delta_n_g * r.delta_n_g < 0.0) {
                const double t = prev->delta_n_g / (prev->delta_n_g - r.delta_n_g);
                out.crossings.push_back({wz, prev->w_y_nm + t * (r.w_y_nm - prev->w_y_nm)});
            }
            prev = &r;
        }
    }
    return out;
}

DispersionScanResult dispersion_scan(const CrossSection& xs, const std::vector<double>& lambda_nm,
                                     Polarization pol) {
    if (lambda_nm.size() < 3)
        throw std::invalid_argument("dispersion_scan needs at least 3 wavelengths");
    for (std::size_t i = 1; i < lambda_nm.size(); ++i)
        if (lambda_nm[i] <= lambda_nm[i - 1])
            throw std::invalid_argument("dispersion_scan wavelengths must be strictly increasing");
    const int n = static_cast<int>(lambda_nm.size());
    DispersionScanResult out;
    out.lambda_nm = lambda_nm;
    out.n_eff.resize(n);
    out.n_g.resize(n);
    out.D_ps_nm_km.resize(n);
    out.A_eff_um2.resize(n);

    std::vector<int> guided(n, 0);
    parallel_for(n, [&](int i) {
        auto r = solve_impl(xs, lambda_nm[i], pol, nullptr);
        out.n_eff[i] = r.sol.n_eff;
        guided[i] = r.sol.is_guided ? 1 : 0;
        out.A_eff_um2[i] = r.sol.is_guided ? effective_area(r.sol, core_mask(r.sol, xs)) : 0.0;
    });
    for (int i = 0; i < n; ++i)
        if (!guided[i])
            throw std::runtime_error("dispersion_scan: mode not guided at " +
                                     std::to_string(lambda_nm[i]) + " nm");

    // grid-difference derivatives; uneven spacing handled by the three-point formulas
    auto dn = [&](int i) {
        const int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
        return (out.n_eff[b] - out.n_eff[a]) / (lambda_nm[b] - lambda_nm[a]);
    };
    for (int i = 0; i < n; ++i) out.n_g[i] = out.n_eff[i] - lambda_nm[i] * dn(i);
    for (int i = 0; i < n; ++i) {
        const int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
        const int c = (a == i) ? i + 2 : (b == i) ? i - 2 : i;
        double d2;
        if (c == i) {
            const double h1 = lambda_nm[i] - lambda_nm[a], h2 = lambda_nm[b] - lambda_nm[i];
            d2 = 2.0 * (h1 * out.n_eff[b] - (h1 + h2) * out.n_eff[i] + h2 * out.n_eff[a]) /
                 (h1 * h2 * (h1 + h2));
        } else {
            // one-sided second difference at the scan ends
            const int i0 = std::min({a, i, c}), i1 = i0 + 1, i2 = i0 + 2;
            const double h1 = lambda_nm[i1] - lambda_nm[i0], h2 = lambda_nm[i2] - lambda_nm[i1];
            d2 = 2.0 * (h1 * out.n_eff[i2] - (h1 + h2) * out.n_eff[i1] + h2 * out.n_eff[i0]) /
                 (h1 * h2 * (h1 + h2));
        }
        out.D_ps_nm_km[i] = -(lambda_nm[i] * 1e-9 / c0) * d2 * 1e18 * 1e6;
    }
    return out;
}

std::vector<resonator::ScanPoint> DispersionScanResult::scan_points() const {
    std::vector<resonator::ScanPoint> pts;
    for (std::size_t i = 0; i < lambda_nm.size(); ++i) pts.push_back({lambda_nm[i], n_eff[i]});
    return pts;
}

std::vector<double> gvd_zero_crossings(const DispersionScanResult& scan) {
    std::vector<double> zeros;
    for (std::size_t i = 1; i < scan.lambda_nm.size(); ++i) {
        const double a = scan.D_ps_nm_km[i - 1], b = scan.D_ps_nm_km[i];
        if (a == 0.0) zeros.push_back(scan.lambda_nm[i - 1]);
        else if (a * b < 0.0) {
            const double t = a / (a - b);
            zeros.push_back(scan.lambda_nm[i - 1] + t * (scan.lambda_nm[i] - scan.lambda_nm[i - 1]));
        }
    }
    return zeros;
}

} // namespace photonode::modesolver
