#include "rheo/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rheo {

double cutoff(double sq_speed, double delta) {
    if (sq_speed < 0.0) throw std::invalid_argument("cutoff: sq_speed must be >= 0");
    if (delta <= 0.0) return 1.0;  // limit configuration
    if (delta > 1.0) throw std::invalid_argument("cutoff: delta must lie in (0,1]");
    double s = delta * sq_speed;
    if (s < 1.0) return 1.0;
    if (s < 2.0) return 2.0 - s;
    return 0.0;
}

V0Kind v0_kind_from_string(const std::string& s) {
    if (s == "zero") return V0Kind::zero;
    if (s == "uniform_x") return V0Kind::uniform_x;
    if (s == "shear_linear") return V0Kind::shear_linear;
    if (s == "cosine_mode") return V0Kind::cosine_mode;
    if (s == "gradient_test") return V0Kind::gradient_test;
    throw std::invalid_argument("unknown v0 kind: " + s);
}

std::string to_string(V0Kind k) {
    switch (k) {
        case V0Kind::zero: return "zero";
        case V0Kind::uniform_x: return "uniform_x";
        case V0Kind::shear_linear: return "shear_linear";
        case V0Kind::cosine_mode: return "cosine_mode";
        case V0Kind::gradient_test: return "gradient_test";
    }
    return "zero";
}

double SimConfig::exponent_z() const {
    double r = growth_r(), q = growth_q();
    double d = dim;
    double zc = (d + 2.0) * r / ((d + 2.0) * r - 2.0 * d);
    return std::max({r, q, zc});
}

void SimConfig::validate() const {
    grid.validate();
    if (dim != 2 && dim != 3) throw std::invalid_argument("config: dim must be 2 or 3");
    double r = growth_r();
    double rmin = 2.0 * dim / (dim + 2.0);
    if (!(r > rmin))
        throw std::invalid_argument("config: growth exponent r = " + std::to_string(r) +
                                    " violates r > 2d/(d+2) = " + std::to_string(rmin) +
                                    " for d = " + std::to_string(dim));
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("config: eps must lie in (0,1)");
    if (delta < 0.0 || delta > 1.0)
        throw std::invalid_argument("config: delta must lie in [0,1] (0 disables the cutoff)");
    if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (t_end < 0.0) throw std::invalid_argument("config: t_end must be >= 0");
    if (picard_sweeps < 1) throw std::invalid_argument("config: picard_sweeps must be >= 1");
    if (v0 == V0Kind::cosine_mode && !(v0_param > 0.0))
        throw std::invalid_argument("config: cosine_mode needs v0_param > 0");
}

// ---------------------------------------------------------------------------
// Solver internals
// ---------------------------------------------------------------------------

struct FlowSolver::Impl {
    SimConfig cfg;
    FlowState st;
    EnergyLedger led;
    StepDiagnostics diag;
    std::vector<LedgerHistoryRow> history;

    EpsBulkRelation bulk;
    EpsBoundaryRelation bdry;
    PoissonSolver poisson;

    int nx, ny;
    double hx, hy, vol;

    // work fields
    Field2D conv_u, conv_v;         // convective terms
    Field2D nu_c, nu_n;             // apparent viscosities (centers, interior nodes)
    std::vector<double> alpha_bot, alpha_top;  // wall Robin slopes
    Field2D dxy_node;               // node shear rates incl. wall rows
    Field2D sxx_c, syy_c, sxy_c;    // resolved full stress at centers
    Field2D sxy_n;                  // resolved shear at nodes (incl. wall = effective stress)
    Field2D chi, div_work;
    std::vector<double> cg_buf;
    double nu_cap = 1.0;
    double last_steady_residual = 0.0;

    Impl(SimConfig c)
        : cfg(std::move(c)),
          bulk(cfg.bulk, cfg.eps),
          bdry(cfg.boundary, cfg.eps),
          poisson(cfg.grid),
          nx(cfg.grid.nx),
          ny(cfg.grid.ny),
          hx(cfg.grid.hx()),
          hy(cfg.grid.hy()),
          vol(cfg.grid.cell_volume()) {}

    // --- small helpers -----------------------------------------------------
    int ip(int i) const { return i + 1 < nx ? i + 1 : 0; }
    int im(int i) const { return i > 0 ? i - 1 : nx - 1; }

    void allocate() {
        st.u = Field2D(nx, ny);
        st.v = Field2D(nx, ny + 1);
        st.p = Field2D(nx, ny);
        st.Sxx = Field2D(nx, ny);
        st.Syy = Field2D(nx, ny);
        st.Sxy = Field2D(nx, ny + 1);
        st.s_bot.assign(static_cast<size_t>(nx), 0.0);
        st.s_top.assign(static_cast<size_t>(nx), 0.0);
        st.uw_bot.assign(static_cast<size_t>(nx), 0.0);
        st.uw_top.assign(static_cast<size_t>(nx), 0.0);
        conv_u = Field2D(nx, ny);
        conv_v = Field2D(nx, ny + 1);
        nu_c = Field2D(nx, ny);
        nu_n = Field2D(nx, ny + 1);
        alpha_bot.assign(static_cast<size_t>(nx), 0.0);
        alpha_top.assign(static_cast<size_t>(nx), 0.0);
        dxy_node = Field2D(nx, ny + 1);
        sxx_c = Field2D(nx, ny);
        syy_c = Field2D(nx, ny);
        sxy_c = Field2D(nx, ny);
        sxy_n = Field2D(nx, ny + 1);
        chi = Field2D(nx, ny);
        div_work = Field2D(nx, ny);
    }

    void estimate_nu_cap() {
        // max secant slope of the stress resolvent over a magnitude sweep;
        // used only to clip the Picard linearization.
        double cap = 1e-8;
        double prev_m = 0.0, prev_s = 0.0;
        for (int k = 0; k <= 16; ++k) {
            double m = std::pow(10.0, -3.0 + 5.0 * k / 16.0);
            SymTensor2 D = SymTensor2::offdiag2(m / std::sqrt(2.0));
            SymTensor2 S = bulk.resolve_stress(D);
            double s = frobenius_norm(S);
            cap = std::max(cap, (s - prev_s) / (m - prev_m));
            prev_m = m;
            prev_s = s;
        }
        nu_cap = cap;  // |S| = 2 nu |D| secant => nu = slope/2, keep 2x margin
    }

    // --- initial velocity ---------------------------------------------------
    void sample_v0() {
        const Grid& g = cfg.grid;
        const double A = cfg.v0_amplitude;
        const double yc_mid = 0.5 * g.ly;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double x = g.xu(i), y = g.yc(j);
                switch (cfg.v0) {
                    case V0Kind::zero: st.u(i, j) = 0.0; break;
                    case V0Kind::uniform_x: st.u(i, j) = A; break;
                    case V0Kind::shear_linear: st.u(i, j) = A * (y - yc_mid) / yc_mid; break;
                    case V0Kind::cosine_mode:
                        st.u(i, j) = A * std::cos(cfg.v0_param * (y - yc_mid));
                        break;
                    case V0Kind::gradient_test:
                        st.u(i, j) = 0.0;  // filled below from a discrete potential
                        break;
                }
            }
        st.v.fill(0.0);
        if (cfg.v0 == V0Kind::gradient_test) {
            // discrete gradient of a cell-centered potential; the projection
            // must annihilate it to round-off
            Field2D phi(nx, ny);
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i)
                    phi(i, j) = std::sin(2.0 * M_PI * g.xc(i) / g.lx) *
                                std::cos(M_PI * g.yc(j) / g.ly);
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) st.u(i, j) = (phi(i, j) - phi(im(i), j)) / hx;
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) st.v(i, j) = (phi(i, j) - phi(i, j - 1)) / hy;
        }
    }

    void project() {
        const double idt = 1.0;  // projection of v0 uses unit pseudo-timestep
        (void)idt;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                div_work(i, j) = (st.u(ip(i), j) - st.u(i, j)) / hx +
                                 (st.v(i, j + 1) - st.v(i, j)) / hy;
        poisson.solve(div_work, chi);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) st.u(i, j) -= (chi(i, j) - chi(im(i), j)) / hx;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) st.v(i, j) -= (chi(i, j) - chi(i, j - 1)) / hy;
    }

    // --- wall traction balance ----------------------------------------------
    // Solves phi(uw) * s_slip(uw - Uw) = s_bulk((u_adj - uw)/hy) at one wall
    // node; returns uw, the constitutive traction and the effective stress.
    // The collinear reduction makes both sides scalar: sigma is the bulk-side
    // traction with the wall-normal sign folded in, so the same equations
    // serve both walls.
    struct WallResult {
        double uw, s_slip, s_eff;
    };

    WallResult solve_wall(double u_adj, double wall_vel, bool top, double uw_guess) {
        const double sq2 = std::sqrt(2.0);
        auto residuals = [&](const double* x, double* F) {
            double uw = x[0], s = x[1], sigma = x[2];
            double deff = (u_adj - uw) / hy;
            F[0] = bdry.scalar_residual(s, uw - wall_vel);
            F[1] = bulk.scalar_residual(sq2 * sigma, sq2 * deff);
            F[2] = cutoff(uw * uw, cfg.delta) * s - sigma;
        };

        double x[3] = {uw_guess, 0.0, 0.0};
        {
            // seed tractions from the scalar maps at the guessed slip
            double vrel = uw_guess - wall_vel;
            x[1] = bdry.base().scalar_traction_from_slip(vrel);
            x[2] = cutoff(uw_guess * uw_guess, cfg.delta) * x[1];
        }
        double F[3];
        residuals(x, F);
        bool exact = F[0] == 0.0 && F[1] == 0.0 && F[2] == 0.0;

        auto pack = [&](double uw, double s) {
            WallResult out;
            out.uw = uw;
            out.s_slip = s;
            out.s_eff = cutoff(uw * uw, cfg.delta) * s;
            return out;
        };
        if (exact) return pack(x[0], x[1]);

        // damped Newton on the 3x3 system; scale-aware tolerance
        auto norm3 = [](const double* F2) {
            return std::sqrt(F2[0] * F2[0] + F2[1] * F2[1] + F2[2] * F2[2]);
        };
        double scale = 1.0 + std::fabs(u_adj) + std::fabs(wall_vel);
        bool converged = false;
        for (int it = 0; it < 60 && !converged; ++it) {
            residuals(x, F);
            double fn = norm3(F);
            if (fn <= 1e-13 * scale) {
                converged = true;
                break;
            }
            double J[3][3], fp[3], fm[3], xp[3];
            for (int c = 0; c < 3; ++c) {
                double h = 1e-7 * (1.0 + std::fabs(x[c]));
                for (int k = 0; k < 3; ++k) xp[k] = x[k];
                xp[c] = x[c] + h;
                residuals(xp, fp);
                xp[c] = x[c] - h;
                residuals(xp, fm);
                for (int r = 0; r < 3; ++r) J[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
            // solve J d = -F by elimination with partial pivoting
            double A[3][4];
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) A[r][c] = J[r][c];
                A[r][3] = -F[r];
            }
            bool singular = false;
            for (int c = 0; c < 3 && !singular; ++c) {
                int best = c;
                for (int r = c + 1; r < 3; ++r)
                    if (std::fabs(A[r][c]) > std::fabs(A[best][c])) best = r;
                if (std::fabs(A[best][c]) < 1e-300) {
                    singular = true;
                    break;
                }
                if (best != c)
                    for (int k = c; k < 4; ++k) std::swap(A[c][k], A[best][k]);
                for (int r = c + 1; r < 3; ++r) {
                    double fscale = A[r][c] / A[c][c];
                    for (int k = c; k < 4; ++k) A[r][k] -= fscale * A[c][k];
                }
            }
            if (singular) break;
            double d[3];
            for (int r = 2; r >= 0; --r) {
                double sum = A[r][3];
                for (int k = r + 1; k < 3; ++k) sum -= A[r][k] * d[k];
                d[r] = sum / A[r][r];
            }
            double t = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 30 && !accepted; ++ls) {
                double xt[3] = {x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]};
                double Ft[3];
                residuals(xt, Ft);
                if (norm3(Ft) <= (1.0 - 1e-4 * t) * fn) {
                    for (int k = 0; k < 3; ++k) x[k] = xt[k];
                    accepted = true;
                } else {
                    t *= 0.5;
                }
            }
            if (!accepted) break;
        }
        if (converged) return pack(x[0], x[1]);

        // bisection fallback on uw, with inner monotone scalar solves
        auto s_slip_of = [&](double uw) {
            double vrel = uw - wall_vel;
            double m = std::fabs(vrel);
            if (m == 0.0) return 0.0;
            double s = solve_increasing(
                [&](double ss) { return bdry.scalar_residual(ss, m); }, 0.0, 1.0 + m, 1e-15);
            return vrel > 0.0 ? s : -s;
        };
        auto s_bulk_of = [&](double uw) {
            double deff = (u_adj - uw) / hy;
            double m = sq2 * std::fabs(deff);
            if (m == 0.0) return 0.0;
            double s = solve_increasing(
                [&](double ss) { return bulk.scalar_residual(ss, m); }, 0.0, 1.0 + m, 1e-15);
            return (deff > 0.0 ? s : -s) / sq2;
        };
        auto f = [&](double uw) {
            return cutoff(uw * uw, cfg.delta) * s_slip_of(uw) - s_bulk_of(uw);
        };
        double b_width = 1.0 + std::fabs(u_adj) + std::fabs(wall_vel) + std::fabs(uw_guess);
        double lo = uw_guess - b_width, hi = uw_guess + b_width;
        int grow = 0;
        while (f(lo) > 0.0 && grow++ < 60) lo -= b_width *= 2.0;
        grow = 0;
        while (f(hi) < 0.0 && grow++ < 60) hi += b_width *= 2.0;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-13 * (1.0 + std::fabs(hi))) break;
        }
        double uw = 0.5 * (lo + hi);
        return pack(uw, s_slip_of(uw));
    }

    // balance at every wall node + numeric Robin slopes
    void resolve_walls(const Field2D& u) {
        for (int i = 0; i < nx; ++i) {
            WallResult b = solve_wall(u(i, 0), cfg.wall_velocity_bottom, false, st.uw_bot[static_cast<size_t>(i)]);
            st.uw_bot[static_cast<size_t>(i)] = b.uw;
            st.s_bot[static_cast<size_t>(i)] = b.s_slip;
            sxy_n(i, 0) = b.s_eff;
            dxy_node(i, 0) = (u(i, 0) - b.uw) / hy;

            WallResult t = solve_wall(u(i, ny - 1), cfg.wall_velocity_top, true, st.uw_top[static_cast<size_t>(i)]);
            st.uw_top[static_cast<size_t>(i)] = t.uw;
            st.s_top[static_cast<size_t>(i)] = t.s_slip;
            sxy_n(i, ny) = -t.s_eff;
            dxy_node(i, ny) = (t.uw - u(i, ny - 1)) / hy;

            // effective slope of the balanced wall stress wrt the adjacent
            // velocity, for the implicit Robin term
            double du = 1e-6 * (1.0 + std::fabs(u(i, 0)));
            WallResult bp = solve_wall(u(i, 0) + du, cfg.wall_velocity_bottom, false, b.uw);
            alpha_bot[static_cast<size_t>(i)] =
                std::max(0.0, (bp.s_eff - b.s_eff) / du);
            du = 1e-6 * (1.0 + std::fabs(u(i, ny - 1)));
            WallResult tp = solve_wall(u(i, ny - 1) + du, cfg.wall_velocity_top, true, t.uw);
            alpha_top[static_cast<size_t>(i)] =
                std::max(0.0, -(-tp.s_eff + t.s_eff) / du);
        }
    }

    // --- strain rates and stress resolution ---------------------------------
    void compute_node_shear(const Field2D& u, const Field2D& v) {
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                dxy_node(i, j) = 0.5 * ((u(i, j) - u(i, j - 1)) / hy +
                                        (v(i, j) - v(im(i), j)) / hx);
        // wall rows were filled by resolve_walls
    }

    SymTensor2 center_D(const Field2D& u, const Field2D& v, int i, int j) const {
        SymTensor2 D(2);
        D.diag(0) = (u(ip(i), j) - u(i, j)) / hx;
        D.diag(1) = (v(i, j + 1) - v(i, j)) / hy;
        D.comp(2) = 0.25 * (dxy_node(i, j) + dxy_node(ip(i), j) + dxy_node(i, j + 1) +
                            dxy_node(ip(i), j + 1));
        return D;
    }

    SymTensor2 node_D(const Field2D& u, const Field2D& v, int i, int j) const {
        // interior nodes only (j = 1..ny-1)
        SymTensor2 D(2);
        double dxx = 0.25 * (((u(ip(im(i)), j - 1) - u(im(i), j - 1)) / hx) +
                             ((u(ip(i), j - 1) - u(i, j - 1)) / hx) +
                             ((u(ip(im(i)), j) - u(im(i), j)) / hx) +
                             ((u(ip(i), j) - u(i, j)) / hx));
        double dyy = 0.25 * (((v(im(i), j) - v(im(i), j - 1)) / hy) +
                             ((v(i, j) - v(i, j - 1)) / hy) +
                             ((v(im(i), j + 1) - v(im(i), j)) / hy) +
                             ((v(i, j + 1) - v(i, j)) / hy));
        D.diag(0) = dxx;
        D.diag(1) = dyy;
        D.comp(2) = dxy_node(i, j);
        return D;
    }

    // resolve stresses at all points from (u, v); also fills nu_c / nu_n and
    // the pointwise dissipation diagnostics
    void resolve_stresses(const Field2D& u, const Field2D& v, bool track_sign) {
        resolve_walls(u);
        compute_node_shear(u, v);
        double min_sd = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                SymTensor2 D = center_D(u, v, i, j);
                SymTensor2 guess(2);
                guess.diag(0) = sxx_c(i, j);
                guess.diag(1) = syy_c(i, j);
                guess.comp(2) = sxy_c(i, j);
                SymTensor2 S;
                try {
                    S = bulk.resolve_stress(D, guess);
                } catch (const NoConvergence& e) {
                    throw std::runtime_error(std::string(e.what()) + " at cell (" +
                                             std::to_string(i) + "," + std::to_string(j) + ")");
                }
                sxx_c(i, j) = S.diag(0);
                syy_c(i, j) = S.diag(1);
                sxy_c(i, j) = S.comp(2);
                double sd = inner(S, D);
                double dd = inner(D, D);
                nu_c(i, j) = clamp_nu(dd > 1e-28 ? sd / (2.0 * dd) : nu_cap);
                if (track_sign) {
                    double sc = 1.0 + frobenius_norm(S) * frobenius_norm(D);
                    min_sd = std::min(min_sd, sd / sc);
                }
            }
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                SymTensor2 D = node_D(u, v, i, j);
                SymTensor2 guess(2);
                guess.comp(2) = sxy_n(i, j);
                guess.diag(0) = 0.5 * (sxx_c(i, j) + sxx_c(i, j - 1));
                guess.diag(1) = 0.5 * (syy_c(i, j) + syy_c(i, j - 1));
                SymTensor2 S;
                try {
                    S = bulk.resolve_stress(D, guess);
                } catch (const NoConvergence& e) {
                    throw std::runtime_error(std::string(e.what()) + " at node (" +
                                             std::to_string(i) + "," + std::to_string(j) + ")");
                }
                sxy_n(i, j) = S.comp(2);
                double sd = inner(S, D);
                double dd = inner(D, D);
                nu_n(i, j) = clamp_nu(dd > 1e-28 ? sd / (2.0 * dd) : nu_cap);
                if (track_sign) {
                    double sc = 1.0 + frobenius_norm(S) * frobenius_norm(D);
                    min_sd = std::min(min_sd, sd / sc);
                }
            }
        if (track_sign) {
            diag.min_bulk_sd = min_sd;
            double min_sv = 0.0;
            for (int i = 0; i < nx; ++i) {
                double vb = st.uw_bot[static_cast<size_t>(i)] - cfg.wall_velocity_bottom;
                double vt = st.uw_top[static_cast<size_t>(i)] - cfg.wall_velocity_top;
                double sb = st.s_bot[static_cast<size_t>(i)], stp = st.s_top[static_cast<size_t>(i)];
                min_sv = std::min(min_sv, sb * vb / (1.0 + std::fabs(sb) * std::fabs(vb)));
                min_sv = std::min(min_sv, stp * vt / (1.0 + std::fabs(stp) * std::fabs(vt)));
            }
            diag.min_boundary_sv = min_sv;
        }
    }

    double clamp_nu(double nu) const { return std::clamp(nu, 1e-10, nu_cap); }

    // --- convection ----------------------------------------------------------
    void compute_convection(const Field2D& u, const Field2D& v) {
        Field2D fxx(nx, ny), fyy(nx, ny), fxy(nx, ny + 1);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double uc = 0.5 * (u(i, j) + u(ip(i), j));
                double vc = 0.5 * (v(i, j) + v(i, j + 1));
                double phi = cutoff(uc * uc + vc * vc, cfg.delta);
                fxx(i, j) = phi * uc * uc;
                fyy(i, j) = phi * vc * vc;
            }
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double ub, vb;
                if (j == 0 || j == ny) {
                    fxy(i, j) = 0.0;  // impermeable wall: no momentum flux
                    continue;
                }
                ub = 0.5 * (u(i, j - 1) + u(i, j));
                vb = 0.5 * (v(im(i), j) + v(i, j));
                double phi = cutoff(ub * ub + vb * vb, cfg.delta);
                fxy(i, j) = phi * ub * vb;
            }
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                conv_u(i, j) = (fxx(i, j) - fxx(im(i), j)) / hx +
                               (fxy(i, j + 1) - fxy(i, j)) / hy;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                conv_v(i, j) = (fxy(ip(i), j) - fxy(i, j)) / hx +
                               (fyy(i, j) - fyy(i, j - 1)) / hy;
    }

    // --- linear viscous operator (Picard linearization) ----------------------
    // out = w/dt - div(2 nu D(w)) with Robin wall rows; w given as (wu, wv)
    void apply_momentum_operator(const Field2D& wu, const Field2D& wv, Field2D& out_u,
                                 Field2D& out_v) const {
        const double idt = 1.0 / cfg.dt;
        // linearized stresses
        Field2D sxx(nx, ny), syy(nx, ny), sxy(nx, ny + 1);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                sxx(i, j) = 2.0 * nu_c(i, j) * (wu(ip(i), j) - wu(i, j)) / hx;
                syy(i, j) = 2.0 * nu_c(i, j) * (wv(i, j + 1) - wv(i, j)) / hy;
            }
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double dxy = 0.5 * ((wu(i, j) - wu(i, j - 1)) / hy +
                                    (wv(i, j) - wv(im(i), j)) / hx);
                sxy(i, j) = 2.0 * nu_n(i, j) * dxy;
            }
        for (int i = 0; i < nx; ++i) {
            sxy(i, 0) = alpha_bot[static_cast<size_t>(i)] * wu(i, 0);
            sxy(i, ny) = -alpha_top[static_cast<size_t>(i)] * wu(i, ny - 1);
        }
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out_u(i, j) = idt * wu(i, j) - ((sxx(i, j) - sxx(im(i), j)) / hx +
                                                (sxy(i, j + 1) - sxy(i, j)) / hy);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out_v(i, j) = idt * wv(i, j) - ((sxy(ip(i), j) - sxy(i, j)) / hx +
                                                (syy(i, j) - syy(i, j - 1)) / hy);
    }

    // Jacobi diagonal of the momentum operator
    void momentum_diagonal(Field2D& du, Field2D& dv) const {
        const double idt = 1.0 / cfg.dt;
        const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double d = idt + 2.0 * (nu_c(i, j) + nu_c(im(i), j)) * ihx2;
                double lo = j == 0 ? alpha_bot[static_cast<size_t>(i)] / hy : nu_n(i, j) * ihy2;
                double hi2 = j == ny - 1 ? alpha_top[static_cast<size_t>(i)] / hy
                                         : nu_n(i, j + 1) * ihy2;
                du(i, j) = d + lo + hi2;
            }
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                dv(i, j) = idt + 2.0 * (nu_c(i, j) + nu_c(i, j - 1)) * ihy2 +
                           (nu_n(i, j) + nu_n(ip(i), j)) * ihx2;
    }

    // preconditioned CG on the coupled (u, v-interior) system
    int solve_momentum(const Field2D& rhs_u, const Field2D& rhs_v, Field2D& xu, Field2D& xv) {
        Field2D ru(nx, ny), rv(nx, ny + 1), pu(nx, ny), pv(nx, ny + 1), au(nx, ny),
            av(nx, ny + 1), zu(nx, ny), zv(nx, ny + 1), du(nx, ny), dv(nx, ny + 1);
        momentum_diagonal(du, dv);
        rv.fill(0.0);
        av.fill(0.0);
        pv.fill(0.0);
        zv.fill(0.0);

        apply_momentum_operator(xu, xv, au, av);
        double rr = 0.0, bb = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                ru(i, j) = rhs_u(i, j) - au(i, j);
                zu(i, j) = ru(i, j) / du(i, j);
                rr += ru(i, j) * zu(i, j);
                bb += rhs_u(i, j) * rhs_u(i, j);
            }
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                rv(i, j) = rhs_v(i, j) - av(i, j);
                zv(i, j) = rv(i, j) / dv(i, j);
                rr += rv(i, j) * zv(i, j);
                bb += rhs_v(i, j) * rhs_v(i, j);
            }
        pu = zu;
        pv = zv;
        double tol2 = 1e-24 * std::max(bb, 1e-30);
        int it = 0;
        const int max_it = 4 * nx * ny;
        double rnorm2 = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) rnorm2 += ru(i, j) * ru(i, j);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) rnorm2 += rv(i, j) * rv(i, j);

        while (rnorm2 > tol2 && it < max_it) {
            apply_momentum_operator(pu, pv, au, av);
            double pap = 0.0;
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) pap += pu(i, j) * au(i, j);
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) pap += pv(i, j) * av(i, j);
            if (pap <= 0.0) break;
            double alpha = rr / pap;
            double rr_new = 0.0;
            rnorm2 = 0.0;
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    xu(i, j) += alpha * pu(i, j);
                    ru(i, j) -= alpha * au(i, j);
                    zu(i, j) = ru(i, j) / du(i, j);
                    rr_new += ru(i, j) * zu(i, j);
                    rnorm2 += ru(i, j) * ru(i, j);
                }
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    xv(i, j) += alpha * pv(i, j);
                    rv(i, j) -= alpha * av(i, j);
                    zv(i, j) = rv(i, j) / dv(i, j);
                    rr_new += rv(i, j) * zv(i, j);
                    rnorm2 += rv(i, j) * rv(i, j);
                }
            double beta = rr_new / rr;
            rr = rr_new;
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) pu(i, j) = zu(i, j) + beta * pu(i, j);
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) pv(i, j) = zv(i, j) + beta * pv(i, j);
            ++it;
        }
        return it;
    }

    // --- one time step --------------------------------------------------------
    void step() {
        const double dt = cfg.dt;
        Field2D u_old = st.u, v_old = st.v;

        compute_convection(u_old, v_old);

        Field2D uk = st.u, vk = st.v;
        int cg_total = 0;
        for (int sweep = 0; sweep < cfg.picard_sweeps; ++sweep) {
            resolve_stresses(uk, vk, false);

            // rhs = v_old/dt - conv + b - grad p + div S* - A_lin(vk) + vk/dt
            // defect form: (1/dt - div 2nu D) u = u_old/dt + rhs_expl with
            // rhs_expl = -conv + b - grad p + div S*(uk) - div S_lin(uk);
            // op(w) = w/dt - div S_lin(w), so -div S_lin(uk) = opu - uk/dt
            Field2D rhs_u(nx, ny), rhs_v(nx, ny + 1), opu(nx, ny), opv(nx, ny + 1);
            apply_momentum_operator(uk, vk, opu, opv);
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    double divs = (sxx_c(i, j) - sxx_c(im(i), j)) / hx +
                                  (sxy_n(i, j + 1) - sxy_n(i, j)) / hy;
                    double gpx = (st.p(i, j) - st.p(im(i), j)) / hx;
                    rhs_u(i, j) = u_old(i, j) / dt - conv_u(i, j) + cfg.body_force_x - gpx +
                                  divs + (opu(i, j) - uk(i, j) / dt);
                }
            rhs_v.fill(0.0);
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    double divs = (sxy_n(ip(i), j) - sxy_n(i, j)) / hx +
                                  (syy_c(i, j) - syy_c(i, j - 1)) / hy;
                    double gpy = (st.p(i, j) - st.p(i, j - 1)) / hy;
                    rhs_v(i, j) = v_old(i, j) / dt - conv_v(i, j) + cfg.body_force_y - gpy +
                                  divs + (opv(i, j) - vk(i, j) / dt);
                }
            cg_total += solve_momentum(rhs_u, rhs_v, uk, vk);
        }
        st.u = uk;
        st.v = vk;

        // incremental pressure projection
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                div_work(i, j) = ((st.u(ip(i), j) - st.u(i, j)) / hx +
                                  (st.v(i, j + 1) - st.v(i, j)) / hy) /
                                 dt;
        poisson.solve(div_work, chi);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                st.u(i, j) -= dt * (chi(i, j) - chi(im(i), j)) / hx;
                st.p(i, j) += chi(i, j);
            }
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) st.v(i, j) -= dt * (chi(i, j) - chi(i, j - 1)) / hy;

        // constitutive-consistent fields on the final velocity
        resolve_stresses(st.u, st.v, true);
        store_state_stresses();

        st.t += dt;
        diag.picard_iterations = cfg.picard_sweeps;
        diag.cg_iterations = cg_total;
        update_diagnostics(u_old, v_old);
        accumulate_ledger(dt);
    }

    void store_state_stresses() {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                st.Sxx(i, j) = sxx_c(i, j);
                st.Syy(i, j) = syy_c(i, j);
            }
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) st.Sxy(i, j) = sxy_n(i, j);
    }

    void update_diagnostics(const Field2D& u_old, const Field2D& v_old) {
        double vmax = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) vmax = std::max(vmax, std::fabs(st.u(i, j)));
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) vmax = std::max(vmax, std::fabs(st.v(i, j)));
        double dv = max_divergence(cfg.grid, st.u, st.v);
        double h = std::min(hx, hy);
        diag.max_div_normalized = vmax > 0.0 ? dv / (vmax / h) : dv;
        double wn = 0.0;
        for (int i = 0; i < nx; ++i)
            wn = std::max({wn, std::fabs(st.v(i, 0)), std::fabs(st.v(i, ny))});
        diag.max_wall_normal_velocity = wn;

        double res = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                res = std::max(res, std::fabs(st.u(i, j) - u_old(i, j)));
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                res = std::max(res, std::fabs(st.v(i, j) - v_old(i, j)));
        last_steady_residual = res / cfg.dt;
    }

    double kinetic_energy() const {
        double ke = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) ke += st.u(i, j) * st.u(i, j);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) ke += st.v(i, j) * st.v(i, j);
        return 0.5 * ke * vol;
    }

    void accumulate_ledger(double dt) {
        // budget terms evaluated on the end-of-step consistent fields
        double bulk_inc = 0.0;
        compute_node_shear(st.u, st.v);  // dxy_node refreshed for the final field
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                SymTensor2 D = center_D(st.u, st.v, i, j);
                bulk_inc += (st.Sxx(i, j) * D.diag(0) + st.Syy(i, j) * D.diag(1)) * vol;
            }
        for (int j = 0; j <= ny; ++j) {
            double w = (j == 0 || j == ny) ? 0.5 * vol : vol;
            for (int i = 0; i < nx; ++i)
                bulk_inc += 2.0 * st.Sxy(i, j) * dxy_node(i, j) * w;
        }
        double bdry_inc = 0.0, wall_work = 0.0;
        for (int i = 0; i < nx; ++i) {
            double phib = cutoff(st.uw_bot[static_cast<size_t>(i)] * st.uw_bot[static_cast<size_t>(i)], cfg.delta);
            double phit = cutoff(st.uw_top[static_cast<size_t>(i)] * st.uw_top[static_cast<size_t>(i)], cfg.delta);
            double seb = phib * st.s_bot[static_cast<size_t>(i)];
            double set = phit * st.s_top[static_cast<size_t>(i)];
            bdry_inc += seb * (st.uw_bot[static_cast<size_t>(i)] - cfg.wall_velocity_bottom) * hx;
            bdry_inc += set * (st.uw_top[static_cast<size_t>(i)] - cfg.wall_velocity_top) * hx;
            wall_work -= seb * cfg.wall_velocity_bottom * hx;
            wall_work -= set * cfg.wall_velocity_top * hx;
        }
        double body_work = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) body_work += cfg.body_force_x * st.u(i, j) * vol;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) body_work += cfg.body_force_y * st.v(i, j) * vol;

        led.t = st.t;
        led.bulk_dissipation += bulk_inc * dt;
        led.boundary_dissipation += bdry_inc * dt;
        led.work += (body_work - wall_work) * dt;
        led.kinetic = kinetic_energy();
        led.defect = led.kinetic - led.kinetic0 + led.bulk_dissipation +
                     led.boundary_dissipation - led.work;
        history.push_back({st.t, led.kinetic, led.bulk_dissipation, led.boundary_dissipation,
                           led.work, led.defect});
    }
};

// ---------------------------------------------------------------------------

FlowSolver::FlowSolver(SimConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    impl_->cfg.validate();
    if (impl_->cfg.dim != 2)
        throw std::invalid_argument("FlowSolver: only dim = 2 is supported by the simulator");
    impl_->allocate();
    impl_->estimate_nu_cap();
    impl_->sample_v0();
    impl_->project();
    // consistent stresses and tractions for the initial field
    impl_->resolve_stresses(impl_->st.u, impl_->st.v, true);
    impl_->store_state_stresses();
    impl_->led.kinetic0 = impl_->kinetic_energy();
    impl_->led.kinetic = impl_->led.kinetic0;
    impl_->update_diagnostics(impl_->st.u, impl_->st.v);
    impl_->history.push_back({0.0, impl_->led.kinetic0, 0.0, 0.0, 0.0, 0.0});
}

FlowSolver::~FlowSolver() = default;

const SimConfig& FlowSolver::config() const { return impl_->cfg; }
const FlowState& FlowSolver::state() const { return impl_->st; }
const EnergyLedger& FlowSolver::ledger() const { return impl_->led; }
const StepDiagnostics& FlowSolver::diagnostics() const { return impl_->diag; }
double FlowSolver::steady_residual() const { return impl_->last_steady_residual; }
std::vector<LedgerHistoryRow> FlowSolver::ledger_history() const { return impl_->history; }

void FlowSolver::step() { impl_->step(); }

int FlowSolver::run() {
    int steps = 0;
    while (impl_->st.t < impl_->cfg.t_end - 0.5 * impl_->cfg.dt) {
        impl_->step();
        ++steps;
        if (impl_->cfg.steady_tol > 0.0 && impl_->last_steady_residual < impl_->cfg.steady_tol)
            break;
    }
    return steps;
}

// ---------------------------------------------------------------------------
// Free diagnostics
// ---------------------------------------------------------------------------

EnergyLedger energy_ledger(const std::vector<FlowState>& history, const SimConfig& config) {
    if (history.size() < 2) throw std::invalid_argument("energy_ledger: need >= 2 states");
    const Grid& g = config.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx(), hy = g.hy(), vol = g.cell_volume();
    for (const auto& s : history)
        if (s.u.nx() != nx || s.u.ny() != ny)
            throw std::invalid_argument("energy_ledger: state grid mismatch");

    auto kinetic = [&](const FlowState& s) {
        double ke = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) ke += s.u(i, j) * s.u(i, j);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) ke += s.v(i, j) * s.v(i, j);
        return 0.5 * ke * vol;
    };

    EnergyLedger led;
    led.kinetic0 = kinetic(history.front());
    for (size_t n = 1; n < history.size(); ++n) {
        const FlowState& s = history[n];
        double dt = s.t - history[n - 1].t;
        // node shear rates of the stored field
        Field2D dxy(nx, ny + 1);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                int im = i > 0 ? i - 1 : nx - 1;
                dxy(i, j) = 0.5 * ((s.u(i, j) - s.u(i, j - 1)) / hy +
                                   (s.v(i, j) - s.v(im, j)) / hx);
            }
        for (int i = 0; i < nx; ++i) {
            dxy(i, 0) = (s.u(i, 0) - s.uw_bot[static_cast<size_t>(i)]) / hy;
            dxy(i, ny) = (s.uw_top[static_cast<size_t>(i)] - s.u(i, ny - 1)) / hy;
        }
        double bulk_inc = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                int ipp = (i + 1) % nx;
                double dxx = (s.u(ipp, j) - s.u(i, j)) / hx;
                double dyy = (s.v(i, j + 1) - s.v(i, j)) / hy;
                bulk_inc += (s.Sxx(i, j) * dxx + s.Syy(i, j) * dyy) * vol;
            }
        for (int j = 0; j <= ny; ++j) {
            double w = (j == 0 || j == ny) ? 0.5 * vol : vol;
            for (int i = 0; i < nx; ++i) bulk_inc += 2.0 * s.Sxy(i, j) * dxy(i, j) * w;
        }
        double bdry_inc = 0.0, wall_work = 0.0;
        for (int i = 0; i < nx; ++i) {
            double uwb = s.uw_bot[static_cast<size_t>(i)], uwt = s.uw_top[static_cast<size_t>(i)];
            double seb = cutoff(uwb * uwb, config.delta) * s.s_bot[static_cast<size_t>(i)];
            double set = cutoff(uwt * uwt, config.delta) * s.s_top[static_cast<size_t>(i)];
            bdry_inc += seb * (uwb - config.wall_velocity_bottom) * hx;
            bdry_inc += set * (uwt - config.wall_velocity_top) * hx;
            wall_work -= seb * config.wall_velocity_bottom * hx;
            wall_work -= set * config.wall_velocity_top * hx;
        }
        double body_work = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) body_work += config.body_force_x * s.u(i, j) * vol;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) body_work += config.body_force_y * s.v(i, j) * vol;

        led.bulk_dissipation += bulk_inc * dt;
        led.boundary_dissipation += bdry_inc * dt;
        led.work += (body_work - wall_work) * dt;
    }
    led.t = history.back().t;
    led.kinetic = kinetic(history.back());
    led.defect = led.kinetic - led.kinetic0 + led.bulk_dissipation + led.boundary_dissipation -
                 led.work;
    return led;
}

// ---------------------------------------------------------------------------
// Test field bank and weak residual
// ---------------------------------------------------------------------------

namespace {
double kx_of(const TestField& f, const Grid& g) { return 2.0 * M_PI * f.k1 / g.lx; }
double ky_of(const TestField& f, const Grid& g) { return M_PI * f.k2 / g.ly; }
}  // namespace

double TestField::u(double x, double y, const Grid& g) const {
    return ky_of(*this, g) * std::sin(kx_of(*this, g) * x + phase) * std::cos(ky_of(*this, g) * y);
}
double TestField::v(double x, double y, const Grid& g) const {
    return -kx_of(*this, g) * std::cos(kx_of(*this, g) * x + phase) * std::sin(ky_of(*this, g) * y);
}
double TestField::dudx(double x, double y, const Grid& g) const {
    return ky_of(*this, g) * kx_of(*this, g) * std::cos(kx_of(*this, g) * x + phase) *
           std::cos(ky_of(*this, g) * y);
}
double TestField::dudy(double x, double y, const Grid& g) const {
    return -ky_of(*this, g) * ky_of(*this, g) * std::sin(kx_of(*this, g) * x + phase) *
           std::sin(ky_of(*this, g) * y);
}
double TestField::dvdx(double x, double y, const Grid& g) const {
    return kx_of(*this, g) * kx_of(*this, g) * std::sin(kx_of(*this, g) * x + phase) *
           std::sin(ky_of(*this, g) * y);
}
double TestField::dvdy(double x, double y, const Grid& g) const {
    return -kx_of(*this, g) * ky_of(*this, g) * std::cos(kx_of(*this, g) * x + phase) *
           std::cos(ky_of(*this, g) * y);
}

std::vector<TestField> default_test_field_bank() {
    // k1 = 0 fields are wall-parallel shear modes; the sine factor in u is
    // then replaced by 1 via the phase
    return {{0, 1, M_PI / 2}, {0, 2, M_PI / 2}, {1, 1, 0.0}, {1, 1, M_PI / 2}, {1, 2, 0.0},
            {2, 1, 0.0}};
}

void weak_residual_accumulate(const FlowState& prev, const FlowState& next,
                              const SimConfig& config, const std::vector<TestField>& bank,
                              std::vector<double>& acc) {
    if (acc.size() != bank.size()) acc.assign(bank.size(), 0.0);
    const Grid& g = config.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx(), vol = g.cell_volume();
    const FlowState& s = next;
    double dt = next.t - prev.t;

    for (size_t f = 0; f < bank.size(); ++f) {
        const TestField& tf = bank[f];
        double r = 0.0;
        // d_t v against phi
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                r += (s.u(i, j) - prev.u(i, j)) / dt * tf.u(g.xu(i), g.yc(j), g) * vol;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                r += (s.v(i, j) - prev.v(i, j)) / dt * tf.v(g.xc(i), g.yn(j), g) * vol;
        // -(v x v) : grad phi  (uncut: diagnostic against the limit form)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                int ipp = (i + 1) % nx;
                double uc = 0.5 * (s.u(i, j) + s.u(ipp, j));
                double vc = 0.5 * (s.v(i, j) + s.v(i, j + 1));
                double x = g.xc(i), y = g.yc(j);
                r -= (uc * uc * tf.dudx(x, y, g) + uc * vc * tf.dudy(x, y, g) +
                      vc * uc * tf.dvdx(x, y, g) + vc * vc * tf.dvdy(x, y, g)) *
                     vol;
            }
        // S : D(phi)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double x = g.xc(i), y = g.yc(j);
                r += (s.Sxx(i, j) * tf.dudx(x, y, g) + s.Syy(i, j) * tf.dvdy(x, y, g)) * vol;
            }
        for (int j = 0; j <= ny; ++j) {
            double w = (j == 0 || j == ny) ? 0.5 * vol : vol;
            for (int i = 0; i < nx; ++i) {
                double x = g.xu(i), y = g.yn(j);
                double dphi_xy = 0.5 * (tf.dudy(x, y, g) + tf.dvdx(x, y, g));
                r += 2.0 * s.Sxy(i, j) * dphi_xy * w;
            }
        }
        // boundary term: s . phi on both walls (tangential component)
        for (int i = 0; i < nx; ++i) {
            double x = g.xu(i);
            r += s.s_bot[static_cast<size_t>(i)] * tf.u(x, 0.0, g) * hx;
            r += s.s_top[static_cast<size_t>(i)] * tf.u(x, g.ly, g) * hx;
        }
        // body force
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                r -= config.body_force_x * tf.u(g.xu(i), g.yc(j), g) * vol;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                r -= config.body_force_y * tf.v(g.xc(i), g.yn(j), g) * vol;
        acc[f] += r * dt;
    }
}

double weak_residual(const std::vector<FlowState>& history, const SimConfig& config,
                     const std::vector<TestField>& bank) {
    if (history.size() < 2) throw std::invalid_argument("weak_residual: need >= 2 states");
    std::vector<double> acc(bank.size(), 0.0);
    for (size_t n = 1; n < history.size(); ++n)
        weak_residual_accumulate(history[n - 1], history[n], config, bank, acc);
    double worst = 0.0;
    for (double a : acc) worst = std::max(worst, std::fabs(a));
    return worst;
}

PressureDiagnostic pressure_diagnostic(const FlowState& state, const SimConfig& config) {
    const Grid& g = config.grid;
    const int nx = g.nx, ny = g.ny;
    const double vol = g.cell_volume(), hx = g.hx();
    const double z = config.exponent_z();
    const double zp = z / (z - 1.0);

    auto lp = [&](double acc) { return std::pow(acc, 1.0 / zp); };

    PressureDiagnostic out;
    double pn = 0.0, vvn = 0.0, sn = 0.0, sb = 0.0, bn = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int ipp = (i + 1) % nx;
            pn += std::pow(std::fabs(state.p(i, j)), zp) * vol;
            double uc = 0.5 * (state.u(i, j) + state.u(ipp, j));
            double vc = 0.5 * (state.v(i, j) + state.v(i, j + 1));
            double vv = uc * uc + vc * vc;  // |v x v| = |v|^2
            vvn += std::pow(vv, zp) * vol;
            SymTensor2 S = SymTensor2::diag2(state.Sxx(i, j), state.Syy(i, j));
            S.comp(2) = 0.25 * (state.Sxy(i, j) + state.Sxy(ipp, j) + state.Sxy(i, j + 1) +
                                state.Sxy(ipp, j + 1));
            sn += std::pow(frobenius_norm(S), zp) * vol;
            double bmag = std::hypot(config.body_force_x, config.body_force_y);
            bn += std::pow(bmag, zp) * vol;
        }
    for (int i = 0; i < nx; ++i) {
        sb += std::pow(std::fabs(state.s_bot[static_cast<size_t>(i)]), zp) * hx;
        sb += std::pow(std::fabs(state.s_top[static_cast<size_t>(i)]), zp) * hx;
    }
    out.p_norm = lp(pn);
    out.surrogate = lp(vvn) + lp(sn) + lp(sb) + lp(bn);
    out.ratio = out.surrogate > 1e-14 ? out.p_norm / out.surrogate : 0.0;
    return out;
}

}  // namespace rheo
