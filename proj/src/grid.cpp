#include "rheo/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace rheo {

void Grid::validate() const {
    if (nx < 4 || ny < 4) throw std::invalid_argument("grid: nx, ny must be >= 4");
    if (!(lx > 0.0 && ly > 0.0)) throw std::invalid_argument("grid: lengths must be positive");
    if ((nx & (nx - 1)) != 0)
        throw std::invalid_argument("grid: nx must be a power of two (x-transform)");
}

double max_divergence(const Grid& g, const Field2D& u, const Field2D& v) {
    double m = 0.0;
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int ip = (i + 1) % g.nx;
            double d = (u(ip, j) - u(i, j)) * ihx + (v(i, j + 1) - v(i, j)) * ihy;
            m = std::max(m, std::fabs(d));
        }
    return m;
}

struct PoissonSolver::Impl {
    Grid g;
    fftw_plan fwd = nullptr, bwd = nullptr;
    double* real_buf = nullptr;       // nx * ny
    fftw_complex* spec_buf = nullptr; // (nx/2+1) * ny
    std::vector<double> lambda_x;     // symbol of the periodic x-Laplacian

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (real_buf) fftw_free(real_buf);
        if (spec_buf) fftw_free(spec_buf);
    }
};

PoissonSolver::PoissonSolver(const Grid& g) : impl_(std::make_unique<Impl>()) {
    g.validate();
    impl_->g = g;
    const int nx = g.nx, ny = g.ny, nk = nx / 2 + 1;
    impl_->real_buf = fftw_alloc_real(static_cast<size_t>(nx) * ny);
    impl_->spec_buf = fftw_alloc_complex(static_cast<size_t>(nk) * ny);

    int n[] = {nx};
    impl_->fwd = fftw_plan_many_dft_r2c(1, n, ny, impl_->real_buf, nullptr, 1, nx, impl_->spec_buf,
                                        nullptr, 1, nk, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_many_dft_c2r(1, n, ny, impl_->spec_buf, nullptr, 1, nk, impl_->real_buf,
                                        nullptr, 1, nx, FFTW_ESTIMATE);

    impl_->lambda_x.resize(static_cast<size_t>(nk));
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    for (int k = 0; k < nk; ++k) {
        double theta = 2.0 * M_PI * k / nx;
        impl_->lambda_x[static_cast<size_t>(k)] = (2.0 - 2.0 * std::cos(theta)) * ihx2;
    }
}

PoissonSolver::~PoissonSolver() = default;

void PoissonSolver::solve(const Field2D& rhs, Field2D& chi) const {
    const Grid& g = impl_->g;
    const int nx = g.nx, ny = g.ny, nk = nx / 2 + 1;
    const double ihy2 = 1.0 / (g.hy() * g.hy());

    double mean = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) mean += rhs(i, j);
    mean /= static_cast<double>(nx) * ny;

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            impl_->real_buf[static_cast<size_t>(j) * nx + i] = rhs(i, j) - mean;

    fftw_execute(impl_->fwd);

    auto* spec = reinterpret_cast<std::complex<double>*>(impl_->spec_buf);

    // k = 0: pure Neumann column; integrate the flux with chi(0) pinned to 0
    {
        std::vector<std::complex<double>> col(static_cast<size_t>(ny));
        for (int j = 0; j < ny; ++j) col[static_cast<size_t>(j)] = spec[static_cast<size_t>(j) * nk];
        std::complex<double> flux = 0.0, val = 0.0;
        std::vector<std::complex<double>> out(static_cast<size_t>(ny));
        out[0] = 0.0;
        for (int j = 0; j < ny - 1; ++j) {
            // flux(j+1/2) = flux(j-1/2) + hy * rhs_j, flux(-1/2) = 0
            flux += g.hy() * col[static_cast<size_t>(j)];
            val = out[static_cast<size_t>(j)] + g.hy() * flux;
            out[static_cast<size_t>(j + 1)] = val;
        }
        for (int j = 0; j < ny; ++j) spec[static_cast<size_t>(j) * nk] = out[static_cast<size_t>(j)];
    }

    // k >= 1: Thomas solve of (D2_y - lambda_k) chi = rhs with Neumann ends
    std::vector<std::complex<double>> d(static_cast<size_t>(ny)), rhsc(static_cast<size_t>(ny));
    std::vector<double> diag(static_cast<size_t>(ny)), cp(static_cast<size_t>(ny));
    for (int k = 1; k < nk; ++k) {
        const double lam = impl_->lambda_x[static_cast<size_t>(k)];
        for (int j = 0; j < ny; ++j) {
            rhsc[static_cast<size_t>(j)] = spec[static_cast<size_t>(j) * nk + k];
            double b = -2.0 * ihy2 - lam;
            if (j == 0 || j == ny - 1) b = -ihy2 - lam;  // folded Neumann ghost
            diag[static_cast<size_t>(j)] = b;
        }
        // forward sweep (off-diagonals are ihy2)
        cp[0] = ihy2 / diag[0];
        d[0] = rhsc[0] / diag[0];
        for (int j = 1; j < ny; ++j) {
            double m = diag[static_cast<size_t>(j)] - ihy2 * cp[static_cast<size_t>(j - 1)];
            cp[static_cast<size_t>(j)] = ihy2 / m;
            d[static_cast<size_t>(j)] =
                (rhsc[static_cast<size_t>(j)] - ihy2 * d[static_cast<size_t>(j - 1)]) / m;
        }
        for (int j = ny - 2; j >= 0; --j)
            d[static_cast<size_t>(j)] -= cp[static_cast<size_t>(j)] * d[static_cast<size_t>(j + 1)];
        for (int j = 0; j < ny; ++j) spec[static_cast<size_t>(j) * nk + k] = d[static_cast<size_t>(j)];
    }

    fftw_execute(impl_->bwd);

    if (chi.nx() != nx || chi.ny() != ny) chi = Field2D(nx, ny);
    const double scale = 1.0 / nx;
    double cmean = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double vv = impl_->real_buf[static_cast<size_t>(j) * nx + i] * scale;
            chi(i, j) = vv;
            cmean += vv;
        }
    cmean /= static_cast<double>(nx) * ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) chi(i, j) -= cmean;
}

}  // namespace rheo
