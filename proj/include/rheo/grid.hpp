#pragma once

#include <memory>
#include <vector>

namespace rheo {

/// Rectangular channel grid: periodic in x, walls at y = 0 and y = ly.
/// MAC staggering: u on x-faces (nx*ny), v on y-faces (nx*(ny+1), wall rows
/// identically zero), p and normal stresses at centers, shear stress at
/// nodes (nx*(ny+1)).
struct Grid {
    int nx = 4, ny = 4;
    double lx = 1.0, ly = 1.0;

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
    double cell_volume() const { return hx() * hy(); }

    // coordinates
    double xu(int i) const { return i * hx(); }             // u-face / node x
    double xc(int i) const { return (i + 0.5) * hx(); }     // center x
    double yc(int j) const { return (j + 0.5) * hy(); }     // center / u-face y
    double yn(int j) const { return j * hy(); }             // node / v-face y

    void validate() const;
};

/// Dense 2D scalar field with explicit extents (row = j, column = i).
class Field2D {
public:
    Field2D() = default;
    Field2D(int nx, int ny, double init = 0.0)
        : nx_(nx), ny_(ny), data_(static_cast<size_t>(nx) * static_cast<size_t>(ny), init) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(j) * nx_ + i]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(j) * nx_ + i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    size_t size() const { return data_.size(); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

private:
    int nx_ = 0, ny_ = 0;
    std::vector<double> data_;
};

/// max |div v| over cells (u periodic in x, v including wall rows)
double max_divergence(const Grid& g, const Field2D& u, const Field2D& v);

/// Direct pressure-Poisson solver (FFT in x, tridiagonal solve in y) for
/// the MAC Laplacian with periodic x and homogeneous Neumann y. Solutions
/// are mean-free; nx must be a power of two for the transform.
class PoissonSolver {
public:
    explicit PoissonSolver(const Grid& g);
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    /// Solves lap(chi) = rhs - mean(rhs); returns mean-free chi on centers.
    void solve(const Field2D& rhs, Field2D& chi) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rheo
