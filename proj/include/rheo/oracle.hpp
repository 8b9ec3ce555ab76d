#pragma once

#include <functional>

#include "rheo/relations.hpp"

namespace rheo {

/// Adaptive Simpson quadrature, absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10);

/// Steady force-driven channel profile built by quadrature of the scalar
/// constitutive maps; never touches the flow solver. Walls at y_hat = -H, H;
/// along-channel force f; shear stress S_xy(y_hat) = -f * y_hat.
class ChannelOracle {
public:
    ChannelOracle(BulkRelation bulk, BoundaryRelation boundary, double half_width, double force,
                  double quad_tol = 1e-10);

    double half_width() const { return H_; }
    double force() const { return f_; }

    /// wall traction magnitude f*H
    double wall_traction() const;
    /// tangential fluid velocity at the wall
    double slip_velocity() const;
    /// u(y_hat), y_hat in [-H, H]
    double velocity(double y_hat) const;
    /// extent of the unyielded core for activated stress relations (0 if none)
    double plug_half_width() const;

private:
    BulkRelation bulk_;
    BoundaryRelation boundary_;
    double H_, f_, tol_;
    double u_slip_;
};

/// Steady wall-driven Couette flow (bottom wall at rest, top wall moving at
/// u_top): constant shear stress found by a monotone scalar solve.
class CouetteOracle {
public:
    CouetteOracle(BulkRelation bulk, BoundaryRelation boundary, double half_width, double u_top,
                  double tol = 1e-12);

    double shear_stress() const { return sigma_; }
    double velocity(double y_hat) const;

private:
    BulkRelation bulk_;
    BoundaryRelation boundary_;
    double H_, u_top_, sigma_;
};

/// Slowest decaying wavenumber of the Stokes channel with Navier slip:
/// tan(lambda H) = gamma / (nu lambda), lambda in (0, pi/(2H)).
double decay_mode_wavenumber(double nu, double gamma, double half_width);

}  // namespace rheo
