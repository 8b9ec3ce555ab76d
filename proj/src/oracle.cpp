#include "rheo/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace rheo {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// ---------------------------------------------------------------------------

ChannelOracle::ChannelOracle(BulkRelation bulk, BoundaryRelation boundary, double half_width,
                             double force, double quad_tol)
    : bulk_(std::move(bulk)), boundary_(std::move(boundary)), H_(half_width), f_(force),
      tol_(quad_tol) {
    if (!(H_ > 0.0)) throw std::invalid_argument("oracle: half width must be positive");
    if (f_ < 0.0) throw std::invalid_argument("oracle: force must be >= 0");
    if (!bulk_.isotropic()) throw std::invalid_argument("oracle: bulk relation must be isotropic");
    u_slip_ = boundary_.scalar_slip_from_traction(f_ * H_);
}

double ChannelOracle::wall_traction() const { return f_ * H_; }
double ChannelOracle::slip_velocity() const { return u_slip_; }

double ChannelOracle::velocity(double y_hat) const {
    double ay = std::min(std::fabs(y_hat), H_);
    if (f_ == 0.0) return u_slip_;
    // |u'(t)| = sqrt(2) * |D|(|S| = sqrt(2) f t); integrate from |y| to the wall
    auto integrand = [&](double t) {
        return std::sqrt(2.0) * std::fabs(bulk_.scalar_rate_from_stress(std::sqrt(2.0) * f_ * t));
    };
    return u_slip_ + adaptive_simpson(integrand, ay, H_, tol_);
}

double ChannelOracle::plug_half_width() const {
    double tau = 0.0;
    if (bulk_.kind() == BulkKind::bingham || bulk_.kind() == BulkKind::herschel_bulkley)
        tau = bulk_.param("tau_star");
    if (tau <= 0.0 || f_ <= 0.0) return 0.0;
    // the rate vanishes where |S| = sqrt(2) f |y| stays below tau_star
    return std::min(H_, tau / (std::sqrt(2.0) * f_));
}

// ---------------------------------------------------------------------------

CouetteOracle::CouetteOracle(BulkRelation bulk, BoundaryRelation boundary, double half_width,
                             double u_top, double tol)
    : bulk_(std::move(bulk)), boundary_(std::move(boundary)), H_(half_width), u_top_(u_top) {
    if (!(H_ > 0.0)) throw std::invalid_argument("oracle: half width must be positive");
    if (u_top_ < 0.0) throw std::invalid_argument("oracle: u_top must be >= 0");
    // u_top = 2 slip(sigma) + 2 sqrt(2) H rate(sqrt(2) sigma), increasing in sigma
    auto gap = [&](double sigma) {
        return 2.0 * boundary_.scalar_slip_from_traction(sigma) +
               2.0 * std::sqrt(2.0) * H_ *
                   std::fabs(bulk_.scalar_rate_from_stress(std::sqrt(2.0) * sigma));
    };
    sigma_ = u_top_ > 0.0 ? solve_increasing(gap, u_top_, 1.0 + u_top_, tol) : 0.0;
}

double CouetteOracle::velocity(double y_hat) const {
    double slip = boundary_.scalar_slip_from_traction(sigma_);
    double rate = std::sqrt(2.0) * std::fabs(bulk_.scalar_rate_from_stress(std::sqrt(2.0) * sigma_));
    return slip + rate * (y_hat + H_);
}

// ---------------------------------------------------------------------------

double decay_mode_wavenumber(double nu, double gamma, double half_width) {
    if (!(nu > 0.0 && gamma > 0.0 && half_width > 0.0))
        throw std::invalid_argument("decay_mode_wavenumber: positive arguments required");
    const double H = half_width;
    auto g = [&](double lam) { return nu * lam * std::tan(lam * H) - gamma; };
    double lo = 1e-12, hi = M_PI / (2.0 * H) - 1e-12;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rheo
