#include "rheo/relations.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace rheo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pos(double x) { return x > 0.0 ? x : 0.0; }
double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// asinh(x)/x, stable near zero
double asinhc(double x) {
    double ax = std::fabs(x);
    if (ax < 1e-4) return 1.0 - x * x / 6.0 + 3.0 * x * x * x * x / 40.0;
    return std::asinh(ax) / ax;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double solve_increasing(const std::function<double(double)>& f, double target, double b0,
                        double tol, int max_iter) {
    double lo = 0.0, flo = f(0.0);
    if (flo > target + tol) throw std::runtime_error("solve_increasing: f(0) above target");
    if (std::fabs(flo - target) <= tol) return 0.0;
    double hi = b0 > 0.0 ? b0 : 1.0;
    int grow = 0;
    while (f(hi) < target) {
        hi *= 2.0;
        if (++grow > 200) throw std::runtime_error("solve_increasing: bracket growth failed");
    }
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= tol * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// BulkRelation
// ---------------------------------------------------------------------------

std::string to_string(BulkKind k) {
    switch (k) {
        case BulkKind::navier_stokes: return "navier_stokes";
        case BulkKind::power_law: return "power_law";
        case BulkKind::carreau: return "carreau";
        case BulkKind::carreau_yasuda: return "carreau_yasuda";
        case BulkKind::cross: return "cross";
        case BulkKind::eyring: return "eyring";
        case BulkKind::sisko: return "sisko";
        case BulkKind::ellis: return "ellis";
        case BulkKind::seely: return "seely";
        case BulkKind::glen: return "glen";
        case BulkKind::blatter: return "blatter";
        case BulkKind::bingham: return "bingham";
        case BulkKind::herschel_bulkley: return "herschel_bulkley";
        case BulkKind::activated_euler: return "activated_euler";
        case BulkKind::shifted_power: return "shifted_power";
        case BulkKind::custom: return "custom";
    }
    return "custom";
}

BulkKind bulk_kind_from_string(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(BulkKind::custom); ++k)
        if (to_string(static_cast<BulkKind>(k)) == s) return static_cast<BulkKind>(k);
    throw std::invalid_argument("unknown bulk relation kind: " + s);
}

BulkRelation::BulkRelation(BulkKind kind, std::map<std::string, double> params)
    : kind_(kind), params_(std::move(params)) {
    require(kind_ != BulkKind::custom, "use BulkRelation::custom for custom relations");
    validate();
}

BulkRelation BulkRelation::custom(CustomBulk impl) {
    BulkRelation r;
    r.kind_ = BulkKind::custom;
    r.growth_ = impl.growth_exponent;
    r.orientation_ = impl.orientation;
    r.custom_ = std::move(impl);
    require(bool(r.custom_.residual), "custom bulk relation needs a residual");
    require(r.growth_ > 1.0, "growth exponent must exceed 1");
    return r;
}

double BulkRelation::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end())
        throw std::invalid_argument("relation " + to_string(kind_) + ": missing parameter " + name);
    return it->second;
}

void BulkRelation::validate() {
    auto need_pos = [&](const char* n) { require(param(n) > 0.0, std::string(n) + " must be > 0"); };
    auto need_nonneg = [&](const char* n) {
        require(param(n) >= 0.0, std::string(n) + " must be >= 0");
    };
    auto only = [&](std::initializer_list<const char*> names) {
        for (const auto& [k, v] : params_) {
            (void)v;
            bool ok = false;
            for (const char* n : names)
                if (k == n) ok = true;
            require(ok, "relation " + to_string(kind_) + ": unknown parameter " + k);
        }
    };
    switch (kind_) {
        case BulkKind::navier_stokes:
            only({"nu"});
            need_pos("nu");
            growth_ = 2.0;
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::power_law:
            only({"nu0", "r"});
            need_pos("nu0");
            require(param("r") > 1.0, "power_law: r must be > 1");
            growth_ = param("r");
            orientation_ = growth_ >= 2.0 ? Orientation::stress_explicit : Orientation::rate_explicit;
            break;
        case BulkKind::carreau:
        case BulkKind::cross:
            only({"nu0", "nu_inf", "A", "n"});
            need_pos("nu0");
            need_pos("nu_inf");
            need_pos("A");
            growth_ = 2.0;
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::carreau_yasuda:
            only({"nu0", "nu_inf", "A", "a", "n"});
            need_pos("nu0");
            need_pos("nu_inf");
            need_pos("A");
            need_pos("a");
            growth_ = 2.0;
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::eyring:
            only({"nu0", "nu_inf", "A"});
            need_pos("nu0");
            need_pos("nu_inf");
            need_pos("A");
            growth_ = 2.0;
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::sisko:
            only({"nu_inf", "A", "n"});
            need_pos("nu_inf");
            need_pos("A");
            need_pos("n");
            growth_ = std::max(2.0, param("n") + 1.0);
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::ellis:
            only({"nu0", "A", "n"});
            need_pos("nu0");
            need_pos("A");
            require(param("n") >= 1.0, "ellis: n must be >= 1");
            growth_ = (param("n") + 1.0) / param("n");
            orientation_ = Orientation::rate_explicit;
            break;
        case BulkKind::seely:
            only({"nu0", "nu_inf", "tau0"});
            need_pos("nu0");
            need_pos("nu_inf");
            need_pos("tau0");
            require(param("nu0") >= param("nu_inf"), "seely: nu0 must be >= nu_inf");
            growth_ = 2.0;
            orientation_ = Orientation::rate_explicit;
            break;
        case BulkKind::glen:
            only({"A", "m"});
            need_pos("A");
            require(param("m") >= 1.0, "glen: m must be >= 1");
            growth_ = (param("m") + 1.0) / param("m");
            orientation_ = Orientation::rate_explicit;
            break;
        case BulkKind::blatter:
            only({"A", "n", "tau0"});
            need_pos("A");
            need_pos("tau0");
            require(param("n") >= 1.0, "blatter: n must be >= 1");
            growth_ = (param("n") + 1.0) / param("n");
            orientation_ = Orientation::rate_explicit;
            break;
        case BulkKind::bingham:
            only({"nu", "tau_star"});
            need_pos("nu");
            need_nonneg("tau_star");
            growth_ = 2.0;
            orientation_ = Orientation::rate_explicit;
            break;
        case BulkKind::herschel_bulkley:
            only({"nu0", "r", "tau_star"});
            need_pos("nu0");
            need_nonneg("tau_star");
            require(param("r") > 1.0, "herschel_bulkley: r must be > 1");
            growth_ = param("r");
            orientation_ = Orientation::rate_explicit;
            break;
        case BulkKind::activated_euler:
            only({"nu", "delta_star"});
            need_pos("nu");
            need_nonneg("delta_star");
            growth_ = 2.0;
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::shifted_power:
            only({"nu0", "r"});
            need_pos("nu0");
            growth_ = param("r") > 1.0 ? param("r") : 2.0;
            orientation_ = Orientation::stress_explicit;
            break;
        case BulkKind::custom:
            break;
    }
}

namespace {

// generalized viscosity nu(|D|) for the stress-explicit family
double bulk_viscosity(BulkKind k, const std::map<std::string, double>& p, double x) {
    switch (k) {
        case BulkKind::navier_stokes: return p.at("nu");
        case BulkKind::power_law: return p.at("nu0") * std::pow(x, p.at("r") - 2.0);
        case BulkKind::carreau:
            return p.at("nu_inf") +
                   (p.at("nu0") - p.at("nu_inf")) * std::pow(1.0 + p.at("A") * x * x, -p.at("n") / 2.0);
        case BulkKind::carreau_yasuda:
            return p.at("nu_inf") + (p.at("nu0") - p.at("nu_inf")) *
                                        std::pow(1.0 + p.at("A") * std::pow(x, p.at("a")),
                                                 -p.at("n") / p.at("a"));
        case BulkKind::cross:
            return p.at("nu_inf") +
                   (p.at("nu0") - p.at("nu_inf")) / (1.0 + p.at("A") * std::pow(x, p.at("n")));
        case BulkKind::eyring:
            return p.at("nu_inf") + (p.at("nu0") - p.at("nu_inf")) * asinhc(p.at("A") * x);
        case BulkKind::sisko: return p.at("nu_inf") + p.at("A") * std::pow(x, p.at("n") - 1.0);
        case BulkKind::shifted_power: return p.at("nu0") * std::pow(1.0 + x, p.at("r") - 2.0);
        default: break;
    }
    throw std::logic_error("bulk_viscosity: not a stress-explicit kind");
}

// rate coefficient: D*(S) = rate_coef(|S|) * S for the rate-explicit family
double rate_coef(BulkKind k, const std::map<std::string, double>& p, double x) {
    switch (k) {
        case BulkKind::navier_stokes: return 1.0 / (2.0 * p.at("nu"));
        case BulkKind::ellis:
            return (1.0 + p.at("A") * std::pow(x, p.at("n") - 1.0)) / (2.0 * p.at("nu0"));
        case BulkKind::seely: {
            double nu = p.at("nu_inf") + (p.at("nu0") - p.at("nu_inf")) *
                                             std::exp(-x / (p.at("tau0") * p.at("tau0")));
            return 1.0 / (2.0 * nu);
        }
        case BulkKind::glen: return p.at("A") * std::pow(x, p.at("m") - 1.0);
        case BulkKind::blatter:
            return std::pow(x * x + p.at("tau0") * p.at("tau0"), (p.at("n") - 1.0) / 2.0) /
                   (2.0 * p.at("A"));
        case BulkKind::bingham:
            return x > 0.0 ? pos(x - p.at("tau_star")) / (2.0 * p.at("nu") * x) : 0.0;
        case BulkKind::power_law: {
            double r = p.at("r");
            double rp = r / (r - 1.0);
            return std::pow(2.0 * p.at("nu0"), -1.0 / (r - 1.0)) * std::pow(x, rp - 2.0);
        }
        default: break;
    }
    throw std::logic_error("rate_coef: not a rate-explicit kind");
}

}  // namespace

SymTensor2 BulkRelation::eval(const SymTensor2& S, const SymTensor2& D) const {
    if (S.dim() != D.dim()) throw std::invalid_argument("eval_bulk: dimension mismatch");
    if (!S.finite() || !D.finite()) throw std::invalid_argument("eval_bulk: non-finite input");
    if (kind_ == BulkKind::custom) return custom_.residual(S, D);

    const double ns = frobenius_norm(S);
    const double nd = frobenius_norm(D);
    if (kind_ == BulkKind::herschel_bulkley) {
        // (|S|-tau)+ S/|S| - 2 nu0 (1+|D|^2)^{(r-2)/2} D
        double a = ns > 0.0 ? pos(ns - param("tau_star")) / ns : 0.0;
        double b = 2.0 * param("nu0") * std::pow(1.0 + nd * nd, (param("r") - 2.0) / 2.0);
        return a * S - b * D;
    }
    if (kind_ == BulkKind::activated_euler) {
        double coef = nd > 0.0 ? 2.0 * param("nu") * pos(nd - param("delta_star")) / nd : 0.0;
        return S - coef * D;
    }
    if (orientation_ == Orientation::stress_explicit) {
        double coef = nd > 0.0 ? 2.0 * bulk_viscosity(kind_, params_, nd) : 0.0;
        // power-law with r<3 has nu(0) singular or zero; the product is 0 at D=0
        return S - coef * D;
    }
    double coef = ns > 0.0 ? rate_coef(kind_, params_, ns) : rate_coef_origin();
    return coef * S - D;
}

// limit of rate_coef(|S|) as |S| -> 0 where finite (keeps the residual exact at S=0)
double BulkRelation::rate_coef_origin() const {
    switch (kind_) {
        case BulkKind::seely: return rate_coef(kind_, params_, 0.0);
        case BulkKind::blatter: return rate_coef(kind_, params_, 0.0);
        case BulkKind::ellis: return param("n") > 1.0 ? 1.0 / (2.0 * param("nu0"))
                                                      : rate_coef(kind_, params_, 0.0);
        default: return 0.0;  // coef * S with S = 0 is 0 anyway
    }
}

double BulkRelation::scalar_residual(double s, double d) const {
    if (kind_ == BulkKind::custom) {
        if (!custom_.scalar_residual)
            throw std::runtime_error("custom bulk relation has no scalar reduction");
        return custom_.scalar_residual(s, d);
    }
    const double as = std::fabs(s), ad = std::fabs(d);
    if (kind_ == BulkKind::herschel_bulkley)
        return pos(as - param("tau_star")) * sgn(s) -
               2.0 * param("nu0") * std::pow(1.0 + ad * ad, (param("r") - 2.0) / 2.0) * d;
    if (kind_ == BulkKind::activated_euler)
        return s - 2.0 * param("nu") * pos(ad - param("delta_star")) * sgn(d);
    if (orientation_ == Orientation::stress_explicit)
        return s - (ad > 0.0 ? 2.0 * bulk_viscosity(kind_, params_, ad) * d : 0.0);
    return (as > 0.0 ? rate_coef(kind_, params_, as) : rate_coef_origin()) * s - d;
}

bool BulkRelation::has_explicit_stress() const {
    switch (kind_) {
        case BulkKind::navier_stokes:
        case BulkKind::power_law:
        case BulkKind::carreau:
        case BulkKind::carreau_yasuda:
        case BulkKind::cross:
        case BulkKind::eyring:
        case BulkKind::sisko:
        case BulkKind::activated_euler:
        case BulkKind::shifted_power: return true;
        default: return false;
    }
}

bool BulkRelation::has_explicit_rate() const {
    switch (kind_) {
        case BulkKind::navier_stokes:
        case BulkKind::power_law:
        case BulkKind::ellis:
        case BulkKind::seely:
        case BulkKind::glen:
        case BulkKind::blatter:
        case BulkKind::bingham: return true;
        default: return false;
    }
}

std::optional<SymTensor2> BulkRelation::explicit_stress(const SymTensor2& D) const {
    if (!has_explicit_stress()) return std::nullopt;
    if (!D.finite()) throw std::invalid_argument("explicit_stress: non-finite input");
    const double nd = frobenius_norm(D);
    if (kind_ == BulkKind::activated_euler) {
        double coef = nd > 0.0 ? 2.0 * param("nu") * pos(nd - param("delta_star")) / nd : 0.0;
        return coef * D;
    }
    if (nd == 0.0) return SymTensor2::zero(D.dim());
    return (2.0 * bulk_viscosity(kind_, params_, nd)) * D;
}

std::optional<SymTensor2> BulkRelation::explicit_rate(const SymTensor2& S) const {
    if (!has_explicit_rate()) return std::nullopt;
    if (!S.finite()) throw std::invalid_argument("explicit_rate: non-finite input");
    const double ns = frobenius_norm(S);
    if (ns == 0.0) return SymTensor2::zero(S.dim());
    return rate_coef(kind_, params_, ns) * S;
}

double BulkRelation::scalar_stress_from_rate(double d) const {
    if (d == 0.0) return 0.0;
    switch (kind_) {
        case BulkKind::bingham:
            return sgn(d) * param("tau_star") + 2.0 * param("nu") * d;
        case BulkKind::herschel_bulkley:
            return sgn(d) * param("tau_star") +
                   2.0 * param("nu0") * std::pow(1.0 + d * d, (param("r") - 2.0) / 2.0) * d;
        case BulkKind::activated_euler:
            return 2.0 * param("nu") * pos(std::fabs(d) - param("delta_star")) * sgn(d);
        default: break;
    }
    if (has_explicit_stress() || kind_ == BulkKind::power_law)
        return 2.0 * bulk_viscosity(kind_, params_, std::fabs(d)) * d;
    // rate-explicit: invert the monotone scalar map
    double ad = std::fabs(d);
    double s = solve_increasing([&](double x) { return rate_coef(kind_, params_, x) * x; }, ad,
                                1.0 + ad);
    return sgn(d) * s;
}

double BulkRelation::scalar_rate_from_stress(double s) const {
    if (s == 0.0) return 0.0;
    switch (kind_) {
        case BulkKind::activated_euler:
            return sgn(s) * (param("delta_star") + std::fabs(s) / (2.0 * param("nu")));
        case BulkKind::herschel_bulkley: {
            double rhs = pos(std::fabs(s) - param("tau_star"));
            if (rhs == 0.0) return 0.0;
            double r = param("r"), nu0 = param("nu0");
            double ad = solve_increasing(
                [&](double x) { return 2.0 * nu0 * std::pow(1.0 + x * x, (r - 2.0) / 2.0) * x; },
                rhs, 1.0 + rhs);
            return sgn(s) * ad;
        }
        default: break;
    }
    if (has_explicit_rate()) return rate_coef(kind_, params_, std::fabs(s)) * s;
    // stress-explicit: invert nu(|D|)-type map (monotone for catalog parameters)
    double as = std::fabs(s);
    double ad = solve_increasing(
        [&](double x) { return x > 0.0 ? 2.0 * bulk_viscosity(kind_, params_, x) * x : 0.0; }, as,
        1.0 + as);
    return sgn(s) * ad;
}

double BulkRelation::kink_distance(const SymTensor2& S, const SymTensor2& D) const {
    const double ns = frobenius_norm(S);
    const double nd = frobenius_norm(D);
    switch (kind_) {
        case BulkKind::bingham:
        case BulkKind::herschel_bulkley: return std::fabs(ns - param("tau_star"));
        case BulkKind::activated_euler: return std::fabs(nd - param("delta_star"));
        case BulkKind::power_law: return param("r") == 2.0 ? kInf
                                         : (orientation_ == Orientation::stress_explicit ? nd : ns);
        case BulkKind::carreau_yasuda: return param("a") == 2.0 ? kInf : nd;
        case BulkKind::cross: return nd;
        case BulkKind::sisko: return param("n") == 1.0 ? kInf : nd;
        case BulkKind::ellis: return param("n") == 1.0 ? kInf : ns;
        case BulkKind::seely: return ns;
        case BulkKind::glen: return param("m") == 1.0 ? kInf : ns;
        case BulkKind::shifted_power: return param("r") == 2.0 ? kInf : nd;
        default: return kInf;
    }
}

std::map<std::string, std::string> BulkRelation::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["kind"] = to_string(kind_);
    for (const auto& [k, v] : params_) kv[k] = fmt(v);
    return kv;
}

BulkRelation BulkRelation::from_kv(const std::map<std::string, std::string>& kv) {
    auto it = kv.find("kind");
    if (it == kv.end()) throw std::invalid_argument("relation config: missing 'kind'");
    BulkKind kind = bulk_kind_from_string(it->second);
    std::map<std::string, double> params;
    for (const auto& [k, v] : kv) {
        if (k == "kind") continue;
        size_t pe = 0;
        double x = std::stod(v, &pe);
        if (pe != v.size()) throw std::invalid_argument("relation config: bad number for " + k);
        params[k] = x;
    }
    return BulkRelation(kind, std::move(params));
}

// ---------------------------------------------------------------------------
// BoundaryRelation
// ---------------------------------------------------------------------------

std::string to_string(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::navier_slip: return "navier_slip";
        case BoundaryKind::power_slip: return "power_slip";
        case BoundaryKind::regularized_power_slip: return "regularized_power_slip";
        case BoundaryKind::stick_slip: return "stick_slip";
        case BoundaryKind::activated_navier_slip: return "activated_navier_slip";
        case BoundaryKind::custom: return "custom";
    }
    return "custom";
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(BoundaryKind::custom); ++k)
        if (to_string(static_cast<BoundaryKind>(k)) == s) return static_cast<BoundaryKind>(k);
    throw std::invalid_argument("unknown boundary relation kind: " + s);
}

BoundaryRelation::BoundaryRelation(BoundaryKind kind, std::map<std::string, double> params)
    : kind_(kind), params_(std::move(params)) {
    require(kind_ != BoundaryKind::custom, "use BoundaryRelation::custom for custom relations");
    validate();
}

BoundaryRelation BoundaryRelation::custom(CustomBoundary impl) {
    BoundaryRelation r;
    r.kind_ = BoundaryKind::custom;
    r.growth_ = impl.growth_exponent;
    r.custom_ = std::move(impl);
    require(bool(r.custom_.residual), "custom boundary relation needs a residual");
    require(r.growth_ > 1.0, "growth exponent must exceed 1");
    return r;
}

double BoundaryRelation::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end())
        throw std::invalid_argument("relation " + to_string(kind_) + ": missing parameter " + name);
    return it->second;
}

void BoundaryRelation::validate() {
    auto only = [&](std::initializer_list<const char*> names) {
        for (const auto& [k, v] : params_) {
            (void)v;
            bool ok = false;
            for (const char* n : names)
                if (k == n) ok = true;
            require(ok, "relation " + to_string(kind_) + ": unknown parameter " + k);
        }
    };
    switch (kind_) {
        case BoundaryKind::navier_slip:
            only({"gamma"});
            require(param("gamma") > 0.0, "gamma must be > 0");
            growth_ = 2.0;
            break;
        case BoundaryKind::power_slip:
        case BoundaryKind::regularized_power_slip:
            only({"gamma", "q"});
            require(param("gamma") > 0.0, "gamma must be > 0");
            require(param("q") > 1.0, "q must be > 1");
            growth_ = param("q");
            break;
        case BoundaryKind::stick_slip:
            only({"sigma_star"});
            require(param("sigma_star") >= 0.0, "sigma_star must be >= 0");
            growth_ = 2.0;
            break;
        case BoundaryKind::activated_navier_slip:
            only({"gamma", "beta_star"});
            require(param("gamma") > 0.0, "gamma must be > 0");
            require(param("beta_star") >= 0.0, "beta_star must be >= 0");
            growth_ = 2.0;
            break;
        case BoundaryKind::custom:
            break;
    }
}

Vec BoundaryRelation::eval(const Vec& s, const Vec& v) const {
    if (s.dim() != v.dim()) throw std::invalid_argument("eval_boundary: dimension mismatch");
    if (!s.finite() || !v.finite()) throw std::invalid_argument("eval_boundary: non-finite input");
    if (kind_ == BoundaryKind::custom) return custom_.residual(s, v);
    const double nv = norm(v), nsv = norm(s);
    switch (kind_) {
        case BoundaryKind::navier_slip: return s - param("gamma") * v;
        case BoundaryKind::power_slip: {
            double q = param("q");
            if (q >= 2.0)
                return s - (nv > 0.0 ? param("gamma") * std::pow(nv, q - 2.0) : 0.0) * v;
            double qp = q / (q - 1.0);
            double kappa = std::pow(1.0 / param("gamma"), 1.0 / (q - 1.0));
            return (nsv > 0.0 ? kappa * std::pow(nsv, qp - 2.0) : 0.0) * s - v;
        }
        case BoundaryKind::regularized_power_slip:
            return s - param("gamma") * std::pow(1.0 + nv * nv, (param("q") - 2.0) / 2.0) * v;
        case BoundaryKind::stick_slip:
            return (nsv > 0.0 ? pos(nsv - param("sigma_star")) / nsv : 0.0) * s - v;
        case BoundaryKind::activated_navier_slip:
            return s - (nv > 0.0 ? param("gamma") * pos(nv - param("beta_star")) / nv : 0.0) * v;
        case BoundaryKind::custom: break;
    }
    throw std::logic_error("eval_boundary: unreachable");
}

double BoundaryRelation::scalar_residual(double s, double v) const {
    if (kind_ == BoundaryKind::custom) {
        if (!custom_.scalar_residual)
            throw std::runtime_error("custom boundary relation has no scalar reduction");
        return custom_.scalar_residual(s, v);
    }
    const double av = std::fabs(v), as = std::fabs(s);
    switch (kind_) {
        case BoundaryKind::navier_slip: return s - param("gamma") * v;
        case BoundaryKind::power_slip: {
            double q = param("q");
            if (q >= 2.0) return s - (av > 0.0 ? param("gamma") * std::pow(av, q - 2.0) * v : 0.0);
            double qp = q / (q - 1.0);
            double kappa = std::pow(1.0 / param("gamma"), 1.0 / (q - 1.0));
            return (as > 0.0 ? kappa * std::pow(as, qp - 2.0) * s : 0.0) - v;
        }
        case BoundaryKind::regularized_power_slip:
            return s - param("gamma") * std::pow(1.0 + av * av, (param("q") - 2.0) / 2.0) * v;
        case BoundaryKind::stick_slip: return pos(as - param("sigma_star")) * sgn(s) - v;
        case BoundaryKind::activated_navier_slip:
            return s - param("gamma") * pos(av - param("beta_star")) * sgn(v);
        case BoundaryKind::custom: break;
    }
    throw std::logic_error("scalar_residual: unreachable");
}

bool BoundaryRelation::has_explicit_traction() const {
    switch (kind_) {
        case BoundaryKind::navier_slip:
        case BoundaryKind::power_slip:
        case BoundaryKind::regularized_power_slip:
        case BoundaryKind::activated_navier_slip: return true;
        default: return false;
    }
}

bool BoundaryRelation::has_explicit_slip() const {
    switch (kind_) {
        case BoundaryKind::navier_slip:
        case BoundaryKind::power_slip:
        case BoundaryKind::stick_slip: return true;
        default: return false;
    }
}

std::optional<Vec> BoundaryRelation::explicit_traction(const Vec& v) const {
    if (!has_explicit_traction()) return std::nullopt;
    const double nv = norm(v);
    switch (kind_) {
        case BoundaryKind::navier_slip: return param("gamma") * v;
        case BoundaryKind::power_slip:
            return (nv > 0.0 ? param("gamma") * std::pow(nv, param("q") - 2.0) : 0.0) * v;
        case BoundaryKind::regularized_power_slip:
            return param("gamma") * std::pow(1.0 + nv * nv, (param("q") - 2.0) / 2.0) * v;
        case BoundaryKind::activated_navier_slip:
            return (nv > 0.0 ? param("gamma") * pos(nv - param("beta_star")) / nv : 0.0) * v;
        default: return std::nullopt;
    }
}

std::optional<Vec> BoundaryRelation::explicit_slip(const Vec& s) const {
    if (!has_explicit_slip()) return std::nullopt;
    const double ns = norm(s);
    switch (kind_) {
        case BoundaryKind::navier_slip: return (1.0 / param("gamma")) * s;
        case BoundaryKind::power_slip: {
            double q = param("q"), qp = q / (q - 1.0);
            double kappa = std::pow(1.0 / param("gamma"), 1.0 / (q - 1.0));
            return (ns > 0.0 ? kappa * std::pow(ns, qp - 2.0) : 0.0) * s;
        }
        case BoundaryKind::stick_slip:
            return (ns > 0.0 ? pos(ns - param("sigma_star")) / ns : 0.0) * s;
        default: return std::nullopt;
    }
}

double BoundaryRelation::scalar_traction_from_slip(double v) const {
    if (v == 0.0) return 0.0;
    switch (kind_) {
        case BoundaryKind::navier_slip: return param("gamma") * v;
        case BoundaryKind::power_slip:
            return param("gamma") * std::pow(std::fabs(v), param("q") - 2.0) * v;
        case BoundaryKind::regularized_power_slip:
            return param("gamma") * std::pow(1.0 + v * v, (param("q") - 2.0) / 2.0) * v;
        case BoundaryKind::stick_slip: return sgn(v) * param("sigma_star") + v;
        case BoundaryKind::activated_navier_slip:
            return param("gamma") * pos(std::fabs(v) - param("beta_star")) * sgn(v);
        case BoundaryKind::custom: {
            // residual is increasing in s for the canonical orientation
            double av = std::fabs(v);
            double s = solve_increasing([&](double x) { return scalar_residual(x, av); }, 0.0,
                                        1.0 + av);
            return sgn(v) * s;
        }
    }
    throw std::logic_error("scalar_traction_from_slip: unreachable");
}

double BoundaryRelation::scalar_slip_from_traction(double s) const {
    if (s == 0.0) return 0.0;
    switch (kind_) {
        case BoundaryKind::navier_slip: return s / param("gamma");
        case BoundaryKind::power_slip: {
            double q = param("q"), qp = q / (q - 1.0);
            return std::pow(1.0 / param("gamma"), 1.0 / (q - 1.0)) *
                   std::pow(std::fabs(s), qp - 2.0) * s;
        }
        case BoundaryKind::stick_slip: return pos(std::fabs(s) - param("sigma_star")) * sgn(s);
        case BoundaryKind::activated_navier_slip: {
            double flow = pos(std::fabs(s)) / param("gamma");
            return flow > 0.0 ? sgn(s) * (param("beta_star") + flow) : 0.0;
        }
        case BoundaryKind::regularized_power_slip: {
            double as = std::fabs(s);
            double av = solve_increasing([&](double x) { return scalar_traction_from_slip(x); },
                                         as, 1.0 + as);
            return sgn(s) * av;
        }
        case BoundaryKind::custom: {
            // residual is decreasing in v for the canonical orientation
            double as = std::fabs(s);
            double av = solve_increasing([&](double x) { return -scalar_residual(as, x); }, 0.0,
                                         1.0 + as);
            return sgn(s) * av;
        }
    }
    throw std::logic_error("scalar_slip_from_traction: unreachable");
}

double BoundaryRelation::kink_distance(const Vec& s, const Vec& v) const {
    switch (kind_) {
        case BoundaryKind::stick_slip: return std::fabs(norm(s) - param("sigma_star"));
        case BoundaryKind::activated_navier_slip:
            return std::fabs(norm(v) - param("beta_star"));
        case BoundaryKind::power_slip: return param("q") == 2.0 ? kInf
                                              : (param("q") > 2.0 ? norm(v) : norm(s));
        default: return kInf;
    }
}

std::map<std::string, std::string> BoundaryRelation::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["kind"] = to_string(kind_);
    for (const auto& [k, v] : params_) kv[k] = fmt(v);
    return kv;
}

BoundaryRelation BoundaryRelation::from_kv(const std::map<std::string, std::string>& kv) {
    auto it = kv.find("kind");
    if (it == kv.end()) throw std::invalid_argument("relation config: missing 'kind'");
    BoundaryKind kind = boundary_kind_from_string(it->second);
    std::map<std::string, double> params;
    for (const auto& [k, v] : kv) {
        if (k == "kind") continue;
        size_t pe = 0;
        double x = std::stod(v, &pe);
        if (pe != v.size()) throw std::invalid_argument("relation config: bad number for " + k);
        params[k] = x;
    }
    return BoundaryRelation(kind, std::move(params));
}

// ---------------------------------------------------------------------------

DissipationSplit dissipation_split(const BulkRelation& rel, const SymTensor2& S,
                                   const SymTensor2& D, double graph_tol) {
    if (rel.kind() != BulkKind::power_law && rel.kind() != BulkKind::navier_stokes)
        throw std::invalid_argument("dissipation_split: power-law relations only");
    double r, nu0;
    if (rel.kind() == BulkKind::navier_stokes) {
        r = 2.0;
        nu0 = rel.param("nu");
    } else {
        r = rel.param("r");
        nu0 = rel.param("nu0");
    }
    const double ns = frobenius_norm(S), nd = frobenius_norm(D);
    double res = frobenius_norm(rel.eval(S, D));
    if (res > graph_tol * (1.0 + ns + nd))
        throw std::invalid_argument("dissipation_split: (S,D) is not a graph point");
    DissipationSplit out;
    out.total = inner(S, D);
    out.rate_part = (2.0 * nu0 / r) * std::pow(nd, r);
    double rp = r / (r - 1.0);
    out.stress_part = ((r - 1.0) / (r * std::pow(2.0 * nu0, 1.0 / (r - 1.0)))) * std::pow(ns, rp);
    return out;
}

}  // namespace rheo
