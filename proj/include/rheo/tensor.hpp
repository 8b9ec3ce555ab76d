#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace rheo {

/// Symmetric d x d tensor (d = 2 or 3), upper triangle stored.
/// Component order: 2D [xx, yy, xy]; 3D [xx, yy, zz, xy, xz, yz].
/// Holds stresses S and symmetric velocity gradients D; inner() is the
/// full double contraction A:B (off-diagonal entries count twice).
class SymTensor2 {
public:
    SymTensor2() : dim_(2), a_{} {}

    explicit SymTensor2(int dim) : dim_(dim), a_{} {
        if (dim != 2 && dim != 3) throw std::invalid_argument("SymTensor2: dim must be 2 or 3");
    }

    static SymTensor2 zero(int dim) { return SymTensor2(dim); }

    static SymTensor2 identity(int dim) {
        SymTensor2 t(dim);
        for (int i = 0; i < dim; ++i) t.diag(i) = 1.0;
        return t;
    }

    static SymTensor2 diag2(double a, double b) {
        SymTensor2 t(2);
        t.a_[0] = a; t.a_[1] = b;
        return t;
    }

    static SymTensor2 offdiag2(double xy) {
        SymTensor2 t(2);
        t.a_[2] = xy;
        return t;
    }

    int dim() const { return dim_; }
    int ncomp() const { return dim_ * (dim_ + 1) / 2; }

    double& comp(int k) { return a_[static_cast<size_t>(k)]; }
    double comp(int k) const { return a_[static_cast<size_t>(k)]; }

    double& diag(int i) { return a_[static_cast<size_t>(i)]; }
    double diag(int i) const { return a_[static_cast<size_t>(i)]; }

    // (i,j) accessor, i <= j expected for writes
    double operator()(int i, int j) const {
        if (i == j) return a_[static_cast<size_t>(i)];
        return a_[static_cast<size_t>(off_index(i, j))];
    }
    double& at(int i, int j) {
        if (i == j) return a_[static_cast<size_t>(i)];
        return a_[static_cast<size_t>(off_index(i, j))];
    }

    SymTensor2& operator+=(const SymTensor2& o) {
        check_dim(o);
        for (int k = 0; k < ncomp(); ++k) a_[static_cast<size_t>(k)] += o.a_[static_cast<size_t>(k)];
        return *this;
    }
    SymTensor2& operator-=(const SymTensor2& o) {
        check_dim(o);
        for (int k = 0; k < ncomp(); ++k) a_[static_cast<size_t>(k)] -= o.a_[static_cast<size_t>(k)];
        return *this;
    }
    SymTensor2& operator*=(double c) {
        for (int k = 0; k < ncomp(); ++k) a_[static_cast<size_t>(k)] *= c;
        return *this;
    }

    friend SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
    friend SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
    friend SymTensor2 operator*(double c, SymTensor2 a) { return a *= c; }
    friend SymTensor2 operator*(SymTensor2 a, double c) { return a *= c; }

    bool finite() const {
        for (int k = 0; k < ncomp(); ++k)
            if (!std::isfinite(a_[static_cast<size_t>(k)])) return false;
        return true;
    }

private:
    int off_index(int i, int j) const {
        // 2D: (0,1)->2 ; 3D: (0,1)->3, (0,2)->4, (1,2)->5
        if (dim_ == 2) return 2;
        int lo = i < j ? i : j, hi = i < j ? j : i;
        if (lo == 0 && hi == 1) return 3;
        if (lo == 0 && hi == 2) return 4;
        return 5;
    }
    void check_dim(const SymTensor2& o) const {
        if (o.dim_ != dim_) throw std::invalid_argument("SymTensor2: dimension mismatch");
    }

    int dim_;
    std::array<double, 6> a_;
};

/// Double contraction A:B = sum_ij A_ij B_ij.
inline double inner(const SymTensor2& a, const SymTensor2& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += a.diag(i) * b.diag(i);
    for (int k = a.dim(); k < a.ncomp(); ++k) s += 2.0 * a.comp(k) * b.comp(k);
    return s;
}

inline double frobenius_norm(const SymTensor2& t) { return std::sqrt(inner(t, t)); }

/// Small fixed-capacity vector for boundary tractions / slip velocities.
class Vec {
public:
    Vec() : dim_(2), a_{} {}
    explicit Vec(int dim) : dim_(dim), a_{} {
        if (dim < 1 || dim > 3) throw std::invalid_argument("Vec: dim must be 1..3");
    }
    Vec(double x, double y) : dim_(2), a_{x, y, 0.0} {}
    Vec(double x, double y, double z) : dim_(3), a_{x, y, z} {}

    static Vec zero(int dim) { return Vec(dim); }

    int dim() const { return dim_; }
    double& operator[](int i) { return a_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return a_[static_cast<size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < dim_; ++i) a_[static_cast<size_t>(i)] += o[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < dim_; ++i) a_[static_cast<size_t>(i)] -= o[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (int i = 0; i < dim_; ++i) a_[static_cast<size_t>(i)] *= c;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double c, Vec a) { return a *= c; }
    friend Vec operator*(Vec a, double c) { return a *= c; }

    bool finite() const {
        for (int i = 0; i < dim_; ++i)
            if (!std::isfinite(a_[static_cast<size_t>(i)])) return false;
        return true;
    }

private:
    int dim_;
    std::array<double, 3> a_;
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

}  // namespace rheo
