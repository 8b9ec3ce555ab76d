#pragma once

#include <cmath>
#include <cstdint>

#include "rheo/tensor.hpp"

namespace rheo {

/// splitmix64-seeded xorshift generator. Hand-rolled so that sampled
/// reports are bit-identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        // splitmix64 scramble of the seed
        uint64_t z = seed + 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        state_ = z ^ (z >> 31);
        if (state_ == 0) state_ = 0x1ull;
    }

    uint64_t next_u64() {
        uint64_t x = state_;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        state_ = x;
        return x;
    }

    /// uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// standard normal via Box-Muller (one value per call, cached pair)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// random symmetric tensor with iid normal independent components
    SymTensor2 normal_tensor(int dim) {
        SymTensor2 t(dim);
        for (int k = 0; k < t.ncomp(); ++k) t.comp(k) = normal();
        return t;
    }

    /// random symmetric tensor with Frobenius norm close to radius
    SymTensor2 shell_tensor(int dim, double radius) {
        SymTensor2 t = normal_tensor(dim);
        double n = frobenius_norm(t);
        while (n < 1e-12) {
            t = normal_tensor(dim);
            n = frobenius_norm(t);
        }
        double mag = radius * uniform(0.8, 1.2);
        return (mag / n) * t;
    }

    Vec normal_vec(int dim) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = normal();
        return v;
    }

    Vec shell_vec(int dim, double radius) {
        Vec v = normal_vec(dim);
        double n = norm(v);
        while (n < 1e-12) {
            v = normal_vec(dim);
            n = norm(v);
        }
        double mag = radius * uniform(0.8, 1.2);
        return (mag / n) * v;
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rheo
