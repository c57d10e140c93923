#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace medbounds {

/// Deterministic random source. Draws are built directly from the engine's
/// 64-bit output so streams are reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Generator for the index-th independent substream of a master seed.
    static Rng substream(std::uint64_t master, std::uint64_t index) {
        return Rng(mix(mix(master) ^ (index + 0x9e3779b97f4a7c15ULL)));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }

    double exponential() { return -std::log(uniform_open_low()); }

    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Index drawn from a pmf by inverse CDF.
    std::size_t categorical(const std::vector<double>& pmf) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            acc += pmf[k];
            if (u < acc) return k;
        }
        for (std::size_t k = pmf.size(); k-- > 0;) {
            if (pmf[k] > 0.0) return k;
        }
        return 0;
    }

    /// Dirichlet(1, ..., 1).
    std::vector<double> dirichlet(std::size_t k) {
        std::vector<double> out(k);
        double total = 0.0;
        for (auto& v : out) {
            v = exponential();
            total += v;
        }
        for (auto& v : out) v /= total;
        return out;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

/// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace medbounds
