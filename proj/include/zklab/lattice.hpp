#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace zk {

inline constexpr int kMaxDim = 3;

// Lattice point k = K/L stored as the integer vector K so that membership,
// negation and addition are exact.  Unused trailing components are zero.
struct IntVec {
    std::array<std::int32_t, kMaxDim> c{0, 0, 0};
    int dim = 3;

    std::int32_t operator[](int i) const { return c[static_cast<size_t>(i)]; }
    std::int32_t& operator[](int i) { return c[static_cast<size_t>(i)]; }

    friend IntVec operator+(IntVec a, const IntVec& b) {
        for (int i = 0; i < a.dim; ++i) a.c[static_cast<size_t>(i)] += b[i];
        return a;
    }
    friend IntVec operator-(IntVec a, const IntVec& b) {
        for (int i = 0; i < a.dim; ++i) a.c[static_cast<size_t>(i)] -= b[i];
        return a;
    }
    friend IntVec operator-(IntVec a) {
        for (int i = 0; i < a.dim; ++i)
            a.c[static_cast<size_t>(i)] = -a.c[static_cast<size_t>(i)];
        return a;
    }
    friend bool operator==(const IntVec& a, const IntVec& b) {
        return a.dim == b.dim && a.c == b.c;
    }
    friend bool operator<(const IntVec& a, const IntVec& b) {
        return a.c < b.c;  // lexicographic
    }
    std::int64_t norm2() const {
        std::int64_t s = 0;
        for (int i = 0; i < dim; ++i)
            s += std::int64_t(c[static_cast<size_t>(i)]) * c[static_cast<size_t>(i)];
        return s;
    }
    bool is_zero() const {
        for (int i = 0; i < dim; ++i)
            if (c[static_cast<size_t>(i)] != 0) return false;
        return true;
    }
    // 64-bit packing (21 bits per signed component), used as a hash key and
    // as the stable per-mode id for seeding.
    std::uint64_t pack() const {
        std::uint64_t p = 0;
        for (int i = 0; i < kMaxDim; ++i)
            p = (p << 21) | (static_cast<std::uint64_t>(
                                 c[static_cast<size_t>(i)] + (1 << 20)) &
                             0x1FFFFF);
        return p;
    }
};

struct IntVecHash {
    std::size_t operator()(const IntVec& v) const {
        std::uint64_t x = v.pack();
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return static_cast<std::size_t>(x);
    }
};

struct LatticeSpec {
    int dim;        // d >= 1
    double size;    // torus period L
    double radius;  // enumeration cutoff on |k|

    LatticeSpec(int d, double L, double r) : dim(d), size(L), radius(r) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("lattice dim");
        if (L <= 0 || r <= 0) throw std::invalid_argument("lattice size/radius");
    }
};

// Wave vector k = K/L as floating point components, kept alongside K.
struct WaveVector {
    std::array<double, kMaxDim> c{0.0, 0.0, 0.0};
    int dim = 3;

    double operator[](int i) const { return c[static_cast<size_t>(i)]; }
    double kx() const { return c[0]; }
    double norm2() const {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            s += c[static_cast<size_t>(i)] * c[static_cast<size_t>(i)];
        return s;
    }
    friend WaveVector operator+(WaveVector a, const WaveVector& b) {
        for (int i = 0; i < a.dim; ++i) a.c[static_cast<size_t>(i)] += b.c[static_cast<size_t>(i)];
        return a;
    }
    friend WaveVector operator-(WaveVector a, const WaveVector& b) {
        for (int i = 0; i < a.dim; ++i) a.c[static_cast<size_t>(i)] -= b.c[static_cast<size_t>(i)];
        return a;
    }
};

inline WaveVector to_wave(const IntVec& K, double L) {
    WaveVector w;
    w.dim = K.dim;
    for (int i = 0; i < K.dim; ++i)
        w.c[static_cast<size_t>(i)] = K[i] / L;
    return w;
}

struct AnisotropyCoefficients {
    std::array<double, kMaxDim> beta{1.0, 1.0, 1.0};
    int dim = 3;

    static AnisotropyCoefficients isotropic(int d) {
        AnisotropyCoefficients b;
        b.dim = d;
        return b;
    }
};

double dispersion(const WaveVector& k, const AnisotropyCoefficients& beta);
double resonance_phase(const WaveVector& k1, const WaveVector& k2,
                       const WaveVector& k, const AnisotropyCoefficients& beta);
WaveVector momentum_defect(const WaveVector& k1, const WaveVector& k2,
                           const WaveVector& k);

// Integer-scaled dispersion: Lambda(K/L) = lambda_int(K)/L^3 when beta is
// isotropic, so resonance bookkeeping can stay exact.
inline std::int64_t dispersion_int(const IntVec& K) {
    return K.norm2() * K[0];
}

// All lattice points with |k| <= radius, lexicographic in K, closed under
// negation by symmetry of the enumeration box.
std::vector<IntVec> lattice_ball(const LatticeSpec& spec);

// Dense index over a lattice ball with O(1) membership lookup.
class BallIndex {
  public:
    explicit BallIndex(const LatticeSpec& spec);

    const LatticeSpec& spec() const { return spec_; }
    const std::vector<IntVec>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const IntVec& at(std::size_t i) const { return points_[i]; }
    // -1 when absent.
    std::ptrdiff_t find(const IntVec& K) const {
        auto it = lookup_.find(K);
        return it == lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    }
    std::ptrdiff_t negation_of(std::size_t i) const { return neg_[i]; }

  private:
    LatticeSpec spec_;
    std::vector<IntVec> points_;
    std::unordered_map<IntVec, std::size_t, IntVecHash> lookup_;
    std::vector<std::ptrdiff_t> neg_;
};

// Fourier coefficients of a field over a lattice ball, indexed like the ball.
struct SpectralField {
    const BallIndex* ball = nullptr;
    std::vector<std::complex<double>> values;
    double time = 0.0;

    explicit SpectralField(const BallIndex& b)
        : ball(&b), values(b.size(), {0.0, 0.0}) {}
    std::complex<double>& operator[](std::size_t i) { return values[i]; }
    const std::complex<double>& operator[](std::size_t i) const {
        return values[i];
    }
};

// Max |value(-k) - conj(value(k))| over the ball.
double hermitian_defect(const SpectralField& f);

}  // namespace zk
