#include "zklab/errors.hpp"
#include "zklab/solver.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace zk::solver {

using cd = std::complex<double>;

int grid_size(const LatticeSpec& spec) {
    const double need = 3.0 * spec.radius * spec.size;
    int n = 8;
    while (n < need) n *= 2;
    return n;
}

namespace {

std::mutex fftw_mutex;  // plan creation is not thread safe

// Dense c2c workspace for one evolution.
struct FftWork {
    int d, n;
    std::size_t total;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;

    FftWork(int dim, int size) : d(dim), n(size) {
        total = 1;
        for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
        buf = fftw_alloc_complex(total);
        std::lock_guard<std::mutex> lock(fftw_mutex);
        int dims[3] = {n, n, n};
        fwd = fftw_plan_dft(d, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft(d, dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftWork() {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    FftWork(const FftWork&) = delete;
    FftWork& operator=(const FftWork&) = delete;
};

// Flat index of an integer mode with wraparound.
std::size_t mode_index(const IntVec& K, int d, int n) {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
        int v = K[i] % n;
        if (v < 0) v += n;
        idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
    }
    return idx;
}

struct Etdrk4Tables {
    // Per ball mode: E = exp(c h), E2 = exp(c h/2) and the four
    // contour-averaged coefficients of Kassam & Trefethen, plus the phi1 and
    // phi2 weights of the order-2 scheme.
    std::vector<cd> E, E2, Q, f1, f2, f3, p1, p2;
};

Etdrk4Tables make_tables(const BallIndex& ball, const SolverConfig& cfg,
                         double h) {
    const double L = cfg.spec.size;
    const auto beta = AnisotropyCoefficients::isotropic(cfg.spec.dim);
    const std::size_t B = ball.size();
    Etdrk4Tables t;
    t.E.resize(B);
    t.E2.resize(B);
    t.Q.resize(B);
    t.f1.resize(B);
    t.f2.resize(B);
    t.f3.resize(B);
    t.p1.resize(B);
    t.p2.resize(B);
    const int M = 32;
    for (std::size_t i = 0; i < B; ++i) {
        const WaveVector w = to_wave(ball.at(i), L);
        double nuk2 = cfg.params.nu * w.norm2();
        if (ball.at(i).is_zero() && !cfg.damp_zero_mode) nuk2 = 0.0;
        const cd c(-nuk2, dispersion(w, beta));
        const cd z = c * h;
        t.E[i] = std::exp(z);
        t.E2[i] = std::exp(z / 2.0);
        // Full-circle contour average (z is genuinely complex here, so the
        // half-circle real-part shortcut does not apply).
        cd Q = 0, f1 = 0, f2 = 0, f3 = 0, p1 = 0, p2 = 0;
        for (int m = 0; m < M; ++m) {
            const double th = 2.0 * std::numbers::pi * (m + 0.5) / M;
            const cd r = z + std::exp(cd(0.0, th));  // contour point
            const cd er = std::exp(r);
            Q += (std::exp(r / 2.0) - 1.0) / r;
            f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / (r * r * r);
            f2 += (2.0 + r + er * (-2.0 + r)) / (r * r * r);
            f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / (r * r * r);
            p1 += (er - 1.0) / r;
            p2 += (er - 1.0 - r) / (r * r);
        }
        t.Q[i] = h * Q / static_cast<double>(M);
        t.f1[i] = h * f1 / static_cast<double>(M);
        t.f2[i] = h * f2 / static_cast<double>(M);
        t.f3[i] = h * f3 / static_cast<double>(M);
        t.p1[i] = h * p1 / static_cast<double>(M);
        t.p2[i] = h * p2 / static_cast<double>(M);
    }
    return t;
}

class Stepper {
  public:
    Stepper(const BallIndex& ball, const SolverConfig& cfg)
        : ball_(ball),
          cfg_(cfg),
          n_(grid_size(cfg.spec)),
          work_(cfg.spec.dim, n_) {
        const std::size_t B = ball.size();
        idx_.resize(B);
        kx_.resize(B);
        for (std::size_t i = 0; i < B; ++i) {
            idx_[i] = mode_index(ball.at(i), cfg.spec.dim, n_);
            kx_[i] = ball.at(i)[0] / cfg.spec.size;
        }
    }

    // N(psi)_k = i lambda kx conv_k / L^d, truncated to the ball.
    void nonlinear(const std::vector<cd>& psi, std::vector<cd>& out) {
        if (cfg_.params.lambda == 0.0) {
            out.assign(psi.size(), cd(0.0, 0.0));
            return;
        }
        const std::size_t total = work_.total;
        std::memset(work_.buf, 0, total * sizeof(fftw_complex));
        for (std::size_t i = 0; i < psi.size(); ++i) {
            work_.buf[idx_[i]][0] = psi[i].real();
            work_.buf[idx_[i]][1] = psi[i].imag();
        }
        fftw_execute(work_.bwd);
        for (std::size_t j = 0; j < total; ++j) {
            const double re = work_.buf[j][0];
            const double im = work_.buf[j][1];
            work_.buf[j][0] = re * re - im * im;
            work_.buf[j][1] = 2.0 * re * im;
        }
        fftw_execute(work_.fwd);
        const double norm = 1.0 / static_cast<double>(total);
        const double fac = cfg_.params.lambda *
                           std::pow(cfg_.params.L, -cfg_.params.dim);
        out.resize(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const cd conv(work_.buf[idx_[i]][0] * norm,
                          work_.buf[idx_[i]][1] * norm);
            out[i] = cd(0.0, 1.0) * fac * kx_[i] * conv;
        }
    }

    const BallIndex& ball_;
    SolverConfig cfg_;
    int n_;
    FftWork work_;
    std::vector<std::size_t> idx_;
    std::vector<double> kx_;
};

void check_blowup(const std::vector<cd>& v, double cap) {
    for (const auto& z : v)
        if (!(std::abs(z.real()) < cap && std::abs(z.imag()) < cap))
            throw NumericalFailure("evolve: blowup detected");
}

}  // namespace

SpectralField evolve(const SpectralField& xi, double t_final,
                     const SolverConfig& cfg) {
    if (t_final < 0) throw std::invalid_argument("evolve: t_final < 0");
    const BallIndex& ball = *xi.ball;
    SpectralField out(ball);
    out.values = xi.values;
    out.time = xi.time + t_final;
    if (t_final == 0.0) return out;

    int steps = std::max(1, static_cast<int>(std::ceil(t_final / cfg.dt - 1e-12)));
    const double h = t_final / steps;
    const auto tab = make_tables(ball, cfg, h);
    Stepper st(ball, cfg);

    std::vector<cd> u = xi.values, Nu, Na, Nb, Nc;
    std::vector<cd> a(u.size()), b(u.size()), c(u.size());
    if (cfg.scheme == Scheme::etdrk2) {
        for (int s = 0; s < steps; ++s) {
            st.nonlinear(u, Nu);
            for (std::size_t i = 0; i < u.size(); ++i)
                a[i] = tab.E[i] * u[i] + tab.p1[i] * Nu[i];
            st.nonlinear(a, Na);
            for (std::size_t i = 0; i < u.size(); ++i)
                u[i] = a[i] + tab.p2[i] * (Na[i] - Nu[i]);
            check_blowup(u, cfg.blowup_threshold);
        }
        out.values = std::move(u);
        return out;
    }
    for (int s = 0; s < steps; ++s) {
        st.nonlinear(u, Nu);
        for (std::size_t i = 0; i < u.size(); ++i)
            a[i] = tab.E2[i] * u[i] + tab.Q[i] * Nu[i];
        st.nonlinear(a, Na);
        for (std::size_t i = 0; i < u.size(); ++i)
            b[i] = tab.E2[i] * u[i] + tab.Q[i] * Na[i];
        st.nonlinear(b, Nb);
        for (std::size_t i = 0; i < u.size(); ++i)
            c[i] = tab.E2[i] * a[i] + tab.Q[i] * (2.0 * Nb[i] - Nu[i]);
        st.nonlinear(c, Nc);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = tab.E[i] * u[i] + tab.f1[i] * Nu[i] +
                   2.0 * tab.f2[i] * (Na[i] + Nb[i]) + tab.f3[i] * Nc[i];
        check_blowup(u, cfg.blowup_threshold);
    }
    out.values = std::move(u);
    return out;
}

SpectralField linear_profile(const SpectralField& field, double t) {
    const BallIndex& ball = *field.ball;
    const auto beta = AnisotropyCoefficients::isotropic(ball.spec().dim);
    SpectralField out(ball);
    out.time = field.time;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const double lam = dispersion(to_wave(ball.at(i), ball.spec().size), beta);
        out.values[i] = field.values[i] * std::exp(cd(0.0, -lam * t));
    }
    return out;
}

SpectralField linear_unprofile(const SpectralField& field, double t) {
    return linear_profile(field, -t);
}

}  // namespace zk::solver
