#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zklab/errors.hpp"
#include "zklab/solver.hpp"

namespace zk::solver {

namespace {

// Streaming mean/variance accumulator with a deterministic pairwise merge.
struct Welford {
    std::size_t n = 0;
    std::vector<double> mean, m2;

    explicit Welford(std::size_t modes) : mean(modes, 0.0), m2(modes, 0.0) {}

    void add(const std::vector<double>& x) {
        ++n;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = x[i] - mean[i];
            mean[i] += d / static_cast<double>(n);
            m2[i] += d * (x[i] - mean[i]);
        }
    }
    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double nt = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = o.mean[i] - mean[i];
            mean[i] += d * nb / nt;
            m2[i] += o.m2[i] + d * d * na * nb / nt;
        }
        n += o.n;
    }
};

}  // namespace

EnsembleStats ensemble_spectrum(const SpectrumProfile& profile,
                                const BallIndex& ball, const SolverConfig& cfg,
                                std::size_t M, std::uint64_t master_seed,
                                double t_final, int threads) {
    if (M < 2) throw std::invalid_argument("ensemble_spectrum: M >= 2 required");
    if (threads < 1) threads = 1;
    const std::size_t B = ball.size();
    const auto n_table = tabulate(profile, ball);

    // Fixed member blocks independent of the thread count; block
    // accumulators are merged in block order at the end.
    const std::size_t block_size = 16;
    const std::size_t blocks = (M + block_size - 1) / block_size;
    std::vector<Welford> acc(blocks, Welford(B));
    std::atomic<std::size_t> next_block{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        std::vector<double> amp2(B);
        for (;;) {
            const std::size_t blk = next_block.fetch_add(1);
            if (blk >= blocks || failed.load()) break;
            const std::size_t lo = blk * block_size;
            const std::size_t hi = std::min(M, lo + block_size);
            for (std::size_t m = lo; m < hi; ++m) {
                try {
                    SeededGaussianSource src{master_seed, m};
                    auto xi = sample_initial_data(n_table, ball, src);
                    auto psi = evolve(xi, t_final, cfg);
                    for (std::size_t i = 0; i < B; ++i)
                        amp2[i] = std::norm(psi.values[i]);
                    acc[blk].add(amp2);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    failed = true;
                    failure = "member " + std::to_string(m) + ": " + e.what();
                    return;
                }
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed) throw NumericalFailure("ensemble_spectrum: " + failure);

    Welford total(B);
    for (const auto& a : acc) total.merge(a);

    EnsembleStats st;
    st.ball = &ball;
    st.members = total.n;
    st.seed = master_seed;
    st.mean = total.mean;
    st.variance.resize(B);
    st.std_error.resize(B);
    for (std::size_t i = 0; i < B; ++i) {
        st.variance[i] = total.n > 1
                             ? total.m2[i] / static_cast<double>(total.n - 1)
                             : 0.0;
        st.std_error[i] =
            std::sqrt(st.variance[i] / static_cast<double>(total.n));
    }
    std::ostringstream digest;
    digest << "d" << cfg.spec.dim << "_L" << cfg.spec.size << "_r"
           << cfg.spec.radius << "_lam" << cfg.params.lambda << "_nu"
           << cfg.params.nu << "_dt" << cfg.dt << "_t" << t_final << "_M" << M;
    st.config_digest = digest.str();
    return st;
}

}  // namespace zk::solver
