#ifndef LANTK_COMMON_HPP
#define LANTK_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lantk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Validation failure: bad inputs, violated preconditions.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: divergence, non-PD solves, degenerate geometry.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Geometry too degenerate for the 4-D reduction (near-coincident inputs).
struct DegenerateGeometry : NumericError {
    using NumericError::NumericError;
};

// splitmix64 finalizer; used to derive independent substream seeds so that
// parallel work items are schedule-independent.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(seed ^ 0x517cc1b727220a95ULL) + mix64(a) + 0x2545f4914f6cdd1dULL * b);
}

/// Seeded RNG with named substreams (all randomness flows from one root seed).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
        return Rng(derive_seed(seed, a, b));
    }

    double gauss() { return normal_(eng_); }
    double uniform() { return uni_(eng_); }
    std::uint64_t next_u64() { return eng_(); }

    /// Uniform integer in [0, n)
    std::size_t index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> d(0, n - 1);
        return d(eng_);
    }

    Vec gauss_vec(Eigen::Index n) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss();
        return v;
    }

    Mat gauss_mat(Eigen::Index r, Eigen::Index c) {
        Mat m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = gauss();
        return m;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uni_{0.0, 1.0};
};

/// Block-parallel loop over [0, n). Work item i must not depend on schedule;
/// callers pass per-item derived seeds when randomness is involved.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t nthreads = std::min<std::size_t>(hw ? hw : 1, n);
    if (nthreads <= 1 || n < 2) {
        body(0, n);
        return;
    }
    std::vector<std::thread> workers;
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back(body, lo, hi);
    }
    for (auto& w : workers) w.join();
}

inline double clamp_unit(double c) { return c < -1.0 ? -1.0 : (c > 1.0 ? 1.0 : c); }

/// Angle between vectors, clamped to [0, pi]; cosine arguments clamped to [-1, 1].
inline double angle_between(const Vec& a, const Vec& b) {
    double na = a.norm(), nb = b.norm();
    if (na <= 0.0 || nb <= 0.0) throw ValidationError("angle undefined for zero vector");
    return std::acos(clamp_unit(a.dot(b) / (na * nb)));
}

}  // namespace lantk

#endif
