#ifndef LANTK_KERNELS_ANALYTIC_HPP
#define LANTK_KERNELS_ANALYTIC_HPP

#include "common.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lantk::analytic {

/// Closed-form expected kernels exist only for ReLU without bias.
struct AnalyticNTKParams {
    AnalyticNTKParams() = default;
    explicit AnalyticNTKParams(const std::string& activation) {
        if (activation != "relu")
            throw ValidationError("analytic kernels require relu, got: " + activation);
    }
};

/// E K2_0(x, x') = x.x' (pi-D)/(2pi) + |x||x'| (sin D + (pi-D) cos D)/(2pi).
double expected_k2(const Vec& x, const Vec& x2);

/// Symmetric n x n matrix of expected_k2; entries computed once per unordered pair.
Mat expected_k2_matrix(const Mat& X);

/// Rectangular cross-kernel, rows over A, columns over B.
Mat expected_k2_cross(const Mat& A, const Mat& B);

/// Outcome of rotating four inputs into the 4-D frame where row k has zeros
/// beyond coordinate k. Rows are unit vectors; their Gram matrix reproduces
/// the cosines of the original (normalized) inputs.
struct Reduced4D {
    Mat V;                         // 4 x 4, rows v_alpha, v_beta, v_gamma, v_xi
    std::array<double, 4> norms;   // original L2 norms
    std::array<double, 6> angles;  // pairwise angles ab, ag, ax, bg, bx, gx
};

Reduced4D reduce_to_4d(const Vec& xa, const Vec& xb, const Vec& xc, const Vec& xd);

struct McConfig {
    std::size_t samples = 200000;
    std::uint64_t seed = 0;
};

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// MC estimate of P(VZ >= 0 componentwise), Z ~ N(0, I4).
McEstimate orthant_prob_mc(const Reduced4D& red, std::size_t samples, std::uint64_t seed);

enum class TermKind { I, II, III, IV, V };

/// Per-m expectation of one structural family of the fourth-order kernel's
/// bracket terms, Gaussian weight moments included (E a^2 = 1, E a^4 = 3).
///   I   <a^2, s'a s'b s'c s'd>          rows in natural order
///   II  <1,   s'a s'b sc  sd >          undifferentiated pair = rows 2,3
///   III <a^2, s''p sl s'o1 s'o2>        pinned row 0, linear row 1
///   IV  <a^4, s''p1 s''p2 s'o1 s'o2>    pinned rows 0,1
///   V   <a^4, s'''p s'o1 s'o2 s'o3>     pinned row 0
/// Kinds I-III are MC integrals; IV and V are closed forms.
McEstimate expected_k4_term(TermKind kind, const Reduced4D& red, const McConfig& mc);

struct K4Options {
    McConfig mc;
    /// Swap the last two arguments into a deterministic order before
    /// evaluating, making block assembly exactly symmetric.
    bool canonical_order = true;
};

struct K4Estimate {
    double value = 0.0;    // m-independent coefficient; E K4_0 = value / m
    double stderr_ = 0.0;  // combined MC standard error
};

/// Per-m coefficient of E K4_0(xa, xb, xc, xd) assembled from all summands of
/// the two-layer fourth-order kernel, each inner expectation evaluated under
/// the role permutation that pins its delta factors first.
K4Estimate expected_k4(const Vec& xa, const Vec& xb, const Vec& xc, const Vec& xd,
                       const K4Options& opt = {});

struct FourthOrderBlock {
    Vec probe_x, probe_x2;
    Mat values;    // n x n, entry (i,j) = expected_k4(x, x2, X_i, X_j).value
    Mat stderrs;   // matching standard errors
    std::size_t mc_samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::size_t, std::size_t>> jittered_entries;
};

struct BlockOptions {
    McConfig mc;
    double jitter_rel = 1e-6;  // relative Gaussian jitter on degenerate entries
    int jitter_attempts = 4;
};

/// n x n block of per-m E K4_0 coefficients for a fixed probe pair. Entries
/// with degenerate geometry are recomputed under seeded jitter and flagged.
FourthOrderBlock expected_k4_block(const Vec& x, const Vec& x2, const Mat& X,
                                   const BlockOptions& opt = {});

struct OddOrderCheck {
    double max_abs_mean = 0.0;    // max over entries of |mean over inits|
    double max_sigmas = 0.0;      // max over entries of |mean| / stderr
};

/// Empirical check that E K^(3)_0 = 0 over Gaussian inits (odd a-moments).
OddOrderCheck expected_odd_kernel_is_zero_check(const Mat& X, std::size_t inits,
                                                Eigen::Index width, std::uint64_t seed,
                                                const std::string& activation = "tanh");

}  // namespace lantk::analytic

#endif
