#include "kernels_analytic.hpp"

#include "net2.hpp"

#include <cmath>

namespace lantk::analytic {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;
constexpr double kDivisorFloor = 1e-8;
}  // namespace

double expected_k2(const Vec& x, const Vec& x2) {
    double nx = x.norm(), nx2 = x2.norm();
    if (nx <= 0.0 || nx2 <= 0.0) throw ValidationError("expected_k2: zero vector");
    double delta = std::acos(clamp_unit(x.dot(x2) / (nx * nx2)));
    double first = x.dot(x2) * (kPi - delta) / (2.0 * kPi);
    double second = nx * nx2 * (std::sin(delta) + (kPi - delta) * std::cos(delta)) / (2.0 * kPi);
    return first + second;
}

Mat expected_k2_matrix(const Mat& X) {
    const Eigen::Index n = X.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        if (X.row(i).norm() <= 0.0)
            throw ValidationError("expected_k2_matrix: zero row at index " + std::to_string(i));
    Mat K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = X.row(i).squaredNorm();
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v = expected_k2(X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Mat expected_k2_cross(const Mat& A, const Mat& B) {
    Mat K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = expected_k2(A.row(i), B.row(j));
    return K;
}

Reduced4D reduce_to_4d(const Vec& xa, const Vec& xb, const Vec& xc, const Vec& xd) {
    const Vec* xs[4] = {&xa, &xb, &xc, &xd};
    Reduced4D red;
    for (int i = 0; i < 4; ++i) {
        red.norms[static_cast<std::size_t>(i)] = xs[i]->norm();
        if (red.norms[static_cast<std::size_t>(i)] <= 0.0)
            throw ValidationError("reduce_to_4d: zero vector at position " + std::to_string(i));
    }
    auto ang = [&](int i, int j) { return angle_between(*xs[i], *xs[j]); };
    double d_ab = ang(0, 1), d_ag = ang(0, 2), d_ax = ang(0, 3);
    double d_bg = ang(1, 2), d_bx = ang(1, 3), d_gx = ang(2, 3);
    red.angles = {d_ab, d_ag, d_ax, d_bg, d_bx, d_gx};

    double s_ab = std::sin(d_ab);
    if (s_ab < kDivisorFloor)
        throw DegenerateGeometry("reduce_to_4d: sin(angle(alpha,beta)) below 1e-8");

    Mat V = Mat::Zero(4, 4);
    V(0, 0) = 1.0;
    V(1, 0) = std::cos(d_ab);
    V(1, 1) = s_ab;
    V(2, 0) = std::cos(d_ag);
    V(2, 1) = (std::cos(d_bg) - std::cos(d_ab) * std::cos(d_ag)) / s_ab;
    double g3sq = std::sin(d_ag) * std::sin(d_ag) - V(2, 1) * V(2, 1);
    if (g3sq < -1e-10)
        throw DegenerateGeometry("reduce_to_4d: negative sqrt argument for v_gamma_3");
    V(2, 2) = std::sqrt(std::max(g3sq, 0.0));
    V(3, 0) = std::cos(d_ax);
    V(3, 1) = (std::cos(d_bx) - std::cos(d_ab) * std::cos(d_ax)) / s_ab;
    if (std::abs(V(2, 2)) < kDivisorFloor)
        throw DegenerateGeometry("reduce_to_4d: v_gamma_3 below 1e-8 (nearly coplanar inputs)");
    V(3, 2) = (std::cos(d_gx) - V(2, 1) * V(3, 1)) / V(2, 2);
    double x4sq = std::sin(d_ax) * std::sin(d_ax) - V(3, 1) * V(3, 1) - V(3, 2) * V(3, 2);
    if (x4sq < -1e-10)
        throw DegenerateGeometry("reduce_to_4d: negative sqrt argument for v_xi_4");
    V(3, 3) = std::sqrt(std::max(x4sq, 0.0));
    red.V = V;
    return red;
}

McEstimate orthant_prob_mc(const Reduced4D& red, std::size_t samples, std::uint64_t seed) {
    if (samples < 10000) throw ValidationError("orthant_prob_mc: need >= 1e4 samples");
    Rng rng(seed);
    const Mat& V = red.V;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        double z0 = rng.gauss(), z1 = rng.gauss(), z2 = rng.gauss(), z3 = rng.gauss();
        bool ok = true;
        for (int r = 0; r < 4 && ok; ++r)
            ok = V(r, 0) * z0 + V(r, 1) * z1 + V(r, 2) * z2 + V(r, 3) * z3 >= 0.0;
        hits += ok ? 1 : 0;
    }
    double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(samples))};
}

namespace {

McEstimate kind2_mc(const Reduced4D& red, const McConfig& mc) {
    // antithetic pairs: the polynomial factor is even, the orthant is not
    Rng rng(derive_seed(mc.seed, 0xB2));
    const Mat& V = red.V;
    std::size_t pairs = mc.samples / 2;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t s = 0; s < pairs; ++s) {
        double z[4] = {rng.gauss(), rng.gauss(), rng.gauss(), rng.gauss()};
        double pv = 0.0;
        for (int sign = 0; sign < 2; ++sign) {
            double q = sign ? -1.0 : 1.0;
            double proj[4];
            bool ok = true;
            for (int r = 0; r < 4; ++r) {
                proj[r] = q * (V(r, 0) * z[0] + V(r, 1) * z[1] + V(r, 2) * z[2] + V(r, 3) * z[3]);
                ok = ok && proj[r] >= 0.0;
            }
            if (ok) pv += proj[2] * proj[3];
        }
        pv *= 0.5;
        sum += pv;
        sumsq += pv * pv;
    }
    double mean = sum / static_cast<double>(pairs);
    double var = std::max(sumsq / static_cast<double>(pairs) - mean * mean, 0.0);
    double scale = red.norms[2] * red.norms[3];
    return {scale * mean, scale * std::sqrt(var / static_cast<double>(pairs))};
}

McEstimate kind3_mc(const Reduced4D& red, const McConfig& mc) {
    Rng rng(derive_seed(mc.seed, 0xB3));
    const Mat& V = red.V;
    // pinned = row 0, linear = row 1, indicators rows 1..3; slice z_1 = 0
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t s = 0; s < mc.samples; ++s) {
        double z[3] = {rng.gauss(), rng.gauss(), rng.gauss()};
        double lin = V(1, 1) * z[0] + V(1, 2) * z[1] + V(1, 3) * z[2];
        double v = 0.0;
        if (lin >= 0.0 && V(2, 1) * z[0] + V(2, 2) * z[1] + V(2, 3) * z[2] >= 0.0 &&
            V(3, 1) * z[0] + V(3, 2) * z[1] + V(3, 3) * z[2] >= 0.0)
            v = lin;
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / static_cast<double>(mc.samples);
    double var = std::max(sumsq / static_cast<double>(mc.samples) - mean * mean, 0.0);
    double scale = red.norms[1] / (red.norms[0] * kSqrt2Pi);
    return {scale * mean, scale * std::sqrt(var / static_cast<double>(mc.samples))};
}

double angle2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    double na = a.norm(), nb = b.norm();
    if (na < 1e-14 || nb < 1e-14)
        throw DegenerateGeometry("angle undefined for vanishing projected vector");
    return std::acos(clamp_unit(a.dot(b) / (na * nb)));
}

double angle3(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    double na = a.norm(), nb = b.norm();
    if (na < 1e-14 || nb < 1e-14)
        throw DegenerateGeometry("angle undefined for vanishing projected vector");
    return std::acos(clamp_unit(a.dot(b) / (na * nb)));
}

// E[ delta(u.Z) step(p.Z) step(q.Z) ] over Z ~ N(0, I3): slice density times
// the half-plane pair probability on the plane orthogonal to u.
double delta_slice_term(const Eigen::Vector3d& u, const Eigen::Vector3d& p,
                        const Eigen::Vector3d& q) {
    double nu = u.norm();
    if (nu < kDivisorFloor)
        throw DegenerateGeometry("kind V divisor |v_{o,-1}| below 1e-8");
    Eigen::Vector3d uh = u / nu;
    Eigen::Vector3d pp = p - p.dot(uh) * uh;
    Eigen::Vector3d pq = q - q.dot(uh) * uh;
    return (kPi - angle3(pp, pq)) / (2.0 * kPi * kSqrt2Pi * nu);
}

McEstimate kind4_closed(const Reduced4D& red) {
    double vb2 = red.V(1, 1);
    if (std::abs(vb2) < kDivisorFloor)
        throw DegenerateGeometry("kind IV divisor |v_beta_2| below 1e-8");
    Eigen::Vector2d g(red.V(2, 2), red.V(2, 3));
    Eigen::Vector2d x(red.V(3, 2), red.V(3, 3));
    double ang = angle2(g, x);
    double v = 3.0 * (kPi - ang) /
               (4.0 * kPi * kPi * red.norms[0] * red.norms[1] * std::abs(vb2));
    return {v, 0.0};
}

McEstimate kind5_closed(const Reduced4D& red) {
    const Mat& V = red.V;
    Eigen::Vector3d r1(V(1, 1), V(1, 2), V(1, 3));
    Eigen::Vector3d r2(V(2, 1), V(2, 2), V(2, 3));
    Eigen::Vector3d r3(V(3, 1), V(3, 2), V(3, 3));
    double t1 = delta_slice_term(r1, r2, r3);
    double t2 = delta_slice_term(r2, r1, r3);
    double t3 = delta_slice_term(r3, r1, r2);
    double v = -3.0 / (red.norms[0] * red.norms[0] * kSqrt2Pi) *
               (V(1, 0) * t1 + V(2, 0) * t2 + V(3, 0) * t3);
    return {v, 0.0};
}

}  // namespace

McEstimate expected_k4_term(TermKind kind, const Reduced4D& red, const McConfig& mc) {
    switch (kind) {
        case TermKind::I:
            return orthant_prob_mc(red, mc.samples, derive_seed(mc.seed, 0xB1));
        case TermKind::II:
            return kind2_mc(red, mc);
        case TermKind::III:
            return kind3_mc(red, mc);
        case TermKind::IV:
            return kind4_closed(red);
        case TermKind::V:
            return kind5_closed(red);
    }
    throw ValidationError("unknown term kind");
}

namespace {

bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace

K4Estimate expected_k4(const Vec& xa, const Vec& xb, const Vec& xc_in, const Vec& xd_in,
                       const K4Options& opt) {
    Vec xc = xc_in, xd = xd_in;
    if (opt.canonical_order && lex_less(xd, xc)) std::swap(xc, xd);
    const Vec* xs[4] = {&xa, &xb, &xc, &xd};
    enum { A = 0, B = 1, G = 2, X = 3 };
    auto ip = [&](int i, int j) { return xs[i]->dot(*xs[j]); };
    auto red = [&](int i, int j, int k, int l) {
        return reduce_to_4d(*xs[i], *xs[j], *xs[k], *xs[l]);
    };
    McConfig mc = opt.mc;
    int stream = 0;
    auto next_mc = [&]() {
        McConfig c = mc;
        c.seed = derive_seed(mc.seed, 0xC0 + static_cast<std::uint64_t>(stream++));
        return c;
    };

    double value = 0.0, var = 0.0;
    auto add = [&](double coef, const McEstimate& e) {
        value += coef * e.value;
        var += coef * coef * e.stderr_ * e.stderr_;
    };

    // third-derivative terms, pinned alpha / beta
    add(ip(A, B) * ip(A, G) * ip(A, X), expected_k4_term(TermKind::V, red(A, B, G, X), next_mc()));
    add(ip(B, A) * ip(B, G) * ip(B, X), expected_k4_term(TermKind::V, red(B, A, G, X), next_mc()));
    // double-delta terms
    add(ip(A, B) * (ip(A, G) * ip(B, X) + ip(A, X) * ip(B, G)),
        expected_k4_term(TermKind::IV, red(A, B, G, X), next_mc()));
    add(ip(A, G) * ip(A, B) * ip(G, X), expected_k4_term(TermKind::IV, red(A, G, B, X), next_mc()));
    add(ip(B, G) * ip(B, A) * ip(G, X), expected_k4_term(TermKind::IV, red(B, G, A, X), next_mc()));
    // single-delta terms: (coefficient, prefactor, pinned, linear, others)
    struct K3Spec {
        double coef;
        int p, l, o1, o2;
    };
    const K3Spec k3s[] = {
        {3.0 * ip(A, B) * ip(A, G), A, X, B, G}, {3.0 * ip(B, A) * ip(B, G), B, X, A, G},
        {2.0 * ip(A, B) * ip(A, X), A, G, B, X}, {2.0 * ip(B, A) * ip(B, X), B, G, A, X},
        {1.0 * ip(A, G) * ip(A, X), A, B, G, X}, {1.0 * ip(G, A) * ip(G, X), G, B, A, X},
        {1.0 * ip(B, G) * ip(B, X), B, A, G, X}, {1.0 * ip(G, B) * ip(G, X), G, A, B, X},
    };
    for (const auto& s : k3s)
        add(s.coef, expected_k4_term(TermKind::III, red(s.p, s.l, s.o1, s.o2), next_mc()));
    // all-first-derivative terms share one orthant probability
    Reduced4D natural = red(A, B, G, X);
    add(2.0 * ip(A, B) * ip(G, X) + ip(A, G) * ip(B, X) + ip(A, X) * ip(B, G),
        expected_k4_term(TermKind::I, natural, next_mc()));
    // undifferentiated-pair terms
    add(2.0 * ip(A, B), expected_k4_term(TermKind::II, red(A, B, G, X), next_mc()));
    add(ip(A, G), expected_k4_term(TermKind::II, red(A, G, B, X), next_mc()));
    add(ip(B, G), expected_k4_term(TermKind::II, red(B, G, A, X), next_mc()));

    return {value, std::sqrt(var)};
}

FourthOrderBlock expected_k4_block(const Vec& x, const Vec& x2, const Mat& X,
                                   const BlockOptions& opt) {
    const Eigen::Index n = X.rows();
    if (n < 1) throw ValidationError("expected_k4_block: empty grid");
    FourthOrderBlock blk;
    blk.probe_x = x;
    blk.probe_x2 = x2;
    blk.values.resize(n, n);
    blk.stderrs.resize(n, n);
    blk.mc_samples = opt.mc.samples;
    blk.seed = opt.mc.seed;

    struct Cell {
        double v = 0.0, se = 0.0;
        bool jittered = false;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(n * n));

    // entries are independent work items with derived seeds; results do not
    // depend on the thread schedule
    parallel_for(static_cast<std::size_t>(n * n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            Eigen::Index i = static_cast<Eigen::Index>(idx) / n;
            Eigen::Index j = static_cast<Eigen::Index>(idx) % n;
            if (j < i) continue;  // computed once per unordered pair, mirrored below
            K4Options ko;
            ko.mc = opt.mc;
            ko.mc.seed = derive_seed(opt.mc.seed, idx);
            Cell cell;
            Vec xi = X.row(i), xj = X.row(j);
            for (int attempt = 0;; ++attempt) {
                try {
                    K4Estimate e = expected_k4(x, x2, xi, xj, ko);
                    cell.v = e.value;
                    cell.se = e.stderr_;
                    break;
                } catch (const DegenerateGeometry&) {
                    if (attempt >= opt.jitter_attempts)
                        throw NumericError("expected_k4_block: jitter fallback exhausted at (" +
                                           std::to_string(i) + "," + std::to_string(j) + ")");
                    cell.jittered = true;
                    Rng jr = Rng::substream(opt.mc.seed, 0x7177E2ULL + idx,
                                            static_cast<std::uint64_t>(attempt));
                    double scale = opt.jitter_rel * static_cast<double>(1 << attempt);
                    xi = X.row(i).transpose() + scale * X.row(i).norm() * jr.gauss_vec(X.cols());
                    xj = X.row(j).transpose() + scale * X.row(j).norm() * jr.gauss_vec(X.cols());
                }
            }
            cells[idx] = cell;
        }
    });

    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const Cell& c = cells[static_cast<std::size_t>(i * n + j)];
            blk.values(i, j) = c.v;
            blk.values(j, i) = c.v;
            blk.stderrs(i, j) = c.se;
            blk.stderrs(j, i) = c.se;
            if (c.jittered) blk.jittered_entries.emplace_back(static_cast<std::size_t>(i),
                                                              static_cast<std::size_t>(j));
        }
    return blk;
}

OddOrderCheck expected_odd_kernel_is_zero_check(const Mat& X, std::size_t inits,
                                                Eigen::Index width, std::uint64_t seed,
                                                const std::string& activation) {
    const Eigen::Index n = X.rows();
    const std::size_t entries = static_cast<std::size_t>(n * n * n);
    std::vector<double> sum(entries, 0.0), sumsq(entries, 0.0);
    net2::Activation act = net2::parse_activation(activation);
    for (std::size_t it = 0; it < inits; ++it) {
        net2::TwoLayerNet net = net2::TwoLayerNet::gaussian(width, X.cols(), act,
                                                            derive_seed(seed, it));
        net2::ActivationCache cache(net, X);
        std::size_t e = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index k = 0; k < n; ++k, ++e) {
                    double v = net2::empirical_k3(net, cache, i, j, k, X);
                    sum[e] += v;
                    sumsq[e] += v * v;
                }
    }
    OddOrderCheck out;
    for (std::size_t e = 0; e < entries; ++e) {
        double mean = sum[e] / static_cast<double>(inits);
        double var = std::max(sumsq[e] / static_cast<double>(inits) - mean * mean, 0.0);
        double se = std::sqrt(var / static_cast<double>(inits));
        out.max_abs_mean = std::max(out.max_abs_mean, std::abs(mean));
        if (se > 0.0) out.max_sigmas = std::max(out.max_sigmas, std::abs(mean) / se);
    }
    return out;
}

}  // namespace lantk::analytic
