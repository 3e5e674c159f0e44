#ifndef LANTK_NET2_HPP
#define LANTK_NET2_HPP

#include "common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lantk::net2 {

enum class ActKind { relu, tanh_, erf_, softplus };

/// Activation with derivatives up to third order. softplus carries a
/// sharpness parameter: sp_b(x) = log(1 + exp(b x)) / b, which tends to relu
/// as b grows; its derivatives are nascent delta approximations.
struct Activation {
    ActKind kind = ActKind::relu;
    double sharpness = 1.0;  // softplus only

    bool smooth() const { return kind != ActKind::relu; }
    std::string name() const;

    double f0(double u) const;
    double f1(double u) const;
    double f2(double u) const;
    double f3(double u) const;
};

Activation parse_activation(const std::string& name, double sharpness = 1.0);

/// f(x) = a . sigma(W x) / sqrt(m), entries of W and a i.i.d. N(0,1) at init.
struct TwoLayerNet {
    Mat W;  // m x d
    Vec a;  // m
    Activation act;
    std::uint64_t seed = 0;
    bool symmetrized = false;

    Eigen::Index width() const { return W.rows(); }
    Eigen::Index dim() const { return W.cols(); }

    static TwoLayerNet gaussian(Eigen::Index m, Eigen::Index d, Activation act,
                                std::uint64_t seed);
    /// Duplicate-and-negate init: f_0(x) = 0 exactly for all x. m must be even.
    static TwoLayerNet symmetrized_gaussian(Eigen::Index m, Eigen::Index d, Activation act,
                                            std::uint64_t seed);

    void save(const std::string& path_prefix) const;
    static TwoLayerNet load(const std::string& path_prefix);
};

Vec forward(const TwoLayerNet& net, const Mat& X);

struct TrainTrace {
    double step_size = 0.0;
    std::size_t steps = 0;
    std::vector<double> losses;                            // loss before each step, then final
    std::vector<std::pair<double, TwoLayerNet>> snapshots; // (time, state)
};

struct TrainOptions {
    double step_size = 0.1;
    std::size_t steps = 100;
    std::size_t snapshot_every = 0;  // 0: keep only initial and final state
    double divergence_threshold = 1e12;
};

/// Full-batch gradient descent on L = (1/2n) sum (f - y)^2 with exact
/// analytic gradients (relu subgradient at 0 taken as 0).
TrainTrace train_gd(TwoLayerNet net, const Mat& X, const Vec& y, const TrainOptions& opt);

double squared_loss(const TwoLayerNet& net, const Mat& X, const Vec& y);

/// Per-point activation values and derivatives, reused across kernel entries.
struct ActivationCache {
    Mat s0, s1, s2, s3;  // each n x m; s2/s3 only for smooth activations
    bool has_high = false;

    ActivationCache(const TwoLayerNet& net, const Mat& X);
};

double empirical_k2(const TwoLayerNet& net, const Vec& x, const Vec& x2);
Mat empirical_k2_matrix(const TwoLayerNet& net, const Mat& X);

/// Five-term third-order kernel; requires a twice-differentiable activation.
double empirical_k3(const TwoLayerNet& net, const Vec& xa, const Vec& xb, const Vec& xc);
double empirical_k3(const TwoLayerNet& net, const ActivationCache& cache,
                    Eigen::Index a, Eigen::Index b, Eigen::Index c, const Mat& X);

/// Full fourth-order kernel; requires a three-times-differentiable activation.
/// Not symmetric in its last two arguments: the fourth slot is the hierarchy's
/// contraction index.
double empirical_k4(const TwoLayerNet& net, const Vec& xa, const Vec& xb, const Vec& xc,
                    const Vec& xd);
double empirical_k4(const TwoLayerNet& net, const ActivationCache& cache,
                    Eigen::Index a, Eigen::Index b, Eigen::Index c, Eigen::Index d,
                    const Mat& X);

}  // namespace lantk::net2

#endif
