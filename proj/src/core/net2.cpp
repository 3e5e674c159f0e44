#include "net2.hpp"

#include "mat_io.hpp"

#include <json.hpp>

#include <cmath>

namespace lantk::net2 {

std::string Activation::name() const {
    switch (kind) {
        case ActKind::relu: return "relu";
        case ActKind::tanh_: return "tanh";
        case ActKind::erf_: return "erf";
        case ActKind::softplus: return "softplus";
    }
    return "?";
}

namespace {
constexpr double kTwoOverSqrtPi = 1.1283791670955125738961589031215451716;

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
}  // namespace

double Activation::f0(double u) const {
    switch (kind) {
        case ActKind::relu: return u > 0.0 ? u : 0.0;
        case ActKind::tanh_: return std::tanh(u);
        case ActKind::erf_: return std::erf(u);
        case ActKind::softplus: {
            double b = sharpness;
            return u > 0.0 ? u + std::log1p(std::exp(-b * u)) / b
                           : std::log1p(std::exp(b * u)) / b;
        }
    }
    return 0.0;
}

double Activation::f1(double u) const {
    switch (kind) {
        case ActKind::relu: return u > 0.0 ? 1.0 : 0.0;  // subgradient at 0 taken as 0
        case ActKind::tanh_: {
            double t = std::tanh(u);
            return 1.0 - t * t;
        }
        case ActKind::erf_: return kTwoOverSqrtPi * std::exp(-u * u);
        case ActKind::softplus: return sigmoid(sharpness * u);
    }
    return 0.0;
}

double Activation::f2(double u) const {
    switch (kind) {
        case ActKind::relu:
            throw ValidationError("relu second derivative is a distribution, not a function");
        case ActKind::tanh_: {
            double t = std::tanh(u);
            return -2.0 * t * (1.0 - t * t);
        }
        case ActKind::erf_: return -2.0 * u * kTwoOverSqrtPi * std::exp(-u * u);
        case ActKind::softplus: {
            double s = sigmoid(sharpness * u);
            return sharpness * s * (1.0 - s);
        }
    }
    return 0.0;
}

double Activation::f3(double u) const {
    switch (kind) {
        case ActKind::relu:
            throw ValidationError("relu third derivative is a distribution, not a function");
        case ActKind::tanh_: {
            double t = std::tanh(u);
            return (1.0 - t * t) * (6.0 * t * t - 2.0);
        }
        case ActKind::erf_: return (4.0 * u * u - 2.0) * kTwoOverSqrtPi * std::exp(-u * u);
        case ActKind::softplus: {
            double s = sigmoid(sharpness * u);
            return sharpness * sharpness * s * (1.0 - s) * (1.0 - 2.0 * s);
        }
    }
    return 0.0;
}

Activation parse_activation(const std::string& name, double sharpness) {
    Activation a;
    a.sharpness = sharpness;
    if (name == "relu") a.kind = ActKind::relu;
    else if (name == "tanh") a.kind = ActKind::tanh_;
    else if (name == "erf") a.kind = ActKind::erf_;
    else if (name == "softplus") a.kind = ActKind::softplus;
    else throw ValidationError("unknown activation: " + name);
    return a;
}

TwoLayerNet TwoLayerNet::gaussian(Eigen::Index m, Eigen::Index d, Activation act,
                                  std::uint64_t seed) {
    if (m < 1 || d < 1) throw ValidationError("net needs m >= 1 and d >= 1");
    TwoLayerNet net;
    net.act = act;
    net.seed = seed;
    Rng rng(seed);
    net.W = rng.gauss_mat(m, d);
    net.a = rng.gauss_vec(m);
    return net;
}

TwoLayerNet TwoLayerNet::symmetrized_gaussian(Eigen::Index m, Eigen::Index d, Activation act,
                                              std::uint64_t seed) {
    if (m % 2 != 0) throw ValidationError("symmetrized init needs even width");
    TwoLayerNet half = gaussian(m / 2, d, act, seed);
    TwoLayerNet net;
    net.act = act;
    net.seed = seed;
    net.symmetrized = true;
    net.W.resize(m, d);
    net.W << half.W, half.W;
    net.a.resize(m);
    net.a << half.a, -half.a;
    return net;
}

void TwoLayerNet::save(const std::string& prefix) const {
    save_matrix(prefix + ".W.mat", W);
    save_matrix(prefix + ".a.mat", a);
    nlohmann::json meta{{"activation", act.name()},
                        {"sharpness", act.sharpness},
                        {"seed", seed},
                        {"m", width()},
                        {"d", dim()},
                        {"symmetrized", symmetrized}};
    write_text_file(prefix + ".json", meta.dump(2));
}

TwoLayerNet TwoLayerNet::load(const std::string& prefix) {
    TwoLayerNet net;
    net.W = load_matrix(prefix + ".W.mat");
    Mat a = load_matrix(prefix + ".a.mat");
    net.a = a.cols() == 1 ? Vec(a.col(0)) : Vec(a.row(0));
    auto meta = nlohmann::json::parse(read_text_file(prefix + ".json"));
    net.act = parse_activation(meta.at("activation").get<std::string>(),
                               meta.value("sharpness", 1.0));
    net.seed = meta.value("seed", std::uint64_t{0});
    net.symmetrized = meta.value("symmetrized", false);
    return net;
}

Vec forward(const TwoLayerNet& net, const Mat& X) {
    if (X.cols() != net.dim()) throw ValidationError("forward: dimension mismatch");
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(net.width()));
    Mat Z = X * net.W.transpose();
    Vec f(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < net.width(); ++k) s += net.act.f0(Z(i, k)) * net.a[k];
        f[i] = s * inv_sqrt_m;
    }
    return f;
}

double squared_loss(const TwoLayerNet& net, const Mat& X, const Vec& y) {
    Vec f = forward(net, X);
    return 0.5 * (f - y).squaredNorm() / static_cast<double>(X.rows());
}

TrainTrace train_gd(TwoLayerNet net, const Mat& X, const Vec& y, const TrainOptions& opt) {
    if (opt.step_size <= 0.0) throw ValidationError("step_size must be > 0");
    if (X.rows() != y.size()) throw ValidationError("train_gd: X/y size mismatch");
    const Eigen::Index n = X.rows(), m = net.width();
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

    TrainTrace trace;
    trace.step_size = opt.step_size;
    trace.steps = opt.steps;
    trace.snapshots.emplace_back(0.0, net);

    for (std::size_t step = 0; step < opt.steps; ++step) {
        Mat Z = X * net.W.transpose();  // n x m
        Mat S0(n, m), S1(n, m);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 0; k < m; ++k) {
                S0(i, k) = net.act.f0(Z(i, k));
                S1(i, k) = net.act.f1(Z(i, k));
            }
        Vec f = S0 * net.a * inv_sqrt_m;
        double loss = 0.5 * (f - y).squaredNorm() / static_cast<double>(n);
        trace.losses.push_back(loss);
        if (!std::isfinite(loss) || loss > opt.divergence_threshold)
            throw NumericError("train_gd diverged at step " + std::to_string(step) +
                               " (loss " + std::to_string(loss) + "); reduce step_size");
        Vec r = (f - y) / static_cast<double>(n);
        Vec ga = S0.transpose() * r * inv_sqrt_m;
        Mat gW = ((S1.array() * (r * net.a.transpose()).array()).matrix().transpose() * X) *
                 inv_sqrt_m;
        net.W -= opt.step_size * gW;
        net.a -= opt.step_size * ga;
        if (opt.snapshot_every > 0 && (step + 1) % opt.snapshot_every == 0 &&
            step + 1 != opt.steps)
            trace.snapshots.emplace_back(static_cast<double>(step + 1) * opt.step_size, net);
    }
    trace.losses.push_back(squared_loss(net, X, y));
    trace.snapshots.emplace_back(static_cast<double>(opt.steps) * opt.step_size, std::move(net));
    return trace;
}

ActivationCache::ActivationCache(const TwoLayerNet& net, const Mat& X) {
    const Eigen::Index n = X.rows(), m = net.width();
    Mat Z = X * net.W.transpose();
    s0.resize(n, m);
    s1.resize(n, m);
    has_high = net.act.smooth();
    if (has_high) {
        s2.resize(n, m);
        s3.resize(n, m);
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < m; ++k) {
            double u = Z(i, k);
            s0(i, k) = net.act.f0(u);
            s1(i, k) = net.act.f1(u);
            if (has_high) {
                s2(i, k) = net.act.f2(u);
                s3(i, k) = net.act.f3(u);
            }
        }
}

double empirical_k2(const TwoLayerNet& net, const Vec& x, const Vec& x2) {
    const Eigen::Index m = net.width();
    Vec za = net.W * x, zb = net.W * x2;
    double t1 = 0.0, t2 = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        t1 += net.act.f1(za[k]) * net.a[k] * net.act.f1(zb[k]) * net.a[k];
        t2 += net.act.f0(za[k]) * net.act.f0(zb[k]);
    }
    return (x.dot(x2) * t1 + t2) / static_cast<double>(m);
}

Mat empirical_k2_matrix(const TwoLayerNet& net, const Mat& X) {
    ActivationCache c(net, X);
    const double inv_m = 1.0 / static_cast<double>(net.width());
    Mat D = c.s1.array().rowwise() * net.a.transpose().array();
    return ((X * X.transpose()).array() * (D * D.transpose()).array()).matrix() * inv_m +
           c.s0 * c.s0.transpose() * inv_m;
}

namespace {

void require_smooth(const TwoLayerNet& net, const char* what) {
    if (!net.act.smooth())
        throw ValidationError(std::string(what) +
                              " requires a smooth activation (tanh|erf|softplus), not relu");
}

}  // namespace

double empirical_k3(const TwoLayerNet& net, const ActivationCache& c,
                    Eigen::Index a, Eigen::Index b, Eigen::Index g, const Mat& X) {
    require_smooth(net, "empirical_k3");
    const Eigen::Index m = net.width();
    const double scale = 1.0 / (static_cast<double>(m) * std::sqrt(static_cast<double>(m)));
    auto ip = [&](Eigen::Index i, Eigen::Index j) { return X.row(i).dot(X.row(j)); };
    const auto& av = net.a;
    Eigen::ArrayXd a1 = av.array();
    Eigen::ArrayXd a3 = a1 * a1 * a1;
    double t = 0.0;
    t += ip(a, g) * ip(a, b) * (a3 * c.s2.row(a).transpose().array() *
                                c.s1.row(b).transpose().array() *
                                c.s1.row(g).transpose().array()).sum();
    t += ip(b, g) * ip(a, b) * (a3 * c.s1.row(a).transpose().array() *
                                c.s2.row(b).transpose().array() *
                                c.s1.row(g).transpose().array()).sum();
    t += 2.0 * ip(a, b) * (a1 * c.s1.row(a).transpose().array() *
                           c.s1.row(b).transpose().array() *
                           c.s0.row(g).transpose().array()).sum();
    t += ip(a, g) * (a1 * c.s1.row(a).transpose().array() *
                     c.s0.row(b).transpose().array() *
                     c.s1.row(g).transpose().array()).sum();
    t += ip(b, g) * (a1 * c.s0.row(a).transpose().array() *
                     c.s1.row(b).transpose().array() *
                     c.s1.row(g).transpose().array()).sum();
    return scale * t;
}

double empirical_k3(const TwoLayerNet& net, const Vec& xa, const Vec& xb, const Vec& xc) {
    Mat X(3, xa.size());
    X.row(0) = xa;
    X.row(1) = xb;
    X.row(2) = xc;
    ActivationCache c(net, X);
    return empirical_k3(net, c, 0, 1, 2, X);
}

double empirical_k4(const TwoLayerNet& net, const ActivationCache& c,
                    Eigen::Index A, Eigen::Index B, Eigen::Index G, Eigen::Index Xi,
                    const Mat& X) {
    require_smooth(net, "empirical_k4");
    const Eigen::Index m = net.width();
    const double inv_m2 = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
    auto ip = [&](Eigen::Index i, Eigen::Index j) { return X.row(i).dot(X.row(j)); };
    Eigen::ArrayXd a2 = net.a.array() * net.a.array();
    Eigen::ArrayXd a4 = a2 * a2;
    const Mat* S[4] = {&c.s0, &c.s1, &c.s2, &c.s3};
    auto bracket = [&](const Eigen::ArrayXd* w, int pa, int pb, int pg, int px) {
        Eigen::ArrayXd prod = S[pa]->row(A).transpose().array() *
                              S[pb]->row(B).transpose().array() *
                              S[pg]->row(G).transpose().array() *
                              S[px]->row(Xi).transpose().array();
        return w ? (*w * prod).sum() : prod.sum();
    };
    double t = 0.0;
    t += ip(A, B) * ip(A, G) * ip(A, Xi) * bracket(&a4, 3, 1, 1, 1);
    t += ip(B, A) * ip(B, G) * ip(B, Xi) * bracket(&a4, 1, 3, 1, 1);
    t += ip(A, B) * (ip(A, G) * ip(B, Xi) + ip(A, Xi) * ip(B, G)) * bracket(&a4, 2, 2, 1, 1);
    t += ip(A, G) * ip(A, B) * ip(G, Xi) * bracket(&a4, 2, 1, 2, 1);
    t += ip(B, G) * ip(B, A) * ip(G, Xi) * bracket(&a4, 1, 2, 2, 1);
    t += 3.0 * ip(A, B) * ip(A, G) * bracket(&a2, 2, 1, 1, 0);
    t += 3.0 * ip(B, A) * ip(B, G) * bracket(&a2, 1, 2, 1, 0);
    t += 2.0 * ip(A, B) * ip(A, Xi) * bracket(&a2, 2, 1, 0, 1);
    t += 2.0 * ip(B, A) * ip(B, Xi) * bracket(&a2, 1, 2, 0, 1);
    double all_first = bracket(&a2, 1, 1, 1, 1);
    t += (2.0 * ip(A, B) * ip(G, Xi) + ip(A, G) * ip(B, Xi) + ip(A, Xi) * ip(B, G)) * all_first;
    t += ip(A, G) * ip(A, Xi) * bracket(&a2, 2, 0, 1, 1);
    t += ip(G, A) * ip(G, Xi) * bracket(&a2, 1, 0, 2, 1);
    t += ip(B, G) * ip(B, Xi) * bracket(&a2, 0, 2, 1, 1);
    t += ip(G, B) * ip(G, Xi) * bracket(&a2, 0, 1, 2, 1);
    t += 2.0 * ip(A, B) * bracket(nullptr, 1, 1, 0, 0);
    t += ip(A, G) * bracket(nullptr, 1, 0, 1, 0);
    t += ip(B, G) * bracket(nullptr, 0, 1, 1, 0);
    return t * inv_m2;
}

double empirical_k4(const TwoLayerNet& net, const Vec& xa, const Vec& xb, const Vec& xc,
                    const Vec& xd) {
    Mat X(4, xa.size());
    X.row(0) = xa;
    X.row(1) = xb;
    X.row(2) = xc;
    X.row(3) = xd;
    ActivationCache c(net, X);
    return empirical_k4(net, c, 0, 1, 2, 3, X);
}

}  // namespace lantk::net2
