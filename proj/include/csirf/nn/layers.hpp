#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "csirf/errors.hpp"
#include "csirf/nn/gemm.hpp"
#include "csirf/nn/tensor.hpp"
#include "csirf/random.hpp"

namespace csirf::nn {

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* tensor;
    bool trainable;
};

/// Base for differentiable modules. backward() consumes the gradient of the
/// loss w.r.t. the last forward output, accumulates parameter gradients and
/// returns the gradient w.r.t. the input. Layers cache whatever the backward
/// pass needs, so forward/backward calls must stay paired.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, bool training) = 0;
    virtual Tensor<T> backward(const Tensor<T>& gy) = 0;
    virtual void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
        (void)prefix;
        (void)out;
    }
    virtual void init(RandomStream& rng) { (void)rng; }
};

template <typename T>
inline void kaiming_uniform(Tensor<T>& w, int fan_in, RandomStream& rng) {
    if (fan_in <= 0) throw config_error("kaiming init: fan_in must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : w.data) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void im2col(const T* x, int C, int H, int W, int kh, int kw, int sh, int sw, int ph, int pw,
            int Ho, int Wo, T* cols) {
    // cols has shape [C*kh*kw, Ho*Wo], row-major.
    int row = 0;
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j, ++row) {
                T* dst = cols + static_cast<size_t>(row) * Ho * Wo;
                for (int oh = 0; oh < Ho; ++oh) {
                    const int ih = oh * sh - ph + i;
                    const bool hin = (ih >= 0 && ih < H);
                    const T* src = x + (static_cast<size_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < Wo; ++ow) {
                        const int iw = ow * sw - pw + j;
                        *dst++ = (hin && iw >= 0 && iw < W) ? src[iw] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* cols, int C, int H, int W, int kh, int kw, int sh, int sw, int ph,
                int pw, int Ho, int Wo, T* gx) {
    int row = 0;
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j, ++row) {
                const T* src = cols + static_cast<size_t>(row) * Ho * Wo;
                for (int oh = 0; oh < Ho; ++oh, src += Wo) {
                    const int ih = oh * sh - ph + i;
                    if (ih < 0 || ih >= H) continue;
                    T* dst = gx + (static_cast<size_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < Wo; ++ow) {
                        const int iw = ow * sw - pw + j;
                        if (iw >= 0 && iw < W) dst[iw] += src[ow];
                    }
                }
            }
        }
    }
}

template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(int in_ch, int out_ch, int kh, int kw, int sh, int sw, int ph, int pw,
           bool bias = true)
        : in_ch_(in_ch), out_ch_(out_ch), kh_(kh), kw_(kw), sh_(sh), sw_(sw), ph_(ph), pw_(pw),
          has_bias_(bias), w_({out_ch, in_ch, kh, kw}) {
        if (in_ch <= 0 || out_ch <= 0 || kh <= 0 || kw <= 0 || sh <= 0 || sw <= 0 || ph < 0 ||
            pw < 0)
            throw config_error("conv2d: invalid geometry");
        if (has_bias_) b_ = Tensor<T>({out_ch});
    }

    void init(RandomStream& rng) override {
        kaiming_uniform(w_, in_ch_ * kh_ * kw_, rng);
        if (has_bias_) std::fill(b_.data.begin(), b_.data.end(), T(0));
    }

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        check_input(x);
        x_ = x;
        const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int Ho = out_extent(H, kh_, sh_, ph_), Wo = out_extent(W, kw_, sw_, pw_);
        Tensor<T> y({B, out_ch_, Ho, Wo});
        const int K = in_ch_ * kh_ * kw_, S = Ho * Wo;
        cols_.assign(static_cast<size_t>(K) * S, T(0));
        for (int b = 0; b < B; ++b) {
            const T* xb = x.data.data() + static_cast<size_t>(b) * in_ch_ * H * W;
            T* yb = y.data.data() + static_cast<size_t>(b) * out_ch_ * S;
            im2col(xb, in_ch_, H, W, kh_, kw_, sh_, sw_, ph_, pw_, Ho, Wo, cols_.data());
            gemm_nn(out_ch_, S, K, w_.data.data(), cols_.data(), yb, false);
            if (has_bias_)
                for (int c = 0; c < out_ch_; ++c) {
                    const T bc = b_.data[static_cast<size_t>(c)];
                    T* row = yb + static_cast<size_t>(c) * S;
                    for (int s = 0; s < S; ++s) row[s] += bc;
                }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) override {
        const int B = x_.dim(0), H = x_.dim(2), W = x_.dim(3);
        const int Ho = gy.dim(2), Wo = gy.dim(3);
        const int K = in_ch_ * kh_ * kw_, S = Ho * Wo;
        w_.ensure_grad();
        if (has_bias_) b_.ensure_grad();
        Tensor<T> gx({B, in_ch_, H, W});
        std::vector<T> dcols(static_cast<size_t>(K) * S);
        for (int b = 0; b < B; ++b) {
            const T* xb = x_.data.data() + static_cast<size_t>(b) * in_ch_ * H * W;
            const T* gyb = gy.data.data() + static_cast<size_t>(b) * out_ch_ * S;
            im2col(xb, in_ch_, H, W, kh_, kw_, sh_, sw_, ph_, pw_, Ho, Wo, cols_.data());
            gemm_nt(out_ch_, K, S, gyb, cols_.data(), w_.grad.data(), true);
            if (has_bias_)
                for (int c = 0; c < out_ch_; ++c) {
                    T acc = T(0);
                    const T* row = gyb + static_cast<size_t>(c) * S;
                    for (int s = 0; s < S; ++s) acc += row[s];
                    b_.grad[static_cast<size_t>(c)] += acc;
                }
            gemm_tn(K, S, out_ch_, w_.data.data(), gyb, dcols.data(), false);
            col2im_add(dcols.data(), in_ch_, H, W, kh_, kw_, sh_, sw_, ph_, pw_, Ho, Wo,
                       gx.data.data() + static_cast<size_t>(b) * in_ch_ * H * W);
        }
        return gx;
    }

    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        out.push_back({prefix + ".weight", &w_, true});
        if (has_bias_) out.push_back({prefix + ".bias", &b_, true});
    }

    static int out_extent(int in, int k, int s, int p) {
        const int e = (in + 2 * p - k) / s + 1;
        if (in + 2 * p < k || e <= 0) throw config_error("conv2d: kernel larger than input");
        return e;
    }

private:
    void check_input(const Tensor<T>& x) const {
        if (x.shape.size() != 4 || x.dim(1) != in_ch_)
            throw config_error("conv2d: expected NCHW input with " + std::to_string(in_ch_) +
                               " channels, got " + shape_str(x.shape));
    }

    int in_ch_, out_ch_, kh_, kw_, sh_, sw_, ph_, pw_;
    bool has_bias_;
    Tensor<T> w_, b_;
    Tensor<T> x_;
    std::vector<T> cols_;
};

template <typename T>
class BatchNorm final : public Layer<T> {
public:
    explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5)
        : c_(channels), momentum_(momentum), eps_(eps), gamma_({channels}), beta_({channels}),
          run_mean_({channels}), run_var_({channels}) {
        if (channels <= 0) throw config_error("batchnorm: channels must be positive");
        std::fill(gamma_.data.begin(), gamma_.data.end(), T(1));
        std::fill(run_var_.data.begin(), run_var_.data.end(), T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) override {
        if (x.shape.size() != 4 || x.dim(1) != c_)
            throw config_error("batchnorm: expected NCHW input with " + std::to_string(c_) +
                               " channels, got " + shape_str(x.shape));
        training_ = training;
        const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int64_t n = static_cast<int64_t>(B) * H * W;
        if (training && n < 2) throw numeric_error("batchnorm: training needs >= 2 values");
        Tensor<T> y(x.shape);
        xhat_ = Tensor<T>(x.shape);
        invstd_.assign(static_cast<size_t>(c_), T(0));
        n_ = n;
        for (int c = 0; c < c_; ++c) {
            T mean, var;
            if (training) {
                T acc = T(0);
                for_channel(x, c, [&](T v, int64_t) { acc += v; });
                mean = acc / static_cast<T>(n);
                T acc2 = T(0);
                for_channel(x, c, [&](T v, int64_t) {
                    const T d = v - mean;
                    acc2 += d * d;
                });
                var = acc2 / static_cast<T>(n);
                const T unbiased = acc2 / static_cast<T>(n - 1);
                auto& rm = run_mean_.data[static_cast<size_t>(c)];
                auto& rv = run_var_.data[static_cast<size_t>(c)];
                rm = static_cast<T>((1.0 - momentum_) * rm + momentum_ * mean);
                rv = static_cast<T>((1.0 - momentum_) * rv + momentum_ * unbiased);
            } else {
                mean = run_mean_.data[static_cast<size_t>(c)];
                var = run_var_.data[static_cast<size_t>(c)];
            }
            const T inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(var) + eps_));
            invstd_[static_cast<size_t>(c)] = inv;
            const T g = gamma_.data[static_cast<size_t>(c)], bt = beta_.data[static_cast<size_t>(c)];
            for_channel2(x, xhat_, y, c, [&](T v, T& xh, T& out) {
                xh = (v - mean) * inv;
                out = g * xh + bt;
            });
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) override {
        gamma_.ensure_grad();
        beta_.ensure_grad();
        Tensor<T> gx(gy.shape);
        for (int c = 0; c < c_; ++c) {
            T sum_gy = T(0), sum_gy_xhat = T(0);
            for_channel2c(gy, xhat_, c, [&](T g, T xh) {
                sum_gy += g;
                sum_gy_xhat += g * xh;
            });
            gamma_.grad[static_cast<size_t>(c)] += sum_gy_xhat;
            beta_.grad[static_cast<size_t>(c)] += sum_gy;
            const T g = gamma_.data[static_cast<size_t>(c)];
            const T inv = invstd_[static_cast<size_t>(c)];
            if (training_) {
                const T invn = T(1) / static_cast<T>(n_);
                for_channel3(gy, xhat_, gx, c, [&](T gv, T xh, T& out) {
                    out = g * inv * invn *
                          (static_cast<T>(n_) * gv - sum_gy - xh * sum_gy_xhat);
                });
            } else {
                for_channel3(gy, xhat_, gx, c, [&](T gv, T, T& out) { out = g * inv * gv; });
            }
        }
        return gx;
    }

    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        out.push_back({prefix + ".weight", &gamma_, true});
        out.push_back({prefix + ".bias", &beta_, true});
        out.push_back({prefix + ".running_mean", &run_mean_, false});
        out.push_back({prefix + ".running_var", &run_var_, false});
    }

private:
    template <typename F>
    void for_channel(const Tensor<T>& x, int c, F&& f) const {
        const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int64_t hw = static_cast<int64_t>(H) * W;
        int64_t idx = 0;
        for (int b = 0; b < B; ++b) {
            const T* p = x.data.data() + ((static_cast<size_t>(b) * c_) + c) * hw;
            for (int64_t s = 0; s < hw; ++s, ++idx) f(p[s], idx);
        }
    }
    template <typename F>
    void for_channel2(const Tensor<T>& x, Tensor<T>& u, Tensor<T>& v, int c, F&& f) const {
        const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int64_t hw = static_cast<int64_t>(H) * W;
        for (int b = 0; b < B; ++b) {
            const size_t off = ((static_cast<size_t>(b) * c_) + c) * hw;
            const T* p = x.data.data() + off;
            T* pu = u.data.data() + off;
            T* pv = v.data.data() + off;
            for (int64_t s = 0; s < hw; ++s) f(p[s], pu[s], pv[s]);
        }
    }
    template <typename F>
    void for_channel2c(const Tensor<T>& x, const Tensor<T>& u, int c, F&& f) const {
        const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int64_t hw = static_cast<int64_t>(H) * W;
        for (int b = 0; b < B; ++b) {
            const size_t off = ((static_cast<size_t>(b) * c_) + c) * hw;
            const T* p = x.data.data() + off;
            const T* pu = u.data.data() + off;
            for (int64_t s = 0; s < hw; ++s) f(p[s], pu[s]);
        }
    }
    template <typename F>
    void for_channel3(const Tensor<T>& x, const Tensor<T>& u, Tensor<T>& v, int c, F&& f) const {
        const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int64_t hw = static_cast<int64_t>(H) * W;
        for (int b = 0; b < B; ++b) {
            const size_t off = ((static_cast<size_t>(b) * c_) + c) * hw;
            const T* p = x.data.data() + off;
            const T* pu = u.data.data() + off;
            T* pv = v.data.data() + off;
            for (int64_t s = 0; s < hw; ++s) f(p[s], pu[s], pv[s]);
        }
    }

    int c_;
    double momentum_, eps_;
    Tensor<T> gamma_, beta_, run_mean_, run_var_;
    Tensor<T> xhat_;
    std::vector<T> invstd_;
    int64_t n_ = 0;
    bool training_ = true;
};

/// Exact GELU: x * Phi(x) with the Gaussian CDF, not the tanh approximation.
template <typename T>
class Gelu final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        x_ = x;
        Tensor<T> y(x.shape);
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double v = static_cast<double>(x.data[i]);
            y.data[i] = static_cast<T>(v * 0.5 * (1.0 + std::erf(v / std::sqrt(2.0))));
        }
        return y;
    }
    Tensor<T> backward(const Tensor<T>& gy) override {
        Tensor<T> gx(gy.shape);
        for (size_t i = 0; i < gy.data.size(); ++i) {
            const double v = static_cast<double>(x_.data[i]);
            const double phi = std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
            const double cdf = 0.5 * (1.0 + std::erf(v / std::sqrt(2.0)));
            gx.data[i] = static_cast<T>(static_cast<double>(gy.data[i]) * (cdf + v * phi));
        }
        return gx;
    }

private:
    Tensor<T> x_;
};

template <typename T>
class Linear final : public Layer<T> {
public:
    Linear(int in, int out, bool bias = true)
        : in_(in), out_(out), has_bias_(bias), w_({out, in}) {
        if (in <= 0 || out <= 0) throw config_error("linear: invalid dimensions");
        if (has_bias_) b_ = Tensor<T>({out});
    }

    void init(RandomStream& rng) override {
        kaiming_uniform(w_, in_, rng);
        if (has_bias_) std::fill(b_.data.begin(), b_.data.end(), T(0));
    }

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        if (x.shape.size() != 2 || x.dim(1) != in_)
            throw config_error("linear: expected [B," + std::to_string(in_) + "], got " +
                               shape_str(x.shape));
        x_ = x;
        const int B = x.dim(0);
        Tensor<T> y({B, out_});
        gemm_nt(B, out_, in_, x.data.data(), w_.data.data(), y.data.data(), false);
        if (has_bias_)
            for (int b = 0; b < B; ++b)
                for (int o = 0; o < out_; ++o)
                    y.data[static_cast<size_t>(b) * out_ + o] += b_.data[static_cast<size_t>(o)];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) override {
        const int B = x_.dim(0);
        w_.ensure_grad();
        if (has_bias_) b_.ensure_grad();
        gemm_tn(out_, in_, B, gy.data.data(), x_.data.data(), w_.grad.data(), true);
        if (has_bias_)
            for (int b = 0; b < B; ++b)
                for (int o = 0; o < out_; ++o)
                    b_.grad[static_cast<size_t>(o)] += gy.data[static_cast<size_t>(b) * out_ + o];
        Tensor<T> gx({B, in_});
        gemm_nn(B, in_, out_, gy.data.data(), w_.data.data(), gx.data.data(), false);
        return gx;
    }

    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        out.push_back({prefix + ".weight", &w_, true});
        if (has_bias_) out.push_back({prefix + ".bias", &b_, true});
    }

private:
    int in_, out_;
    bool has_bias_;
    Tensor<T> w_, b_;
    Tensor<T> x_;
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        if (x.shape.size() != 4) throw config_error("gap: expected NCHW input");
        in_shape_ = x.shape;
        const int B = x.dim(0), C = x.dim(1);
        const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
        Tensor<T> y({B, C});
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c) {
                const T* p = x.data.data() + (static_cast<size_t>(b) * C + c) * hw;
                T acc = T(0);
                for (int64_t s = 0; s < hw; ++s) acc += p[s];
                y.data[static_cast<size_t>(b) * C + c] = acc / static_cast<T>(hw);
            }
        return y;
    }
    Tensor<T> backward(const Tensor<T>& gy) override {
        const int B = in_shape_[0], C = in_shape_[1];
        const int64_t hw = static_cast<int64_t>(in_shape_[2]) * in_shape_[3];
        Tensor<T> gx(in_shape_);
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c) {
                const T g = gy.data[static_cast<size_t>(b) * C + c] / static_cast<T>(hw);
                T* p = gx.data.data() + (static_cast<size_t>(b) * C + c) * hw;
                for (int64_t s = 0; s < hw; ++s) p[s] = g;
            }
        return gx;
    }

private:
    std::vector<int> in_shape_;
};

/// Row-wise L2 normalization with an epsilon guard for zero rows. Guarded
/// rows are counted so callers can surface degeneracy instead of dividing
/// by zero.
template <typename T>
class L2NormalizeRows final : public Layer<T> {
public:
    static constexpr double kEps = 1e-12;

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        if (x.shape.size() != 2) throw config_error("l2norm: expected [B,D] input");
        const int B = x.dim(0), D = x.dim(1);
        y_ = Tensor<T>(x.shape);
        norms_.assign(static_cast<size_t>(B), T(0));
        guarded_.assign(static_cast<size_t>(B), 0);
        for (int b = 0; b < B; ++b) {
            const T* p = x.data.data() + static_cast<size_t>(b) * D;
            double acc = 0.0;
            for (int d = 0; d < D; ++d) acc += static_cast<double>(p[d]) * p[d];
            double nrm = std::sqrt(acc);
            if (nrm < kEps) {
                nrm = kEps;
                guarded_[static_cast<size_t>(b)] = 1;
                ++guard_hits_;
            }
            norms_[static_cast<size_t>(b)] = static_cast<T>(nrm);
            T* q = y_.data.data() + static_cast<size_t>(b) * D;
            for (int d = 0; d < D; ++d) q[d] = static_cast<T>(p[d] / nrm);
        }
        return y_;
    }

    Tensor<T> backward(const Tensor<T>& gy) override {
        const int B = gy.dim(0), D = gy.dim(1);
        Tensor<T> gx(gy.shape);
        for (int b = 0; b < B; ++b) {
            const T* g = gy.data.data() + static_cast<size_t>(b) * D;
            const T* y = y_.data.data() + static_cast<size_t>(b) * D;
            T* o = gx.data.data() + static_cast<size_t>(b) * D;
            const T nrm = norms_[static_cast<size_t>(b)];
            if (guarded_[static_cast<size_t>(b)]) {
                for (int d = 0; d < D; ++d) o[d] = g[d] / nrm;
                continue;
            }
            T dot = T(0);
            for (int d = 0; d < D; ++d) dot += g[d] * y[d];
            for (int d = 0; d < D; ++d) o[d] = (g[d] - y[d] * dot) / nrm;
        }
        return gx;
    }

    int64_t guard_hits() const { return guard_hits_; }

private:
    Tensor<T> y_;
    std::vector<T> norms_;
    std::vector<uint8_t> guarded_;
    int64_t guard_hits_ = 0;
};

/// Two 1x3 convolutions over the subcarrier axis with batch norm, a GELU in
/// between, and a skip connection; the skip uses a 1x1 projection whenever
/// stride or width changes. GELU after the sum.
template <typename T>
class ResidualBlock final : public Layer<T> {
public:
    ResidualBlock(int in_ch, int out_ch, int stride)
        : conv1_(in_ch, out_ch, 1, 3, 1, stride, 0, 1), bn1_(out_ch),
          conv2_(out_ch, out_ch, 1, 3, 1, 1, 0, 1), bn2_(out_ch),
          projected_(stride != 1 || in_ch != out_ch) {
        if (projected_) {
            proj_conv_ = std::make_unique<Conv2d<T>>(in_ch, out_ch, 1, 1, 1, stride, 0, 0);
            proj_bn_ = std::make_unique<BatchNorm<T>>(out_ch);
        }
    }

    void init(RandomStream& rng) override {
        conv1_.init(rng);
        conv2_.init(rng);
        if (projected_) proj_conv_->init(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) override {
        Tensor<T> main = bn1_.forward(conv1_.forward(x, training), training);
        main = gelu_mid_.forward(main, training);
        main = bn2_.forward(conv2_.forward(main, training), training);
        Tensor<T> skip =
            projected_ ? proj_bn_->forward(proj_conv_->forward(x, training), training) : x;
        if (main.shape != skip.shape)
            throw config_error("residual block: branch shape mismatch " + shape_str(main.shape) +
                               " vs " + shape_str(skip.shape));
        Tensor<T> sum(main.shape);
        for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] = main.data[i] + skip.data[i];
        return gelu_out_.forward(sum, training);
    }

    Tensor<T> backward(const Tensor<T>& gy) override {
        Tensor<T> gsum = gelu_out_.backward(gy);
        Tensor<T> gmain = conv1_.backward(bn1_.backward(
            gelu_mid_.backward(conv2_.backward(bn2_.backward(gsum)))));
        Tensor<T> gskip =
            projected_ ? proj_conv_->backward(proj_bn_->backward(gsum)) : std::move(gsum);
        for (size_t i = 0; i < gmain.data.size(); ++i) gmain.data[i] += gskip.data[i];
        return gmain;
    }

    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        conv1_.collect_params(prefix + ".conv1", out);
        bn1_.collect_params(prefix + ".bn1", out);
        conv2_.collect_params(prefix + ".conv2", out);
        bn2_.collect_params(prefix + ".bn2", out);
        if (projected_) {
            proj_conv_->collect_params(prefix + ".proj.conv", out);
            proj_bn_->collect_params(prefix + ".proj.bn", out);
        }
    }

private:
    Conv2d<T> conv1_;
    BatchNorm<T> bn1_;
    Conv2d<T> conv2_;
    BatchNorm<T> bn2_;
    Gelu<T> gelu_mid_, gelu_out_;
    bool projected_;
    std::unique_ptr<Conv2d<T>> proj_conv_;
    std::unique_ptr<BatchNorm<T>> proj_bn_;
};

} // namespace csirf::nn
