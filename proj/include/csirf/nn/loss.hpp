#pragma once

#include <cmath>
#include <vector>

#include "csirf/errors.hpp"
#include "csirf/nn/tensor.hpp"

namespace csirf::nn {

template <typename T>
struct LossResult {
    double value = 0.0;
    Tensor<T> grad;
};

/// Supervised contrastive loss over L2-normalized embeddings z [B,D].
/// Every sample is an anchor; its positives are the other samples sharing
/// its label; the denominator runs over the whole batch except the anchor.
/// Anchors with no positive are skipped; the loss averages over the rest.
/// Internals run in double regardless of T.
template <typename T>
LossResult<T> supcon_loss(const Tensor<T>& z, const std::vector<int>& labels, double tau) {
    if (tau <= 0.0) throw config_error("supcon: temperature must be positive");
    if (z.shape.size() != 2) throw config_error("supcon: expected [B,D] embeddings");
    const int B = z.dim(0), D = z.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw data_error("supcon: label count does not match batch");
    if (B < 2) throw data_error("supcon: batch must have at least 2 samples");

    std::vector<double> zd(z.data.begin(), z.data.end());
    std::vector<double> s(static_cast<size_t>(B) * B, 0.0);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j) {
            double acc = 0.0;
            const double* zi = zd.data() + static_cast<size_t>(i) * D;
            const double* zj = zd.data() + static_cast<size_t>(j) * D;
            for (int d = 0; d < D; ++d) acc += zi[d] * zj[d];
            s[static_cast<size_t>(i) * B + j] = acc / tau;
        }

    std::vector<int> n_pos(static_cast<size_t>(B), 0);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j)
            if (j != i && labels[static_cast<size_t>(j)] == labels[static_cast<size_t>(i)])
                ++n_pos[static_cast<size_t>(i)];
    int n_anchors = 0;
    for (int c : n_pos)
        if (c > 0) ++n_anchors;
    if (n_anchors == 0) throw data_error("supcon: no anchor has a positive in the batch");

    std::vector<double> G(static_cast<size_t>(B) * B, 0.0);
    double loss = 0.0;
    std::vector<double> p(static_cast<size_t>(B), 0.0);
    for (int i = 0; i < B; ++i) {
        if (n_pos[static_cast<size_t>(i)] == 0) continue;
        const double* si = s.data() + static_cast<size_t>(i) * B;
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < B; ++k)
            if (k != i) m = std::max(m, si[k]);
        double zsum = 0.0;
        for (int k = 0; k < B; ++k) p[static_cast<size_t>(k)] = (k == i) ? 0.0 : std::exp(si[k] - m);
        for (int k = 0; k < B; ++k) zsum += p[static_cast<size_t>(k)];
        const double log_z = m + std::log(zsum);

        const double inv_pos = 1.0 / static_cast<double>(n_pos[static_cast<size_t>(i)]);
        double li = 0.0;
        double* gi = G.data() + static_cast<size_t>(i) * B;
        for (int j = 0; j < B; ++j) {
            if (j == i) continue;
            const double pij = p[static_cast<size_t>(j)] / zsum;
            const bool is_pos = labels[static_cast<size_t>(j)] == labels[static_cast<size_t>(i)];
            if (is_pos) li += log_z - si[j];
            gi[j] = (pij - (is_pos ? inv_pos : 0.0)) / static_cast<double>(n_anchors);
        }
        loss += li * inv_pos;
    }
    loss /= static_cast<double>(n_anchors);

    LossResult<T> out;
    out.value = loss;
    out.grad = Tensor<T>({B, D});
    for (int a = 0; a < B; ++a) {
        T* ga = out.grad.data.data() + static_cast<size_t>(a) * D;
        for (int j = 0; j < B; ++j) {
            const double w = G[static_cast<size_t>(a) * B + j] + G[static_cast<size_t>(j) * B + a];
            if (w == 0.0) continue;
            const double* zj = zd.data() + static_cast<size_t>(j) * D;
            for (int d = 0; d < D; ++d)
                ga[d] += static_cast<T>(w * zj[d] / tau);
        }
    }
    return out;
}

/// Mean cross-entropy over logits [B,K] with integer labels.
template <typename T>
LossResult<T> cross_entropy_loss(const Tensor<T>& logits, const std::vector<int>& labels) {
    if (logits.shape.size() != 2) throw config_error("ce: expected [B,K] logits");
    const int B = logits.dim(0), K = logits.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw data_error("ce: label count does not match batch");
    if (B < 1) throw data_error("ce: empty batch");

    LossResult<T> out;
    out.grad = Tensor<T>({B, K});
    double loss = 0.0;
    std::vector<double> e(static_cast<size_t>(K), 0.0);
    for (int b = 0; b < B; ++b) {
        const int y = labels[static_cast<size_t>(b)];
        if (y < 0 || y >= K) throw data_error("ce: label out of range");
        const T* row = logits.data.data() + static_cast<size_t>(b) * K;
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) m = std::max(m, static_cast<double>(row[k]));
        double zsum = 0.0;
        for (int k = 0; k < K; ++k) {
            e[static_cast<size_t>(k)] = std::exp(static_cast<double>(row[k]) - m);
            zsum += e[static_cast<size_t>(k)];
        }
        loss += m + std::log(zsum) - static_cast<double>(row[y]);
        T* g = out.grad.data.data() + static_cast<size_t>(b) * K;
        for (int k = 0; k < K; ++k) {
            const double soft = e[static_cast<size_t>(k)] / zsum;
            g[k] = static_cast<T>((soft - (k == y ? 1.0 : 0.0)) / static_cast<double>(B));
        }
    }
    out.value = loss / static_cast<double>(B);
    return out;
}

} // namespace csirf::nn
