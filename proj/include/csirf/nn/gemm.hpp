#pragma once

#include <cstddef>

namespace csirf::nn {

// Serial ikj matrix products on tightly packed row-major buffers. Iteration
// order is fixed so accumulation is bit-reproducible run to run.

/// C (+)= A[M x K] * B[K x N]
template <typename T>
void gemm_nn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
    if (!accumulate)
        for (int i = 0; i < M * N; ++i) C[i] = T(0);
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<size_t>(i) * K;
        T* c = C + static_cast<size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const T aik = a[k];
            const T* b = B + static_cast<size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += aik * b[j];
        }
    }
}

/// C (+)= A[M x K] * B[N x K]^T
template <typename T>
void gemm_nt(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<size_t>(i) * K;
        T* c = C + static_cast<size_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const T* b = B + static_cast<size_t>(j) * K;
            T acc = accumulate ? c[j] : T(0);
            for (int k = 0; k < K; ++k) acc += a[k] * b[k];
            c[j] = acc;
        }
    }
}

/// C (+)= A[K x M]^T * B[K x N]
template <typename T>
void gemm_tn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
    if (!accumulate)
        for (int i = 0; i < M * N; ++i) C[i] = T(0);
    for (int k = 0; k < K; ++k) {
        const T* a = A + static_cast<size_t>(k) * M;
        const T* b = B + static_cast<size_t>(k) * N;
        for (int i = 0; i < M; ++i) {
            const T aki = a[i];
            T* c = C + static_cast<size_t>(i) * N;
            for (int j = 0; j < N; ++j) c[j] += aki * b[j];
        }
    }
}

} // namespace csirf::nn
