#include "remod/kernels.hpp"

#if defined(REMOD_KERNELS_X86)

#include <immintrin.h>

// AVX2 kernels. Vector lane l accumulates the same index stream as scalar
// accumulator l, and the horizontal combine is the same (l0+l2)+(l1+l3),
// so results are bit-identical to the scalar reference. Explicit mul+add,
// never FMA.

namespace remod::kernels::avx2 {

namespace {

inline double combine_lanes(__m256d acc, const double* a, const double* b, std::size_t i,
                            std::size_t n) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    if (i + 0 < n) lanes[0] += a[i + 0] * b[i + 0];
    if (i + 1 < n) lanes[1] += a[i + 1] * b[i + 1];
    if (i + 2 < n) lanes[2] += a[i + 2] * b[i + 2];
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    return combine_lanes(acc, a, b, i, n);
}

CosineTerms cosine_terms(const double* a, const double* b, std::size_t n) {
    __m256d acc_d = _mm256_setzero_pd();
    __m256d acc_na = _mm256_setzero_pd();
    __m256d acc_nb = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc_d = _mm256_add_pd(acc_d, _mm256_mul_pd(va, vb));
        acc_na = _mm256_add_pd(acc_na, _mm256_mul_pd(va, va));
        acc_nb = _mm256_add_pd(acc_nb, _mm256_mul_pd(vb, vb));
    }
    CosineTerms t;
    t.dot = combine_lanes(acc_d, a, b, i, n);
    t.norm_a_sq = combine_lanes(acc_na, a, a, i, n);
    t.norm_b_sq = combine_lanes(acc_nb, b, b, i, n);
    return t;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(acc + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(acc + i, _mm256_add_pd(va, vx));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void scale_inplace(double* v, double s, std::size_t n) {
    __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vv = _mm256_loadu_pd(v + i);
        _mm256_storeu_pd(v + i, _mm256_mul_pd(vv, vs));
    }
    for (; i < n; ++i) v[i] *= s;
}

}  // namespace remod::kernels::avx2

#endif  // REMOD_KERNELS_X86
