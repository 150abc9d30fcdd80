#include "remod/kernels.hpp"

#if defined(REMOD_KERNELS_NEON)

#include <arm_neon.h>

// NEON kernels. Two 128-bit registers cover lanes {0,1} and {2,3} of the
// scalar reference; the combine order (l0+l2)+(l1+l3) matches it exactly.

namespace remod::kernels::neon {

namespace {

inline double combine_lanes(float64x2_t acc01, float64x2_t acc23, const double* a,
                            const double* b, std::size_t i, std::size_t n) {
    double l0 = vgetq_lane_f64(acc01, 0);
    double l1 = vgetq_lane_f64(acc01, 1);
    double l2 = vgetq_lane_f64(acc23, 0);
    double l3 = vgetq_lane_f64(acc23, 1);
    if (i + 0 < n) l0 += a[i + 0] * b[i + 0];
    if (i + 1 < n) l1 += a[i + 1] * b[i + 1];
    if (i + 2 < n) l2 += a[i + 2] * b[i + 2];
    return (l0 + l2) + (l1 + l3);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    return combine_lanes(acc01, acc23, a, b, i, n);
}

CosineTerms cosine_terms(const double* a, const double* b, std::size_t n) {
    float64x2_t d01 = vdupq_n_f64(0.0), d23 = vdupq_n_f64(0.0);
    float64x2_t na01 = vdupq_n_f64(0.0), na23 = vdupq_n_f64(0.0);
    float64x2_t nb01 = vdupq_n_f64(0.0), nb23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t a01 = vld1q_f64(a + i), a23 = vld1q_f64(a + i + 2);
        float64x2_t b01 = vld1q_f64(b + i), b23 = vld1q_f64(b + i + 2);
        d01 = vaddq_f64(d01, vmulq_f64(a01, b01));
        d23 = vaddq_f64(d23, vmulq_f64(a23, b23));
        na01 = vaddq_f64(na01, vmulq_f64(a01, a01));
        na23 = vaddq_f64(na23, vmulq_f64(a23, a23));
        nb01 = vaddq_f64(nb01, vmulq_f64(b01, b01));
        nb23 = vaddq_f64(nb23, vmulq_f64(b23, b23));
    }
    CosineTerms t;
    t.dot = combine_lanes(d01, d23, a, b, i, n);
    t.norm_a_sq = combine_lanes(na01, na23, a, a, i, n);
    t.norm_b_sq = combine_lanes(nb01, nb23, b, b, i, n);
    return t;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void scale_inplace(double* v, double s, std::size_t n) {
    float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(v + i, vmulq_f64(vld1q_f64(v + i), vs));
    }
    for (; i < n; ++i) v[i] *= s;
}

}  // namespace remod::kernels::neon

#endif  // REMOD_KERNELS_NEON
