#include "remod/kernels.hpp"

// Reference kernels. The 4-lane blocked reduction below is the contract the
// SIMD variants must reproduce bit-for-bit; compile with -ffp-contract=off.

namespace remod::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += a[i + 0] * b[i + 0];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    if (i + 0 < n) acc0 += a[i + 0] * b[i + 0];
    if (i + 1 < n) acc1 += a[i + 1] * b[i + 1];
    if (i + 2 < n) acc2 += a[i + 2] * b[i + 2];
    return (acc0 + acc2) + (acc1 + acc3);
}

CosineTerms cosine_terms(const double* a, const double* b, std::size_t n) {
    double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
    double na0 = 0.0, na1 = 0.0, na2 = 0.0, na3 = 0.0;
    double nb0 = 0.0, nb1 = 0.0, nb2 = 0.0, nb3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        d0 += a[i + 0] * b[i + 0];
        d1 += a[i + 1] * b[i + 1];
        d2 += a[i + 2] * b[i + 2];
        d3 += a[i + 3] * b[i + 3];
        na0 += a[i + 0] * a[i + 0];
        na1 += a[i + 1] * a[i + 1];
        na2 += a[i + 2] * a[i + 2];
        na3 += a[i + 3] * a[i + 3];
        nb0 += b[i + 0] * b[i + 0];
        nb1 += b[i + 1] * b[i + 1];
        nb2 += b[i + 2] * b[i + 2];
        nb3 += b[i + 3] * b[i + 3];
    }
    if (i + 0 < n) {
        d0 += a[i + 0] * b[i + 0];
        na0 += a[i + 0] * a[i + 0];
        nb0 += b[i + 0] * b[i + 0];
    }
    if (i + 1 < n) {
        d1 += a[i + 1] * b[i + 1];
        na1 += a[i + 1] * a[i + 1];
        nb1 += b[i + 1] * b[i + 1];
    }
    if (i + 2 < n) {
        d2 += a[i + 2] * b[i + 2];
        na2 += a[i + 2] * a[i + 2];
        nb2 += b[i + 2] * b[i + 2];
    }
    CosineTerms t;
    t.dot = (d0 + d2) + (d1 + d3);
    t.norm_a_sq = (na0 + na2) + (na1 + na3);
    t.norm_b_sq = (nb0 + nb2) + (nb1 + nb3);
    return t;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void scale_inplace(double* v, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] *= s;
}

}  // namespace remod::kernels::scalar
