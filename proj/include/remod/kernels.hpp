#pragma once

#include <cstddef>
#include <span>
#include <string>

// Inner-loop arithmetic for retrieval scoring: dot products, fused
// cosine terms, and vector accumulation over double-precision embeddings.
//
// All variants (scalar, AVX2, NEON) implement the same fixed reduction
// order: four interleaved lane accumulators, tail elements folded into
// lanes 0..2, then combined as (acc0 + acc2) + (acc1 + acc3). No FMA
// contraction is permitted. This makes every backend produce bit-identical
// results, so retrieval scores do not depend on the CPU the run landed on.
// Equivalence is asserted by tests/test_kernels.cpp.

namespace remod::kernels {

enum class Backend {
    scalar,
    avx2,
    neon,
};

const char* backend_name(Backend b);

/// Backend currently used by the dispatched entry points. Resolved once on
/// first use: REMOD_KERNEL env var (scalar|avx2|neon|auto) if set, else the
/// widest variant this CPU supports.
Backend active_backend();

/// Force a specific backend. Returns false (and leaves the selection
/// unchanged) when the CPU cannot run it.
bool set_backend(Backend b);

bool backend_supported(Backend b);

struct CosineTerms {
    double dot = 0.0;
    double norm_a_sq = 0.0;
    double norm_b_sq = 0.0;
};

/// a . b over n elements.
double dot(const double* a, const double* b, std::size_t n);

/// One pass producing a.b, a.a and b.b.
CosineTerms cosine_terms(const double* a, const double* b, std::size_t n);

/// acc[i] += x[i]
void add_inplace(double* acc, const double* x, std::size_t n);

/// v[i] *= s
void scale_inplace(double* v, double s, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size());
}

inline CosineTerms cosine_terms(std::span<const double> a, std::span<const double> b) {
    return cosine_terms(a.data(), b.data(), a.size());
}

inline void add_inplace(std::span<double> acc, std::span<const double> x) {
    add_inplace(acc.data(), x.data(), acc.size());
}

inline void scale_inplace(std::span<double> v, double s) {
    scale_inplace(v.data(), s, v.size());
}

// Reference implementations; always compiled, used directly by test oracles.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
CosineTerms cosine_terms(const double* a, const double* b, std::size_t n);
void add_inplace(double* acc, const double* x, std::size_t n);
void scale_inplace(double* v, double s, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define REMOD_KERNELS_X86 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
CosineTerms cosine_terms(const double* a, const double* b, std::size_t n);
void add_inplace(double* acc, const double* x, std::size_t n);
void scale_inplace(double* v, double s, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define REMOD_KERNELS_NEON 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
CosineTerms cosine_terms(const double* a, const double* b, std::size_t n);
void add_inplace(double* acc, const double* x, std::size_t n);
void scale_inplace(double* v, double s, std::size_t n);
}  // namespace neon
#endif

}  // namespace remod::kernels
