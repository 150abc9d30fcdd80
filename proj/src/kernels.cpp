#include "remod/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace remod::kernels {

namespace {

struct Vtable {
    double (*dot)(const double*, const double*, std::size_t);
    CosineTerms (*cosine_terms)(const double*, const double*, std::size_t);
    void (*add_inplace)(double*, const double*, std::size_t);
    void (*scale_inplace)(double*, double, std::size_t);
};

constexpr Vtable kScalar{scalar::dot, scalar::cosine_terms, scalar::add_inplace,
                         scalar::scale_inplace};

#if defined(REMOD_KERNELS_X86)
constexpr Vtable kAvx2{avx2::dot, avx2::cosine_terms, avx2::add_inplace, avx2::scale_inplace};
#endif
#if defined(REMOD_KERNELS_NEON)
constexpr Vtable kNeon{neon::dot, neon::cosine_terms, neon::add_inplace, neon::scale_inplace};
#endif

const Vtable* vtable_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &kScalar;
#if defined(REMOD_KERNELS_X86)
        case Backend::avx2:
            return &kAvx2;
#endif
#if defined(REMOD_KERNELS_NEON)
        case Backend::neon:
            return &kNeon;
#endif
        default:
            return nullptr;
    }
}

Backend detect_best() {
#if defined(REMOD_KERNELS_X86) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
#if defined(REMOD_KERNELS_NEON)
    return Backend::neon;
#endif
    return Backend::scalar;
}

Backend initial_backend() {
    if (const char* env = std::getenv("REMOD_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::avx2))
            return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && backend_supported(Backend::neon))
            return Backend::neon;
        // "auto" or anything unrecognized falls through to detection.
    }
    return detect_best();
}

std::atomic<Backend>& selected() {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "unknown";
}

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(REMOD_KERNELS_X86) && defined(__GNUC__)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::neon:
#if defined(REMOD_KERNELS_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
    if (!backend_supported(b)) return false;
    selected().store(b, std::memory_order_relaxed);
    return true;
}

double dot(const double* a, const double* b, std::size_t n) {
    return vtable_for(active_backend())->dot(a, b, n);
}

CosineTerms cosine_terms(const double* a, const double* b, std::size_t n) {
    return vtable_for(active_backend())->cosine_terms(a, b, n);
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    vtable_for(active_backend())->add_inplace(acc, x, n);
}

void scale_inplace(double* v, double s, std::size_t n) {
    vtable_for(active_backend())->scale_inplace(v, s, n);
}

}  // namespace remod::kernels
