#include "topicpipe/kernels.hpp"

#include <atomic>
#include <stdexcept>

#include "kernels_impl.hpp"

namespace topicpipe::kernels {

namespace detail {

// Reference kernels. The 4-lane accumulation pattern mirrors one AVX2
// register of doubles; lane j holds the partial sum of elements 4i+j and
// the lanes fold as (l0+l2)+(l1+l3), matching the extract/add horizontal
// sum in the SIMD variants. Tail elements are added after the fold, in
// element order.

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        lane[0] += a[i] * b[i];
        lane[1] += a[i + 1] * b[i + 1];
        lane[2] += a[i + 2] * b[i + 2];
        lane[3] += a[i + 3] * b[i + 3];
    }
    double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        lane[0] += d0 * d0;
        lane[1] += d1 * d1;
        lane[2] += d2 * d2;
        lane[3] += d3 * d3;
    }
    double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

void scale_scalar(double* v, std::size_t n, double factor) {
    for (std::size_t i = 0; i < n; ++i) v[i] *= factor;
}

void add_inplace_scalar(double* acc, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += v[i];
}

}  // namespace detail

namespace {

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    void (*scale)(double*, std::size_t, double);
    void (*add_inplace)(double*, const double*, std::size_t);
    Backend backend;
};

constexpr KernelTable kScalarTable{detail::dot_scalar, detail::squared_distance_scalar,
                                   detail::scale_scalar, detail::add_inplace_scalar,
                                   Backend::Scalar};

#ifdef TOPICPIPE_HAVE_AVX2
constexpr KernelTable kAvx2Table{detail::dot_avx2, detail::squared_distance_avx2,
                                 detail::scale_avx2, detail::add_inplace_avx2, Backend::Avx2};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}
#endif

#ifdef TOPICPIPE_HAVE_NEON
constexpr KernelTable kNeonTable{detail::dot_neon, detail::squared_distance_neon,
                                 detail::scale_neon, detail::add_inplace_neon, Backend::Neon};
#endif

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &kScalarTable;
        case Backend::Avx2:
#ifdef TOPICPIPE_HAVE_AVX2
            if (cpu_has_avx2()) return &kAvx2Table;
#endif
            return nullptr;
        case Backend::Neon:
#ifdef TOPICPIPE_HAVE_NEON
            return &kNeonTable;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable* detect_best() {
    if (const KernelTable* t = table_for(Backend::Avx2)) return t;
    if (const KernelTable* t = table_for(Backend::Neon)) return t;
    return &kScalarTable;
}

std::atomic<const KernelTable*>& active_table() {
    static std::atomic<const KernelTable*> table{detect_best()};
    return table;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::Scalar};
    if (table_for(Backend::Avx2)) out.push_back(Backend::Avx2);
    if (table_for(Backend::Neon)) out.push_back(Backend::Neon);
    return out;
}

Backend active_backend() { return active_table().load(std::memory_order_relaxed)->backend; }

void set_backend(Backend b) {
    const KernelTable* t = table_for(b);
    if (t == nullptr) {
        throw std::invalid_argument(std::string("kernel backend not available: ") +
                                    backend_name(b));
    }
    active_table().store(t, std::memory_order_relaxed);
}

double dot(const double* a, const double* b, std::size_t n) {
    return active_table().load(std::memory_order_relaxed)->dot(a, b, n);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    return active_table().load(std::memory_order_relaxed)->squared_distance(a, b, n);
}

void scale(double* v, std::size_t n, double factor) {
    active_table().load(std::memory_order_relaxed)->scale(v, n, factor);
}

void add_inplace(double* acc, const double* v, std::size_t n) {
    active_table().load(std::memory_order_relaxed)->add_inplace(acc, v, n);
}

}  // namespace topicpipe::kernels
