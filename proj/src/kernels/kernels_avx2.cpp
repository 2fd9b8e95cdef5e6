#ifdef TOPICPIPE_HAVE_AVX2

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace topicpipe::kernels::detail {

namespace {

// (l0+l2)+(l1+l3): add the upper 128-bit half onto the lower, then the two
// surviving lanes. Same fold as the scalar reference.
inline double hsum_pd(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    const __m128d swapped = _mm_unpackhi_pd(pair, pair);
    return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

// mul+add, never fmadd: a fused multiply-add rounds once where the scalar
// reference rounds twice, and the backends must agree bit for bit.

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    double sum = hsum_pd(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d d = _mm256_sub_pd(va, vb);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double sum = hsum_pd(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

void scale_avx2(double* v, std::size_t n, double factor) {
    const __m256d vf = _mm256_set1_pd(factor);
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        _mm256_storeu_pd(v + i, _mm256_mul_pd(_mm256_loadu_pd(v + i), vf));
    }
    for (; i < n; ++i) v[i] *= factor;
}

void add_inplace_avx2(double* acc, const double* v, std::size_t n) {
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(v + i)));
    }
    for (; i < n; ++i) acc[i] += v[i];
}

}  // namespace topicpipe::kernels::detail

#endif  // TOPICPIPE_HAVE_AVX2
