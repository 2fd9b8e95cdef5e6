#ifdef TOPICPIPE_HAVE_NEON

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace topicpipe::kernels::detail {

// Two float64x2 registers emulate the 4-lane block of the scalar reference:
// acc01 holds lanes 0/1, acc23 lanes 2/3. vaddq(acc01, acc23) yields
// (l0+l2, l1+l3) and the final lane add completes the same fold.

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    const float64x2_t pair = vaddq_f64(acc01, acc23);
    double sum = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{3};
    for (; i < blocked; i += 4) {
        const float64x2_t d01 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d23 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc01 = vaddq_f64(acc01, vmulq_f64(d01, d01));
        acc23 = vaddq_f64(acc23, vmulq_f64(d23, d23));
    }
    const float64x2_t pair = vaddq_f64(acc01, acc23);
    double sum = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

void scale_neon(double* v, std::size_t n, double factor) {
    const float64x2_t vf = vdupq_n_f64(factor);
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{1};
    for (; i < blocked; i += 2) {
        vst1q_f64(v + i, vmulq_f64(vld1q_f64(v + i), vf));
    }
    for (; i < n; ++i) v[i] *= factor;
}

void add_inplace_neon(double* acc, const double* v, std::size_t n) {
    std::size_t i = 0;
    const std::size_t blocked = n & ~std::size_t{1};
    for (; i < blocked; i += 2) {
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(v + i)));
    }
    for (; i < n; ++i) acc[i] += v[i];
}

}  // namespace topicpipe::kernels::detail

#endif  // TOPICPIPE_HAVE_NEON
