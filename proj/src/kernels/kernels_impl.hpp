#pragma once

#include <cstddef>

// Per-backend raw kernels. Only the dispatcher in kernels.cpp should
// include this header.
namespace topicpipe::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double squared_distance_scalar(const double* a, const double* b, std::size_t n);
void scale_scalar(double* v, std::size_t n, double factor);
void add_inplace_scalar(double* acc, const double* v, std::size_t n);

#ifdef TOPICPIPE_HAVE_AVX2
double dot_avx2(const double* a, const double* b, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
void scale_avx2(double* v, std::size_t n, double factor);
void add_inplace_avx2(double* acc, const double* v, std::size_t n);
#endif

#ifdef TOPICPIPE_HAVE_NEON
double dot_neon(const double* a, const double* b, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
void scale_neon(double* v, std::size_t n, double factor);
void add_inplace_neon(double* acc, const double* v, std::size_t n);
#endif

}  // namespace topicpipe::kernels::detail
