#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace topicpipe::kernels {

/// Vector arithmetic used by the embedding, reduction, clustering and
/// representation stages. The scalar kernels are the reference definition:
/// reductions accumulate into four independent lanes (lane j sums elements
/// 4i+j), combine as (l0+l2)+(l1+l3), then fold the tail in element order.
/// SIMD variants perform the identical IEEE operation sequence, so every
/// backend returns bit-identical results; the equivalence suite asserts
/// exact equality, not a tolerance. Builds disable fp contraction to keep
/// the scalar path honest.

enum class Backend {
    Scalar,
    Avx2,
    Neon,
};

const char* backend_name(Backend b);

/// Backends usable on this machine (Scalar always present, best-first order
/// is not implied; see active_backend for the default choice).
std::vector<Backend> available_backends();

/// Currently selected backend. Defaults to the widest available SIMD
/// variant, detected once on first use.
Backend active_backend();

/// Force a backend (tests use this to cross-check variants). Throws
/// std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void scale(double* v, std::size_t n, double factor);
void add_inplace(double* acc, const double* v, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    return squared_distance(a.data(), b.data(), a.size());
}
inline void scale(std::span<double> v, double factor) { scale(v.data(), v.size(), factor); }
inline void add_inplace(std::span<double> acc, std::span<const double> v) {
    add_inplace(acc.data(), v.data(), acc.size());
}

}  // namespace topicpipe::kernels
