#pragma once

#include <string>
#include <vector>

#include "topicpipe/embed.hpp"

namespace topicpipe::reduce {

/// Principal-component reducer fit on mean-centered data. Component rows are
/// orthonormal, ordered by descending explained variance, and sign-fixed so
/// the largest-magnitude entry of each row is non-negative (first such index
/// on magnitude ties), which makes the fit bit-stable for identical inputs.
struct Reducer {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::vector<std::vector<double>> components;  // output_dim rows of input_dim
    std::vector<double> mean;
    std::vector<double> explained_variance;  // one per component, non-increasing

    std::string to_json() const;
    static Reducer from_json(const std::string& text);
};

/// Throws ValidationError for fewer than 2 vectors or an oversized
/// output_dim, and a zero-variance error (the caller should skip reduction)
/// when every input vector is identical.
Reducer fit_reducer(const std::vector<embed::EmbeddingVector>& vectors, std::size_t output_dim);

/// y = components * (x - mean), per vector; order preserved.
std::vector<std::vector<double>> transform(const Reducer& reducer,
                                           const std::vector<embed::EmbeddingVector>& vectors);

}  // namespace topicpipe::reduce
