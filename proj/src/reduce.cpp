#include "topicpipe/reduce.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "topicpipe/errors.hpp"
#include "topicpipe/kernels.hpp"

namespace topicpipe::reduce {

using json = nlohmann::ordered_json;

Reducer fit_reducer(const std::vector<embed::EmbeddingVector>& vectors, std::size_t output_dim) {
    const std::size_t n = vectors.size();
    if (n < 2) throw ValidationError("fit_reducer: need at least 2 vectors");
    const std::size_t d = vectors[0].dim();
    for (const auto& v : vectors) {
        if (v.dim() != d) throw ValidationError("fit_reducer: inconsistent input dimensions");
    }
    if (output_dim == 0 || output_dim > std::min(d, n - 1)) {
        throw ValidationError("fit_reducer: output_dim must be in [1, min(input_dim, count-1)]");
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i].values[j];
        }
    }
    Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;

    if (data.cwiseAbs().maxCoeff() == 0.0) {
        throw ValidationError(
            "fit_reducer: zero variance (all input vectors identical); skip reduction");
    }

    Eigen::MatrixXd cov = (data.adjoint() * data) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw StageError("reduce", "eigendecomposition failed");
    }

    // Eigen returns eigenvalues ascending; take the top output_dim in
    // descending order.
    Reducer reducer;
    reducer.input_dim = d;
    reducer.output_dim = output_dim;
    reducer.mean.assign(mean.data(), mean.data() + d);
    reducer.components.resize(output_dim);
    reducer.explained_variance.resize(output_dim);
    const Eigen::Index last = static_cast<Eigen::Index>(d) - 1;
    for (std::size_t k = 0; k < output_dim; ++k) {
        const Eigen::Index src = last - static_cast<Eigen::Index>(k);
        Eigen::VectorXd comp = solver.eigenvectors().col(src);
        // Sign convention: the first largest-magnitude entry is forced
        // non-negative.
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < comp.size(); ++j) {
            const double mag = std::abs(comp(j));
            if (mag > best) {
                best = mag;
                pivot = j;
            }
        }
        if (comp(pivot) < 0.0) comp = -comp;
        reducer.components[k].assign(comp.data(), comp.data() + d);
        reducer.explained_variance[k] = std::max(0.0, solver.eigenvalues()(src));
    }
    return reducer;
}

std::vector<std::vector<double>> transform(const Reducer& reducer,
                                           const std::vector<embed::EmbeddingVector>& vectors) {
    std::vector<std::vector<double>> out;
    out.reserve(vectors.size());
    std::vector<double> centered(reducer.input_dim);
    for (const auto& v : vectors) {
        if (v.dim() != reducer.input_dim) {
            throw ValidationError("transform: vector dim " + std::to_string(v.dim()) +
                                  " does not match reducer input_dim " +
                                  std::to_string(reducer.input_dim));
        }
        for (std::size_t j = 0; j < reducer.input_dim; ++j) {
            centered[j] = v.values[j] - reducer.mean[j];
        }
        std::vector<double> y(reducer.output_dim);
        for (std::size_t k = 0; k < reducer.output_dim; ++k) {
            y[k] = kernels::dot(reducer.components[k].data(), centered.data(), reducer.input_dim);
        }
        out.push_back(std::move(y));
    }
    return out;
}

std::string Reducer::to_json() const {
    json obj;
    obj["input_dim"] = input_dim;
    obj["output_dim"] = output_dim;
    obj["mean"] = mean;
    obj["components"] = components;
    obj["explained_variance"] = explained_variance;
    return obj.dump();
}

Reducer Reducer::from_json(const std::string& text) {
    json obj = json::parse(text);
    Reducer r;
    r.input_dim = obj["input_dim"].get<std::size_t>();
    r.output_dim = obj["output_dim"].get<std::size_t>();
    r.mean = obj["mean"].get<std::vector<double>>();
    r.components = obj["components"].get<std::vector<std::vector<double>>>();
    r.explained_variance = obj["explained_variance"].get<std::vector<double>>();
    return r;
}

}  // namespace topicpipe::reduce
