#include "rul/decomposition.hpp"

#include "rul/error.hpp"
#include "rul/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rul {
namespace {

double off_diagonal_norm(const Matrix& a)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j)
                sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
}

double frobenius_norm(const Matrix& a)
{
    double sum = 0.0;
    for (double v : a.data())
        sum += v * v;
    return std::sqrt(sum);
}

} // namespace

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance, int max_sweeps)
{
    const std::size_t n = symmetric.rows();
    if (symmetric.cols() != n)
        fail(ErrorKind::DimensionMismatch, "jacobi_eigen needs a square matrix");

    Matrix a = symmetric;
    Matrix v = Matrix::identity(n); // columns accumulate eigenvectors
    const double scale = frobenius_norm(a);

    int sweep = 0;
    while (sweep < max_sweeps && off_diagonal_norm(a) > tolerance * scale) {
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                // Rotation angle that annihilates a(p,q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.sweeps = sweep;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        out.values[r] = a(order[r], order[r]);
        for (std::size_t k = 0; k < n; ++k)
            out.vectors(r, k) = v(k, order[r]);
    }
    return out;
}

std::vector<double> PcaModel::cumulative_ratio() const
{
    std::vector<double> out(explained_variance_ratio.size());
    std::partial_sum(explained_variance_ratio.begin(), explained_variance_ratio.end(), out.begin());
    return out;
}

Matrix standardized_covariance(const Matrix& data, std::span<const double> means,
                               std::span<const double> scales)
{
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    std::vector<CompensatedSum> acc(p * p);
    std::vector<double> z(p);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = data.row(r);
        for (std::size_t c = 0; c < p; ++c)
            z[c] = (row[c] - means[c]) / scales[c];
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i; j < p; ++j)
                acc[i * p + j].add(z[i] * z[j]);
    }
    Matrix cov(p, p);
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j)
            cov(i, j) = cov(j, i) = acc[i * p + j].value() / denom;
    return cov;
}

PcaModel fit_pca(const Matrix& data, bool standardize, std::vector<std::string> column_names)
{
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    if (p == 0 || n <= p)
        fail(ErrorKind::TooFewRows, "PCA needs more rows (" + std::to_string(n) + ") than columns (" +
                                        std::to_string(p) + ")");
    if (column_names.empty())
        for (std::size_t c = 0; c < p; ++c)
            column_names.push_back("x" + std::to_string(c));
    if (column_names.size() != p)
        fail(ErrorKind::SchemaMismatch, "column name count does not match data");

    PcaModel model;
    model.column_names = std::move(column_names);
    model.standardize = standardize;
    model.fit_rows = n;
    model.feature_means.assign(p, 0.0);
    model.feature_scales.assign(p, 1.0);

    for (std::size_t c = 0; c < p; ++c) {
        CompensatedSum acc;
        double magnitude = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            acc.add(data(r, c));
            magnitude = std::max(magnitude, std::abs(data(r, c)));
        }
        const double mean = acc.value() / static_cast<double>(n);
        model.feature_means[c] = mean;
        if (!standardize)
            continue;
        CompensatedSum ss;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = data(r, c) - mean;
            ss.add(d * d);
        }
        const double noise = 4.0 * std::numeric_limits<double>::epsilon() * magnitude;
        if (!(ss.value() > static_cast<double>(n) * noise * noise))
            fail(ErrorKind::ZeroVarianceColumn,
                 "column '" + model.column_names[c] + "' has zero variance");
        model.feature_scales[c] = std::sqrt(ss.value() / static_cast<double>(n - 1));
    }

    const Matrix cov = standardized_covariance(data, model.feature_means, model.feature_scales);
    auto eig = jacobi_eigen(cov);

    for (auto& value : eig.values)
        value = std::max(value, 0.0);
    const double total = std::accumulate(eig.values.begin(), eig.values.end(), 0.0);
    if (!(total > 0.0))
        fail(ErrorKind::ZeroVarianceColumn, "every column is constant");

    for (std::size_t r = 0; r < p; ++r) {
        auto axis = eig.vectors.row(r);
        std::size_t largest = 0;
        for (std::size_t k = 1; k < p; ++k)
            if (std::abs(axis[k]) > std::abs(axis[largest]))
                largest = k;
        if (axis[largest] < 0.0)
            for (auto& x : axis)
                x = -x;
    }

    model.components = std::move(eig.vectors);
    model.eigenvalues = std::move(eig.values);
    model.explained_variance_ratio.resize(p);
    for (std::size_t r = 0; r < p; ++r)
        model.explained_variance_ratio[r] = model.eigenvalues[r] / total;
    return model;
}

PcaModel fit_pca(const FeatureMatrix& features, bool standardize)
{
    return fit_pca(features.features, standardize, features.column_names);
}

Matrix transform(const PcaModel& model, const Matrix& data, std::size_t k)
{
    const std::size_t p = model.dimension();
    if (k < 1 || k > p)
        fail(ErrorKind::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
    if (data.cols() != p)
        fail(ErrorKind::SchemaMismatch, "data has " + std::to_string(data.cols()) +
                                            " columns, model expects " + std::to_string(p));
    Matrix out(data.rows(), k);
    std::vector<double> z(p);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = data.row(r);
        for (std::size_t c = 0; c < p; ++c)
            z[c] = (row[c] - model.feature_means[c]) / model.feature_scales[c];
        for (std::size_t j = 0; j < k; ++j) {
            const auto axis = model.components.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < p; ++c)
                s += axis[c] * z[c];
            out(r, j) = s;
        }
    }
    return out;
}

Matrix transform(const PcaModel& model, const FeatureMatrix& features, std::size_t k)
{
    if (!features.column_names.empty() && features.column_names != model.column_names)
        fail(ErrorKind::SchemaMismatch, features.experiment_id + ": columns differ from the PCA model");
    return transform(model, features.features, k);
}

Matrix inverse_transform(const PcaModel& model, const Matrix& projected)
{
    const std::size_t p = model.dimension();
    const std::size_t k = projected.cols();
    if (k < 1 || k > p)
        fail(ErrorKind::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
    Matrix out(projected.rows(), p);
    for (std::size_t r = 0; r < projected.rows(); ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            double z = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                z += projected(r, j) * model.components(j, c);
            out(r, c) = model.feature_means[c] + model.feature_scales[c] * z;
        }
    }
    return out;
}

std::size_t select_components(const PcaModel& model, double threshold)
{
    const auto cumulative = model.cumulative_ratio();
    for (std::size_t k = 0; k < cumulative.size(); ++k)
        if (cumulative[k] >= threshold)
            return k + 1;
    // Rounding can leave the full sum a hair under 1.
    return cumulative.size();
}

} // namespace rul
