#include "rul/serialization.hpp"

#include "rul/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rul {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Matrix matrix_from_json(const json& j)
{
    Matrix m;
    for (const auto& row : j) {
        const auto values = row.get<std::vector<double>>();
        m.append_row(values);
    }
    return m;
}

json header(const char* kind)
{
    return json{{"format", "rul-model"}, {"kind", kind}, {"version", kModelFormatVersion}};
}

json parse_document(const std::string& text, const char* kind)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::SchemaMismatch, std::string("model document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("kind", "") != kind)
        fail(ErrorKind::SchemaMismatch, std::string("expected a '") + kind + "' model document");
    if (doc.value("version", 0) != kModelFormatVersion)
        fail(ErrorKind::SchemaMismatch, "unsupported model format version " +
                                            std::to_string(doc.value("version", 0)));
    return doc;
}

template <typename F>
auto decode(const char* kind, F&& body) -> decltype(body())
{
    try {
        return body();
    } catch (const json::exception& e) {
        fail(ErrorKind::SchemaMismatch, std::string("malformed '") + kind + "' document: " + e.what());
    }
}

} // namespace

std::string pca_to_json(const PcaModel& model)
{
    auto doc = header("pca");
    doc["column_names"] = model.column_names;
    doc["standardize"] = model.standardize;
    doc["fit_rows"] = model.fit_rows;
    doc["feature_means"] = model.feature_means;
    doc["feature_scales"] = model.feature_scales;
    doc["components"] = matrix_to_json(model.components);
    doc["eigenvalues"] = model.eigenvalues;
    doc["explained_variance_ratio"] = model.explained_variance_ratio;
    return doc.dump(2);
}

PcaModel pca_from_json(const std::string& text)
{
    const auto doc = parse_document(text, "pca");
    return decode("pca", [&] {
        PcaModel model;
        model.column_names = doc.at("column_names").get<std::vector<std::string>>();
        model.standardize = doc.at("standardize").get<bool>();
        model.fit_rows = doc.at("fit_rows").get<std::size_t>();
        model.feature_means = doc.at("feature_means").get<std::vector<double>>();
        model.feature_scales = doc.at("feature_scales").get<std::vector<double>>();
        model.components = matrix_from_json(doc.at("components"));
        model.eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
        model.explained_variance_ratio = doc.at("explained_variance_ratio").get<std::vector<double>>();
        const auto p = model.feature_means.size();
        if (model.feature_scales.size() != p || model.components.rows() != p ||
            model.components.cols() != p || model.eigenvalues.size() != p)
            fail(ErrorKind::SchemaMismatch, "pca document has inconsistent dimensions");
        return model;
    });
}

std::string forest_to_json(const ForestModel& model)
{
    auto doc = header("random_forest");
    const auto& c = model.config;
    doc["config"] = {{"n_trees", c.n_trees},
                     {"max_depth", c.max_depth},
                     {"min_samples_leaf", c.min_samples_leaf},
                     {"feature_subsample", c.feature_subsample},
                     {"bootstrap", c.bootstrap},
                     {"seed", c.seed}};
    doc["input_dim"] = model.input_dim;
    json trees = json::array();
    for (const auto& tree : model.trees) {
        // Flattened node arrays; feature -1 marks a leaf.
        std::vector<std::int32_t> feature, left, right;
        std::vector<double> threshold, value;
        std::vector<std::uint32_t> samples;
        for (const auto& n : tree.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            value.push_back(n.value);
            samples.push_back(n.samples);
        }
        trees.push_back({{"feature", feature},
                         {"threshold", threshold},
                         {"left", left},
                         {"right", right},
                         {"value", value},
                         {"samples", samples}});
    }
    doc["trees"] = std::move(trees);
    return doc.dump();
}

ForestModel forest_from_json(const std::string& text)
{
    const auto doc = parse_document(text, "random_forest");
    return decode("random_forest", [&] {
        ForestModel model;
        const auto& c = doc.at("config");
        model.config.n_trees = c.at("n_trees").get<std::size_t>();
        model.config.max_depth = c.at("max_depth").get<std::size_t>();
        model.config.min_samples_leaf = c.at("min_samples_leaf").get<std::size_t>();
        model.config.feature_subsample = c.at("feature_subsample").get<std::size_t>();
        model.config.bootstrap = c.at("bootstrap").get<bool>();
        model.config.seed = c.at("seed").get<std::uint64_t>();
        model.input_dim = doc.at("input_dim").get<std::size_t>();
        for (const auto& t : doc.at("trees")) {
            const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
            const auto threshold = t.at("threshold").get<std::vector<double>>();
            const auto left = t.at("left").get<std::vector<std::int32_t>>();
            const auto right = t.at("right").get<std::vector<std::int32_t>>();
            const auto value = t.at("value").get<std::vector<double>>();
            const auto samples = t.at("samples").get<std::vector<std::uint32_t>>();
            const auto n = feature.size();
            if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
                samples.size() != n || n == 0)
                fail(ErrorKind::SchemaMismatch, "tree node arrays differ in length");
            RegressionTree tree;
            for (std::size_t i = 0; i < n; ++i) {
                TreeNode node{feature[i], threshold[i], left[i], right[i], value[i], samples[i]};
                const auto count = static_cast<std::int32_t>(n);
                if (!node.is_leaf() &&
                    (node.feature >= static_cast<std::int32_t>(model.input_dim) || node.left <= 0 ||
                     node.right <= 0 || node.left >= count || node.right >= count))
                    fail(ErrorKind::SchemaMismatch, "tree node references are out of range");
                tree.nodes.push_back(node);
            }
            model.trees.push_back(std::move(tree));
        }
        if (model.trees.size() != model.config.n_trees)
            fail(ErrorKind::SchemaMismatch, "tree count differs from config.n_trees");
        return model;
    });
}

std::string mlp_to_json(const MlpModel& model)
{
    auto doc = header("mlp");
    const auto& c = model.config;
    doc["config"] = {{"hidden_layers", c.hidden_layers},
                     {"input_dim", c.input_dim},
                     {"learning_rate", c.learning_rate},
                     {"momentum", c.momentum},
                     {"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"seed", c.seed},
                     {"early_stop_patience", c.early_stop_patience}};
    json layers = json::array();
    for (const auto& layer : model.layers)
        layers.push_back({{"weights", matrix_to_json(layer.weights)}, {"bias", layer.bias}});
    doc["layers"] = std::move(layers);
    doc["input_scaler"] = {{"mean", model.input_scaler.mean}, {"scale", model.input_scaler.scale}};
    doc["target_scaler"] = {{"mean", model.target_mean}, {"scale", model.target_scale}};
    doc["history"] = model.history;
    return doc.dump(2);
}

MlpModel mlp_from_json(const std::string& text)
{
    const auto doc = parse_document(text, "mlp");
    return decode("mlp", [&] {
        MlpModel model;
        const auto& c = doc.at("config");
        model.config.hidden_layers = c.at("hidden_layers").get<std::vector<std::size_t>>();
        model.config.input_dim = c.at("input_dim").get<std::size_t>();
        model.config.learning_rate = c.at("learning_rate").get<double>();
        model.config.momentum = c.at("momentum").get<double>();
        model.config.batch_size = c.at("batch_size").get<std::size_t>();
        model.config.epochs = c.at("epochs").get<std::size_t>();
        model.config.seed = c.at("seed").get<std::uint64_t>();
        model.config.early_stop_patience = c.at("early_stop_patience").get<std::size_t>();
        model.config.validate();
        for (const auto& l : doc.at("layers"))
            model.layers.push_back({matrix_from_json(l.at("weights")), l.at("bias").get<std::vector<double>>()});
        model.input_scaler.mean = doc.at("input_scaler").at("mean").get<std::vector<double>>();
        model.input_scaler.scale = doc.at("input_scaler").at("scale").get<std::vector<double>>();
        model.target_mean = doc.at("target_scaler").at("mean").get<double>();
        model.target_scale = doc.at("target_scaler").at("scale").get<double>();
        model.history = doc.at("history").get<std::vector<double>>();

        // Shapes must chain input_dim -> hidden... -> 1.
        auto widths = model.config.hidden_layers;
        widths.push_back(1);
        if (model.layers.size() != widths.size())
            fail(ErrorKind::SchemaMismatch, "layer count does not match hidden_layers");
        std::size_t fan_in = model.config.input_dim;
        for (std::size_t i = 0; i < widths.size(); ++i) {
            const auto& layer = model.layers[i];
            if (layer.weights.rows() != widths[i] || layer.weights.cols() != fan_in ||
                layer.bias.size() != widths[i])
                fail(ErrorKind::SchemaMismatch, "layer " + std::to_string(i) + " has the wrong shape");
            fan_in = widths[i];
        }
        if (model.input_scaler.mean.size() != model.config.input_dim ||
            model.input_scaler.scale.size() != model.config.input_dim || !(model.target_scale > 0.0))
            fail(ErrorKind::SchemaMismatch, "scaler statistics are inconsistent");
        return model;
    });
}

std::string model_kind(const std::string& text)
{
    try {
        return json::parse(text).value("kind", "");
    } catch (const json::exception&) {
        return {};
    }
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if (!out)
        fail(ErrorKind::IoError, "write failed for " + path.string());
}

} // namespace rul
