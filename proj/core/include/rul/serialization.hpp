#pragma once

#include "rul/decomposition.hpp"
#include "rul/forest.hpp"
#include "rul/mlp.hpp"

#include <filesystem>
#include <string>

namespace rul {

/// Current layout version written into every model document.
inline constexpr int kModelFormatVersion = 1;

// Versioned JSON documents. Doubles are written with round-trip precision,
// so save -> load reproduces every parameter bit for bit.
std::string pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const std::string& text);

std::string forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);

std::string mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const std::string& text);

/// Document kind ("pca", "random_forest", "mlp") without decoding the body.
std::string model_kind(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace rul
