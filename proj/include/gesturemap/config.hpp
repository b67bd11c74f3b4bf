#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gesturemap/conceptspace.hpp"
#include "gesturemap/gestures.hpp"
#include "gesturemap/pipeline.hpp"

namespace toml {
inline namespace v3 {
class table;
}
}  // namespace toml

namespace gesturemap {

/// Declarative run configuration. Relative paths resolve against the
/// directory of the file they were read from.
struct PipelineConfig {
  NormalizeMode mode = NormalizeMode::Extract;
  std::vector<std::filesystem::path> lexicons;  // later files override earlier entries
  std::vector<std::filesystem::path> stoplists;
  std::filesystem::path vectors;
  std::optional<std::filesystem::path> symbol_vectors;
  bool use_canonical = true;
  double w_sym = 0.5;
  double theta = kDefaultTheta;
  double tau = kDefaultTau;
  std::uint64_t seed = 0;
  std::string fallback_gesture = "idle";
  std::optional<std::filesystem::path> concept_store;
  std::optional<std::filesystem::path> catalog;
  std::optional<std::filesystem::path> corpus;

  /// Range checks on theta, tau and w_sym; with check_files, every referenced file must exist.
  void validate(bool check_files = true) const;
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);
PipelineConfig config_from_table(const toml::table& table, const std::filesystem::path& base_dir);

std::shared_ptr<const Pipeline> build_pipeline(const PipelineConfig& config);

}  // namespace gesturemap
