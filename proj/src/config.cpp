#include "gesturemap/config.hpp"

#include <set>
#include <toml.hpp>

#include "gesturemap/error.hpp"

namespace gesturemap {

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "mode",  "lexicons", "stoplists", "vectors",          "symbol_vectors", "use_canonical", "w_sym",
    "theta", "tau",      "seed",      "fallback_gesture", "concept_store",  "catalog",       "corpus"};

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

double number(const toml::node& node, std::string_view key) {
  if (auto v = node.value<double>()) return *v;
  throw Error(ErrorCode::ParseError, "config key '" + std::string(key) + "' must be a number");
}

std::vector<std::filesystem::path> path_list(const toml::node& node, std::string_view key,
                                             const std::filesystem::path& base) {
  std::vector<std::filesystem::path> out;
  if (auto s = node.value<std::string>()) {
    out.push_back(resolve(base, *s));
    return out;
  }
  const auto* arr = node.as_array();
  if (arr == nullptr) throw Error(ErrorCode::ParseError, "config key '" + std::string(key) + "' must be a path list");
  for (const auto& item : *arr) {
    auto s = item.value<std::string>();
    if (!s) throw Error(ErrorCode::ParseError, "config key '" + std::string(key) + "' must list strings");
    out.push_back(resolve(base, *s));
  }
  return out;
}

std::string string_value(const toml::node& node, std::string_view key) {
  if (auto s = node.value<std::string>()) return *s;
  throw Error(ErrorCode::ParseError, "config key '" + std::string(key) + "' must be a string");
}

}  // namespace

PipelineConfig config_from_table(const toml::table& table, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  for (const auto& [key, node] : table) {
    const std::string_view k = key.str();
    if (!kKnownKeys.count(k)) {
      if (node.is_table()) continue;  // sections belong to the embedding document
      throw Error(ErrorCode::ParseError, "unknown config key '" + std::string(k) + "'");
    }
    if (k == "mode") {
      try {
        c.mode = parse_mode(string_value(node, k));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseError) throw Error(ErrorCode::ParseError, std::string("config key 'mode': ") + e.what());
        throw;
      }
    }
    else if (k == "lexicons") c.lexicons = path_list(node, k, base_dir);
    else if (k == "stoplists") c.stoplists = path_list(node, k, base_dir);
    else if (k == "vectors") c.vectors = resolve(base_dir, string_value(node, k));
    else if (k == "symbol_vectors") c.symbol_vectors = resolve(base_dir, string_value(node, k));
    else if (k == "use_canonical") {
      auto b = node.value<bool>();
      if (!b) throw Error(ErrorCode::ParseError, "config key 'use_canonical' must be a boolean");
      c.use_canonical = *b;
    } else if (k == "w_sym") c.w_sym = number(node, k);
    else if (k == "theta") c.theta = number(node, k);
    else if (k == "tau") c.tau = number(node, k);
    else if (k == "seed") {
      auto v = node.value<int64_t>();
      if (!v || *v < 0) throw Error(ErrorCode::ParseError, "config key 'seed' must be a non-negative integer");
      c.seed = static_cast<std::uint64_t>(*v);
    } else if (k == "fallback_gesture") c.fallback_gesture = string_value(node, k);
    else if (k == "concept_store") c.concept_store = resolve(base_dir, string_value(node, k));
    else if (k == "catalog") c.catalog = resolve(base_dir, string_value(node, k));
    else if (k == "corpus") c.corpus = resolve(base_dir, string_value(node, k));
  }
  return c;
}

PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  try {
    const toml::table table = toml::parse(toml_text);
    return config_from_table(table, base_dir);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + std::string(e.description()) + " at line " +
                                           std::to_string(e.source().begin.line));
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  try {
    const toml::table table = toml::parse_file(path.string());
    return config_from_table(table, path.parent_path());
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + std::string(e.description()) + " at line " +
                                           std::to_string(e.source().begin.line));
  }
}

void PipelineConfig::validate(bool check_files) const {
  if (!(theta >= 0.0 && theta <= 2.0)) throw Error(ErrorCode::OutOfRange, "theta must lie in [0, 2]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::OutOfRange, "tau must lie in [0, 1]");
  if (!(w_sym >= 0.0 && w_sym <= 1.0)) throw Error(ErrorCode::OutOfRange, "w_sym must lie in [0, 1]");
  if (!check_files) return;
  auto need = [](const std::filesystem::path& p, const char* what) {
    if (p.empty() || !std::filesystem::exists(p)) {
      throw Error(ErrorCode::IoError, std::string(what) + " file not found: " + p.string());
    }
  };
  need(vectors, "vector");
  for (const auto& p : lexicons) need(p, "lexicon");
  for (const auto& p : stoplists) need(p, "stoplist");
  if (symbol_vectors) need(*symbol_vectors, "symbol vector");
  if (catalog) need(*catalog, "gesture catalog");
  if (corpus) need(*corpus, "corpus");
}

std::shared_ptr<const Pipeline> build_pipeline(const PipelineConfig& config) {
  config.validate();
  Lexicon lexicon;
  for (const auto& p : config.lexicons) lexicon.merge(load_lexicon(p));
  for (const auto& p : config.stoplists) lexicon.merge(load_stoplist(p));
  auto store = std::make_shared<VectorStore>(load_store(config.vectors));
  if (config.symbol_vectors) load_symbol_vectors(*store, *config.symbol_vectors);
  PipelineOptions options{config.mode, config.use_canonical, config.w_sym};
  return std::make_shared<const Pipeline>(options, std::move(lexicon), std::move(store));
}

}  // namespace gesturemap
