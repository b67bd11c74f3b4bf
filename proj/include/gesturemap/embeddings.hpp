#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace gesturemap {

using Vector = std::vector<double>;

/// Pretrained word vectors plus optional symbol (emoji/kaomoji) vectors, all of
/// one dimension. Immutable after loading.
struct VectorStore {
  std::size_t dim = 0;
  std::unordered_map<std::string, Vector> vectors;
  std::unordered_map<std::string, Vector> symbol_vectors;

  const Vector* find(const std::string& token) const;
  const Vector* find_symbol(const std::string& symbol) const;
};

/// Reads the word-vector text format: optional "count dim" header, then
/// "token v1 ... v_dim" per line. Duplicate tokens keep the last row and add a
/// warning. Throws Error(DimensionMismatch) or Error(ParseError) with the line number.
VectorStore load_store(const std::filesystem::path& path, std::optional<std::size_t> expect_dim = std::nullopt,
                       std::vector<std::string>* warnings = nullptr);
VectorStore parse_store(std::string_view text, std::optional<std::size_t> expect_dim = std::nullopt,
                        std::vector<std::string>* warnings = nullptr);

/// Loads symbol vectors (same format) into `store`; their dimension must match.
void load_symbol_vectors(VectorStore& store, const std::filesystem::path& path,
                         std::vector<std::string>* warnings = nullptr);

struct PhraseVector {
  std::string source_id;
  Vector v;
  std::size_t covered = 0;
  std::vector<std::string> missed;
  bool is_zero = true;
};

/// normalize((1 - w_sym) * mean(token vectors) + w_sym * mean(symbol vectors)).
/// A side with no known vectors drops out and the other side takes full weight.
PhraseVector embed_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& symbols,
                          const VectorStore& store, double w_sym = 0.5);

/// Cosine similarity, 0 when either side is the zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

double l2_norm(std::span<const double> v);

}  // namespace gesturemap
