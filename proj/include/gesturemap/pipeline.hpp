#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesturemap/embeddings.hpp"
#include "gesturemap/normalizer.hpp"
#include "gesturemap/tokenizer.hpp"

namespace gesturemap {

struct PipelineOptions {
  NormalizeMode mode = NormalizeMode::Extract;
  bool use_canonical = true;  // false reproduces the surface-only baseline
  double w_sym = 0.5;
};

/// Everything one phrase goes through before concept assignment.
struct PhraseTrace {
  RawPhrase phrase;
  NormalizedPhrase normalized;
  std::string text;  // text_only(normalized)
  TokenList tokens;
  std::vector<std::string> stream;   // strings sent to the vector store
  std::vector<std::string> symbols;  // empty in Strip mode
  PhraseVector vector;
};

/// Normalizer, lexicon and vector store bound together. Immutable and safe to
/// share between threads.
class Pipeline {
 public:
  Pipeline(PipelineOptions options, Lexicon lexicon, std::shared_ptr<const VectorStore> store,
           Normalizer normalizer = Normalizer());

  PhraseTrace trace(const RawPhrase& phrase) const;
  PhraseVector embed(const RawPhrase& phrase) const { return trace(phrase).vector; }
  std::vector<PhraseVector> embed_all(const std::vector<RawPhrase>& phrases) const;

  const PipelineOptions& options() const noexcept { return options_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }
  const VectorStore& store() const noexcept { return *store_; }
  std::size_t dim() const noexcept { return store_->dim; }

 private:
  PipelineOptions options_;
  Lexicon lexicon_;
  std::shared_ptr<const VectorStore> store_;
  Normalizer normalizer_;
};

nlohmann::json to_json(const NormalizedPhrase& phrase);
nlohmann::json to_json(const TokenList& tokens);
nlohmann::json to_json(const PhraseVector& vector);
nlohmann::json to_json(const PhraseTrace& trace);

}  // namespace gesturemap
