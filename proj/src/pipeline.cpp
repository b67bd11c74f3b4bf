#include "gesturemap/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "gesturemap/error.hpp"

namespace gesturemap {

Pipeline::Pipeline(PipelineOptions options, Lexicon lexicon, std::shared_ptr<const VectorStore> store,
                   Normalizer normalizer)
    : options_(options), lexicon_(std::move(lexicon)), store_(std::move(store)), normalizer_(std::move(normalizer)) {
  if (!store_) throw Error(ErrorCode::InvalidInput, "pipeline needs a vector store");
  if (!(options_.w_sym >= 0.0 && options_.w_sym <= 1.0)) throw Error(ErrorCode::OutOfRange, "w_sym must lie in [0, 1]");
  lexicon_.validate();
}

PhraseTrace Pipeline::trace(const RawPhrase& phrase) const {
  PhraseTrace t;
  t.phrase = phrase;
  t.normalized = normalizer_.normalize(phrase, options_.mode);
  t.text = text_only(t.normalized);
  t.tokens = tokenize(t.text, lexicon_);
  t.stream = canonical_stream(t.tokens, options_.use_canonical);
  if (options_.mode == NormalizeMode::Extract) t.symbols = t.normalized.symbols();
  t.vector = embed_phrase(t.stream, t.symbols, *store_, options_.w_sym);
  t.vector.source_id = phrase.id;
  return t;
}

std::vector<PhraseVector> Pipeline::embed_all(const std::vector<RawPhrase>& phrases) const {
  std::vector<PhraseVector> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) out.push_back(embed(p));
  return out;
}

nlohmann::json to_json(const NormalizedPhrase& phrase) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : phrase.runs) {
    runs.push_back({{"kind", run_kind_name(r.kind)},
                    {"content", r.content},
                    {"position", r.position},
                    {"dropped", r.dropped}});
  }
  return {{"id", phrase.source_id}, {"runs", std::move(runs)}, {"text", text_only(phrase)}};
}

nlohmann::json to_json(const TokenList& tokens) {
  nlohmann::json toks = nlohmann::json::array();
  for (const auto& t : tokens.tokens) {
    toks.push_back({{"surface", t.surface},
                    {"canonical", t.canonical},
                    {"tag", tag_name(t.tag)},
                    {"position", t.position},
                    {"residue", t.residue}});
  }
  nlohmann::json stops = nlohmann::json::array();
  for (const auto& p : tokens.stops()) stops.push_back(p.text);
  nlohmann::json residue = nlohmann::json::array();
  for (const auto& p : tokens.residue()) residue.push_back({{"text", p.text}, {"position", p.position}});
  return {{"tokens", std::move(toks)}, {"stops", std::move(stops)}, {"residue", std::move(residue)}};
}

nlohmann::json to_json(const PhraseVector& vector) {
  return {{"id", vector.source_id},
          {"v", vector.v},
          {"covered", vector.covered},
          {"missed", vector.missed},
          {"is_zero", vector.is_zero}};
}

nlohmann::json to_json(const PhraseTrace& trace) {
  return {{"phrase", {{"id", trace.phrase.id}, {"text", trace.phrase.text}}},
          {"normalized", to_json(trace.normalized)},
          {"text", trace.text},
          {"tokens", to_json(trace.tokens)},
          {"stream", trace.stream},
          {"symbols", trace.symbols},
          {"vector", to_json(trace.vector)}};
}

}  // namespace gesturemap
