// gesturemap: command-line front end for the phrase -> concept -> gesture toolkit.
//
// Exit status: 0 on success, 1 on data errors, 2 on usage errors.

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gesturemap/clusterer.hpp"
#include "gesturemap/conceptspace.hpp"
#include "gesturemap/config.hpp"
#include "gesturemap/error.hpp"
#include "gesturemap/evalstats.hpp"
#include "gesturemap/fixtures.hpp"
#include "gesturemap/gestures.hpp"
#include "gesturemap/pipeline.hpp"
#include "gesturemap/service.hpp"

namespace gm = gesturemap;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string config;
  std::string mode;
  std::vector<std::string> lexicons;
  std::vector<std::string> stoplists;
  std::string vectors;
  std::string symbol_vectors;
  bool no_canonical = false;
  std::optional<double> w_sym, theta, tau;
  std::optional<std::uint64_t> seed;
  std::string fallback;
  std::string store;
  std::string catalog;

  std::string phrase;
  bool has_phrase = false;
  std::string corpus;
  std::string out;
};

void add_pipeline_flags(CLI::App* app, Settings& s) {
  app->add_option("-c,--config", s.config, "TOML config file")->check(CLI::ExistingFile);
  app->add_option("--mode", s.mode, "strip or extract")->check(CLI::IsMember({"strip", "extract"}));
  app->add_option("--lexicon", s.lexicons, "lexicon TSV (repeatable; replaces the config list)");
  app->add_option("--stoplist", s.stoplists, "stoplist file (repeatable)");
  app->add_option("--vectors", s.vectors, "word vector store");
  app->add_option("--symbol-vectors", s.symbol_vectors, "symbol vector store");
  app->add_flag("--no-canonical", s.no_canonical, "embed surface forms instead of canonical forms");
  app->add_option("--w-sym", s.w_sym, "symbol weight in [0,1]");
  app->add_option("--theta", s.theta, "clustering distance threshold in [0,2]");
  app->add_option("--tau", s.tau, "assignment similarity floor in [0,1]");
  app->add_option("--seed", s.seed, "gesture selection seed");
  app->add_option("--fallback", s.fallback, "fallback gesture id");
  app->add_option("--concepts", s.store, "concept store JSON");
  app->add_option("--catalog", s.catalog, "gesture catalog TSV");
}

void add_input_flags(CLI::App* app, Settings& s) {
  app->add_option("--phrase", s.phrase, "a single phrase")->each([&s](const std::string&) { s.has_phrase = true; });
  app->add_option("--corpus", s.corpus, "corpus file (id<TAB>text or one phrase per line); default: the config corpus, else stdin");
  app->add_option("-o,--out", s.out, "output file; default stdout");
}

gm::PipelineConfig resolve_config(const Settings& s) {
  gm::PipelineConfig c;
  if (!s.config.empty()) c = gm::load_config(s.config);
  if (!s.mode.empty()) c.mode = gm::parse_mode(s.mode);
  if (!s.lexicons.empty()) c.lexicons.assign(s.lexicons.begin(), s.lexicons.end());
  if (!s.stoplists.empty()) c.stoplists.assign(s.stoplists.begin(), s.stoplists.end());
  if (!s.vectors.empty()) c.vectors = s.vectors;
  if (!s.symbol_vectors.empty()) c.symbol_vectors = s.symbol_vectors;
  if (s.no_canonical) c.use_canonical = false;
  if (s.w_sym) c.w_sym = *s.w_sym;
  if (s.theta) c.theta = *s.theta;
  if (s.tau) c.tau = *s.tau;
  if (s.seed) c.seed = *s.seed;
  if (!s.fallback.empty()) c.fallback_gesture = s.fallback;
  if (!s.store.empty()) c.concept_store = s.store;
  if (!s.catalog.empty()) c.catalog = s.catalog;
  c.validate(false);
  return c;
}

std::shared_ptr<const gm::Pipeline> pipeline_for(const gm::PipelineConfig& c) {
  if (c.vectors.empty()) throw UsageError("a vector store is required (--vectors or 'vectors' in the config)");
  return gm::build_pipeline(c);
}

gm::ConceptSet store_for(const gm::PipelineConfig& c) {
  if (!c.concept_store) throw UsageError("a concept store is required (--concepts or 'concept_store' in the config)");
  return gm::load_concept_store(*c.concept_store);
}

std::vector<gm::RawPhrase> read_inputs(const Settings& s, const gm::PipelineConfig& c) {
  if (s.has_phrase) return {gm::RawPhrase{"p1", s.phrase}};
  if (!s.corpus.empty()) return gm::load_corpus(s.corpus);
  if (c.corpus) return gm::load_corpus(*c.corpus);
  std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
  return gm::parse_corpus(text);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw gm::Error(gm::ErrorCode::IoError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void line(const json& doc) { stream() << doc.dump() << '\n'; }

 private:
  std::ofstream file_;
};

int cmd_normalize(const Settings& s) {
  const auto c = resolve_config(s);
  Output out(s.out);
  for (const auto& p : read_inputs(s, c)) {
    const auto n = gm::normalize(p, c.mode);
    json doc = gm::to_json(n);
    doc["text"] = gm::text_only(n);
    out.line(doc);
  }
  return 0;
}

int cmd_tokenize(const Settings& s) {
  const auto c = resolve_config(s);
  gm::Lexicon lexicon;
  for (const auto& p : c.lexicons) lexicon.merge(gm::load_lexicon(p));
  for (const auto& p : c.stoplists) lexicon.merge(gm::load_stoplist(p));
  Output out(s.out);
  for (const auto& p : read_inputs(s, c)) {
    const std::string text = gm::text_only(gm::normalize(p, c.mode));
    const auto tokens = gm::tokenize(text, lexicon);
    out.line({{"id", p.id},
              {"text", text},
              {"tokens", gm::to_json(tokens)},
              {"stream", gm::canonical_stream(tokens, c.use_canonical)}});
  }
  return 0;
}

int cmd_embed(const Settings& s) {
  const auto c = resolve_config(s);
  const auto pipeline = pipeline_for(c);
  Output out(s.out);
  for (const auto& p : read_inputs(s, c)) out.line(gm::to_json(pipeline->embed(p)));
  return 0;
}

int cmd_cluster(const Settings& s) {
  const auto c = resolve_config(s);
  const auto pipeline = pipeline_for(c);
  const auto phrases = read_inputs(s, c);
  const auto partition = gm::cluster(pipeline->embed_all(phrases), c.theta);
  Output out(s.out);
  out.stream() << gm::export_partition(partition, phrases).dump(2) << '\n';
  return 0;
}

int cmd_concepts_build(const Settings& s, const std::string& labels, const std::string& gestures,
                       const std::string& rules) {
  const auto c = resolve_config(s);
  const auto pipeline = pipeline_for(c);
  gm::Partition partition;
  std::map<std::string, std::string> nameplates;
  std::vector<gm::RawPhrase> phrases;
  gm::BuildOptions options;
  if (!labels.empty()) {
    auto labelled = gm::load_labelled_corpus(labels);
    phrases = std::move(labelled.phrases);
    partition = std::move(labelled.partition);
    nameplates = std::move(labelled.nameplates);
    options.provenance = gm::Provenance::Manual;
  } else {
    phrases = read_inputs(s, c);
    partition = gm::cluster(pipeline->embed_all(phrases), c.theta);
  }
  if (!gestures.empty()) options.gestures = gm::load_gesture_attachments(gestures);
  auto set = gm::build_concepts(partition, nameplates, phrases, gm::embedder_for(*pipeline), options);
  if (!rules.empty()) set = gm::with_rules(set, gm::load_rules(rules, set));
  const std::string target = !s.out.empty() ? s.out : (c.concept_store ? c.concept_store->string() : "");
  if (target.empty()) {
    std::cout << gm::to_json(set).dump(2) << '\n';
  } else {
    gm::save_concept_store(target, set);
    std::cerr << "wrote " << set.concepts().size() << " concepts to " << target << '\n';
  }
  return 0;
}

int cmd_assign(const Settings& s, const std::string& unassigned_out) {
  const auto c = resolve_config(s);
  const auto pipeline = pipeline_for(c);
  const auto set = store_for(c);
  const auto phrases = read_inputs(s, c);
  Output out(s.out);
  std::vector<gm::Assignment> all;
  for (const auto& p : phrases) {
    auto a = gm::assign(p, set, set.rules(), c.tau, *pipeline);
    json doc = gm::to_json(a);
    const gm::Concept* concept_ = a.concept_id ? set.find(*a.concept_id) : nullptr;
    doc["nameplate"] = concept_ ? json(concept_->nameplate) : json(nullptr);
    out.line(doc);
    all.push_back(std::move(a));
  }
  if (!unassigned_out.empty()) {
    std::ofstream f(unassigned_out, std::ios::binary);
    if (!f) throw gm::Error(gm::ErrorCode::IoError, "cannot write " + unassigned_out);
    f << gm::export_unassigned(phrases, all);
  }
  return 0;
}

int cmd_gesture(const Settings& s, bool trace) {
  const auto c = resolve_config(s);
  if (!c.catalog) throw UsageError("a gesture catalog is required (--catalog or 'catalog' in the config)");
  auto pipeline = pipeline_for(c);
  auto set = std::make_shared<const gm::ConceptSet>(store_for(c));
  auto catalog = std::make_shared<const gm::GestureCatalog>(gm::load_catalog(*c.catalog));
  gm::GestureMapper mapper(pipeline, set, catalog, {c.tau, c.seed, c.fallback_gesture});
  Output out(s.out);
  for (const auto& p : read_inputs(s, c)) {
    const auto t = gm::map_phrase_to_gesture(p, mapper);
    out.line(trace ? gm::to_json(t) : gm::to_json(t.cue));
  }
  return 0;
}

int cmd_eval(const std::string& survey, double alpha, std::size_t clips, bool as_json, const std::string& json_out,
             const std::string& out_path) {
  const auto records = gm::load_survey(survey);
  const auto results = gm::run_contrasts(records, alpha, clips);
  Output out(out_path);
  if (as_json) {
    out.stream() << gm::to_json(results).dump(2) << '\n';
  } else {
    out.stream() << gm::format_report(results);
  }
  if (!json_out.empty()) {
    std::ofstream f(json_out, std::ios::binary);
    if (!f) throw gm::Error(gm::ErrorCode::IoError, "cannot write " + json_out);
    f << gm::to_json(results).dump(2) << '\n';
  }
  return 0;
}

int cmd_fixtures(const std::string& root_flag, std::vector<std::string> names, bool list) {
  const std::filesystem::path root = root_flag.empty() ? gm::default_fixture_root() : std::filesystem::path(root_flag);
  if (names.empty()) names = gm::list_fixtures(root);
  if (list) {
    for (const auto& n : names) std::cout << n << '\n';
    return 0;
  }
  int failed = 0;
  for (const auto& name : names) {
    const auto result = gm::run_fixture(gm::load_fixture(name, root));
    std::cout << (result.passed ? "PASS " : "FAIL ") << name << " (" << static_cast<int>(result.seconds * 1000.0)
              << " ms)\n";
    for (const auto& d : result.diffs) std::cout << "  " << d << '\n';
    failed += result.passed ? 0 : 1;
  }
  std::cout << names.size() - failed << "/" << names.size() << " fixtures passed\n";
  return failed == 0 ? 0 : 1;
}

int cmd_serve(const Settings& s, const std::string& host, int port) {
  const auto c = resolve_config(s);
  if (!c.concept_store) throw UsageError("a concept store is required (--concepts or 'concept_store' in the config)");
  gm::ServiceOptions options;
  options.store_path = *c.concept_store;
  options.pipeline = pipeline_for(c);
  if (c.catalog) options.catalog = std::make_shared<const gm::GestureCatalog>(gm::load_catalog(*c.catalog));
  options.settings = {c.tau, c.seed, c.fallback_gesture};
  if (c.corpus) options.corpus = gm::load_corpus(*c.corpus);
  gm::CurationService service(std::move(options));
  const int bound = service.bind(host, port);
  std::cerr << "serving " << *c.concept_store << " on http://" << host << ":" << bound << '\n';
  service.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map conversation-agent phrases to gestures through a curated concept space"};
  app.require_subcommand(1);
  Settings s;

  auto* normalize = app.add_subcommand("normalize", "split phrases into text and symbol runs");
  normalize->add_option("-c,--config", s.config, "TOML config file")->check(CLI::ExistingFile);
  normalize->add_option("--mode", s.mode, "strip or extract")->check(CLI::IsMember({"strip", "extract"}));
  add_input_flags(normalize, s);

  auto* tokenize = app.add_subcommand("tokenize", "normalize, then longest-match tokenize");
  auto* embed = app.add_subcommand("embed", "phrase vectors");
  auto* cluster = app.add_subcommand("cluster", "average-linkage clustering of a corpus");
  auto* build = app.add_subcommand("concepts-build", "build a concept store from labels or clusters");
  auto* assign = app.add_subcommand("assign", "assign phrases to concepts");
  auto* gesture = app.add_subcommand("gesture", "map phrases to gesture cues");
  auto* serve = app.add_subcommand("serve", "run the curation service");
  for (auto* sub : {tokenize, embed, cluster, build, assign, gesture, serve}) add_pipeline_flags(sub, s);
  for (auto* sub : {tokenize, embed, cluster, build, assign, gesture}) add_input_flags(sub, s);

  std::string labels, gesture_file, rules_file, unassigned_out;
  build->add_option("--labels", labels, "labelled corpus TSV (id, text, nameplate); default: cluster the corpus")
      ->check(CLI::ExistingFile);
  build->add_option("--gestures", gesture_file, "gesture attachments TSV (nameplate, gesture ids)")
      ->check(CLI::ExistingFile);
  build->add_option("--rules", rules_file, "override rules TSV")->check(CLI::ExistingFile);
  assign->add_option("--unassigned", unassigned_out, "write the unassigned queue as TSV");
  bool trace = false;
  gesture->add_flag("--trace", trace, "print the full pipeline trace");

  auto* eval = app.add_subcommand("eval", "Wilcoxon contrasts over a survey CSV");
  std::string survey, json_out, eval_out;
  double alpha = 0.05;
  std::size_t clips = 2;
  bool as_json = false;
  eval->add_option("--survey", survey, "CSV: participant,question,condition,clip,score")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--alpha", alpha, "significance level after BH")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--clips", clips, "clips per participant and condition")->check(CLI::PositiveNumber);
  eval->add_flag("--json", as_json, "print JSON instead of the table");
  eval->add_option("--json-out", json_out, "also write the JSON document here");
  eval->add_option("-o,--out", eval_out, "output file; default stdout");

  auto* fixtures = app.add_subcommand("fixtures", "run regression fixtures");
  std::string root;
  std::vector<std::string> names;
  bool list = false;
  fixtures->add_option("names", names, "fixture names; default all");
  fixtures->add_option("--root", root, "fixture directory");
  fixtures->add_flag("--list", list, "list fixture names");

  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (normalize->parsed()) return cmd_normalize(s);
    if (tokenize->parsed()) return cmd_tokenize(s);
    if (embed->parsed()) return cmd_embed(s);
    if (cluster->parsed()) return cmd_cluster(s);
    if (build->parsed()) return cmd_concepts_build(s, labels, gesture_file, rules_file);
    if (assign->parsed()) return cmd_assign(s, unassigned_out);
    if (gesture->parsed()) return cmd_gesture(s, trace);
    if (eval->parsed()) return cmd_eval(survey, alpha, clips, as_json, json_out, eval_out);
    if (fixtures->parsed()) return cmd_fixtures(root, names, list);
    if (serve->parsed()) return cmd_serve(s, host, port);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const gm::Error& e) {
    std::cerr << "error [" << gm::error_code_name(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
