#include "vkg/alert/alerts.hpp"
#include "vkg/app/pipeline.hpp"
#include "vkg/core/store_dir.hpp"
#include "vkg/error.hpp"
#include "vkg/eval/harness.hpp"
#include "vkg/ingest/extract.hpp"
#include "vkg/ingest/synthetic.hpp"
#include "vkg/io.hpp"
#include "vkg/kg/turtle.hpp"
#include "vkg/query/engine.hpp"
#include "vkg/rel/relation_model.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace vkg;

namespace {

struct Global {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct TrainerFlags {
  std::string mode = "cbow";
  std::size_t dimension = 100;
  std::size_t window = 7;
  std::size_t min_count = 1;
  std::size_t epochs = 5;
  std::size_t negatives = 5;
  double learning_rate = 0.025;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "cbow, skipgram or graph_augmented_cbow")->capture_default_str();
    cmd->add_option("--dim", dimension, "Vector dimension D")->capture_default_str();
    cmd->add_option("--window", window, "Context window N")->capture_default_str();
    cmd->add_option("--min-count", min_count, "Vocabulary frequency cutoff")->capture_default_str();
    cmd->add_option("--epochs", epochs)->capture_default_str();
    cmd->add_option("--negatives", negatives, "Negative samples per example")->capture_default_str();
    cmd->add_option("--lr", learning_rate, "Initial learning rate")->capture_default_str();
  }

  embed::TrainerConfig config(std::uint64_t seed) const {
    embed::TrainerConfig c;
    c.mode = embed::parse_mode(mode);
    c.dimension = dimension;
    c.window = window;
    c.min_count = min_count;
    c.epochs = epochs;
    c.negatives = negatives;
    c.learning_rate = learning_rate;
    c.seed = seed;
    c.validate();
    return c;
  }
};

std::string fixed(double value, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

ingest::Gazetteer gazetteer_or_bundled(const std::string& path) {
  return path.empty() ? ingest::bundled_gazetteer() : ingest::load_gazetteer(path);
}

std::vector<ingest::ExtractionPattern> patterns_or_bundled(const std::string& path) {
  return path.empty() ? ingest::bundled_patterns() : ingest::load_patterns(path);
}

alert::Rulebook rules_or_default(const std::string& path) {
  return path.empty() ? alert::default_rulebook() : alert::load_rulebook(path);
}

kg::Iri resolve(const core::VkgStore& store, const std::string& term) {
  const auto iri = query::QueryEngine(store).resolve_entity(term);
  if (!iri) throw Error(ErrorCode::InvalidArgument, "no entity named '" + term + "' in the store");
  return *iri;
}

alert::TimePoint evaluation_time(const core::VkgStore& store, const std::string& now) {
  if (!now.empty()) return alert::parse_timestamp(now);
  if (auto latest = alert::latest_intelligence(store.graph())) return *latest;
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

void write_store_sidecars(const fs::path& dir, const ingest::Gazetteer& gazetteer,
                          const std::vector<ingest::ExtractionPattern>& patterns) {
  write_text(dir / "gazetteer.json", ingest::gazetteer_to_json(gazetteer));
  write_text(dir / "patterns.json", ingest::patterns_to_json(patterns));
}

// build ----------------------------------------------------------------------

struct BuildFlags {
  std::string corpus, gazetteer, patterns, out;
  TrainerFlags trainer;
  std::size_t walk_length = 4;
  std::size_t walks = 20;
};

int run_build(const BuildFlags& f, const Global& g) {
  app::BuildConfig config;
  config.trainer = f.trainer.config(g.seed);
  config.walk_length = f.walk_length;
  config.walks_per_entity = f.walks;
  config.threads = g.threads;
  const auto docs = ingest::load_corpus(f.corpus);
  const auto gazetteer = gazetteer_or_bundled(f.gazetteer);
  const auto patterns = patterns_or_bundled(f.patterns);
  const auto result = app::build_store(docs, gazetteer, patterns, config);
  core::save_store(result.store, f.out, result.meta());
  write_store_sidecars(f.out, gazetteer, patterns);
  std::cout << result.summary() << "store written to " << f.out << "\n";
  return 0;
}

struct RebuildFlags {
  std::string store, corpus, out;
};

int run_rebuild(const RebuildFlags& f, const Global& g) {
  const fs::path store_dir = f.store;
  const auto loaded = core::load_store(store_dir);
  app::BuildConfig config = app::BuildConfig::from_description(loaded.meta.build);
  config.threads = g.threads;
  const auto gazetteer = fs::exists(store_dir / "gazetteer.json") ? ingest::load_gazetteer(store_dir / "gazetteer.json")
                                                                  : ingest::bundled_gazetteer();
  const auto patterns = fs::exists(store_dir / "patterns.json") ? ingest::load_patterns(store_dir / "patterns.json")
                                                                : ingest::bundled_patterns();
  const auto docs = ingest::load_corpus(f.corpus);
  const auto result = app::build_store(docs, gazetteer, patterns, config);
  const fs::path out = f.out.empty() ? store_dir : fs::path(f.out);
  core::save_store(result.store, out, result.meta());
  write_store_sidecars(out, gazetteer, patterns);
  std::cout << "rebuilt with stored settings (seed " << config.trainer.seed << ")\n"
            << result.summary() << "store written to " << out.string() << "\n";
  return 0;
}

// link / train ---------------------------------------------------------------

struct LinkFlags {
  std::string graph, vectors, out;
};

int run_link(const LinkFlags& f) {
  auto result = core::link_entities(kg::load_turtle(f.graph), vec::load_vectors(f.vectors));
  core::save_store(result.store, f.out);
  std::cout << result.report.to_text() << "store written to " << f.out << "\n";
  return 0;
}

struct TrainFlags {
  std::string corpus, out, graph;
  TrainerFlags trainer;
};

int run_train(const TrainFlags& f, const Global& g) {
  const auto config = f.trainer.config(g.seed);
  embed::Corpus corpus;
  std::istringstream lines(read_text(f.corpus));
  for (std::string line; std::getline(lines, line);) {
    std::istringstream words(line);
    std::vector<std::string> sentence;
    for (std::string w; words >> w;) sentence.push_back(w);
    if (!sentence.empty()) corpus.push_back(std::move(sentence));
  }
  embed::TokenVectors graph_vectors;
  const bool augmented = config.mode == embed::Mode::GraphAugmentedCbow;
  if (augmented) {
    if (f.graph.empty()) throw Error(ErrorCode::InvalidConfig, "graph_augmented_cbow needs --graph");
    embed::Rdf2VecConfig rc;
    rc.trainer.dimension = config.dimension;
    rc.trainer.seed = config.seed;
    graph_vectors = embed::rdf2vec(kg::load_turtle(f.graph), rc);
  }
  const auto snapshot = embed::train(config, corpus, augmented ? &graph_vectors : nullptr);
  vec::save_vectors(snapshot.space, f.out);
  std::cout << "mode " << embed::mode_name(config.mode) << ", vocabulary " << snapshot.space.size() << ", dimension "
            << snapshot.space.dimension() << "\n";
  for (std::size_t e = 0; e < snapshot.loss_curve.size(); ++e) {
    std::cout << "epoch " << e + 1 << " loss " << fixed(snapshot.loss_curve[e], 6) << "\n";
  }
  std::cout << "vectors written to " << f.out << "\n";
  return 0;
}

// query / alert --------------------------------------------------------------

struct QueryFlags {
  std::string store, text, file, rules, report, now;
  std::size_t k = 10;
};

int run_query(const QueryFlags& f, const Global& g) {
  if (f.text.empty() && f.file.empty()) throw Error(ErrorCode::InvalidArgument, "pass --q or --file");
  const auto loaded = core::load_store(f.store);
  auto table = query::RuleTable::with_builtins();
  if (!f.rules.empty()) alert::register_rules(table, alert::load_rulebook(f.rules), evaluation_time(loaded.store, f.now));
  query::EngineOptions options;
  options.default_k = f.k;
  options.threads = g.threads;
  const query::QueryEngine engine(loaded.store, table, options);
  query::QueryResult result;
  try {
    result = engine.execute(f.file.empty() ? f.text : read_text(f.file));
  } catch (const query::QueryFailure& failure) {
    std::cout << failure.partial().to_text();
    throw;
  }
  std::cout << result.to_text();
  if (!f.report.empty()) write_text(f.report, result.to_json());
  return 0;
}

struct AlertFlags {
  std::string store, profile, rules, now, dependencies, ttl;
  std::size_t similar = 5;
  double threshold = 0.5;
};

int run_alert(const AlertFlags& f) {
  auto loaded = core::load_store(f.store);
  if (!f.dependencies.empty()) {
    for (const auto& t : alert::ingest_dependencies(f.dependencies)) loaded.store.mutable_graph().add(t);
  }
  const auto profile = alert::load_profile(f.profile);
  const auto rules = rules_or_default(f.rules);
  std::optional<alert::TimePoint> now;
  if (!f.now.empty()) now = alert::parse_timestamp(f.now);
  const auto report = alert::run_alerts(loaded.store, profile, rules, {f.similar, f.threshold}, now);
  std::cout << "evaluated at " << alert::format_timestamp(report.now) << "\n";
  std::cout << alert::alerts_to_text(report.alerts);
  for (const auto& d : report.diagnostics) std::cout << "note: " << d << "\n";
  if (report.alerts.empty()) std::cout << "no alerts\n";
  if (!f.ttl.empty()) kg::save_turtle(alert::alerts_graph(report.alerts), f.ttl);
  return 0;
}

// predict --------------------------------------------------------------------

struct PredictFlags {
  std::string store, model, model_out, propose_out, pairs;
  std::vector<std::string> pair;
  std::size_t hidden = 32;
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  double held_out = 1.0 / 3.0;
  std::string activation = "relu";
  std::string loss = "cross_entropy";
  double threshold = 0.9;
  std::size_t max_pairs = 200000;
};

std::vector<std::pair<kg::Iri, kg::Iri>> candidate_pairs(const core::VkgStore& store, std::size_t limit) {
  std::vector<kg::Iri> typed;
  for (const auto& [entity, token] : store.links()) {
    if (!store.graph().direct_classes(entity).empty()) typed.push_back(entity);
  }
  std::vector<std::pair<kg::Iri, kg::Iri>> pairs;
  for (const auto& a : typed) {
    for (const auto& b : typed) {
      if (a == b) continue;
      if (pairs.size() == limit) {
        throw Error(ErrorCode::InvalidArgument, "more than " + std::to_string(limit) +
                                                    " candidate pairs; pass --pairs or raise --max-pairs");
      }
      pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

int run_predict(const PredictFlags& f, const Global& g) {
  const auto loaded = core::load_store(f.store);
  const auto& store = loaded.store;
  rel::RelationModel model;
  if (!f.model.empty()) {
    model = rel::load_model(f.model);
    std::cout << "model loaded from " << f.model << "\n";
  } else {
    rel::ModelConfig config;
    config.hidden = f.hidden;
    config.epochs = f.epochs;
    config.learning_rate = f.learning_rate;
    config.held_out = f.held_out;
    config.activation = rel::parse_activation(f.activation);
    config.loss = rel::parse_loss(f.loss);
    config.seed = g.seed;
    const auto training = rel::build_training_set(store, rel::default_relation_set());
    model = rel::train_model(training.set, config);
    std::cout << "training examples " << training.set.examples.size() << " (skipped " << training.skipped.unlinked
              << " unlinked, " << training.skipped.same_class << " same-class)\n"
              << "train " << model.train_count << ", held out " << model.test_count << ", held-out accuracy "
              << fixed(model.held_out_accuracy) << ", final loss " << fixed(model.final_loss, 6) << "\n";
  }
  if (!f.model_out.empty()) rel::save_model(f.model_out, model);

  if (!f.pair.empty()) {
    const auto a = resolve(store, f.pair[0]);
    const auto b = resolve(store, f.pair[1]);
    const auto ta = store.token_of(a);
    const auto tb = store.token_of(b);
    if (!ta || !tb) throw Error(ErrorCode::UnlinkedEntity, (ta ? b : a).render());
    const auto p = model.predict(store.space().vector(*ta), store.space().vector(*tb));
    std::cout << a.render() << " " << p.relation.render() << " " << b.render() << "  confidence "
              << fixed(p.confidence) << "\n";
    for (std::size_t r = 0; r < model.relations.relations.size(); ++r) {
      std::cout << "  " << model.relations.relations[r].render() << " "
                << fixed(p.distribution[static_cast<Eigen::Index>(r)]) << "\n";
    }
  }

  if (!f.propose_out.empty()) {
    std::vector<std::pair<kg::Iri, kg::Iri>> pairs;
    if (!f.pairs.empty()) {
      std::istringstream lines(read_text(f.pairs));
      for (std::string line; std::getline(lines, line);) {
        const auto tab = line.find('\t');
        if (line.empty() || line[0] == '#') continue;
        if (tab == std::string::npos) throw Error(ErrorCode::MalformedLine, "pairs file line needs a tab: " + line);
        pairs.emplace_back(resolve(store, line.substr(0, tab)), resolve(store, line.substr(tab + 1)));
      }
    } else {
      pairs = candidate_pairs(store, f.max_pairs);
    }
    const auto proposals = rel::propose_triples(model, store, pairs, f.threshold);
    kg::save_turtle(rel::proposals_graph(proposals), f.propose_out);
    std::cout << proposals.size() << " proposals at confidence >= " << fixed(f.threshold, 2) << " written to "
              << f.propose_out << "\n";
  }
  return 0;
}

// eval -----------------------------------------------------------------------

struct EvalFlags {
  std::string store, groups, model = "all", report, plot, sweep_corpus, gazetteer;
  std::size_t k = 10;
  std::size_t latency = 0;
  bool skip_unlinked = false;
  std::vector<std::size_t> dims{50, 100};
  std::vector<std::size_t> min_counts{1, 5};
};

int run_eval(const EvalFlags& f, const Global& g) {
  const auto loaded = core::load_store(f.store);
  const auto groups = eval::load_groups(f.groups);
  std::vector<eval::Model> models;
  if (f.model == "all") {
    models = {eval::Model::GraphMatching, eval::Model::VectorOnly, eval::Model::VkgSearch};
  } else {
    models = {eval::parse_model(f.model)};
  }
  eval::EvalOptions options;
  options.k = f.k;
  options.threads = g.threads;
  options.skip_unlinked = f.skip_unlinked;
  std::string json = "[\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    auto report = eval::evaluate_model(loaded.store, groups, models[i], options);
    if (auto it = loaded.meta.build.find("min_count"); it != loaded.meta.build.end()) {
      report.min_count = std::stoul(it->second);
    }
    std::cout << report.to_text() << "\n";
    json += report.to_json() + (i + 1 < models.size() ? ",\n" : "");
  }
  json += "]\n";
  if (!f.report.empty()) write_text(f.report, json);

  if (f.latency > 0) std::cout << eval::latency_compare(loaded.store, groups, f.k, f.latency).to_text();

  if (!f.sweep_corpus.empty()) {
    const auto docs = ingest::load_corpus(f.sweep_corpus);
    const auto gazetteer = gazetteer_or_bundled(f.gazetteer);
    embed::TrainerConfig base;
    base.seed = g.seed;
    const auto points =
        eval::run_sweep(app::sentence_corpus(docs, gazetteer), app::extract_corpus(docs, gazetteer, ingest::bundled_patterns()),
                        groups, f.dims, f.min_counts, base, f.k);
    const std::string csv = eval::sweep_to_csv(points);
    std::cout << csv;
    if (!f.plot.empty()) write_text(f.plot, csv);
  }
  return 0;
}

// inspect --------------------------------------------------------------------

struct InspectFlags {
  std::string store, entity;
  std::size_t k = 5;
};

int run_inspect(const InspectFlags& f) {
  const auto loaded = core::load_store(f.store);
  const auto& store = loaded.store;
  if (f.entity.empty()) {
    const auto& m = loaded.meta;
    std::cout << "triples " << m.triples << ", links " << m.links << ", vocabulary " << m.vocab_size
              << ", dimension " << m.dimension << "\n";
    for (const auto& [key, value] : m.build) std::cout << "  " << key << " " << value << "\n";
    if (m.complexity) std::cout << "complexity " << m.complexity->total() << "\n";
    if (!m.latest_document.empty()) std::cout << "latest document " << m.latest_document << "\n";
    std::cout << "classes " << store.graph().classes().size() << ", relations "
              << core::relation_count(store.graph()) << "\n";
    const auto problems = core::validate_store(store);
    for (const auto& p : problems) std::cout << "problem: " << p << "\n";
    std::cout << (problems.empty() ? "validation ok\n" : "validation failed\n");
    return problems.empty() ? 0 : 1;
    return 0;
  }
  const auto entity = resolve(store, f.entity);
  const auto& graph = store.graph();
  std::cout << "entity " << entity.render() << "\n";
  std::cout << "classes:";
  for (const auto& c : graph.class_of(entity)) std::cout << " " << c.render();
  std::cout << "\ntriples:\n";
  for (const auto* t : graph.with_subject(entity)) std::cout << "  " << kg::render(*t) << "\n";
  for (const auto* t : graph.with_object(entity)) std::cout << "  " << kg::render(*t) << "\n";
  const auto token = store.token_of(entity);
  if (!token) {
    std::cout << "link: none\n";
    return 0;
  }
  std::cout << "link: \"" << *token << "\"\n";
  std::cout << "top-" << f.k << " neighbors:\n";
  const auto result = vec::top_k(store.space(), *token, f.k, true);
  for (const auto& n : result.neighbors) {
    std::cout << "  " << fixed(n.similarity) << " " << n.token;
    const auto& entities = store.entities_of(n.token);
    for (const auto& e : entities) std::cout << " " << e.render();
    std::cout << "\n";
  }
  return 0;
}

// fixture / synth / augment --------------------------------------------------

int run_fixture(const std::string& out) {
  const fs::path dir = out;
  const auto store = ingest::cyber_fixture();
  core::StoreMeta meta;
  meta.build["source"] = "cyber fixture";
  meta.complexity = core::complexity_estimate(store, 7);
  core::save_store(store, dir / "store", meta);
  write_text(dir / "profile.json", ingest::cyber_fixture_profile());
  write_text(dir / "rules.json", alert::rulebook_to_json(alert::default_rulebook()));
  write_text(dir / "query1.txt", std::string(ingest::kQueryOne) + "\n");
  std::cout << "fixture store, profile.json, rules.json and query1.txt written to " << out << "\n";
  return 0;
}

struct SynthFlags {
  std::string out, kind = "corpus";
  std::size_t documents = 60;
  std::size_t sentences = 4;
  std::size_t vendors = 4;
  std::size_t groups = 8;
};

int run_synth(const SynthFlags& f, const Global& g) {
  const fs::path dir = f.out;
  if (f.kind == "corpus") {
    ingest::SyntheticCorpusConfig config;
    config.documents = f.documents;
    config.sentences_per_document = f.sentences;
    config.vendors = f.vendors;
    config.seed = g.seed;
    const auto corpus = ingest::synthetic_corpus(config);
    ingest::save_corpus(dir / "corpus", corpus.documents);
    write_store_sidecars(dir, corpus.gazetteer, corpus.patterns);
    write_text(dir / "groups.json", eval::groups_to_json(corpus.groups));
    kg::save_turtle(corpus.truth, dir / "truth.ttl");
    std::cout << corpus.documents.size() << " documents, " << corpus.truth.size() << " ground-truth triples, "
              << corpus.groups.size() << " groups written to " << f.out << "\n";
  } else if (f.kind == "eval-store") {
    eval::EvalStoreConfig config;
    config.groups_per_kind = f.groups;
    config.seed = g.seed;
    const auto generated = eval::synthetic_eval_store(config);
    core::save_store(generated.store, dir / "store");
    write_text(dir / "groups.json", eval::groups_to_json(generated.groups));
    std::cout << generated.store.links().size() << " linked entities, " << generated.groups.size()
              << " groups written to " << f.out << "\n";
  } else {
    throw Error(ErrorCode::InvalidArgument, "--kind must be corpus or eval-store");
  }
  return 0;
}

struct AugmentFlags {
  std::string store, same_as, external, dependencies;
};

int run_augment(const AugmentFlags& f) {
  auto loaded = core::load_store(f.store);
  kg::KnowledgeGraph& graph = loaded.store.mutable_graph();
  const std::size_t before = graph.size();
  if (!f.same_as.empty()) {
    if (f.external.empty()) throw Error(ErrorCode::InvalidArgument, "--same-as needs --external");
    std::vector<std::pair<kg::Iri, kg::Iri>> links;
    std::istringstream lines(read_text(f.same_as));
    std::size_t line_no = 0;
    for (std::string line; std::getline(lines, line);) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": expected local<TAB>external",
                    line_no);
      }
      links.emplace_back(resolve(loaded.store, line.substr(0, tab)), kg::parse_iri(line.substr(tab + 1)));
    }
    const auto external = kg::load_turtle(f.external);
    // The external file's own declarations become part of the store.
    for (const auto& [label, expansion] : external.prefixes()) {
      if (!graph.prefixes().count(label)) graph.declare_prefix(label, expansion);
    }
    kg::augment_same_as(graph, links, external);
  }
  if (!f.dependencies.empty()) {
    for (const auto& t : alert::ingest_dependencies(f.dependencies)) graph.add(t);
  }
  core::save_store(loaded.store, f.store, loaded.meta);
  std::cout << "added " << graph.size() - before << " triples\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Knowledge graph and vector space store for cyber threat intelligence"};
  cli.require_subcommand(1);
  Global global;
  cli.add_option("--seed", global.seed, "Seed for every stochastic step")->capture_default_str();
  cli.add_option("--threads", global.threads, "Worker threads; 1 keeps runs reproducible")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  BuildFlags build;
  auto* build_cmd = cli.add_subcommand("build", "Extract, merge, train and link a corpus into a store");
  build_cmd->add_option("--corpus", build.corpus, "Corpus directory (manifest.json or *.txt)")->required();
  build_cmd->add_option("--gazetteer", build.gazetteer, "Gazetteer JSON (default: bundled)");
  build_cmd->add_option("--patterns", build.patterns, "Extraction patterns JSON (default: bundled)");
  build_cmd->add_option("--out", build.out, "Store directory to write")->required();
  build.trainer.attach(build_cmd);
  build_cmd->add_option("--walk-length", build.walk_length, "Walk length for graph vectors")->capture_default_str();
  build_cmd->add_option("--walks", build.walks, "Walks per entity for graph vectors")->capture_default_str();

  RebuildFlags rebuild;
  auto* rebuild_cmd = cli.add_subcommand("rebuild", "Retrain a store on a new corpus with its stored settings");
  rebuild_cmd->add_option("--store", rebuild.store)->required();
  rebuild_cmd->add_option("--corpus", rebuild.corpus)->required();
  rebuild_cmd->add_option("--out", rebuild.out, "Write elsewhere instead of replacing the store");

  LinkFlags link;
  auto* link_cmd = cli.add_subcommand("link", "Link a graph to a vector file and write a store");
  link_cmd->add_option("--graph", link.graph, "Turtle graph")->required();
  link_cmd->add_option("--vectors", link.vectors, "word2vec text vectors")->required();
  link_cmd->add_option("--out", link.out)->required();

  TrainFlags train;
  auto* train_cmd = cli.add_subcommand("train", "Train word vectors on a tokenized corpus file");
  train_cmd->add_option("--corpus", train.corpus, "One whitespace-tokenized sentence per line")->required();
  train_cmd->add_option("--out", train.out, "Vector file to write")->required();
  train_cmd->add_option("--graph", train.graph, "Turtle graph for graph_augmented_cbow");
  train.trainer.attach(train_cmd);

  QueryFlags query_flags;
  auto* query_cmd = cli.add_subcommand("query", "Run a tuple query");
  query_cmd->add_option("--store", query_flags.store)->required();
  auto* query_text = query_cmd->add_option("--q", query_flags.text, "Query text");
  auto* query_file = query_cmd->add_option("--file", query_flags.file, "Read the query from a file");
  query_text->excludes(query_file);
  query_cmd->add_option("--rules", query_flags.rules, "Rulebook JSON whose rules become infer rules");
  query_cmd->add_option("--report", query_flags.report, "Write the result as JSON");
  query_cmd->add_option("--now", query_flags.now, "Evaluation time for rulebook rules");
  query_cmd->add_option("--k", query_flags.k, "Default k for search clauses")->capture_default_str();

  AlertFlags alert_flags;
  auto* alert_cmd = cli.add_subcommand("alert", "Generate alerts for a system profile");
  alert_cmd->add_option("--store", alert_flags.store)->required();
  alert_cmd->add_option("--profile", alert_flags.profile, "System profile JSON")->required();
  alert_cmd->add_option("--rules", alert_flags.rules, "Rulebook JSON (default: current_vulnerability)");
  alert_cmd->add_option("--similar", alert_flags.similar, "Neighbours per profile product")->capture_default_str();
  alert_cmd->add_option("--threshold", alert_flags.threshold, "Minimum similar-product score")->capture_default_str();
  alert_cmd->add_option("--now", alert_flags.now, "Evaluation time (default: latest intelligence)");
  alert_cmd->add_option("--dependencies", alert_flags.dependencies, "program<TAB>library file");
  alert_cmd->add_option("--ttl", alert_flags.ttl, "Write alerts as Turtle");

  PredictFlags predict;
  auto* predict_cmd = cli.add_subcommand("predict", "Train or load a relation model and predict relations");
  predict_cmd->add_option("--store", predict.store)->required();
  predict_cmd->add_option("--model", predict.model, "Load a saved model instead of training");
  predict_cmd->add_option("--model-out", predict.model_out, "Save the model");
  predict_cmd->add_option("--pair", predict.pair, "Subject and object entity")->expected(2);
  predict_cmd->add_option("--propose", predict.propose_out, "Write proposed triples as Turtle");
  predict_cmd->add_option("--pairs", predict.pairs, "subject<TAB>object candidates for --propose");
  predict_cmd->add_option("--threshold", predict.threshold, "Proposal confidence threshold")->capture_default_str();
  predict_cmd->add_option("--max-pairs", predict.max_pairs)->capture_default_str();
  predict_cmd->add_option("--hidden", predict.hidden)->capture_default_str();
  predict_cmd->add_option("--epochs", predict.epochs)->capture_default_str();
  predict_cmd->add_option("--lr", predict.learning_rate)->capture_default_str();
  predict_cmd->add_option("--held-out", predict.held_out)->capture_default_str();
  predict_cmd->add_option("--activation", predict.activation, "relu or tanh")->capture_default_str();
  predict_cmd->add_option("--loss", predict.loss, "cross_entropy or mse")->capture_default_str();

  EvalFlags eval_flags;
  auto* eval_cmd = cli.add_subcommand("eval", "Mean average precision over similarity groups");
  eval_cmd->add_option("--store", eval_flags.store)->required();
  eval_cmd->add_option("--groups", eval_flags.groups, "Groups JSON")->required();
  eval_cmd->add_option("--model", eval_flags.model, "all, graph-matching, vector-only or vkg-search")
      ->capture_default_str();
  eval_cmd->add_option("--k", eval_flags.k)->capture_default_str();
  eval_cmd->add_option("--report", eval_flags.report, "Write reports as JSON");
  eval_cmd->add_flag("--skip-unlinked", eval_flags.skip_unlinked, "Drop group members without a vector");
  eval_cmd->add_option("--latency", eval_flags.latency, "Repetitions for the latency comparison (>= 10)");
  eval_cmd->add_option("--sweep-corpus", eval_flags.sweep_corpus, "Corpus for the dimension x frequency sweep");
  eval_cmd->add_option("--gazetteer", eval_flags.gazetteer, "Gazetteer for the sweep corpus");
  eval_cmd->add_option("--dims", eval_flags.dims, "Sweep dimensions")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--min-counts", eval_flags.min_counts, "Sweep frequency cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--plot", eval_flags.plot, "Write sweep results as CSV");

  InspectFlags inspect;
  auto* inspect_cmd = cli.add_subcommand("inspect", "Validate a store or show one entity");
  inspect_cmd->add_option("--store", inspect.store)->required();
  inspect_cmd->add_option("--entity", inspect.entity);
  inspect_cmd->add_option("--k", inspect.k, "Neighbours to show")->capture_default_str();

  std::string fixture_out;
  auto* fixture_cmd = cli.add_subcommand("fixture", "Write the bundled cyber fixture store");
  fixture_cmd->add_option("--out", fixture_out)->required();

  SynthFlags synth;
  auto* synth_cmd = cli.add_subcommand("synth", "Generate a synthetic corpus or evaluation store");
  synth_cmd->add_option("--out", synth.out)->required();
  synth_cmd->add_option("--kind", synth.kind, "corpus or eval-store")->capture_default_str();
  synth_cmd->add_option("--documents", synth.documents)->capture_default_str();
  synth_cmd->add_option("--sentences", synth.sentences, "Sentences per document")->capture_default_str();
  synth_cmd->add_option("--vendors", synth.vendors, "Vendors per product family")->capture_default_str();
  synth_cmd->add_option("--groups", synth.groups, "Groups per kind (eval-store)")->capture_default_str();

  AugmentFlags augment;
  auto* augment_cmd = cli.add_subcommand("augment", "Import sameAs counterparts and dependencies into a store");
  augment_cmd->add_option("--store", augment.store)->required();
  augment_cmd->add_option("--same-as", augment.same_as, "local<TAB>external IRI lines");
  augment_cmd->add_option("--external", augment.external, "Turtle graph of the external knowledge base");
  augment_cmd->add_option("--dependencies", augment.dependencies, "program<TAB>library lines");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build_cmd) return run_build(build, global);
    if (*rebuild_cmd) return run_rebuild(rebuild, global);
    if (*link_cmd) return run_link(link);
    if (*train_cmd) return run_train(train, global);
    if (*query_cmd) return run_query(query_flags, global);
    if (*alert_cmd) return run_alert(alert_flags);
    if (*predict_cmd) return run_predict(predict, global);
    if (*eval_cmd) return run_eval(eval_flags, global);
    if (*inspect_cmd) return run_inspect(inspect);
    if (*fixture_cmd) return run_fixture(fixture_out);
    if (*synth_cmd) return run_synth(synth, global);
    if (*augment_cmd) return run_augment(augment);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
