#include "vkg/app/pipeline.hpp"

#include "vkg/error.hpp"

#include <algorithm>
#include <exception>
#include <sstream>
#include <thread>

namespace vkg::app {

namespace {

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw Error(ErrorCode::InvalidConfig, "build setting " + key + " = '" + value + "' is not a count");
  }
  return static_cast<std::size_t>(n);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw Error(ErrorCode::InvalidConfig, "build setting " + key + " = '" + value + "' is not a number");
  }
  return x;
}

std::string real_text(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

std::map<std::string, std::string> BuildConfig::describe() const {
  return {{"mode", std::string(embed::mode_name(trainer.mode))},
          {"window", std::to_string(trainer.window)},
          {"dimension", std::to_string(trainer.dimension)},
          {"min_count", std::to_string(trainer.min_count)},
          {"negatives", std::to_string(trainer.negatives)},
          {"epochs", std::to_string(trainer.epochs)},
          {"learning_rate", real_text(trainer.learning_rate)},
          {"seed", std::to_string(trainer.seed)},
          {"walk_length", std::to_string(walk_length)},
          {"walks_per_entity", std::to_string(walks_per_entity)}};
}

BuildConfig BuildConfig::from_description(const std::map<std::string, std::string>& fields) {
  BuildConfig c;
  for (const auto& [key, value] : fields) {
    if (key == "mode") {
      try {
        c.trainer.mode = embed::parse_mode(value);
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
      }
    } else if (key == "window") {
      c.trainer.window = parse_count(key, value);
    } else if (key == "dimension") {
      c.trainer.dimension = parse_count(key, value);
    } else if (key == "min_count") {
      c.trainer.min_count = parse_count(key, value);
    } else if (key == "negatives") {
      c.trainer.negatives = parse_count(key, value);
    } else if (key == "epochs") {
      c.trainer.epochs = parse_count(key, value);
    } else if (key == "learning_rate") {
      c.trainer.learning_rate = parse_real(key, value);
    } else if (key == "seed") {
      c.trainer.seed = parse_count(key, value);
    } else if (key == "walk_length") {
      c.walk_length = parse_count(key, value);
    } else if (key == "walks_per_entity") {
      c.walks_per_entity = parse_count(key, value);
    }
  }
  return c;
}

kg::KnowledgeGraph extract_corpus(const std::vector<ingest::Document>& docs, const ingest::Gazetteer& gazetteer,
                                  const std::vector<ingest::ExtractionPattern>& patterns, std::size_t threads) {
  std::vector<kg::KnowledgeGraph> graphs(docs.size());
  auto run = [&](std::size_t i) { graphs[i] = ingest::extract_document_graph(docs[i], gazetteer, patterns).graph; };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, docs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < docs.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < docs.size(); i += workers) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return ingest::merge_graphs(graphs);
}

embed::Corpus sentence_corpus(const std::vector<ingest::Document>& docs, const ingest::Gazetteer& gazetteer) {
  embed::Corpus corpus;
  for (const auto& doc : docs) {
    for (const auto& sentence : ingest::split_sentences(doc.text)) {
      auto tokens = ingest::preprocess(sentence, gazetteer);
      if (!tokens.empty()) corpus.push_back(std::move(tokens));
    }
  }
  return corpus;
}

core::StoreMeta BuildResult::meta() const {
  core::StoreMeta m;
  m.build = config.describe();
  m.build["documents"] = std::to_string(documents);
  m.build["sentences"] = std::to_string(sentences);
  m.complexity = complexity;
  m.latest_document = latest_document;
  return m;
}

std::string BuildResult::summary() const {
  std::ostringstream out;
  out << "documents " << documents << ", sentences " << sentences << "\n"
      << "graph triples " << store.graph().size() << ", vocabulary " << store.space().size() << ", dimension "
      << store.space().dimension() << "\n";
  // Report nodes never carry a vector, so only their count is shown.
  std::vector<kg::Iri> other;
  std::size_t reports = 0;
  for (const kg::Iri& e : links.unlinked) {
    if (store.graph().direct_classes(e).count(kg::vocab::intelligence)) {
      ++reports;
    } else {
      other.push_back(e);
    }
  }
  out << "linked " << links.linked << ", unlinked " << other.size() << " entities and " << reports
      << " report nodes, orphan tokens " << links.orphan_tokens.size() << "\n";
  for (const kg::Iri& e : other) out << "  unlinked " << e.render() << "\n";
  if (!loss_curve.empty()) out << "final epoch loss " << loss_curve.back() << "\n";
  out << "complexity (N x D x H) + (C + R) + V = (" << complexity.context_window << " x " << complexity.dimension
      << " x " << complexity.hidden_size << ") + (" << complexity.class_count << " + " << complexity.relation_count
      << ") + " << complexity.vocab_size << " = " << complexity.total() << "\n";
  return out.str();
}

BuildResult build_store(const std::vector<ingest::Document>& docs, const ingest::Gazetteer& gazetteer,
                        const std::vector<ingest::ExtractionPattern>& patterns, const BuildConfig& config) {
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents to build from");
  config.trainer.validate();
  kg::KnowledgeGraph graph = extract_corpus(docs, gazetteer, patterns, config.threads);
  const embed::Corpus corpus = sentence_corpus(docs, gazetteer);
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "documents contain no tokens");

  embed::TokenVectors graph_vectors;
  const bool augmented = config.trainer.mode == embed::Mode::GraphAugmentedCbow;
  if (augmented) {
    embed::Rdf2VecConfig rc;
    rc.walk_length = config.walk_length;
    rc.walks_per_entity = config.walks_per_entity;
    rc.trainer.dimension = config.trainer.dimension;
    rc.trainer.seed = config.trainer.seed;
    graph_vectors = embed::rdf2vec(graph, rc);
  }
  auto snapshot = embed::train(config.trainer, corpus, augmented ? &graph_vectors : nullptr);
  auto linked = core::link_entities(std::move(graph), std::move(snapshot.space));

  BuildResult result{std::move(linked.store), std::move(linked.report), {}, std::move(snapshot.loss_curve),
                     docs.size(), corpus.size(), "", config};
  result.complexity = core::complexity_estimate(result.store, config.trainer.window);
  for (const auto& d : docs) result.latest_document = std::max(result.latest_document, d.timestamp);
  return result;
}

}  // namespace vkg::app
