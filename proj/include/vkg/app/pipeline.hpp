#pragma once

#include "vkg/core/store_dir.hpp"
#include "vkg/core/vkg_store.hpp"
#include "vkg/embed/trainer.hpp"
#include "vkg/ingest/extract.hpp"

#include <map>
#include <string>
#include <vector>

namespace vkg::app {

struct BuildConfig {
  embed::TrainerConfig trainer;
  /// Walk settings for graph-augmented training; the trainer part follows
  /// `trainer` (dimension and seed).
  std::size_t walk_length = 4;
  std::size_t walks_per_entity = 20;
  /// Documents extracted concurrently; the merge is always sequential.
  std::size_t threads = 1;

  std::map<std::string, std::string> describe() const;
  /// Inverse of describe(); missing keys keep their defaults. Throws InvalidConfig.
  static BuildConfig from_description(const std::map<std::string, std::string>& fields);
};

/// Per-document extraction followed by the co-reference merge.
kg::KnowledgeGraph extract_corpus(const std::vector<ingest::Document>& docs, const ingest::Gazetteer& gazetteer,
                                  const std::vector<ingest::ExtractionPattern>& patterns, std::size_t threads = 1);

/// One preprocessed token list per sentence.
embed::Corpus sentence_corpus(const std::vector<ingest::Document>& docs, const ingest::Gazetteer& gazetteer);

struct BuildResult {
  core::VkgStore store;
  core::LinkReport links;
  core::ComplexityEstimate complexity;
  std::vector<double> loss_curve;
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::string latest_document;
  BuildConfig config;

  core::StoreMeta meta() const;
  std::string summary() const;
};

/// extract -> merge -> train -> link, then the complexity estimate with the
/// trainer window as N. Throws EmptyCorpus, EmptyVocab, InvalidConfig.
BuildResult build_store(const std::vector<ingest::Document>& docs, const ingest::Gazetteer& gazetteer,
                        const std::vector<ingest::ExtractionPattern>& patterns, const BuildConfig& config);

}  // namespace vkg::app
