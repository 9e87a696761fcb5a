#pragma once

#include "vkg/core/vkg_store.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vkg::core {

/// Contents of meta.json in a store directory.
struct StoreMeta {
  int format = 1;
  std::size_t dimension = 0;
  std::size_t vocab_size = 0;
  /// Graph triples excluding hasVector links.
  std::size_t triples = 0;
  std::size_t links = 0;
  /// Build settings echoed as strings, e.g. "mode" -> "cbow".
  std::map<std::string, std::string> build;
  std::optional<ComplexityEstimate> complexity;
  /// Newest document timestamp seen by the build; empty when unknown.
  std::string latest_document;
};

/// Writes graph.ttl (graph without links), links.ttl (hasVector triples),
/// vectors.txt and meta.json. Counts in `meta` are recomputed from the store.
void save_store(const VkgStore& store, const std::filesystem::path& dir, StoreMeta meta = {});

struct LoadedStore {
  VkgStore store;
  StoreMeta meta;
};

/// Loads and cross-checks a store directory: every link target must be in
/// the vocabulary and meta counts must agree with the files. Throws
/// InvalidStore, IoError, TurtleSyntax or MalformedLine.
LoadedStore load_store(const std::filesystem::path& dir);

/// Problems found by a full consistency check; empty when the store is sound.
std::vector<std::string> validate_store(const VkgStore& store);

}  // namespace vkg::core
