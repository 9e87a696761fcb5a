#pragma once

#include "vkg/kg/graph.hpp"
#include "vkg/vec/vector_space.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vkg::core {

using kg::Iri;
using Normalizer = std::function<std::string(std::string_view)>;

/// Knowledge graph plus vector space, joined by hasVector links. Each link
/// is mirrored in the graph as (entity, vkg:hasVector, "token").
class VkgStore {
 public:
  VkgStore(kg::KnowledgeGraph graph, vec::VectorSpace space);

  const kg::KnowledgeGraph& graph() const noexcept { return graph_; }
  const vec::VectorSpace& space() const noexcept { return space_; }
  const std::map<Iri, std::string>& links() const noexcept { return links_; }

  /// Throws UnknownToken when the token is not in the vocabulary and
  /// InvalidArgument when the entity is already linked elsewhere.
  void link(const Iri& entity, const std::string& token);

  std::optional<std::string> token_of(const Iri& entity) const;
  /// Entities linked to a token, sorted.
  const std::vector<Iri>& entities_of(std::string_view token) const;
  bool linked(const Iri& entity) const { return links_.count(entity) != 0; }

  /// Graph edits on an unsealed store (fixtures, augmentation, proposals).
  kg::KnowledgeGraph& mutable_graph();

  void seal() { graph_.seal(); }

 private:
  kg::KnowledgeGraph graph_;
  vec::VectorSpace space_;
  std::map<Iri, std::string> links_;
  std::unordered_map<std::string, std::vector<Iri>> by_token_;
};

struct LinkReport {
  std::size_t linked = 0;
  std::vector<Iri> unlinked;
  std::vector<std::string> orphan_tokens;

  std::string to_text() const;
};

struct LinkResult {
  VkgStore store;
  LinkReport report;
};

/// Graph entities in the linking sense: IRIs that are subject or object of
/// any triple other than rdf:type, owl:sameAs, rdfs:subClassOf and
/// vkg:hasVector, plus subjects of rdf:type triples.
std::vector<Iri> graph_entities(const kg::KnowledgeGraph& graph);

/// Default token for an entity: the normalized local name.
std::string entity_token(const Iri& entity, const Normalizer& normalizer = {});

LinkResult link_entities(kg::KnowledgeGraph graph, vec::VectorSpace space,
                         const Normalizer& normalizer = {});

/// Link map recovered from the graph's hasVector triples alone.
std::map<Iri, std::string> links_from_graph(const kg::KnowledgeGraph& graph);

struct EntityHit {
  Iri entity;
  double similarity = 0.0;

  bool operator==(const EntityHit&) const = default;
};

struct SearchOptions {
  std::size_t k = 10;
  std::optional<Iri> class_filter;
  /// Candidates fetched per requested result before class filtering. The
  /// search retries with 4x this factor, then with a full scan.
  std::size_t expansion = 4;
};

/// Vector top-k over linked tokens, mapped back to entities, seed removed,
/// then filtered by class membership (subclass closure). Throws
/// UnlinkedEntity and UnknownClass.
std::vector<EntityHit> vkg_search(const VkgStore& store, const Iri& seed,
                                  const SearchOptions& options);

struct ComplexityEstimate {
  std::uint64_t context_window = 0;
  std::uint64_t dimension = 0;
  std::uint64_t hidden_size = 0;
  std::uint64_t class_count = 0;
  std::uint64_t relation_count = 0;
  std::uint64_t vocab_size = 0;

  /// (N x D x H) + (C + R) + V
  std::uint64_t total() const {
    return context_window * dimension * hidden_size + (class_count + relation_count) + vocab_size;
  }
};

/// Reads C, R, V and D from a store. H defaults to D (single projection layer).
ComplexityEstimate complexity_estimate(const VkgStore& store, std::uint64_t context_window,
                                       std::optional<std::uint64_t> hidden_size = std::nullopt);

/// Relations counted for R: predicates other than the structural ones.
std::size_t relation_count(const kg::KnowledgeGraph& graph);

}  // namespace vkg::core
