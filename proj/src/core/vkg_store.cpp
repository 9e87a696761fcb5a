#include "vkg/core/vkg_store.hpp"

#include "vkg/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace vkg::core {

namespace {

const std::vector<Iri> kNoEntities;

bool structural(const Iri& predicate) {
  return predicate == kg::vocab::rdf_type || predicate == kg::vocab::same_as ||
         predicate == kg::vocab::subclass_of || predicate == kg::vocab::has_vector;
}

}  // namespace

VkgStore::VkgStore(kg::KnowledgeGraph graph, vec::VectorSpace space)
    : graph_(std::move(graph)), space_(std::move(space)) {
  for (const kg::Triple* t : graph_.with_predicate(kg::vocab::has_vector)) {
    const auto* literal = std::get_if<kg::Literal>(&t->object);
    if (literal == nullptr) {
      throw Error(ErrorCode::InvalidStore, "hasVector object must be a token literal: " +
                                               kg::render(*t));
    }
    if (!space_.contains(literal->value)) {
      throw Error(ErrorCode::InvalidStore,
                  "link target '" + literal->value + "' is not in the vocabulary");
    }
    auto [it, inserted] = links_.emplace(t->subject, literal->value);
    if (!inserted) {
      throw Error(ErrorCode::InvalidStore, t->subject.render() + " has more than one hasVector");
    }
    by_token_[literal->value].push_back(t->subject);
  }
  for (auto& [_, entities] : by_token_) std::sort(entities.begin(), entities.end());
}

void VkgStore::link(const Iri& entity, const std::string& token) {
  if (!space_.contains(token)) throw Error(ErrorCode::UnknownToken, token);
  auto existing = links_.find(entity);
  if (existing != links_.end()) {
    if (existing->second == token) return;
    throw Error(ErrorCode::InvalidArgument,
                entity.render() + " is already linked to '" + existing->second + "'");
  }
  graph_.add(entity, kg::vocab::has_vector, kg::Literal{token});
  links_.emplace(entity, token);
  auto& bucket = by_token_[token];
  bucket.insert(std::upper_bound(bucket.begin(), bucket.end(), entity), entity);
}

std::optional<std::string> VkgStore::token_of(const Iri& entity) const {
  auto it = links_.find(entity);
  if (it == links_.end()) return std::nullopt;
  return it->second;
}

const std::vector<Iri>& VkgStore::entities_of(std::string_view token) const {
  auto it = by_token_.find(std::string(token));
  return it == by_token_.end() ? kNoEntities : it->second;
}

kg::KnowledgeGraph& VkgStore::mutable_graph() {
  if (graph_.sealed()) throw Error(ErrorCode::StoreSealed, "store is sealed");
  return graph_;
}

std::string LinkReport::to_text() const {
  std::ostringstream out;
  out << "linked: " << linked << "\n";
  out << "unlinked: " << unlinked.size() << "\n";
  for (const Iri& e : unlinked) out << "  " << e.render() << "\n";
  out << "orphan_tokens: " << orphan_tokens.size() << "\n";
  return out.str();
}

std::vector<Iri> graph_entities(const kg::KnowledgeGraph& graph) {
  std::set<Iri> entities;
  for (const kg::Triple& t : graph.triples()) {
    if (t.predicate == kg::vocab::rdf_type) {
      entities.insert(t.subject);
      continue;
    }
    if (structural(t.predicate)) continue;
    entities.insert(t.subject);
    if (const Iri* o = kg::as_iri(t.object)) entities.insert(*o);
  }
  return {entities.begin(), entities.end()};
}

std::string entity_token(const Iri& entity, const Normalizer& normalizer) {
  return normalizer ? normalizer(entity.local) : kg::normalize_token(entity.local);
}

LinkResult link_entities(kg::KnowledgeGraph graph, vec::VectorSpace space,
                         const Normalizer& normalizer) {
  LinkResult result{VkgStore(std::move(graph), std::move(space)), {}};
  VkgStore& store = result.store;
  std::set<std::string> used;
  for (const Iri& entity : graph_entities(store.graph())) {
    if (auto existing = store.token_of(entity)) {
      used.insert(*existing);
      ++result.report.linked;
      continue;
    }
    const std::string token = entity_token(entity, normalizer);
    if (store.space().contains(token)) {
      store.link(entity, token);
      used.insert(token);
      ++result.report.linked;
    } else {
      result.report.unlinked.push_back(entity);
    }
  }
  for (const std::string& token : store.space().tokens()) {
    if (!used.count(token)) result.report.orphan_tokens.push_back(token);
  }
  std::sort(result.report.orphan_tokens.begin(), result.report.orphan_tokens.end());
  return result;
}

std::map<Iri, std::string> links_from_graph(const kg::KnowledgeGraph& graph) {
  std::map<Iri, std::string> out;
  for (const kg::Triple* t : graph.with_predicate(kg::vocab::has_vector)) {
    if (const auto* literal = std::get_if<kg::Literal>(&t->object)) {
      out.emplace(t->subject, literal->value);
    }
  }
  return out;
}

std::vector<EntityHit> vkg_search(const VkgStore& store, const Iri& seed,
                                  const SearchOptions& options) {
  if (options.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto seed_token = store.token_of(seed);
  if (!seed_token) throw Error(ErrorCode::UnlinkedEntity, seed.render());
  if (options.class_filter && !store.graph().is_class(*options.class_filter)) {
    throw Error(ErrorCode::UnknownClass, options.class_filter->render());
  }

  const vec::VectorSpace& space = store.space();
  const vec::RowFilter linked_rows = [&](std::size_t r) {
    return !store.entities_of(space.token(r)).empty();
  };
  std::size_t linked_count = 0;
  for (std::size_t r = 0; r < space.size(); ++r) linked_count += linked_rows(r) ? 1 : 0;

  const Vector query = space.vector(*seed_token);
  std::size_t fetch = std::max<std::size_t>(1, options.expansion) * options.k;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 2) fetch = linked_count;
    const auto candidates = vec::top_k(space, query, std::max<std::size_t>(fetch, 1), linked_rows);

    std::vector<EntityHit> hits;
    for (const vec::Neighbor& n : candidates.neighbors) {
      for (const Iri& entity : store.entities_of(n.token)) {
        if (entity == seed) continue;
        if (options.class_filter && !store.graph().class_of(entity).count(*options.class_filter)) {
          continue;
        }
        hits.push_back({entity, n.similarity});
      }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const EntityHit& a, const EntityHit& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.entity < b.entity;
    });
    const bool exhausted = fetch >= linked_count;
    if (hits.size() >= options.k || exhausted || attempt == 2) {
      if (hits.size() > options.k) hits.resize(options.k);
      return hits;
    }
    fetch *= 4;
  }
}

std::size_t relation_count(const kg::KnowledgeGraph& graph) {
  std::size_t count = 0;
  for (const Iri& p : graph.predicates()) count += structural(p) ? 0 : 1;
  return count;
}

ComplexityEstimate complexity_estimate(const VkgStore& store, std::uint64_t context_window,
                                       std::optional<std::uint64_t> hidden_size) {
  ComplexityEstimate estimate;
  estimate.context_window = context_window;
  estimate.dimension = store.space().dimension();
  estimate.hidden_size = hidden_size.value_or(estimate.dimension);
  estimate.class_count = store.graph().classes().size();
  estimate.relation_count = relation_count(store.graph());
  estimate.vocab_size = store.space().size();
  return estimate;
}

}  // namespace vkg::core
