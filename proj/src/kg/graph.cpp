#include "vkg/kg/graph.hpp"

#include "vkg/error.hpp"

#include <algorithm>
#include <deque>

namespace vkg::kg {

namespace {

const std::vector<const Triple*> kNoTriples;

const std::vector<const Triple*>& lookup(const std::map<Iri, std::vector<const Triple*>>& index,
                                         const Iri& key) {
  auto it = index.find(key);
  return it == index.end() ? kNoTriples : it->second;
}

void unindex(std::map<Iri, std::vector<const Triple*>>& index, const Iri& key,
             const Triple* stored) {
  auto it = index.find(key);
  if (it == index.end()) return;
  auto& bucket = it->second;
  bucket.erase(std::remove(bucket.begin(), bucket.end(), stored), bucket.end());
  if (bucket.empty()) index.erase(it);
}

}  // namespace

const PrefixTable& default_prefixes() {
  static const PrefixTable table = {
      {"uco", "http://accl.umbc.edu/ns/ontology/uco#"},
      {"intel", "http://accl.umbc.edu/ns/ontology/intelligence#"},
      {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
      {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
      {"xml", "http://www.w3.org/XML/1998/namespace"},
      {"xsd", "http://www.w3.org/2001/XMLSchema#"},
      {"dbp", "http://dbpedia.org/resource#"},
      {"owl", "http://www.w3.org/2002/07/owl#"},
      {"vkg", "http://accl.umbc.edu/ns/vkg#"},
  };
  return table;
}

KnowledgeGraph::KnowledgeGraph() : prefixes_(default_prefixes()) {}

KnowledgeGraph::KnowledgeGraph(PrefixTable prefixes) : prefixes_(std::move(prefixes)) {}

KnowledgeGraph::KnowledgeGraph(const KnowledgeGraph& other)
    : prefixes_(other.prefixes_),
      triples_(other.triples_),
      superclasses_(other.superclasses_),
      instances_(other.instances_),
      sealed_(false) {
  rebuild_indexes();
}

KnowledgeGraph& KnowledgeGraph::operator=(const KnowledgeGraph& other) {
  if (this != &other) {
    KnowledgeGraph copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void KnowledgeGraph::declare_prefix(const std::string& label, const std::string& expansion) {
  if (sealed_) throw Error(ErrorCode::StoreSealed, "cannot declare prefix on a sealed graph");
  prefixes_[label] = expansion;
}

bool KnowledgeGraph::declared(const Iri& iri) const {
  return iri.prefix.empty() || prefixes_.count(iri.prefix) != 0;
}

bool KnowledgeGraph::reaches(const Iri& from, const Iri& target) const {
  std::set<Iri> seen;
  std::deque<Iri> frontier{from};
  while (!frontier.empty()) {
    Iri current = frontier.front();
    frontier.pop_front();
    if (current == target) return true;
    if (!seen.insert(current).second) continue;
    auto it = superclasses_.find(current);
    if (it == superclasses_.end()) continue;
    for (const Iri& next : it->second) frontier.push_back(next);
  }
  return false;
}

bool KnowledgeGraph::add(const Triple& triple) {
  if (sealed_) throw Error(ErrorCode::StoreSealed, "cannot assert into a sealed graph");
  auto check = [this](const Iri& iri) {
    if (!declared(iri)) {
      throw Error(ErrorCode::UndeclaredPrefix,
                  "prefix '" + iri.prefix + "' is not declared (" + iri.render() + ")");
    }
    if (!valid_local(iri.local, iri.is_entity())) {
      throw Error(ErrorCode::InvalidArgument, "invalid local name in " + iri.render());
    }
  };
  check(triple.subject);
  check(triple.predicate);
  if (const Iri* obj = as_iri(triple.object)) check(*obj);

  if (triples_.count(triple)) return false;

  if (triple.predicate == vocab::subclass_of) {
    const Iri* super = as_iri(triple.object);
    if (super == nullptr) {
      throw Error(ErrorCode::InvalidArgument, "rdfs:subClassOf needs an IRI object");
    }
    if (reaches(*super, triple.subject)) {
      throw Error(ErrorCode::CyclicSubclass,
                  triple.subject.render() + " rdfs:subClassOf " + super->render());
    }
  }

  auto [it, inserted] = triples_.insert(triple);
  index(*it);
  return inserted;
}

bool KnowledgeGraph::remove(const Triple& triple) {
  if (sealed_) throw Error(ErrorCode::StoreSealed, "cannot retract from a sealed graph");
  auto it = triples_.find(triple);
  if (it == triples_.end()) return false;
  const Triple* stored = &*it;
  unindex(by_subject_, stored->subject, stored);
  unindex(by_predicate_, stored->predicate, stored);
  if (const Iri* obj = as_iri(stored->object)) unindex(by_object_, *obj, stored);
  if (const Iri* obj = as_iri(stored->object)) {
    if (stored->predicate == vocab::rdf_type) {
      auto inst = instances_.find(*obj);
      if (inst != instances_.end()) inst->second.erase(stored->subject);
    } else if (stored->predicate == vocab::subclass_of) {
      superclasses_[stored->subject].erase(*obj);
    }
  }
  triples_.erase(it);
  return true;
}

void KnowledgeGraph::index(const Triple& stored) {
  by_subject_[stored.subject].push_back(&stored);
  by_predicate_[stored.predicate].push_back(&stored);
  const Iri* obj = as_iri(stored.object);
  if (obj == nullptr) return;
  by_object_[*obj].push_back(&stored);
  if (stored.predicate == vocab::rdf_type) {
    superclasses_[*obj];
    instances_[*obj].insert(stored.subject);
  } else if (stored.predicate == vocab::subclass_of) {
    superclasses_[stored.subject].insert(*obj);
    superclasses_[*obj];
  }
}

void KnowledgeGraph::rebuild_indexes() {
  by_subject_.clear();
  by_object_.clear();
  by_predicate_.clear();
  for (const Triple& t : triples_) {
    by_subject_[t.subject].push_back(&t);
    by_predicate_[t.predicate].push_back(&t);
    if (const Iri* obj = as_iri(t.object)) by_object_[*obj].push_back(&t);
  }
}

const std::vector<const Triple*>& KnowledgeGraph::with_subject(const Iri& s) const {
  return lookup(by_subject_, s);
}

const std::vector<const Triple*>& KnowledgeGraph::with_object(const Iri& o) const {
  return lookup(by_object_, o);
}

const std::vector<const Triple*>& KnowledgeGraph::with_predicate(const Iri& p) const {
  return lookup(by_predicate_, p);
}

std::vector<Term> KnowledgeGraph::objects(const Iri& s, const Iri& p) const {
  std::vector<Term> out;
  for (const Triple* t : with_subject(s)) {
    if (t->predicate == p) out.push_back(t->object);
  }
  return out;
}

std::set<Iri> KnowledgeGraph::same_as_closure(const Iri& iri) const {
  std::set<Iri> seen{iri};
  std::deque<Iri> frontier{iri};
  while (!frontier.empty()) {
    Iri current = frontier.front();
    frontier.pop_front();
    for (const Triple* t : with_subject(current)) {
      if (t->predicate != vocab::same_as) continue;
      if (const Iri* o = as_iri(t->object); o && seen.insert(*o).second) frontier.push_back(*o);
    }
    for (const Triple* t : with_object(current)) {
      if (t->predicate != vocab::same_as) continue;
      if (seen.insert(t->subject).second) frontier.push_back(t->subject);
    }
  }
  return seen;
}

std::set<Iri> KnowledgeGraph::list_objects(const Iri& relation, const Iri& subject) const {
  if (relation == vocab::rdf_type && is_class(subject)) return instances_of(subject);
  std::set<Iri> out;
  for (const Iri& member : same_as_closure(subject)) {
    for (const Triple* t : with_subject(member)) {
      if (t->predicate != relation) continue;
      if (const Iri* o = as_iri(t->object)) out.insert(*o);
    }
  }
  return out;
}

std::set<Iri> KnowledgeGraph::superclass_closure(const Iri& cls) const {
  std::set<Iri> out;
  std::deque<Iri> frontier{cls};
  while (!frontier.empty()) {
    Iri current = frontier.front();
    frontier.pop_front();
    if (!out.insert(current).second) continue;
    auto it = superclasses_.find(current);
    if (it == superclasses_.end()) continue;
    for (const Iri& next : it->second) frontier.push_back(next);
  }
  return out;
}

std::set<Iri> KnowledgeGraph::direct_classes(const Iri& entity) const {
  std::set<Iri> out;
  for (const Triple* t : with_subject(entity)) {
    if (t->predicate != vocab::rdf_type) continue;
    if (const Iri* o = as_iri(t->object)) out.insert(*o);
  }
  return out;
}

std::set<Iri> KnowledgeGraph::class_of(const Iri& entity) const {
  std::set<Iri> out;
  for (const Iri& cls : direct_classes(entity)) {
    auto closure = superclass_closure(cls);
    out.insert(closure.begin(), closure.end());
  }
  return out;
}

std::set<Iri> KnowledgeGraph::instances_of(const Iri& cls) const {
  std::set<Iri> out;
  for (const auto& [candidate, _] : superclasses_) {
    if (!reaches(candidate, cls)) continue;
    auto it = instances_.find(candidate);
    if (it != instances_.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

std::set<Iri> KnowledgeGraph::predicates() const {
  std::set<Iri> out;
  for (const auto& [p, _] : by_predicate_) out.insert(p);
  return out;
}

void augment_same_as(KnowledgeGraph& graph, const std::vector<std::pair<Iri, Iri>>& links,
                     const KnowledgeGraph& external) {
  for (const auto& [local, ext] : links) {
    graph.add(local, vocab::same_as, ext);
    for (const Triple* t : external.with_subject(ext)) graph.add(*t);
  }
}

}  // namespace vkg::kg
