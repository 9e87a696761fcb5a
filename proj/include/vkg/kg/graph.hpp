#pragma once

#include "vkg/kg/iri.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vkg::kg {

using PrefixTable = std::map<std::string, std::string>;

/// uco, intel, rdf, rdfs, xml, xsd, dbp, owl and vkg.
const PrefixTable& default_prefixes();

/// Set-semantics triple store with class typing.
///
/// Writes go through `add` while the graph is being built; after `seal()` the
/// graph is read-only and may be shared between threads. Indexes hold
/// pointers into the triple set, whose nodes are address-stable.
class KnowledgeGraph {
 public:
  KnowledgeGraph();
  explicit KnowledgeGraph(PrefixTable prefixes);

  KnowledgeGraph(const KnowledgeGraph& other);
  KnowledgeGraph& operator=(const KnowledgeGraph& other);
  KnowledgeGraph(KnowledgeGraph&&) noexcept = default;
  KnowledgeGraph& operator=(KnowledgeGraph&&) noexcept = default;

  const PrefixTable& prefixes() const noexcept { return prefixes_; }
  void declare_prefix(const std::string& label, const std::string& expansion);
  bool declared(const Iri& iri) const;

  /// Asserts a triple. Returns false when it was already present.
  /// Throws UndeclaredPrefix, CyclicSubclass, InvalidArgument, StoreSealed.
  bool add(const Triple& triple);
  bool add(const Iri& s, const Iri& p, const Term& o) { return add(Triple{s, p, o}); }
  bool remove(const Triple& triple);

  void seal() noexcept { sealed_ = true; }
  bool sealed() const noexcept { return sealed_; }

  bool contains(const Triple& triple) const { return triples_.count(triple) != 0; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  const std::set<Triple>& triples() const noexcept { return triples_; }

  const std::vector<const Triple*>& with_subject(const Iri& s) const;
  const std::vector<const Triple*>& with_object(const Iri& o) const;
  const std::vector<const Triple*>& with_predicate(const Iri& p) const;

  /// Direct objects of (s, p, ?).
  std::vector<Term> objects(const Iri& s, const Iri& p) const;

  /// IRI objects of (subject, relation, ?) over the owl:sameAs closure of
  /// `subject`. With relation rdf:type and a class as `subject`, returns the
  /// instances of that class instead (subclass closure included).
  std::set<Iri> list_objects(const Iri& relation, const Iri& subject) const;

  /// Direct classes plus transitive superclasses.
  std::set<Iri> class_of(const Iri& entity) const;
  std::set<Iri> direct_classes(const Iri& entity) const;
  std::set<Iri> instances_of(const Iri& cls) const;

  bool is_class(const Iri& iri) const { return superclasses_.count(iri) != 0; }
  /// class -> direct superclasses, for every known class.
  const std::map<Iri, std::set<Iri>>& classes() const noexcept { return superclasses_; }
  std::set<Iri> superclass_closure(const Iri& cls) const;

  /// Symmetric-transitive owl:sameAs closure, always containing `iri`.
  std::set<Iri> same_as_closure(const Iri& iri) const;

  /// Distinct predicates in use.
  std::set<Iri> predicates() const;

  /// Triple-set equality; prefix tables are not compared.
  bool operator==(const KnowledgeGraph& other) const { return triples_ == other.triples_; }

 private:
  void index(const Triple& stored);
  void rebuild_indexes();
  bool reaches(const Iri& from, const Iri& target) const;

  PrefixTable prefixes_;
  std::set<Triple> triples_;
  std::map<Iri, std::vector<const Triple*>> by_subject_;
  std::map<Iri, std::vector<const Triple*>> by_object_;
  std::map<Iri, std::vector<const Triple*>> by_predicate_;
  std::map<Iri, std::set<Iri>> superclasses_;
  std::map<Iri, std::set<Iri>> instances_;
  bool sealed_ = false;
};

/// Copies every triple whose subject is a linked external IRI into `graph`
/// and asserts (local, owl:sameAs, external) for each link.
void augment_same_as(KnowledgeGraph& graph, const std::vector<std::pair<Iri, Iri>>& links,
                     const KnowledgeGraph& external);

}  // namespace vkg::kg
