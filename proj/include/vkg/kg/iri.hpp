#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <variant>

namespace vkg::kg {

/// A compact IRI: a declared prefix label plus a local name. An empty prefix
/// marks a corpus-derived entity, rendered in angle brackets (`<denial_of_service>`).
struct Iri {
  std::string prefix;
  std::string local;

  Iri() = default;
  Iri(std::string prefix_label, std::string local_name)
      : prefix(std::move(prefix_label)), local(std::move(local_name)) {}

  /// Corpus entity from a surface name; spaces become underscores.
  static Iri entity(std::string_view name);

  bool is_entity() const noexcept { return prefix.empty(); }
  std::string render() const;

  auto operator<=>(const Iri&) const = default;
  bool operator==(const Iri&) const = default;
};

struct Literal {
  std::string value;

  auto operator<=>(const Literal&) const = default;
  bool operator==(const Literal&) const = default;
};

/// Object position of a triple: an IRI or a plain string literal.
using Term = std::variant<Iri, Literal>;

std::string render(const Term& term);
inline bool is_iri(const Term& term) { return std::holds_alternative<Iri>(term); }
inline const Iri* as_iri(const Term& term) { return std::get_if<Iri>(&term); }

struct Triple {
  Iri subject;
  Iri predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;
};

std::string render(const Triple& triple);

/// Parses `<local>` or `prefix:local`. Throws Error(InvalidArgument) on
/// anything else.
Iri parse_iri(std::string_view text);

/// Parses an IRI form, the keyword `a`, or a double-quoted literal.
Term parse_term(std::string_view text);

/// True when `local` can be written back out in the given form.
bool valid_local(std::string_view local, bool entity_form);

/// Lowercases ASCII and replaces spaces with underscores. This is the single
/// token-normalization rule shared by linking, profiles, and co-reference.
std::string normalize_token(std::string_view name);

namespace vocab {
inline const Iri rdf_type{"rdf", "type"};
inline const Iri subclass_of{"rdfs", "subClassOf"};
inline const Iri same_as{"owl", "sameAs"};
inline const Iri has_vector{"vkg", "hasVector"};
inline const Iri intelligence{"intel", "Intelligence"};
inline const Iri intel_has_vulnerability{"intel", "hasVulnerability"};
inline const Iri intel_timestamp{"intel", "hasTimestamp"};
inline const Iri intel_source{"intel", "hasSource"};
inline const Iri has_vulnerability{"uco", "hasVulnerability"};
inline const Iri affects_product{"uco", "affectsProduct"};
inline const Iri has_attacker{"uco", "hasAttacker"};
inline const Iri has_means{"uco", "hasMeans"};
inline const Iri has_dependency{"uco", "hasDependency"};
inline const Iri product{"uco", "Product"};
inline const Iri vulnerability{"uco", "Vulnerability"};
inline const Iri proposed{"vkg", "Proposed"};
}  // namespace vocab

}  // namespace vkg::kg
