#pragma once

#include "vkg/core/vkg_store.hpp"
#include "vkg/error.hpp"
#include "vkg/query/ast.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vkg::query {

using kg::Iri;

struct Binding {
  std::string name;
  std::set<Iri> members;
  std::size_t producer = 0;
  /// Ranked hits for search bindings, best first.
  std::vector<core::EntityHit> ranked;

  bool operator==(const Binding&) const = default;
};

struct Verdict {
  std::string name;
  std::string rule;
  bool value = false;
  std::set<Iri> witness;
  std::string detail;

  bool operator==(const Verdict&) const = default;
};

/// Argument handed to an infer rule: a bound set or a resolved entity.
struct InferInput {
  bool is_set = false;
  std::string text;
  std::set<Iri> members;
  std::optional<Iri> entity;
};

using InferRule =
    std::function<Verdict(const core::VkgStore& store, const std::vector<InferInput>& args)>;

class RuleTable {
 public:
  /// Table holding the built-in `overlap` rule.
  static RuleTable with_builtins();

  void add(const std::string& name, InferRule rule);
  const InferRule* find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, InferRule> rules_;
};

/// yes iff the intersection of every set argument is non-empty; entity
/// arguments only name the subject of the verdict. Needs two sets.
Verdict infer_overlap(const std::vector<InferInput>& args);

struct TraceEntry {
  std::size_t clause = 0;
  Command command = Command::Search;
  Part part = Part::Vector;
  std::size_t stage = 0;
  double micros = 0.0;
  std::size_t result_size = 0;
  std::string note;
};

struct QueryResult {
  std::vector<Binding> bindings;
  std::vector<Verdict> verdicts;
  std::vector<TraceEntry> trace;

  const Binding* binding(std::string_view name) const;
  const Verdict* verdict(std::string_view name) const;

  std::string to_text() const;
  std::string to_json() const;
};

/// Error raised mid-query. Carries the trace of the clauses that finished.
class QueryFailure : public Error {
 public:
  QueryFailure(const Error& cause, QueryResult partial)
      : Error(cause.code(), std::string(cause.what()).substr(cause.name().size() + 2), cause.line()),
        partial_(std::move(partial)) {}
  const QueryResult& partial() const noexcept { return partial_; }

 private:
  QueryResult partial_;
};

struct EngineOptions {
  std::size_t default_k = 10;
  /// Worker threads per stage; 1 runs every clause inline.
  std::size_t threads = 1;
};

/// Executes parsed queries against a read-only store.
class QueryEngine {
 public:
  QueryEngine(const core::VkgStore& store, RuleTable rules = RuleTable::with_builtins(),
              EngineOptions options = {});

  /// Throws QueryFailure (with the partial result) on UnlinkedEntity,
  /// UnknownRule, UnknownClass or any rule error.
  QueryResult execute(const QueryAst& ast) const;
  QueryResult execute(std::string_view text) const { return execute(parse_query(text)); }

  /// Entity named by a query term: an IRI form, an exact corpus entity, or
  /// the unique entity whose normalized local name matches.
  std::optional<Iri> resolve_entity(std::string_view term) const;
  /// Predicate named by a list relation ("vulnerability" -> uco:hasVulnerability).
  Iri resolve_relation(std::string_view name) const;
  /// Class named by a search filter ("vulnerability" -> uco:Vulnerability).
  Iri resolve_class(std::string_view name) const;

 private:
  const core::VkgStore& store_;
  RuleTable rules_;
  EngineOptions options_;
  std::map<std::string, std::vector<Iri>> by_normalized_;
};

}  // namespace vkg::query
