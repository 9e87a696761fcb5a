#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vkg::query {

/// A clause argument as written: a quoted entity/term or a bare name.
struct Arg {
  bool quoted = false;
  std::string text;

  bool operator==(const Arg&) const = default;
};

/// {search, 'seed', [class], Out, [k]}
struct SearchClause {
  std::string seed;
  std::optional<std::string> class_filter;
  std::optional<std::size_t> k;
  std::string out;

  bool operator==(const SearchClause&) const = default;
};

/// {list, relation, 'entity' | SetName, Out}
struct ListClause {
  std::string relation;
  Arg subject;
  std::string out;

  bool operator==(const ListClause&) const = default;
};

/// {infer, [rule], args..., Out}; the rule defaults to `overlap`.
struct InferClause {
  std::string rule;
  std::vector<Arg> args;
  std::string out;

  bool operator==(const InferClause&) const = default;
};

using Clause = std::variant<SearchClause, ListClause, InferClause>;

enum class Command { Search, List, Infer };
enum class Part { Vector, Graph };

Command command_of(const Clause& clause);
std::string_view command_name(Command command);
std::string_view part_name(Part part);
/// Search clauses go to the vector part; list and infer to the graph part.
Part part_of(const Clause& clause);

const std::string& output_of(const Clause& clause);
/// Set names read by the clause, in argument order.
std::vector<std::string> inputs_of(const Clause& clause);

struct QueryAst {
  std::vector<Clause> clauses;

  bool operator==(const QueryAst&) const = default;
};

inline constexpr std::string_view kDefaultRule = "overlap";

/// Parses the tuple syntax. Clauses are separated by `;` or `∪` and may be
/// wrapped in one outer pair of braces. Quotes: '..', "..", `..' and the
/// typographic single and double pairs. Throws SyntaxError, UnknownCommand,
/// UnboundSetName, DuplicateSetName.
QueryAst parse_query(std::string_view text);

/// Canonical text form; parse_query(print_query(ast)) == ast.
std::string print_query(const QueryAst& ast);
std::string print_clause(const Clause& clause);

/// Checks unique outputs and that every consumed set is produced by an
/// earlier clause. Throws UnboundSetName, DuplicateSetName.
void validate(const QueryAst& ast);

struct QueryPlan {
  /// Clause indices per stage; clauses within a stage are independent.
  std::vector<std::vector<std::size_t>> stages;
};

struct Decomposition {
  std::vector<std::size_t> vector_part;
  std::vector<std::size_t> graph_part;
  QueryPlan plan;
};

/// Routes clauses to parts and layers the dataflow DAG into stages.
Decomposition decompose(const QueryAst& ast);

}  // namespace vkg::query
