#pragma once

#include "vkg/core/vkg_store.hpp"
#include "vkg/query/engine.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vkg::alert {

using kg::Iri;
using kg::Term;
using kg::Triple;
using TimePoint = std::chrono::sys_seconds;

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDThh:mm:ss`, optional fractional seconds
/// and a `Z` or `+hh:mm` suffix. Throws InvalidArgument.
TimePoint parse_timestamp(std::string_view text);
/// `YYYY-MM-DDThh:mm:ssZ`.
std::string format_timestamp(TimePoint t);

/// A pattern position: a `?name` variable or a fixed term.
struct PatternTerm {
  std::string variable;
  Term term;

  bool is_variable() const noexcept { return !variable.empty(); }
  bool operator==(const PatternTerm&) const = default;
};

struct Pattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;

  bool operator==(const Pattern&) const = default;
};

/// Parses one position (`?v`, `a`, `prefix:local`, `<local>` or `"literal"`).
/// Throws MalformedPattern.
PatternTerm parse_pattern_term(std::string_view text);

/// Conjunctive rule: when every antecedent pattern matches and each bound
/// intelligence node is current, (product, vulnerability) is alerted.
struct Rule {
  std::string name;
  std::vector<Pattern> antecedent;
  std::string product_var;
  std::string vulnerability_var;
  int window_days = 30;

  /// Throws MalformedPattern when the antecedent is empty or a consequent
  /// variable does not occur in it.
  void validate() const;
  bool operator==(const Rule&) const = default;
};

struct Rulebook {
  std::vector<Rule> rules;

  const Rule* find(std::string_view name) const;
  bool operator==(const Rulebook&) const = default;
};

/// One rule, `current_vulnerability`: a current intelligence report names a
/// vulnerability that the graph asserts for a product.
Rulebook default_rulebook();

Rulebook parse_rulebook(const std::string& json_text);
std::string rulebook_to_json(const Rulebook& book);
Rulebook load_rulebook(const std::filesystem::path& path);

using Bindings = std::map<std::string, Term>;

struct Match {
  Bindings bindings;
  /// The graph triples matched by each antecedent pattern, in pattern order.
  std::vector<Triple> evidence;

  bool operator==(const Match&) const = default;
};

/// All variable bindings satisfying the antecedent, sorted by bindings and
/// duplicate-free. Intelligence nodes (typed intel:Intelligence) bound by a
/// match need an intel:hasTimestamp no older than the rule window; a node
/// without a timestamp is never current.
std::vector<Match> match_rule(const kg::KnowledgeGraph& graph, const Rule& rule, TimePoint now);

/// Latest intelligence timestamp in the graph, the default evaluation time.
std::optional<TimePoint> latest_intelligence(const kg::KnowledgeGraph& graph);

struct ProfileEntry {
  std::string name;
  std::string version;

  bool operator==(const ProfileEntry&) const = default;
};

struct SystemProfile {
  std::optional<ProfileEntry> os;
  std::vector<ProfileEntry> products;
  /// Analyst opt-in for similar-product alerts.
  bool similar_products = true;

  /// Normalized names of the OS and every product.
  std::vector<std::string> tokens() const;
  bool operator==(const SystemProfile&) const = default;
};

SystemProfile parse_profile(const std::string& json_text);
std::string profile_to_json(const SystemProfile& profile);
SystemProfile load_profile(const std::filesystem::path& path);

enum class Phase { Factual, SimilarProduct };
std::string_view phase_name(Phase phase);

struct Alert {
  Iri product;
  Iri vulnerability;
  Phase phase = Phase::Factual;
  double score = 1.0;
  std::string rule;
  std::vector<Triple> evidence;

  // Similar-product fields.
  std::optional<Iri> neighbor;
  double similarity = 0.0;
  std::size_t shared_dependencies = 0;
  std::size_t total_dependencies = 0;

  bool operator==(const Alert&) const = default;
};

/// Phase 1: rule matches whose product normalizes to a profile entry.
/// Sorted by (product, vulnerability, rule).
std::vector<Alert> factual_alerts(const core::VkgStore& store, const SystemProfile& profile,
                                  const Rulebook& rules, TimePoint now);

struct SimilarOptions {
  std::size_t k = 5;
  double threshold = 0.5;
};

/// cosine x (1 + shared) / (1 + total), capped just below 1.
double phase2_score(double similarity, std::size_t shared, std::size_t total);

struct SimilarResult {
  std::vector<Alert> alerts;
  std::vector<std::string> diagnostics;
};

/// Phase 2: for each profile product P, rule matches on its nearest products
/// N become alerts for P scored by phase2_score. Pairs already alerted in
/// `phase1` are skipped; per (P, vulnerability) the best score is kept.
/// Unlinked profile products are skipped with a diagnostic.
SimilarResult similar_product_alerts(const core::VkgStore& store, const SystemProfile& profile,
                                     const Rulebook& rules, const SimilarOptions& options,
                                     TimePoint now, const std::vector<Alert>& phase1);

struct AlertReport {
  std::vector<Alert> alerts;
  std::vector<std::string> diagnostics;
  TimePoint now;
};

/// Both phases; phase 2 only when the profile opts in.
AlertReport run_alerts(const core::VkgStore& store, const SystemProfile& profile,
                       const Rulebook& rules, const SimilarOptions& options,
                       std::optional<TimePoint> now = std::nullopt);

/// Shared uco:hasDependency objects of two programs.
std::size_t shared_dependency_count(const kg::KnowledgeGraph& graph, const Iri& a, const Iri& b);

/// `program<TAB>library` lines; blank lines and `#` comments are skipped.
/// Throws MalformedLine.
std::vector<Triple> parse_dependencies(std::string_view text);
std::vector<Triple> ingest_dependencies(const std::filesystem::path& path);

std::string alerts_to_text(const std::vector<Alert>& alerts);
/// Alerts as vkg:Alert resources (product, vulnerability, phase, score).
kg::KnowledgeGraph alerts_graph(const std::vector<Alert>& alerts);

/// Registers every rule of the book as an infer rule. The verdict is yes
/// when the rule matches a product named by the arguments (entities or set
/// members; any product when there are none); the witness holds the
/// matched vulnerabilities.
void register_rules(query::RuleTable& table, const Rulebook& rules, TimePoint now);

}  // namespace vkg::alert
