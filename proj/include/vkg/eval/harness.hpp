#pragma once

#include "vkg/core/vkg_store.hpp"
#include "vkg/embed/trainer.hpp"
#include "vkg/ingest/synthetic.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vkg::eval {

using ingest::GroupKind;
using ingest::SimilarityGroup;
using kg::Iri;

enum class Model { GraphMatching, VectorOnly, VkgSearch };

std::string_view model_name(Model model);
/// graph-matching, vector-only or vkg-search. Throws InvalidArgument.
Model parse_model(std::string_view name);

/// Mean of precision@rank over the ranks holding relevant items; 0 when
/// none is retrieved. Throws EmptyRelevantSet, and InvalidArgument on a
/// repeated entry in `ranked`.
double average_precision(const std::vector<Iri>& ranked, const std::set<Iri>& relevant);

/// Graph-side similarity: outgoing (predicate, object) pairs shared with the
/// seed, ties broken by sharing a direct class, then by name. Structural
/// predicates (rdf:type, owl:sameAs, vkg:hasVector) are not counted.
std::vector<Iri> graph_matching_rank(const core::VkgStore& store, const Iri& seed, std::size_t k);

/// Ranked neighbours of `seed` under a model, seed excluded.
std::vector<Iri> rank(const core::VkgStore& store, Model model, const Iri& seed, std::size_t k);

struct EvalOptions {
  std::size_t k = 10;
  std::size_t threads = 1;
  /// Drop unlinked members instead of failing (used by the sweep).
  bool skip_unlinked = false;
};

struct GroupScore {
  std::string name;
  GroupKind kind = GroupKind::Product;
  double average_precision = 0.0;
  /// Seeds that contributed.
  std::size_t queries = 0;
};

struct LatencyStats {
  std::size_t count = 0;
  double median_us = 0.0;
  double mean_us = 0.0;
  double p90_us = 0.0;
  double min_us = 0.0;
  double max_us = 0.0;
};

LatencyStats latency_stats(std::vector<double> micros);

struct EvalReport {
  Model model = Model::VectorOnly;
  std::size_t k = 10;
  std::size_t dimension = 0;
  /// Vocabulary cutoff the store was trained with, when known.
  std::size_t min_count = 0;
  std::vector<GroupScore> groups;
  std::map<GroupKind, double> map_by_kind;
  double map = 0.0;
  LatencyStats latency;
  std::size_t skipped_members = 0;

  std::string to_text() const;
  std::string to_json() const;
};

/// For each group and each member as seed, ranks top-k and scores AP
/// against the other members. Group AP is the mean over seeds; MAP the mean
/// over groups. Groups left with fewer than two usable members are skipped.
/// Throws UnlinkedEntity (vector models) or InvalidArgument (graph model,
/// member absent from the graph) unless `skip_unlinked`.
EvalReport evaluate_model(const core::VkgStore& store, const std::vector<SimilarityGroup>& groups, Model model,
                          const EvalOptions& options = {});

struct LatencyReport {
  LatencyStats graph;
  LatencyStats vector;
  /// graph median / vector median.
  double speedup = 0.0;
  std::size_t repetitions = 0;

  std::string to_text() const;
};

/// Times graph-matching and vector-only ranking over every group member
/// (every linked entity when there are no groups). Throws InvalidArgument
/// when repetitions < 10.
LatencyReport latency_compare(const core::VkgStore& store, const std::vector<SimilarityGroup>& groups,
                              std::size_t k, std::size_t repetitions);

/// Groups file: {"groups": [{"name", "kind", "members": [...]}]} with members
/// as entity names or IRI forms.
std::vector<SimilarityGroup> parse_groups(const std::string& json_text);
std::string groups_to_json(const std::vector<SimilarityGroup>& groups);
std::vector<SimilarityGroup> load_groups(const std::filesystem::path& path);

/// Generated store for comparing the three models: each group's members are
/// placed around a shared centre, impostors of another class are placed
/// around the same centre, and the graph carries a weak, noisy copy of the
/// group structure.
struct EvalStoreConfig {
  std::size_t groups_per_kind = 8;
  std::size_t members = 4;
  std::size_t impostors = 2;
  std::size_t dimension = 32;
  double member_noise = 0.35;
  double impostor_noise = 0.35;
  /// Features per kind and edges per entity in the graph.
  std::size_t features = 30;
  std::size_t edges = 3;
  /// Chance that an edge points at one of the group's own signature features.
  double signature_rate = 0.35;
  std::uint64_t seed = 1;
};

struct EvalStore {
  core::VkgStore store;
  std::vector<SimilarityGroup> groups;
};

EvalStore synthetic_eval_store(const EvalStoreConfig& config);

/// One cell of the dimension x term-frequency grid.
struct SweepPoint {
  std::size_t dimension = 0;
  std::size_t min_count = 0;
  double map_vector = 0.0;
  double map_vkg = 0.0;
  std::size_t vocab_size = 0;
};

/// Trains one model per (dimension, min_count) on `corpus`, links it to
/// `graph` and evaluates vector-only and vkg-search.
std::vector<SweepPoint> run_sweep(const embed::Corpus& corpus, const kg::KnowledgeGraph& graph,
                                  const std::vector<SimilarityGroup>& groups,
                                  const std::vector<std::size_t>& dimensions,
                                  const std::vector<std::size_t>& min_counts, const embed::TrainerConfig& base,
                                  std::size_t k);

/// dimension,min_count,vocab_size,map_vector,map_vkg rows for plotting.
std::string sweep_to_csv(const std::vector<SweepPoint>& points);

}  // namespace vkg::eval
