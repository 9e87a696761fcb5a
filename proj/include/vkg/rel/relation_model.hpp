#pragma once

#include "vkg/core/vkg_store.hpp"
#include "vkg/math.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vkg::rel {

using kg::Iri;

/// Ordered relation vocabulary; the order defines the model's output indexing.
struct RelationSet {
  std::vector<Iri> relations;

  std::size_t size() const noexcept { return relations.size(); }
  std::optional<std::size_t> index_of(const Iri& relation) const;
  /// Throws InvalidArgument when empty or when a relation repeats.
  void validate() const;

  bool operator==(const RelationSet&) const = default;
};

/// The seven UCO relations used throughout the cyber fixtures.
RelationSet default_relation_set();

struct TrainingExample {
  Vector a;
  Vector b;
  std::size_t label = 0;
  Iri subject;
  Iri object;
};

struct TrainingSet {
  RelationSet relations;
  std::size_t dimension = 0;
  std::vector<TrainingExample> examples;
};

struct SkipReport {
  std::size_t unlinked = 0;
  std::size_t same_class = 0;
};

struct TrainingSetResult {
  TrainingSet set;
  SkipReport skipped;
};

/// One example per triple whose predicate is in `relations`, whose endpoints
/// are both linked, and whose endpoints share no direct class. Triples are
/// visited in graph order, so the result is deterministic.
TrainingSetResult build_training_set(const core::VkgStore& store, const RelationSet& relations);

/// Seeded clusters for a separable problem: relation r draws its pair from
/// (center_a[r] + noise, center_b[r] + noise) with unit-normal centers.
TrainingSet separable_training_set(const RelationSet& relations, std::size_t per_relation,
                                   std::size_t dimension, double noise, std::uint64_t seed);

enum class Activation { Relu, Tanh };
enum class Loss { CrossEntropy, MeanSquaredError };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);
std::string_view loss_name(Loss l);
Loss parse_loss(std::string_view name);

struct ModelConfig {
  std::size_t hidden = 32;
  Activation activation = Activation::Relu;
  Loss loss = Loss::CrossEntropy;
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  /// Share of examples held out for the accuracy report.
  double held_out = 1.0 / 3.0;

  /// Throws InvalidConfig.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct Prediction {
  Iri relation;
  double confidence = 0.0;
  Vector distribution;
};

/// concat(a, b) -> dense + activation -> softmax over the relation set.
struct RelationModel {
  RelationSet relations;
  std::size_t input_dimension = 0;
  ModelConfig config;
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  double final_loss = 0.0;
  double held_out_accuracy = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;

  /// Softmax output. Throws DimensionMismatch.
  Vector distribution(const Vector& a, const Vector& b) const;
  Prediction predict(const Vector& a, const Vector& b) const;

  /// Same network with the relation set reordered: relation i of the result
  /// is relation order[i] of this model.
  RelationModel permuted(const std::vector<std::size_t>& order) const;

  /// Exact equality of shape, parameters and metadata.
  bool operator==(const RelationModel& other) const;
};

/// Initial parameters for a training set's shape, drawn from the config seed.
RelationModel init_model(const RelationSet& relations, std::size_t dimension,
                         const ModelConfig& config);

/// Shuffles with the seed, holds out the configured share, runs per-example
/// SGD. Throws TooFewExamples when there are fewer examples than relations.
RelationModel train_model(const TrainingSet& set, const ModelConfig& config);

double example_loss(const RelationModel& model, const TrainingExample& example);

/// Gradients in the same layout as the model parameters.
struct ModelGradient {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

double accumulate_gradient(const RelationModel& model, const TrainingExample& example,
                           ModelGradient& grad);

/// Worst relative error between the analytic gradient and central
/// differences (step 1e-4) over every parameter, summed over `examples`.
double gradient_check(const RelationModel& model, const std::vector<TrainingExample>& examples);

/// Fraction of examples whose argmax equals their label.
double accuracy(const RelationModel& model, const std::vector<TrainingExample>& examples);

struct Proposal {
  kg::Triple triple;
  double confidence = 0.0;
};

/// Predicts a relation for each linked pair with differing classes and keeps
/// those at or above the threshold that are not already asserted. The store
/// is not modified.
std::vector<Proposal> propose_triples(const RelationModel& model, const core::VkgStore& store,
                                      const std::vector<std::pair<Iri, Iri>>& pairs,
                                      double threshold);

/// Proposals as reified vkg:Proposed resources (vkg:subject, vkg:predicate,
/// vkg:object, vkg:confidence), kept apart from asserted triples.
kg::KnowledgeGraph proposals_graph(const std::vector<Proposal>& proposals);

std::string model_to_json(const RelationModel& model);
RelationModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const RelationModel& model);
RelationModel load_model(const std::filesystem::path& path);

}  // namespace vkg::rel
