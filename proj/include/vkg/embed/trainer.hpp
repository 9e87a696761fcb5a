#pragma once

#include "vkg/kg/graph.hpp"
#include "vkg/math.hpp"
#include "vkg/vec/vector_space.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vkg::embed {

/// One sentence (document line or graph walk) per entry.
using Corpus = std::vector<std::vector<std::string>>;

/// Per-entity vectors keyed by vocabulary token.
using TokenVectors = std::map<std::string, Vector>;

struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;

  std::size_t size() const noexcept { return words.size(); }
  bool empty() const noexcept { return words.empty(); }
  std::optional<std::size_t> find(std::string_view word) const;

  std::unordered_map<std::string, std::size_t> index;
};

/// Tokens with frequency >= cutoff, sorted by descending frequency then
/// lexicographically. Throws EmptyCorpus when the corpus has no tokens.
Vocabulary build_vocab(const Corpus& corpus, std::size_t cutoff);

enum class Mode { Cbow, SkipGram, GraphAugmentedCbow };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

struct TrainerConfig {
  Mode mode = Mode::Cbow;
  std::size_t window = 7;
  std::size_t dimension = 100;
  std::size_t min_count = 1;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Input (projection) and output embedding tables, one row per vocabulary word.
struct EmbeddingParams {
  RowMatrix input;
  RowMatrix output;
};

/// One negative-sampling prediction: the average of the input rows (plus an
/// optional fixed graph vector) predicts `target` against sampled negatives.
/// A graph vector of zero norm does not occupy a slot in the average.
struct Example {
  std::vector<std::size_t> inputs;
  const Vector* graph_vector = nullptr;
  std::size_t target = 0;
  std::vector<std::size_t> negatives;
};

double example_loss(const EmbeddingParams& params, const Example& example);

/// Adds d(loss)/d(params) into `grad` (same shape as params) and returns the loss.
double accumulate_gradient(const EmbeddingParams& params, const Example& example,
                           EmbeddingParams& grad);

/// Plain gradient step on one example. Returns the loss before the step.
double sgd_step(EmbeddingParams& params, const Example& example, double learning_rate);

struct TrainingSnapshot {
  vec::VectorSpace space;
  std::vector<double> loss_curve;
  TrainerConfig config;
  /// Single-threaded training: output is a pure function of inputs and seed.
  bool deterministic = true;
};

/// Called after every gradient step with the running step index.
using StepObserver = std::function<void(std::size_t step, const EmbeddingParams& params)>;

/// Trains word vectors with negative sampling. `graph_vectors` is required
/// exactly when the mode is GraphAugmentedCbow; every vector must have the
/// configured dimension. Throws InvalidConfig, DimensionMismatch, EmptyCorpus,
/// EmptyVocab.
TrainingSnapshot train(const TrainerConfig& config, const Corpus& corpus,
                       const TokenVectors* graph_vectors = nullptr,
                       const StepObserver& observer = {});

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
  std::size_t examples = 0;
  double loss = 0.0;
};

/// Compares the analytic gradient of the summed negative-sampling loss with
/// central differences (step 1e-4) over every parameter. Parameters are drawn
/// uniformly from [-0.5, 0.5] with the config seed so that no gradient is
/// trivially zero. Requires vocabulary <= 10 and dimension <= 8.
GradientCheckReport gradient_check(const TrainerConfig& config, const Corpus& corpus,
                                   const TokenVectors* graph_vectors = nullptr);

/// Relative error used by every gradient check in the library:
/// |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

struct WalkCorpus {
  Corpus sentences;
  std::size_t walk_length = 0;
  std::size_t walks_per_entity = 0;
  /// Tokens that name graph nodes, as opposed to relation tokens.
  std::vector<std::string> entity_tokens;
};

/// Token for a graph node inside walks: normalized local name for corpus
/// entities, `prefix:local` otherwise.
std::string node_token(const kg::Iri& node);

/// Uniform random out-edge walks from every node. A walk alternates node and
/// relation tokens and stops early at nodes without out-edges.
WalkCorpus generate_walks(const kg::KnowledgeGraph& graph, std::size_t walk_length,
                          std::size_t walks_per_entity, std::uint64_t seed);

struct Rdf2VecConfig {
  std::size_t walk_length = 4;
  std::size_t walks_per_entity = 20;
  TrainerConfig trainer;
};

/// Walks the graph and trains skip-gram on the walks. Returns vectors for
/// node tokens only.
TokenVectors rdf2vec(const kg::KnowledgeGraph& graph, const Rdf2VecConfig& config);

}  // namespace vkg::embed
