#include "vkg/embed/trainer.hpp"

#include "vkg/error.hpp"

#include <algorithm>
#include <cmath>

namespace vkg::embed {

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = index.find(std::string(word));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t cutoff) {
  std::map<std::string, std::uint64_t> counts;
  std::size_t total = 0;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      ++counts[token];
      ++total;
    }
  }
  if (total == 0) throw Error(ErrorCode::EmptyCorpus, "corpus contains no tokens");

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, count] : counts) {
    if (count >= cutoff) kept.emplace_back(word, count);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (auto& [word, count] : kept) {
    vocab.index.emplace(word, vocab.words.size());
    vocab.words.push_back(word);
    vocab.counts.push_back(count);
  }
  return vocab;
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::Cbow: return "cbow";
    case Mode::SkipGram: return "skipgram";
    case Mode::GraphAugmentedCbow: return "graph_augmented_cbow";
  }
  return "cbow";
}

Mode parse_mode(std::string_view name) {
  if (name == "cbow") return Mode::Cbow;
  if (name == "skipgram") return Mode::SkipGram;
  if (name == "graph_augmented_cbow") return Mode::GraphAugmentedCbow;
  throw Error(ErrorCode::InvalidConfig, "unknown training mode '" + std::string(name) + "'");
}

void TrainerConfig::validate() const {
  if (window < 1) throw Error(ErrorCode::InvalidConfig, "context window must be >= 1");
  if (dimension < 1) throw Error(ErrorCode::InvalidConfig, "dimension must be >= 1");
  if (negatives < 1) throw Error(ErrorCode::InvalidConfig, "negatives must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
}

namespace {

struct Projection {
  Vector hidden;
  double slots = 0.0;
};

bool graph_slot(const Example& example) {
  return example.graph_vector != nullptr && example.graph_vector->squaredNorm() > 0.0;
}

Projection project(const EmbeddingParams& params, const Example& example) {
  Projection p{Vector::Zero(params.input.cols()), 0.0};
  for (std::size_t in : example.inputs) {
    p.hidden += params.input.row(static_cast<Eigen::Index>(in)).transpose();
    p.slots += 1.0;
  }
  if (graph_slot(example)) {
    p.hidden += *example.graph_vector;
    p.slots += 1.0;
  }
  if (p.slots > 0.0) p.hidden /= p.slots;
  return p;
}

template <typename Fn>
void for_each_target(const Example& example, Fn&& fn) {
  fn(example.target, 1.0);
  for (std::size_t neg : example.negatives) {
    if (neg != example.target) fn(neg, 0.0);
  }
}

}  // namespace

double example_loss(const EmbeddingParams& params, const Example& example) {
  const Projection p = project(params, example);
  double loss = 0.0;
  for_each_target(example, [&](std::size_t word, double label) {
    const double score = params.output.row(static_cast<Eigen::Index>(word)).dot(p.hidden);
    loss -= label > 0.0 ? log_sigmoid(score) : log_sigmoid(-score);
  });
  return loss;
}

double accumulate_gradient(const EmbeddingParams& params, const Example& example,
                           EmbeddingParams& grad) {
  const Projection p = project(params, example);
  Vector grad_hidden = Vector::Zero(p.hidden.size());
  double loss = 0.0;
  for_each_target(example, [&](std::size_t word, double label) {
    const auto row = static_cast<Eigen::Index>(word);
    const double score = params.output.row(row).dot(p.hidden);
    loss -= label > 0.0 ? log_sigmoid(score) : log_sigmoid(-score);
    const double g = sigmoid(score) - label;
    grad.output.row(row) += g * p.hidden.transpose();
    grad_hidden += g * params.output.row(row).transpose();
  });
  if (p.slots > 0.0) {
    for (std::size_t in : example.inputs) {
      grad.input.row(static_cast<Eigen::Index>(in)) += grad_hidden.transpose() / p.slots;
    }
  }
  return loss;
}

double sgd_step(EmbeddingParams& params, const Example& example, double learning_rate) {
  const Projection p = project(params, example);
  Vector grad_hidden = Vector::Zero(p.hidden.size());
  std::vector<std::pair<Eigen::Index, double>> output_steps;
  double loss = 0.0;
  for_each_target(example, [&](std::size_t word, double label) {
    const auto row = static_cast<Eigen::Index>(word);
    const double score = params.output.row(row).dot(p.hidden);
    loss -= label > 0.0 ? log_sigmoid(score) : log_sigmoid(-score);
    const double g = sigmoid(score) - label;
    grad_hidden += g * params.output.row(row).transpose();
    output_steps.emplace_back(row, g);
  });
  for (const auto& [row, g] : output_steps) {
    params.output.row(row) -= learning_rate * g * p.hidden.transpose();
  }
  if (p.slots > 0.0) {
    const Vector step = (learning_rate / p.slots) * grad_hidden;
    for (std::size_t in : example.inputs) {
      params.input.row(static_cast<Eigen::Index>(in)) -= step.transpose();
    }
  }
  return loss;
}

namespace {

/// Cumulative unigram^0.75 table sampled by binary search.
class NoiseSampler {
 public:
  explicit NoiseSampler(const Vocabulary& vocab) {
    double acc = 0.0;
    cumulative_.reserve(vocab.size());
    for (std::uint64_t c : vocab.counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::vector<std::vector<std::size_t>> encode(const Corpus& corpus, const Vocabulary& vocab) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& token : sentence) {
      if (auto id = vocab.find(token)) ids.push_back(*id);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

/// Builds the examples for one sentence position in a fixed RNG order:
/// negatives are drawn per example, examples in context order.
void position_examples(const TrainerConfig& config, const std::vector<std::size_t>& ids,
                       std::size_t i, const std::vector<const Vector*>& graph_by_id,
                       const NoiseSampler& noise, Rng& rng, bool keep_empty,
                       std::vector<Example>& out) {
  const std::size_t lo = i >= config.window ? i - config.window : 0;
  const std::size_t hi = std::min(ids.size(), i + config.window + 1);
  std::vector<std::size_t> context;
  for (std::size_t j = lo; j < hi; ++j) {
    if (j != i) context.push_back(ids[j]);
  }
  auto draw = [&]() {
    std::vector<std::size_t> negs(config.negatives);
    for (auto& n : negs) n = noise.sample(rng);
    return negs;
  };

  if (config.mode == Mode::SkipGram) {
    for (std::size_t ctx : context) {
      Example ex;
      ex.inputs = {ids[i]};
      ex.target = ctx;
      ex.negatives = draw();
      out.push_back(std::move(ex));
    }
    return;
  }

  Example ex;
  ex.inputs = std::move(context);
  ex.target = ids[i];
  if (config.mode == Mode::GraphAugmentedCbow) ex.graph_vector = graph_by_id[ids[i]];
  const bool has_graph = ex.graph_vector != nullptr && ex.graph_vector->squaredNorm() > 0.0;
  if (ex.inputs.empty() && !has_graph && !keep_empty) return;
  ex.negatives = draw();
  out.push_back(std::move(ex));
}

std::vector<const Vector*> graph_lookup(const TrainerConfig& config, const Vocabulary& vocab,
                                        const TokenVectors* graph_vectors) {
  const bool augmented = config.mode == Mode::GraphAugmentedCbow;
  if (augmented && graph_vectors == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "graph_augmented_cbow requires graph vectors");
  }
  if (!augmented && graph_vectors != nullptr) {
    throw Error(ErrorCode::InvalidConfig,
                "graph vectors are only accepted in graph_augmented_cbow mode");
  }
  std::vector<const Vector*> by_id(vocab.size(), nullptr);
  if (!graph_vectors) return by_id;
  for (const auto& [token, v] : *graph_vectors) {
    if (static_cast<std::size_t>(v.size()) != config.dimension) {
      throw Error(ErrorCode::DimensionMismatch,
                  "graph vector for '" + token + "' has " + std::to_string(v.size()) +
                      " components, expected " + std::to_string(config.dimension));
    }
    if (auto id = vocab.find(token)) by_id[*id] = &v;
  }
  return by_id;
}

}  // namespace

TrainingSnapshot train(const TrainerConfig& config, const Corpus& corpus,
                       const TokenVectors* graph_vectors, const StepObserver& observer) {
  config.validate();
  const Vocabulary vocab = build_vocab(corpus, config.min_count);
  if (vocab.empty()) {
    throw Error(ErrorCode::EmptyVocab,
                "no token reaches min_count " + std::to_string(config.min_count));
  }
  const auto graph_by_id = graph_lookup(config, vocab, graph_vectors);
  const auto encoded = encode(corpus, vocab);
  const auto rows = static_cast<Eigen::Index>(vocab.size());
  const auto dims = static_cast<Eigen::Index>(config.dimension);

  Rng rng(config.seed);
  EmbeddingParams params{RowMatrix(rows, dims), RowMatrix::Zero(rows, dims)};
  const double scale = 0.5 / static_cast<double>(config.dimension);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dims; ++c) params.input(r, c) = rng.uniform(-scale, scale);
  }

  const NoiseSampler noise(vocab);
  std::size_t words_per_epoch = 0;
  for (const auto& ids : encoded) words_per_epoch += ids.size();
  const double total_words = static_cast<double>(std::max<std::size_t>(1, words_per_epoch * config.epochs));
  const double floor_rate = config.learning_rate * 1e-4;

  TrainingSnapshot snapshot{vec::VectorSpace(config.dimension), {}, config, true};
  std::size_t words_seen = 0;
  std::size_t step = 0;
  std::vector<Example> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_examples = 0;
    for (const auto& ids : encoded) {
      for (std::size_t i = 0; i < ids.size(); ++i, ++words_seen) {
        const double progress = static_cast<double>(words_seen) / total_words;
        const double rate = std::max(floor_rate, config.learning_rate * (1.0 - progress));
        batch.clear();
        position_examples(config, ids, i, graph_by_id, noise, rng, false, batch);
        for (const Example& ex : batch) {
          epoch_loss += sgd_step(params, ex, rate);
          ++epoch_examples;
          if (observer) observer(step, params);
          ++step;
        }
      }
    }
    snapshot.loss_curve.push_back(epoch_examples ? epoch_loss / static_cast<double>(epoch_examples)
                                                 : 0.0);
  }

  for (Eigen::Index r = 0; r < rows; ++r) {
    snapshot.space.add(vocab.words[static_cast<std::size_t>(r)], params.input.row(r).transpose());
  }
  return snapshot;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradientCheckReport gradient_check(const TrainerConfig& config, const Corpus& corpus,
                                   const TokenVectors* graph_vectors) {
  config.validate();
  const Vocabulary vocab = build_vocab(corpus, config.min_count);
  if (vocab.empty()) throw Error(ErrorCode::EmptyVocab, "gradient check needs a vocabulary");
  if (vocab.size() > 10 || config.dimension > 8) {
    throw Error(ErrorCode::InvalidArgument, "gradient check is limited to vocab <= 10, D <= 8");
  }
  const auto graph_by_id = graph_lookup(config, vocab, graph_vectors);
  const auto encoded = encode(corpus, vocab);
  const auto rows = static_cast<Eigen::Index>(vocab.size());
  const auto dims = static_cast<Eigen::Index>(config.dimension);

  Rng rng(config.seed);
  EmbeddingParams params{RowMatrix(rows, dims), RowMatrix(rows, dims)};
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dims; ++c) params.input(r, c) = rng.uniform(-0.5, 0.5);
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dims; ++c) params.output(r, c) = rng.uniform(-0.5, 0.5);
  }

  const NoiseSampler noise(vocab);
  std::vector<Example> examples;
  for (const auto& ids : encoded) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      position_examples(config, ids, i, graph_by_id, noise, rng, true, examples);
    }
  }

  auto total_loss = [&](const EmbeddingParams& p) {
    double loss = 0.0;
    for (const Example& ex : examples) loss += example_loss(p, ex);
    return loss;
  };

  EmbeddingParams grad{RowMatrix::Zero(rows, dims), RowMatrix::Zero(rows, dims)};
  GradientCheckReport report;
  for (const Example& ex : examples) report.loss += accumulate_gradient(params, ex, grad);
  report.examples = examples.size();

  constexpr double kStep = 1e-4;
  auto check = [&](RowMatrix& values, const RowMatrix& analytic) {
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double saved = values(r, c);
        values(r, c) = saved + kStep;
        const double plus = total_loss(params);
        values(r, c) = saved - kStep;
        const double minus = total_loss(params);
        values(r, c) = saved;
        const double numeric = (plus - minus) / (2.0 * kStep);
        report.max_relative_error =
            std::max(report.max_relative_error, relative_error(analytic(r, c), numeric));
        ++report.parameters;
      }
    }
  };
  check(params.input, grad.input);
  check(params.output, grad.output);
  return report;
}

}  // namespace vkg::embed
