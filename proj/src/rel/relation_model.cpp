#include "vkg/rel/relation_model.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

namespace vkg::rel {

namespace {

using nlohmann::json;

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  return order;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector x(a.size() + b.size());
  x << a, b;
  return x;
}

struct Forward {
  Vector x;
  Vector pre;
  Vector hidden;
  Vector logits;
  Vector p;
};

Forward forward(const RelationModel& m, const Vector& a, const Vector& b) {
  const auto d = static_cast<Eigen::Index>(m.input_dimension);
  if (a.size() != d || b.size() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(d) + "-dimensional vectors, got " +
                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  Forward f;
  f.x = concat(a, b);
  f.pre = m.w1 * f.x + m.b1;
  if (m.config.activation == Activation::Relu) {
    f.hidden = f.pre.cwiseMax(0.0);
  } else {
    f.hidden = f.pre.array().tanh().matrix();
  }
  f.logits = m.w2 * f.hidden + m.b2;
  f.p = softmax(f.logits);
  return f;
}

double loss_of(const RelationModel& m, const Forward& f, std::size_t label) {
  if (m.config.loss == Loss::CrossEntropy) {
    const double shift = f.logits.maxCoeff();
    const double lse = shift + std::log((f.logits.array() - shift).exp().sum());
    return lse - f.logits(static_cast<Eigen::Index>(label));
  }
  Vector diff = f.p;
  diff(static_cast<Eigen::Index>(label)) -= 1.0;
  return diff.squaredNorm();
}

ModelGradient zero_gradient(const RelationModel& m) {
  return {Matrix::Zero(m.w1.rows(), m.w1.cols()), Vector::Zero(m.b1.size()),
          Matrix::Zero(m.w2.rows(), m.w2.cols()), Vector::Zero(m.b2.size())};
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorCode::DimensionMismatch, std::string("bad row count for ") + name);
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, std::string("bad column count for ") + name);
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vector vector_from(const json& j, Eigen::Index size, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw Error(ErrorCode::DimensionMismatch, std::string("bad length for ") + name);
  }
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

bool share_class(const kg::KnowledgeGraph& g, const Iri& a, const Iri& b) {
  const auto ca = g.direct_classes(a);
  for (const Iri& c : g.direct_classes(b)) {
    if (ca.count(c)) return true;
  }
  return false;
}

}  // namespace

std::optional<std::size_t> RelationSet::index_of(const Iri& relation) const {
  const auto it = std::find(relations.begin(), relations.end(), relation);
  if (it == relations.end()) return std::nullopt;
  return static_cast<std::size_t>(it - relations.begin());
}

void RelationSet::validate() const {
  if (relations.empty()) throw Error(ErrorCode::InvalidArgument, "relation set is empty");
  std::set<Iri> seen;
  for (const Iri& r : relations) {
    if (!seen.insert(r).second) {
      throw Error(ErrorCode::InvalidArgument, "relation " + r.render() + " repeats");
    }
  }
}

RelationSet default_relation_set() {
  return {{Iri{"uco", "hasProduct"}, Iri{"uco", "hasAttacker"}, Iri{"uco", "hasMeans"},
           Iri{"uco", "hasConsequences"}, Iri{"uco", "hasWeakness"}, Iri{"uco", "isUnderAttack"},
           Iri{"uco", "hasVulnerability"}}};
}

TrainingSetResult build_training_set(const core::VkgStore& store, const RelationSet& relations) {
  relations.validate();
  TrainingSetResult result;
  result.set.relations = relations;
  result.set.dimension = store.space().dimension();
  const auto& g = store.graph();
  for (const kg::Triple& t : g.triples()) {
    const auto label = relations.index_of(t.predicate);
    const Iri* object = kg::as_iri(t.object);
    if (!label || !object) continue;
    const auto ta = store.token_of(t.subject);
    const auto tb = store.token_of(*object);
    if (!ta || !tb) {
      ++result.skipped.unlinked;
      continue;
    }
    if (share_class(g, t.subject, *object)) {
      ++result.skipped.same_class;
      continue;
    }
    result.set.examples.push_back(
        {store.space().vector(*ta), store.space().vector(*tb), *label, t.subject, *object});
  }
  return result;
}

TrainingSet separable_training_set(const RelationSet& relations, std::size_t per_relation,
                                   std::size_t dimension, double noise, std::uint64_t seed) {
  relations.validate();
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(dimension);
  auto normal_vector = [&](double scale) {
    Vector v(d);
    for (auto& x : v) x = scale * rng.normal();
    return v;
  };
  std::vector<std::pair<Vector, Vector>> centers;
  for (std::size_t r = 0; r < relations.size(); ++r) centers.emplace_back(normal_vector(1.0), normal_vector(1.0));
  TrainingSet set{relations, dimension, {}};
  for (std::size_t r = 0; r < relations.size(); ++r) {
    for (std::size_t i = 0; i < per_relation; ++i) {
      const std::string tag = std::to_string(r) + "_" + std::to_string(i);
      set.examples.push_back({centers[r].first + normal_vector(noise), centers[r].second + normal_vector(noise),
                              r, Iri{"", "a" + tag}, Iri{"", "b" + tag}});
    }
  }
  return set;
}

std::string_view activation_name(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw Error(ErrorCode::InvalidConfig, "unknown activation '" + std::string(name) + "'");
}

std::string_view loss_name(Loss l) { return l == Loss::CrossEntropy ? "cross_entropy" : "mse"; }

Loss parse_loss(std::string_view name) {
  if (name == "cross_entropy") return Loss::CrossEntropy;
  if (name == "mse") return Loss::MeanSquaredError;
  throw Error(ErrorCode::InvalidConfig, "unknown loss '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (hidden == 0) throw Error(ErrorCode::InvalidConfig, "hidden size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
  }
  if (!(held_out >= 0.0 && held_out < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "held-out share must be in [0, 1)");
  }
}

Vector RelationModel::distribution(const Vector& a, const Vector& b) const {
  return forward(*this, a, b).p;
}

Prediction RelationModel::predict(const Vector& a, const Vector& b) const {
  Prediction out;
  out.distribution = distribution(a, b);
  Eigen::Index best = 0;
  out.confidence = out.distribution.maxCoeff(&best);
  out.relation = relations.relations[static_cast<std::size_t>(best)];
  return out;
}

bool RelationModel::operator==(const RelationModel& o) const {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return relations == o.relations && input_dimension == o.input_dimension && config == o.config &&
         same(w1, o.w1) && same(b1, o.b1) && same(w2, o.w2) && same(b2, o.b2) &&
         final_loss == o.final_loss && held_out_accuracy == o.held_out_accuracy &&
         train_count == o.train_count && test_count == o.test_count;
}

RelationModel RelationModel::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != relations.size()) {
    throw Error(ErrorCode::InvalidArgument, "permutation size differs from relation count");
  }
  RelationModel out = *this;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(order.at(i));
    if (order[i] >= relations.size()) throw Error(ErrorCode::InvalidArgument, "permutation index out of range");
    out.relations.relations[i] = relations.relations[order[i]];
    out.w2.row(static_cast<Eigen::Index>(i)) = w2.row(src);
    out.b2(static_cast<Eigen::Index>(i)) = b2(src);
  }
  out.relations.validate();
  return out;
}

RelationModel init_model(const RelationSet& relations, std::size_t dimension,
                         const ModelConfig& config) {
  relations.validate();
  config.validate();
  if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "input dimension must be positive");
  RelationModel m;
  m.relations = relations;
  m.input_dimension = dimension;
  m.config = config;
  Rng rng(config.seed);
  const auto in = static_cast<Eigen::Index>(2 * dimension);
  const auto h = static_cast<Eigen::Index>(config.hidden);
  const auto out = static_cast<Eigen::Index>(relations.size());
  auto fill = [&](Matrix& w, Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    w.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
    }
  };
  fill(m.w1, h, in);
  fill(m.w2, out, h);
  m.b1 = Vector::Zero(h);
  m.b2 = Vector::Zero(out);
  return m;
}

double example_loss(const RelationModel& model, const TrainingExample& example) {
  return loss_of(model, forward(model, example.a, example.b), example.label);
}

double accumulate_gradient(const RelationModel& model, const TrainingExample& example,
                           ModelGradient& grad) {
  const Forward f = forward(model, example.a, example.b);
  const auto y = static_cast<Eigen::Index>(example.label);
  Vector dz;
  if (model.config.loss == Loss::CrossEntropy) {
    dz = f.p;
    dz(y) -= 1.0;
  } else {
    Vector g = 2.0 * f.p;
    g(y) -= 2.0;
    dz = f.p.cwiseProduct((g.array() - f.p.dot(g)).matrix());
  }
  grad.w2.noalias() += dz * f.hidden.transpose();
  grad.b2 += dz;
  Vector dh = model.w2.transpose() * dz;
  if (model.config.activation == Activation::Relu) {
    dh = dh.cwiseProduct((f.pre.array() > 0.0).cast<double>().matrix());
  } else {
    dh = dh.cwiseProduct((1.0 - f.hidden.array().square()).matrix());
  }
  grad.w1.noalias() += dh * f.x.transpose();
  grad.b1 += dh;
  return loss_of(model, f, example.label);
}

double accuracy(const RelationModel& model, const std::vector<TrainingExample>& examples) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : examples) {
    Eigen::Index best = 0;
    model.distribution(ex.a, ex.b).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == ex.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

RelationModel train_model(const TrainingSet& set, const ModelConfig& config) {
  set.relations.validate();
  if (set.examples.size() < set.relations.size()) {
    throw Error(ErrorCode::TooFewExamples,
                std::to_string(set.examples.size()) + " examples for " +
                    std::to_string(set.relations.size()) + " relations");
  }
  RelationModel model = init_model(set.relations, set.dimension, config);
  // Separate stream for data order so the initialization is the same for
  // every training set of a given shape.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto order = shuffled(set.examples.size(), rng);
  const auto test_count = static_cast<std::size_t>(
      std::floor(config.held_out * static_cast<double>(set.examples.size())));
  std::vector<TrainingExample> test;
  std::vector<TrainingExample> training;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < test_count ? test : training).push_back(set.examples[order[i]]);
  }

  ModelGradient grad = zero_gradient(model);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t idx : shuffled(training.size(), rng)) {
      grad.w1.setZero();
      grad.b1.setZero();
      grad.w2.setZero();
      grad.b2.setZero();
      total += accumulate_gradient(model, training[idx], grad);
      model.w1 -= config.learning_rate * grad.w1;
      model.b1 -= config.learning_rate * grad.b1;
      model.w2 -= config.learning_rate * grad.w2;
      model.b2 -= config.learning_rate * grad.b2;
    }
    model.final_loss = total / static_cast<double>(training.size());
  }
  if (!model.w1.allFinite() || !model.w2.allFinite() || !model.b1.allFinite() ||
      !model.b2.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "training diverged; lower the learning rate");
  }
  model.train_count = training.size();
  model.test_count = test.size();
  model.held_out_accuracy = test.empty() ? accuracy(model, training) : accuracy(model, test);
  return model;
}

double gradient_check(const RelationModel& model, const std::vector<TrainingExample>& examples) {
  ModelGradient grad = zero_gradient(model);
  for (const auto& ex : examples) accumulate_gradient(model, ex, grad);
  auto total_loss = [&](const RelationModel& m) {
    double sum = 0.0;
    for (const auto& ex : examples) sum += example_loss(m, ex);
    return sum;
  };
  constexpr double h = 1e-4;
  double worst = 0.0;
  RelationModel probe = model;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = total_loss(probe);
    param = saved - h;
    const double down = total_loss(probe);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (Eigen::Index i = 0; i < probe.w1.size(); ++i) check(probe.w1.data()[i], grad.w1.data()[i]);
  for (Eigen::Index i = 0; i < probe.b1.size(); ++i) check(probe.b1(i), grad.b1(i));
  for (Eigen::Index i = 0; i < probe.w2.size(); ++i) check(probe.w2.data()[i], grad.w2.data()[i]);
  for (Eigen::Index i = 0; i < probe.b2.size(); ++i) check(probe.b2(i), grad.b2(i));
  return worst;
}

std::vector<Proposal> propose_triples(const RelationModel& model, const core::VkgStore& store,
                                      const std::vector<std::pair<Iri, Iri>>& pairs,
                                      double threshold) {
  std::vector<Proposal> out;
  const auto& g = store.graph();
  for (const auto& [a, b] : pairs) {
    const auto ta = store.token_of(a);
    const auto tb = store.token_of(b);
    if (!ta || !tb || a == b || share_class(g, a, b)) continue;
    const Prediction p = model.predict(store.space().vector(*ta), store.space().vector(*tb));
    if (p.confidence < threshold) continue;
    kg::Triple t{a, p.relation, b};
    if (g.contains(t)) continue;
    out.push_back({std::move(t), p.confidence});
  }
  return out;
}

kg::KnowledgeGraph proposals_graph(const std::vector<Proposal>& proposals) {
  kg::KnowledgeGraph g;
  std::size_t n = 0;
  for (const Proposal& p : proposals) {
    const Iri node{"vkg", "proposal_" + std::to_string(++n)};
    g.add(node, kg::vocab::rdf_type, kg::vocab::proposed);
    g.add(node, Iri{"vkg", "subject"}, p.triple.subject);
    g.add(node, Iri{"vkg", "predicate"}, p.triple.predicate);
    g.add(node, Iri{"vkg", "object"}, p.triple.object);
    g.add(node, Iri{"vkg", "confidence"}, kg::Literal{format_double(p.confidence)});
  }
  return g;
}

std::string model_to_json(const RelationModel& m) {
  json j;
  json rels = json::array();
  for (const Iri& r : m.relations.relations) rels.push_back(r.render());
  j["relations"] = rels;
  j["input_dimension"] = m.input_dimension;
  j["hidden"] = m.config.hidden;
  j["activation"] = activation_name(m.config.activation);
  j["loss"] = loss_name(m.config.loss);
  j["epochs"] = m.config.epochs;
  j["learning_rate"] = m.config.learning_rate;
  j["seed"] = m.config.seed;
  j["held_out"] = m.config.held_out;
  j["final_loss"] = m.final_loss;
  j["held_out_accuracy"] = m.held_out_accuracy;
  j["train_count"] = m.train_count;
  j["test_count"] = m.test_count;
  j["w1"] = matrix_json(m.w1);
  j["b1"] = vector_json(m.b1);
  j["w2"] = matrix_json(m.w2);
  j["b2"] = vector_json(m.b2);
  return j.dump(1) + "\n";
}

RelationModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    RelationModel m;
    for (const auto& r : j.at("relations")) m.relations.relations.push_back(kg::parse_iri(r.get<std::string>()));
    m.relations.validate();
    m.input_dimension = j.at("input_dimension").get<std::size_t>();
    m.config.hidden = j.at("hidden").get<std::size_t>();
    m.config.activation = parse_activation(j.at("activation").get<std::string>());
    m.config.loss = parse_loss(j.at("loss").get<std::string>());
    m.config.epochs = j.at("epochs").get<std::size_t>();
    m.config.learning_rate = j.at("learning_rate").get<double>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.config.held_out = j.at("held_out").get<double>();
    m.final_loss = j.at("final_loss").get<double>();
    m.held_out_accuracy = j.at("held_out_accuracy").get<double>();
    m.train_count = j.at("train_count").get<std::size_t>();
    m.test_count = j.at("test_count").get<std::size_t>();
    const auto h = static_cast<Eigen::Index>(m.config.hidden);
    const auto r = static_cast<Eigen::Index>(m.relations.size());
    m.w1 = matrix_from(j.at("w1"), h, static_cast<Eigen::Index>(2 * m.input_dimension), "w1");
    m.b1 = vector_from(j.at("b1"), h, "b1");
    m.w2 = matrix_from(j.at("w2"), r, h, "w2");
    m.b2 = vector_from(j.at("b2"), r, "b2");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("model JSON is incomplete: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const RelationModel& model) {
  write_text(path, model_to_json(model));
}

RelationModel load_model(const std::filesystem::path& path) { return model_from_json(read_text(path)); }

}  // namespace vkg::rel
