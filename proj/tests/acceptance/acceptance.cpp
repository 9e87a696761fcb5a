// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include "vkg/alert/alerts.hpp"
#include "vkg/app/pipeline.hpp"
#include "vkg/embed/trainer.hpp"
#include "vkg/error.hpp"
#include "vkg/eval/harness.hpp"
#include "vkg/ingest/synthetic.hpp"
#include "vkg/kg/turtle.hpp"
#include "vkg/query/engine.hpp"
#include "vkg/rel/relation_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using namespace vkg;

namespace {

// Tolerances and sizes.
constexpr double kQueryOneSeconds = 1.0;
constexpr int kMapRuns = 20;
constexpr int kMapWinsNeeded = 18;
constexpr std::size_t kMapMaxEntities = 1000;
constexpr double kMapSuiteSeconds = 300.0;
constexpr int kOracleStores = 1000;
constexpr std::size_t kOracleMaxTokens = 1000;
constexpr std::size_t kOracleMaxDims = 64;
constexpr double kOracleTolerance = 1e-6;
constexpr int kGradientInstances = 50;
constexpr double kGradientTolerance = 1e-4;
constexpr std::size_t kExamplesPerRelation = 200;
constexpr double kRelationAccuracy = 0.95;
constexpr int kSoftmaxInputs = 10000;
constexpr double kSoftmaxTolerance = 1e-6;
constexpr int kTurtleGraphs = 500;
constexpr std::size_t kTurtleMaxTriples = 200;
constexpr int kLinkCorpora = 6;
constexpr std::size_t kLatencyEntities = 1000;
constexpr std::size_t kLatencyQueries = 100;
constexpr int kAlertInstances = 100;
constexpr double kScoreTolerance = 1e-9;
constexpr std::size_t kWalkSteps = 100000;
constexpr double kStarSigmas = 3.0;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string failure;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) failure = what;
    pass = false;
  }
};

std::string fmt(const char* format, double a) {
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer), format, a);
  return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

kg::Iri E(const std::string& local) { return kg::Iri::entity(local); }
kg::Iri U(const std::string& local) { return kg::Iri{"uco", local}; }

// 1 ---------------------------------------------------------------------------

Outcome query_one() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  core::VkgStore store = ingest::cyber_fixture();
  const auto yes = query::QueryEngine(store).execute(ingest::kQueryOne);
  const auto* verdict = yes.verdict("alert");
  out.check(verdict != nullptr && verdict->value, "first run did not alert");
  out.check(verdict != nullptr && !verdict->witness.empty(), "empty witness");

  const kg::Iri mysql = E("MySQL");
  std::size_t removed = 0;
  if (verdict != nullptr) {
    for (const auto& v : verdict->witness) {
      removed += store.mutable_graph().remove({mysql, kg::vocab::has_vulnerability, v});
      store.mutable_graph().remove({v, kg::vocab::affects_product, mysql});
    }
  }
  const auto no = query::QueryEngine(store).execute(ingest::kQueryOne);
  const auto* flipped = no.verdict("alert");
  out.check(removed > 0, "witness was not asserted for MySQL");
  out.check(flipped != nullptr && !flipped->value, "verdict did not flip after removal");
  const double elapsed = seconds_since(start);
  out.check(elapsed < kQueryOneSeconds, "runtime over 1 s");

  std::string witness;
  if (verdict != nullptr) {
    for (const auto& w : verdict->witness) witness += (witness.empty() ? "" : ",") + w.render();
  }
  out.detail = "alert=yes witness {" + witness + "}, after removal alert=" +
               (flipped != nullptr && flipped->value ? "yes" : "no") + ", " + fmt("%.3f s", elapsed);
  return out;
}

// 2 ---------------------------------------------------------------------------

Outcome map_ordering() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  int vkg_wins = 0;
  int vector_wins = 0;
  std::size_t largest = 0;
  double sum_graph = 0, sum_vector = 0, sum_vkg = 0;
  for (int run = 0; run < kMapRuns; ++run) {
    eval::EvalStoreConfig config;
    config.seed = 1000 + static_cast<std::uint64_t>(run);
    const auto generated = eval::synthetic_eval_store(config);
    largest = std::max(largest, core::graph_entities(generated.store.graph()).size());
    eval::EvalOptions options;
    const double graph =
        eval::evaluate_model(generated.store, generated.groups, eval::Model::GraphMatching, options).map;
    const double vector =
        eval::evaluate_model(generated.store, generated.groups, eval::Model::VectorOnly, options).map;
    const double vkg = eval::evaluate_model(generated.store, generated.groups, eval::Model::VkgSearch, options).map;
    vkg_wins += vkg >= vector;
    vector_wins += vector > graph;
    sum_graph += graph;
    sum_vector += vector;
    sum_vkg += vkg;
  }
  const double elapsed = seconds_since(start);
  out.check(vkg_wins >= kMapWinsNeeded, "vkg-search >= vector-only in too few runs");
  out.check(vector_wins >= kMapWinsNeeded, "vector-only > graph-matching in too few runs");
  out.check(largest <= kMapMaxEntities, "a corpus exceeds 1000 entities");
  out.check(elapsed < kMapSuiteSeconds, "suite over 5 min");
  out.detail = "vkg>=vector " + std::to_string(vkg_wins) + "/20, vector>graph " + std::to_string(vector_wins) +
               "/20, mean MAP graph " + fmt("%.3f", sum_graph / kMapRuns) + " vector " +
               fmt("%.3f", sum_vector / kMapRuns) + " vkg " + fmt("%.3f", sum_vkg / kMapRuns) + ", max " +
               std::to_string(largest) + " entities, " + fmt("%.1f s", elapsed);
  return out;
}

// 3 ---------------------------------------------------------------------------

struct OracleHit {
  std::string token;
  double similarity;
};

// Plain full scan with the same tie rule: similarity descending, then token.
std::vector<OracleHit> oracle_top_k(const std::vector<std::string>& tokens, const std::vector<std::vector<double>>& rows,
                                    const std::vector<double>& query, std::size_t k, std::size_t skip) {
  double qq = 0;
  for (double x : query) qq += x * x;
  const double qn = std::sqrt(qq);
  std::vector<OracleHit> all;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == skip) continue;
    double dot = 0, nn = 0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      dot += rows[r][j] * query[j];
      nn += rows[r][j] * rows[r][j];
    }
    if (nn == 0) continue;
    all.push_back({tokens[r], std::clamp(dot / (qn * std::sqrt(nn)), -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.token < b.token;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

Outcome search_oracle() {
  Outcome out;
  Rng rng(3003);
  std::size_t queries = 0, compared = 0, tied = 0;
  double worst = 0;
  for (int s = 0; s < kOracleStores; ++s) {
    const bool integer = s % 3 == 0;
    const std::size_t n = 1 + rng.index(kOracleMaxTokens);
    const std::size_t d = integer ? 1 + rng.index(4) : 1 + rng.index(kOracleMaxDims);
    std::vector<std::string> tokens;
    std::vector<std::vector<double>> rows;
    vec::VectorSpace space(d);
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> row(d);
      if (!integer && r > 0 && rng.uniform() < 0.05) {
        row = rows[rng.index(rows.size())];
      } else {
        for (double& x : row) x = integer ? static_cast<double>(rng.index(5)) - 2.0 : rng.normal();
      }
      tokens.push_back("t" + std::to_string(rng.index(1u << 30)) + "_" + std::to_string(r));
      rows.push_back(row);
      space.add(tokens.back(), Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(d)));
    }
    for (int q = 0; q < 3; ++q) {
      const std::size_t k = 1 + rng.index(std::min<std::size_t>(n + 2, 50));
      std::vector<OracleHit> expected;
      vec::SearchResult got;
      const std::size_t self = rng.index(n);
      bool self_zero = true;
      for (double x : rows[self]) self_zero &= x == 0.0;
      if (q == 0 && !self_zero) {
        expected = oracle_top_k(tokens, rows, rows[self], k, self);
        got = vec::top_k(space, tokens[self], k, true);
      } else {
        std::vector<double> query(d);
        double norm = 0;
        while (norm == 0) {
          for (double& x : query) x = integer ? static_cast<double>(rng.index(5)) - 2.0 : rng.normal();
          norm = 0;
          for (double x : query) norm += x * x;
        }
        expected = oracle_top_k(tokens, rows, query, k, n);
        got = vec::top_k(space, Eigen::Map<const Vector>(query.data(), static_cast<Eigen::Index>(d)), k);
      }
      ++queries;
      out.check(got.neighbors.size() == expected.size(), "result size differs in store " + std::to_string(s));
      for (std::size_t i = 0; i < std::min(got.neighbors.size(), expected.size()); ++i) {
        ++compared;
        if (i > 0 && expected[i].similarity == expected[i - 1].similarity) ++tied;
        out.check(got.neighbors[i].token == expected[i].token, "order differs in store " + std::to_string(s));
        const double diff = std::abs(got.neighbors[i].similarity - expected[i].similarity);
        worst = std::max(worst, diff);
        out.check(diff <= kOracleTolerance, "similarity off in store " + std::to_string(s));
      }
    }
  }
  out.detail = std::to_string(kOracleStores) + " stores, " + std::to_string(queries) + " queries, " +
               std::to_string(compared) + " ranks (" + std::to_string(tied) + " tied), max |diff| " +
               fmt("%.2e", worst);
  return out;
}

// 4 ---------------------------------------------------------------------------

Outcome trainer_gradients() {
  Outcome out;
  Rng rng(4004);
  double worst = 0;
  std::size_t identity_steps = 0;
  for (int instance = 0; instance < kGradientInstances; ++instance) {
    const std::size_t vocab = 2 + rng.index(9);
    embed::Corpus corpus;
    const std::size_t sentences = 1 + rng.index(4);
    for (std::size_t s = 0; s < sentences; ++s) {
      std::vector<std::string> sentence;
      const std::size_t len = 2 + rng.index(7);
      for (std::size_t i = 0; i < len; ++i) sentence.push_back("w" + std::to_string(rng.index(vocab)));
      corpus.push_back(sentence);
    }
    embed::TrainerConfig config;
    config.dimension = 1 + rng.index(8);
    config.window = 1 + rng.index(3);
    config.negatives = 1 + rng.index(4);
    config.epochs = 1 + rng.index(2);
    config.seed = 50 + static_cast<std::uint64_t>(instance);

    embed::TokenVectors graph;
    embed::TokenVectors zeros;
    for (const auto& w : embed::build_vocab(corpus, 1).words) {
      zeros[w] = Vector::Zero(static_cast<Eigen::Index>(config.dimension));
      if (rng.uniform() < 0.7) {
        Vector g(static_cast<Eigen::Index>(config.dimension));
        for (Eigen::Index j = 0; j < g.size(); ++j) g[j] = 0.5 * rng.normal();
        graph[w] = g;
      }
    }

    config.mode = embed::Mode::Cbow;
    const auto cbow = embed::gradient_check(config, corpus);
    config.mode = embed::Mode::GraphAugmentedCbow;
    const auto augmented = embed::gradient_check(config, corpus, &graph);
    worst = std::max({worst, cbow.max_relative_error, augmented.max_relative_error});
    out.check(cbow.examples > 0 && augmented.examples > 0, "gradient check saw no examples");
    out.check(cbow.max_relative_error <= kGradientTolerance, "cbow gradient off in instance " + std::to_string(instance));
    out.check(augmented.max_relative_error <= kGradientTolerance,
              "graph_augmented_cbow gradient off in instance " + std::to_string(instance));

    config.mode = embed::Mode::Cbow;
    std::vector<embed::EmbeddingParams> plain;
    embed::train(config, corpus, nullptr,
                 [&](std::size_t, const embed::EmbeddingParams& p) { plain.push_back(p); });
    config.mode = embed::Mode::GraphAugmentedCbow;
    std::size_t steps = 0;
    bool identical = true;
    embed::train(config, corpus, &zeros, [&](std::size_t step, const embed::EmbeddingParams& p) {
      ++steps;
      identical &= step < plain.size() && plain[step].input == p.input && plain[step].output == p.output;
    });
    identity_steps += steps;
    out.check(identical && steps == plain.size(), "zero-graph identity broken in instance " + std::to_string(instance));
  }
  out.detail = std::to_string(kGradientInstances) + " instances x {cbow, graph_augmented_cbow}, max rel err " +
               fmt("%.2e", worst) + ", zero-graph identity over " + std::to_string(identity_steps) + " steps";
  return out;
}

// 5 ---------------------------------------------------------------------------

Outcome relation_predictor() {
  Outcome out;
  const auto relations = rel::default_relation_set();
  const auto set = rel::separable_training_set(relations, kExamplesPerRelation, 8, 0.2, 5005);
  const auto model = rel::train_model(set, rel::ModelConfig{});
  out.check(model.held_out_accuracy >= kRelationAccuracy, "held-out accuracy below 0.95");

  Rng rng(5006);
  double worst = 0;
  for (int i = 0; i < kSoftmaxInputs; ++i) {
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    Vector a(8), b(8);
    for (Eigen::Index j = 0; j < 8; ++j) {
      a[j] = scale * rng.normal();
      b[j] = scale * rng.normal();
    }
    const Vector p = model.distribution(a, b);
    const double err = std::abs(p.sum() - 1.0);
    worst = std::max(worst, err);
    out.check(p.allFinite() && (p.array() >= 0.0).all(), "softmax produced a negative or non-finite entry");
    out.check(err <= kSoftmaxTolerance, "softmax sum off");
  }
  out.detail = std::to_string(relations.size()) + " relations x " + std::to_string(kExamplesPerRelation) +
               " examples, held-out accuracy " + fmt("%.4f", model.held_out_accuracy) + " on " +
               std::to_string(model.test_count) + ", softmax max |sum-1| " + fmt("%.2e", worst) + " over " +
               std::to_string(kSoftmaxInputs) + " inputs";
  return out;
}

// 6 ---------------------------------------------------------------------------

std::string random_name(Rng& rng, bool entity_form) {
  static const std::string plain = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-";
  static const std::string extra = ".()'/%+!:=@";
  static const std::string entity_only = ";,#";
  std::string name;
  const std::size_t len = 1 + rng.index(12);
  for (std::size_t i = 0; i < len; ++i) {
    const double u = rng.uniform();
    if (u < 0.85) {
      name += plain[rng.index(plain.size())];
    } else if (u < 0.95 || !entity_form) {
      name += extra[rng.index(extra.size())];
    } else {
      name += entity_only[rng.index(entity_only.size())];
    }
  }
  if (!entity_form) {
    while (!name.empty() && name.back() == '.') name.pop_back();
    if (name.empty()) name = "x";
  }
  return name;
}

std::string random_literal(Rng& rng) {
  static const std::vector<std::string> pieces = {"a", "Z", "9", " ", "\"", "\\", "\n", "\t", "\r", ";", ".",
                                                  "#", "<", ">", "é", "日本", "2017-03-01", ":", ","};
  std::string value;
  const std::size_t len = rng.index(8);
  for (std::size_t i = 0; i < len; ++i) value += pieces[rng.index(pieces.size())];
  return value;
}

kg::KnowledgeGraph random_graph(Rng& rng) {
  kg::KnowledgeGraph g;
  std::vector<std::string> prefixes = {"uco", "intel", "dbp", "owl"};
  for (int p = 0; p < 2; ++p) {
    const std::string label = "p" + std::to_string(rng.index(1000));
    g.declare_prefix(label, "http://example.org/" + label + "#");
    prefixes.push_back(label);
  }
  auto iri = [&](bool allow_entity) {
    if (allow_entity && rng.uniform() < 0.5) return kg::Iri{"", random_name(rng, true)};
    return kg::Iri{prefixes[rng.index(prefixes.size())], random_name(rng, false)};
  };
  std::vector<kg::Iri> nodes;
  for (int i = 0; i < 25; ++i) nodes.push_back(iri(true));
  std::vector<kg::Iri> predicates{kg::vocab::rdf_type};
  for (int i = 0; i < 6; ++i) predicates.push_back(iri(false));
  const std::size_t count = rng.index(kTurtleMaxTriples + 1);
  for (std::size_t attempt = 0; g.size() < count && attempt < 4 * kTurtleMaxTriples; ++attempt) {
    const kg::Iri& s = nodes[rng.index(nodes.size())];
    const kg::Iri& p = predicates[rng.index(predicates.size())];
    kg::Term o = rng.uniform() < 0.3 ? kg::Term{kg::Literal{random_literal(rng)}} : kg::Term{nodes[rng.index(nodes.size())]};
    if (p == kg::vocab::rdf_type && !std::holds_alternative<kg::Iri>(o)) continue;
    g.add(s, p, o);
  }
  return g;
}

std::vector<kg::Triple> example_document_triples() {
  const kg::Iri ie = E("Microsoft_Internet_Explorer");
  const kg::Iri eac = E("execute_arbitrary_code");
  const kg::Iri dos = E("denial_of_service");
  const kg::Iri intel = E("Int3482758232");
  const kg::Iri means = E("crafted_web_site");
  const kg::Iri attackers = E("remote_attackers");
  const kg::Iri type = kg::vocab::rdf_type;
  const kg::Iri same = kg::vocab::same_as;
  return {
      {intel, type, kg::vocab::intelligence},
      {intel, kg::vocab::intel_has_vulnerability, eac},
      {intel, kg::vocab::intel_has_vulnerability, dos},
      {means, type, U("Means")},
      {attackers, type, U("Attacker")},
      {ie, type, kg::vocab::product},
      {ie, kg::vocab::has_vulnerability, eac},
      {ie, kg::vocab::has_vulnerability, dos},
      {ie, same, kg::Iri{"dbp", "Internet_Explorer"}},
      {eac, type, kg::vocab::vulnerability},
      {eac, kg::vocab::affects_product, ie},
      {eac, kg::vocab::has_attacker, attackers},
      {eac, kg::vocab::has_means, means},
      {eac, same, kg::Iri{"dbp", "Arbitrary_code_execution"}},
      {dos, type, kg::vocab::vulnerability},
      {dos, kg::vocab::affects_product, ie},
      {dos, kg::vocab::has_attacker, attackers},
      {dos, kg::vocab::has_means, means},
      {dos, same, kg::Iri{"dbp", "Denial-of-service_attack"}},
  };
}

Outcome turtle_round_trip() {
  Outcome out;
  Rng rng(6006);
  std::size_t triples = 0;
  for (int i = 0; i < kTurtleGraphs; ++i) {
    const kg::KnowledgeGraph g = random_graph(rng);
    triples += g.size();
    const std::string once = kg::serialize_turtle(g);
    std::string twice;
    try {
      const kg::KnowledgeGraph back = kg::parse_turtle(once);
      out.check(back == g, "parse(serialize(g)) != g for graph " + std::to_string(i));
      twice = kg::serialize_turtle(back);
    } catch (const Error& e) {
      out.check(false, "graph " + std::to_string(i) + " failed to reparse: " + e.what());
    }
    out.check(kg::serialize_turtle(g) == once, "serialization not deterministic for graph " + std::to_string(i));
    out.check(twice == once, "re-serialization differs for graph " + std::to_string(i));
  }
  const kg::KnowledgeGraph doc = kg::load_turtle(std::string(VKG_TEST_DATA_DIR) + "/example_rdf.ttl");
  const auto listed = example_document_triples();
  const std::set<kg::Triple> expected(listed.begin(), listed.end());
  out.check(doc.triples() == expected, "example document does not parse to its listed triples");
  out.detail = std::to_string(kTurtleGraphs) + " random graphs (" + std::to_string(triples) +
               " triples) round-trip byte-stable, example document " + std::to_string(doc.size()) + "/" +
               std::to_string(expected.size()) + " triples";
  return out;
}

// 7 ---------------------------------------------------------------------------

Outcome link_integrity() {
  Outcome out;
  std::size_t checked = 0, not_in_vocab = 0;
  const embed::Mode modes[] = {embed::Mode::Cbow, embed::Mode::SkipGram, embed::Mode::GraphAugmentedCbow};
  for (int run = 0; run < kLinkCorpora; ++run) {
    ingest::SyntheticCorpusConfig cc;
    cc.seed = 700 + static_cast<std::uint64_t>(run);
    cc.documents = 40;
    cc.vendors = 2 + static_cast<std::size_t>(run);
    const auto corpus = ingest::synthetic_corpus(cc);
    app::BuildConfig bc;
    bc.trainer.mode = modes[run % 3];
    bc.trainer.dimension = 16;
    bc.trainer.epochs = 2;
    bc.trainer.min_count = 1 + static_cast<std::size_t>(run % 2) * 4;
    bc.trainer.seed = cc.seed;
    const auto result = app::build_store(corpus.documents, corpus.gazetteer, corpus.patterns, bc);
    const auto& graph = result.store.graph();

    std::map<kg::Iri, std::string> rebuilt;
    std::map<kg::Iri, std::size_t> vector_triples;
    for (const auto& t : graph.triples()) {
      if (t.predicate != kg::vocab::has_vector) continue;
      ++vector_triples[t.subject];
      if (const auto* lit = std::get_if<kg::Literal>(&t.object)) rebuilt[t.subject] = lit->value;
    }
    out.check(rebuilt == result.store.links(), "reconstructed link table differs in run " + std::to_string(run));

    for (const auto& [phrase, entry] : corpus.gazetteer.entries) {
      if (!graph.contains({entry.entity, kg::vocab::rdf_type, entry.cls})) continue;
      const std::string token = kg::normalize_token(entry.entity.local);
      if (!result.store.space().contains(token)) {
        ++not_in_vocab;
        continue;
      }
      ++checked;
      out.check(vector_triples[entry.entity] == 1, entry.entity.render() + " lacks exactly one hasVector triple");
      out.check(rebuilt[entry.entity] == token, entry.entity.render() + " links to the wrong token");
    }
  }
  out.detail = std::to_string(kLinkCorpora) + " builds, " + std::to_string(checked) +
               " recognized in-vocabulary entities each with one hasVector triple (" + std::to_string(not_in_vocab) +
               " below the frequency cutoff), link tables equal";
  return out;
}

// 8 ---------------------------------------------------------------------------

Outcome latency_direction() {
  Outcome out;
  eval::EvalStoreConfig config;
  config.groups_per_kind = 40;
  config.features = 100;
  config.seed = 8008;
  const auto generated = eval::synthetic_eval_store(config);
  const std::size_t entities = core::graph_entities(generated.store.graph()).size();
  std::size_t seeds = 0;
  for (const auto& g : generated.groups) seeds += g.members.size();
  const std::size_t reps = std::max<std::size_t>(10, (kLatencyQueries + seeds - 1) / seeds);
  const auto report = eval::latency_compare(generated.store, generated.groups, 10, reps);
  out.check(entities >= kLatencyEntities, "store has fewer than 1000 entities");
  out.check(report.vector.count >= kLatencyQueries, "fewer than 100 queries");
  out.check(report.vector.median_us < report.graph.median_us, "vector search is not faster");
  out.detail = std::to_string(entities) + " entities, " + std::to_string(report.vector.count) +
               " queries, median graph " + fmt("%.1f us", report.graph.median_us) + " vs vector " +
               fmt("%.1f us", report.vector.median_us) + ", ratio " + fmt("%.1fx", report.speedup);
  return out;
}

// 9 ---------------------------------------------------------------------------

struct AlertInstance {
  core::VkgStore store;
  alert::SystemProfile profile;
  alert::Rulebook rules;
  alert::SimilarOptions options;
};

AlertInstance random_alert_instance(Rng& rng) {
  kg::KnowledgeGraph g;
  const std::size_t products = 3 + rng.index(10);
  const std::size_t vulns = 3 + rng.index(10);
  const std::size_t reports = 1 + rng.index(5);
  const std::size_t libraries = 1 + rng.index(6);
  auto product = [](std::size_t i) { return E("Product_" + std::to_string(i)); };
  auto vuln = [](std::size_t i) { return E("vuln_" + std::to_string(i)); };
  for (std::size_t v = 0; v < vulns; ++v) {
    g.add(vuln(v), kg::vocab::rdf_type, kg::vocab::vulnerability);
    if (rng.uniform() < 0.5) g.add(vuln(v), kg::vocab::has_attacker, E("attacker_" + std::to_string(rng.index(3))));
  }
  for (std::size_t p = 0; p < products; ++p) {
    g.add(product(p), kg::vocab::rdf_type, kg::vocab::product);
    for (std::size_t v = 0; v < vulns; ++v) {
      if (rng.uniform() < 0.25) g.add(product(p), kg::vocab::has_vulnerability, vuln(v));
    }
    for (std::size_t l = 0; l < libraries; ++l) {
      if (rng.uniform() < 0.4) g.add(product(p), kg::vocab::has_dependency, E("lib" + std::to_string(l)));
    }
  }
  const auto base = alert::parse_timestamp("2017-06-01");
  for (std::size_t r = 0; r < reports; ++r) {
    const kg::Iri node = E("Int" + std::to_string(r));
    g.add(node, kg::vocab::rdf_type, kg::vocab::intelligence);
    if (rng.uniform() < 0.9) {
      const auto when = base - std::chrono::days(static_cast<int>(rng.index(90)));
      g.add(node, kg::vocab::intel_timestamp, kg::Literal{alert::format_timestamp(when)});
    }
    for (std::size_t v = 0; v < vulns; ++v) {
      if (rng.uniform() < 0.3) g.add(node, kg::vocab::intel_has_vulnerability, vuln(v));
    }
  }

  const std::size_t dim = 2 + rng.index(6);
  vec::VectorSpace space(dim);
  for (std::size_t p = 0; p < products; ++p) {
    if (rng.uniform() < 0.1) continue;
    Vector x(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.normal();
    space.add(kg::normalize_token(product(p).local), x);
  }

  AlertInstance inst{core::link_entities(std::move(g), std::move(space)).store, {}, {}, {}};
  for (std::size_t p = 0; p < products; ++p) {
    if (rng.uniform() < 0.4) inst.profile.products.push_back({product(p).local, "1." + std::to_string(p)});
  }
  if (rng.uniform() < 0.5) inst.profile.os = alert::ProfileEntry{product(rng.index(products)).local, ""};
  if (rng.uniform() < 0.2) inst.profile.products.push_back({"Not_In_Graph", ""});
  inst.profile.similar_products = rng.uniform() < 0.85;

  inst.rules = alert::default_rulebook();
  inst.rules.rules[0].window_days = 5 + static_cast<int>(rng.index(90));
  if (rng.uniform() < 0.5) {
    alert::Rule attacked;
    attacked.name = "attacked_vulnerability";
    auto term = alert::parse_pattern_term;
    attacked.antecedent = {
        {term("?i"), term("rdf:type"), term("intel:Intelligence")},
        {term("?i"), term("intel:hasVulnerability"), term("?v")},
        {term("?v"), term("uco:hasAttacker"), term("?a")},
        {term("?p"), term("uco:hasVulnerability"), term("?v")},
    };
    attacked.product_var = "p";
    attacked.vulnerability_var = "v";
    attacked.window_days = 5 + static_cast<int>(rng.index(90));
    inst.rules.rules.push_back(attacked);
  }
  inst.options.k = 1 + rng.index(5);
  inst.options.threshold = rng.uniform(-0.5, 0.9);
  return inst;
}

Outcome alert_soundness() {
  Outcome out;
  Rng rng(9009);
  std::size_t factual = 0, similar = 0;
  double worst = 0;
  for (int i = 0; i < kAlertInstances; ++i) {
    const AlertInstance inst = random_alert_instance(rng);
    const auto& graph = inst.store.graph();
    const auto first = alert::run_alerts(inst.store, inst.profile, inst.rules, inst.options);
    const auto second = alert::run_alerts(inst.store, inst.profile, inst.rules, inst.options);
    const std::string at = " in instance " + std::to_string(i);
    out.check(first.alerts == second.alerts, "alerts differ between runs" + at);

    const auto tokens = inst.profile.tokens();
    for (const auto& a : first.alerts) {
      for (const auto& t : a.evidence) out.check(graph.contains(t), "evidence triple not in graph" + at);
      if (a.phase == alert::Phase::Factual) {
        ++factual;
        out.check(std::find(tokens.begin(), tokens.end(), kg::normalize_token(a.product.local)) != tokens.end(),
                  "phase-1 product outside the profile" + at);
        continue;
      }
      ++similar;
      if (!a.neighbor) {
        out.check(false, "phase-2 alert without a neighbour" + at);
        continue;
      }
      // Recompute from the evidence: dependency pairs shared with the neighbour.
      std::set<kg::Term> own, theirs;
      for (const auto& t : a.evidence) {
        if (t.predicate != kg::vocab::has_dependency) continue;
        if (t.subject == a.product) own.insert(t.object);
        if (t.subject == *a.neighbor) theirs.insert(t.object);
      }
      std::size_t shared = 0;
      for (const auto& d : own) shared += theirs.count(d);
      const std::size_t total = graph.objects(a.product, kg::vocab::has_dependency).size();
      const Vector x = inst.store.space().vector(*inst.store.token_of(a.product));
      const Vector y = inst.store.space().vector(*inst.store.token_of(*a.neighbor));
      const double cosine = x.dot(y) / (x.norm() * y.norm());
      const double score = std::min(cosine * static_cast<double>(1 + shared) / static_cast<double>(1 + total),
                                    std::nextafter(1.0, 0.0));
      worst = std::max(worst, std::abs(score - a.score));
      out.check(std::abs(score - a.score) <= kScoreTolerance, "phase-2 score does not recompute" + at);
      out.check(shared == a.shared_dependencies && total == a.total_dependencies,
                "phase-2 dependency counts differ" + at);
    }
  }
  out.check(factual > 0 && similar > 0, "instances exercised only one phase");
  out.detail = std::to_string(kAlertInstances) + " instances, " + std::to_string(factual) + " factual and " +
               std::to_string(similar) + " similar-product alerts, max score error " + fmt("%.2e", worst);
  return out;
}

// 10 --------------------------------------------------------------------------

Outcome walk_validity() {
  Outcome out;
  Rng rng(10010);
  std::size_t steps = 0, graphs = 0;
  while (steps < kWalkSteps) {
    ++graphs;
    kg::KnowledgeGraph g;
    const std::size_t nodes = 2 + rng.index(40);
    const std::size_t edges = rng.index(4 * nodes);
    std::vector<kg::Iri> predicates = {U("r0"), U("r1"), kg::Iri{"dbp", "link"}, kg::vocab::same_as};
    for (std::size_t e = 0; e < edges; ++e) {
      const kg::Iri s = E("N" + std::to_string(rng.index(nodes)));
      if (rng.uniform() < 0.1) {
        g.add(s, kg::vocab::rdf_type, U("C" + std::to_string(rng.index(3))));
      } else if (rng.uniform() < 0.1) {
        g.add(s, U("label"), kg::Literal{"n" + std::to_string(e)});
      } else {
        g.add(s, predicates[rng.index(predicates.size())], E("N" + std::to_string(rng.index(nodes))));
      }
    }
    std::set<std::tuple<std::string, std::string, std::string>> valid;
    for (const auto& t : g.triples()) {
      if (const auto* o = kg::as_iri(t.object)) {
        valid.emplace(embed::node_token(t.subject), t.predicate.render(), embed::node_token(*o));
      }
    }
    const auto walks = embed::generate_walks(g, 1 + rng.index(6), 1 + rng.index(5), graphs);
    for (const auto& sentence : walks.sentences) {
      out.check(sentence.size() % 2 == 1, "walk with a dangling relation");
      for (std::size_t i = 0; i + 2 < sentence.size(); i += 2) {
        ++steps;
        out.check(valid.count({sentence[i], sentence[i + 1], sentence[i + 2]}) == 1,
                  "invalid transition " + sentence[i] + " " + sentence[i + 1] + " " + sentence[i + 2]);
      }
    }
  }

  double worst_sigma = 0;
  for (const std::size_t leaves : {3u, 5u, 8u}) {
    kg::KnowledgeGraph star;
    for (std::size_t l = 0; l < leaves; ++l) star.add(E("hub"), U("to"), E("leaf" + std::to_string(l)));
    const std::size_t walks_per_node = 3000;
    const auto walks = embed::generate_walks(star, 1, walks_per_node, 100 + leaves);
    std::map<std::string, std::size_t> hits;
    for (const auto& s : walks.sentences) {
      if (s.front() == "hub" && s.size() == 3) ++hits[s[2]];
    }
    const double p = 1.0 / static_cast<double>(leaves);
    const double mean = walks_per_node * p;
    const double sd = std::sqrt(walks_per_node * p * (1 - p));
    for (std::size_t l = 0; l < leaves; ++l) {
      const double sigma = std::abs(static_cast<double>(hits["leaf" + std::to_string(l)]) - mean) / sd;
      worst_sigma = std::max(worst_sigma, sigma);
      out.check(sigma <= kStarSigmas, "star edge frequency outside 3 sigma");
    }
  }
  out.detail = std::to_string(steps) + " walk steps over " + std::to_string(graphs) +
               " random graphs, all valid; star graphs (3, 5, 8 leaves) worst deviation " +
               fmt("%.2f sigma", worst_sigma);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"query-one end to end", query_one},
      {"MAP ordering", map_ordering},
      {"vector-search oracle", search_oracle},
      {"trainer gradient check", trainer_gradients},
      {"relation predictor", relation_predictor},
      {"turtle round trip", turtle_round_trip},
      {"link integrity", link_integrity},
      {"latency direction", latency_direction},
      {"alert determinism and soundness", alert_soundness},
      {"walk validity", walk_validity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.failure = std::string("exception: ") + e.what();
    }
    failures += !outcome.pass;
    std::printf("%s %2zu %s: %s%s%s [%.1f s]\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                outcome.detail.c_str(), outcome.pass ? "" : "; first failure: ", outcome.failure.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
