#include "vkg/eval/harness.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"
#include "vkg/math.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

namespace vkg::eval {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

bool structural(const Iri& predicate) {
  return predicate == kg::vocab::rdf_type || predicate == kg::vocab::same_as ||
         predicate == kg::vocab::has_vector;
}

std::string fixed(double value, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

bool usable(const core::VkgStore& store, Model model, const Iri& member) {
  if (model == Model::GraphMatching) {
    return !store.graph().with_subject(member).empty() || !store.graph().with_object(member).empty();
  }
  return store.linked(member);
}

Iri member_iri(const std::string& text) {
  if (text.find(':') != std::string::npos || text.find('<') != std::string::npos) return kg::parse_iri(text);
  return Iri::entity(text);
}

}  // namespace

std::string_view model_name(Model model) {
  switch (model) {
    case Model::GraphMatching: return "graph-matching";
    case Model::VectorOnly: return "vector-only";
    case Model::VkgSearch: return "vkg-search";
  }
  return "vector-only";
}

Model parse_model(std::string_view name) {
  for (Model m : {Model::GraphMatching, Model::VectorOnly, Model::VkgSearch}) {
    if (model_name(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown model '" + std::string(name) + "' (graph-matching, vector-only, vkg-search)");
}

double average_precision(const std::vector<Iri>& ranked, const std::set<Iri>& relevant) {
  if (relevant.empty()) throw Error(ErrorCode::EmptyRelevantSet, "relevant set is empty");
  std::set<Iri> seen;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (!seen.insert(ranked[i]).second) {
      throw Error(ErrorCode::InvalidArgument, "ranked list repeats " + ranked[i].render());
    }
    if (relevant.count(ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

std::vector<Iri> graph_matching_rank(const core::VkgStore& store, const Iri& seed, std::size_t k) {
  const kg::KnowledgeGraph& g = store.graph();
  std::set<std::pair<Iri, kg::Term>> seed_pairs;
  for (const kg::Triple* t : g.with_subject(seed)) {
    if (!structural(t->predicate)) seed_pairs.emplace(t->predicate, t->object);
  }
  const std::set<Iri> seed_classes = g.direct_classes(seed);

  struct Scored {
    Iri entity;
    std::size_t shared;
    bool class_match;
  };
  std::vector<Scored> scored;
  for (const Iri& candidate : core::graph_entities(g)) {
    if (candidate == seed) continue;
    std::size_t shared = 0;
    for (const kg::Triple* t : g.with_subject(candidate)) {
      if (!structural(t->predicate) && seed_pairs.count({t->predicate, t->object})) ++shared;
    }
    bool class_match = false;
    for (const Iri& c : g.direct_classes(candidate)) class_match = class_match || seed_classes.count(c);
    if (shared > 0 || class_match) scored.push_back({candidate, shared, class_match});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.shared != b.shared) return a.shared > b.shared;
    if (a.class_match != b.class_match) return a.class_match;
    return a.entity < b.entity;
  });
  std::vector<Iri> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].entity);
  return out;
}

std::vector<Iri> rank(const core::VkgStore& store, Model model, const Iri& seed, std::size_t k) {
  if (model == Model::GraphMatching) return graph_matching_rank(store, seed, k);
  core::SearchOptions options;
  options.k = k;
  if (model == Model::VkgSearch) {
    const auto classes = store.graph().direct_classes(seed);
    if (!classes.empty()) options.class_filter = *classes.begin();
  }
  std::vector<Iri> out;
  for (const auto& hit : core::vkg_search(store, seed, options)) out.push_back(hit.entity);
  return out;
}

LatencyStats latency_stats(std::vector<double> micros) {
  LatencyStats s;
  s.count = micros.size();
  if (micros.empty()) return s;
  std::sort(micros.begin(), micros.end());
  const std::size_t n = micros.size();
  s.median_us = n % 2 ? micros[n / 2] : 0.5 * (micros[n / 2 - 1] + micros[n / 2]);
  s.mean_us = std::accumulate(micros.begin(), micros.end(), 0.0) / static_cast<double>(n);
  s.p90_us = micros[std::min(n - 1, static_cast<std::size_t>(0.9 * static_cast<double>(n)))];
  s.min_us = micros.front();
  s.max_us = micros.back();
  return s;
}

EvalReport evaluate_model(const core::VkgStore& store, const std::vector<SimilarityGroup>& groups, Model model,
                          const EvalOptions& options) {
  if (options.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  EvalReport report;
  report.model = model;
  report.k = options.k;
  report.dimension = store.space().dimension();

  struct Task {
    std::size_t group;
    Iri seed;
  };
  std::vector<std::vector<Iri>> members(groups.size());
  std::vector<Task> tasks;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (const Iri& m : groups[gi].members) {
      if (usable(store, model, m)) {
        members[gi].push_back(m);
      } else if (options.skip_unlinked) {
        ++report.skipped_members;
      } else if (model == Model::GraphMatching) {
        throw Error(ErrorCode::InvalidArgument, "group '" + groups[gi].name + "': " + m.render() + " is not in the graph");
      } else {
        throw Error(ErrorCode::UnlinkedEntity, "group '" + groups[gi].name + "': " + m.render());
      }
    }
    if (members[gi].size() < 2) continue;
    for (const Iri& m : members[gi]) tasks.push_back({gi, m});
  }

  std::vector<double> ap(tasks.size());
  std::vector<double> micros(tasks.size());
  auto run = [&](std::size_t i) {
    const Task& t = tasks[i];
    std::set<Iri> relevant(members[t.group].begin(), members[t.group].end());
    relevant.erase(t.seed);
    const auto start = Clock::now();
    const auto ranked = rank(store, model, t.seed, options.k);
    micros[i] = micros_since(start);
    ap[i] = average_precision(ranked, relevant);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, tasks.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < tasks.size(); i += workers) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::map<std::size_t, std::pair<double, std::size_t>> per_group;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& [sum, count] = per_group[tasks[i].group];
    sum += ap[i];
    ++count;
  }
  std::map<GroupKind, std::pair<double, std::size_t>> per_kind;
  double total = 0.0;
  for (const auto& [gi, acc] : per_group) {
    const double group_ap = acc.first / static_cast<double>(acc.second);
    report.groups.push_back({groups[gi].name, groups[gi].kind, group_ap, acc.second});
    total += group_ap;
    auto& [sum, count] = per_kind[groups[gi].kind];
    sum += group_ap;
    ++count;
  }
  for (const auto& [kind, acc] : per_kind) report.map_by_kind[kind] = acc.first / static_cast<double>(acc.second);
  report.map = report.groups.empty() ? 0.0 : total / static_cast<double>(report.groups.size());
  report.latency = latency_stats(std::move(micros));
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "model " << model_name(model) << "  k " << k << "  dimension " << dimension;
  if (min_count) out << "  min_count " << min_count;
  out << "\n";
  for (const auto& g : groups) {
    out << "  " << ingest::group_kind_name(g.kind) << " group " << g.name << ": AP " << fixed(g.average_precision)
        << " over " << g.queries << " seeds\n";
  }
  for (const auto& [kind, value] : map_by_kind) {
    out << "MAP " << ingest::group_kind_name(kind) << " " << fixed(value) << "\n";
  }
  out << "MAP " << fixed(map) << "\n";
  out << "latency median " << fixed(latency.median_us, 1) << " us, p90 " << fixed(latency.p90_us, 1) << " us over "
      << latency.count << " queries\n";
  if (skipped_members) out << "skipped members " << skipped_members << "\n";
  return out.str();
}

std::string EvalReport::to_json() const {
  json groups_json = json::array();
  for (const auto& g : groups) {
    groups_json.push_back({{"name", g.name},
                           {"kind", ingest::group_kind_name(g.kind)},
                           {"average_precision", g.average_precision},
                           {"queries", g.queries}});
  }
  json kinds = json::object();
  for (const auto& [kind, value] : map_by_kind) kinds[std::string(ingest::group_kind_name(kind))] = value;
  return json{{"model", model_name(model)},
              {"config", {{"k", k}, {"dimension", dimension}, {"min_count", min_count}}},
              {"groups", groups_json},
              {"map_by_kind", kinds},
              {"map", map},
              {"latency_us",
               {{"count", latency.count}, {"median", latency.median_us}, {"mean", latency.mean_us},
                {"p90", latency.p90_us}, {"min", latency.min_us}, {"max", latency.max_us}}},
              {"skipped_members", skipped_members}}
             .dump(2) +
         "\n";
}

LatencyReport latency_compare(const core::VkgStore& store, const std::vector<SimilarityGroup>& groups,
                              std::size_t k, std::size_t repetitions) {
  if (repetitions < 10) throw Error(ErrorCode::InvalidArgument, "latency comparison needs at least 10 repetitions");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  std::set<Iri> seeds;
  for (const auto& g : groups) {
    for (const Iri& m : g.members) {
      if (store.linked(m)) seeds.insert(m);
    }
  }
  if (groups.empty()) {
    for (const auto& [entity, token] : store.links()) seeds.insert(entity);
  }
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "no linked entities to time");

  std::vector<double> graph_us;
  std::vector<double> vector_us;
  for (std::size_t r = 0; r < repetitions; ++r) {
    for (const Iri& seed : seeds) {
      auto start = Clock::now();
      const auto a = graph_matching_rank(store, seed, k);
      graph_us.push_back(micros_since(start));
      start = Clock::now();
      const auto b = rank(store, Model::VectorOnly, seed, k);
      vector_us.push_back(micros_since(start));
    }
  }
  LatencyReport report;
  report.repetitions = repetitions;
  report.graph = latency_stats(std::move(graph_us));
  report.vector = latency_stats(std::move(vector_us));
  report.speedup = report.graph.median_us / std::max(report.vector.median_us, 1e-3);
  return report;
}

std::string LatencyReport::to_text() const {
  std::ostringstream out;
  out << "graph-matching median " << fixed(graph.median_us, 1) << " us (p90 " << fixed(graph.p90_us, 1) << ")\n"
      << "vector-only median " << fixed(vector.median_us, 1) << " us (p90 " << fixed(vector.p90_us, 1) << ")\n"
      << "speedup " << fixed(speedup, 2) << "x over " << graph.count << " queries (" << repetitions
      << " repetitions)\n";
  return out.str();
}

std::vector<SimilarityGroup> parse_groups(const std::string& json_text) {
  std::vector<SimilarityGroup> out;
  try {
    const json j = json::parse(json_text);
    const json& list = j.is_array() ? j : j.at("groups");
    for (const json& jg : list) {
      SimilarityGroup g;
      g.name = jg.at("name").get<std::string>();
      g.kind = ingest::parse_group_kind(jg.value("kind", std::string("product")));
      for (const json& m : jg.at("members")) g.members.insert(member_iri(m.get<std::string>()));
      if (g.members.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "group '" + g.name + "' needs at least two members");
      }
      out.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("groups file: ") + e.what());
  }
  return out;
}

std::string groups_to_json(const std::vector<SimilarityGroup>& groups) {
  json list = json::array();
  for (const auto& g : groups) {
    json members = json::array();
    for (const Iri& m : g.members) members.push_back(m.is_entity() ? m.local : m.render());
    list.push_back({{"name", g.name}, {"kind", ingest::group_kind_name(g.kind)}, {"members", members}});
  }
  return json{{"groups", list}}.dump(2) + "\n";
}

std::vector<SimilarityGroup> load_groups(const std::filesystem::path& path) { return parse_groups(read_text(path)); }

EvalStore synthetic_eval_store(const EvalStoreConfig& config) {
  if (config.members < 2 || config.groups_per_kind == 0 || config.dimension == 0 || config.features < 2) {
    throw Error(ErrorCode::InvalidArgument, "eval store needs >= 2 members, >= 1 group, >= 2 features");
  }
  struct KindSpec {
    GroupKind kind;
    Iri cls;
    Iri predicate;
    const char* name;
    const char* feature;
  };
  const std::vector<KindSpec> kinds = {
      {GroupKind::Product, kg::vocab::product, kg::vocab::has_dependency, "product", "library"},
      {GroupKind::Vulnerability, kg::vocab::vulnerability, Iri{"uco", "hasWeakness"}, "vulnerability", "weakness"},
      {GroupKind::Attack, Iri{"uco", "Means"}, Iri{"uco", "hasConsequences"}, "means", "effect"},
  };

  Rng rng(config.seed);
  const std::size_t per_group = config.members + config.impostors;
  const std::size_t total = kinds.size() * config.groups_per_kind * per_group;
  // Shuffled serial numbers keep names from encoding group membership.
  std::vector<std::size_t> serial(total);
  std::iota(serial.begin(), serial.end(), 0);
  for (std::size_t i = total; i > 1; --i) std::swap(serial[i - 1], serial[rng.index(i)]);

  auto gaussian = [&](double scale) {
    Vector v(static_cast<Eigen::Index>(config.dimension));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
    return v;
  };
  auto feature = [&](std::size_t kind, std::size_t index) {
    return Iri::entity(std::string(kinds[kind].feature) + "_" + std::to_string(index));
  };

  kg::KnowledgeGraph graph;
  vec::VectorSpace space(config.dimension);
  EvalStore out{core::VkgStore(kg::KnowledgeGraph{}, vec::VectorSpace(config.dimension)), {}};
  std::size_t next = 0;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    for (std::size_t gi = 0; gi < config.groups_per_kind; ++gi) {
      const Vector center = gaussian(1.0);
      const std::size_t signature[2] = {rng.index(config.features), rng.index(config.features)};
      SimilarityGroup group{std::string(kinds[ki].name) + "_group_" + std::to_string(gi), kinds[ki].kind, {}};
      for (std::size_t m = 0; m < per_group; ++m) {
        const bool impostor = m >= config.members;
        const std::size_t kind = impostor ? (ki + 1) % kinds.size() : ki;
        char name[48];
        std::snprintf(name, sizeof(name), "%s_%04zu", kinds[kind].name, serial[next++]);
        const Iri entity = Iri::entity(name);
        graph.add(entity, kg::vocab::rdf_type, kinds[kind].cls);
        for (std::size_t e = 0; e < config.edges; ++e) {
          const bool own = !impostor && rng.uniform() < config.signature_rate;
          const std::size_t f = own ? signature[rng.index(2)] : rng.index(config.features);
          graph.add(entity, kinds[kind].predicate, feature(kind, f));
        }
        space.add(kg::normalize_token(name),
                  center + gaussian(impostor ? config.impostor_noise : config.member_noise));
        if (!impostor) group.members.insert(entity);
      }
      out.groups.push_back(std::move(group));
    }
  }
  out.store = core::link_entities(std::move(graph), std::move(space)).store;
  return out;
}

std::vector<SweepPoint> run_sweep(const embed::Corpus& corpus, const kg::KnowledgeGraph& graph,
                                  const std::vector<SimilarityGroup>& groups,
                                  const std::vector<std::size_t>& dimensions,
                                  const std::vector<std::size_t>& min_counts, const embed::TrainerConfig& base,
                                  std::size_t k) {
  std::vector<SweepPoint> points;
  for (std::size_t d : dimensions) {
    for (std::size_t mc : min_counts) {
      embed::TrainerConfig cfg = base;
      cfg.dimension = d;
      cfg.min_count = mc;
      embed::TokenVectors graph_vectors;
      if (cfg.mode == embed::Mode::GraphAugmentedCbow) {
        embed::Rdf2VecConfig rc;
        rc.trainer.dimension = d;
        rc.trainer.seed = cfg.seed;
        graph_vectors = embed::rdf2vec(graph, rc);
      }
      auto snapshot = embed::train(cfg, corpus, cfg.mode == embed::Mode::GraphAugmentedCbow ? &graph_vectors : nullptr);
      SweepPoint p;
      p.dimension = d;
      p.min_count = mc;
      p.vocab_size = snapshot.space.size();
      const auto store = core::link_entities(graph, std::move(snapshot.space)).store;
      EvalOptions options;
      options.k = k;
      options.skip_unlinked = true;
      p.map_vector = evaluate_model(store, groups, Model::VectorOnly, options).map;
      p.map_vkg = evaluate_model(store, groups, Model::VkgSearch, options).map;
      points.push_back(p);
    }
  }
  return points;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::string out = "dimension,min_count,vocab_size,map_vector,map_vkg\n";
  for (const auto& p : points) {
    out += std::to_string(p.dimension) + "," + std::to_string(p.min_count) + "," + std::to_string(p.vocab_size) +
           "," + fixed(p.map_vector, 6) + "," + fixed(p.map_vkg, 6) + "\n";
  }
  return out;
}

}  // namespace vkg::eval
