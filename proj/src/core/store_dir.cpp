#include "vkg/core/store_dir.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"
#include "vkg/kg/turtle.hpp"

#include <nlohmann/json.hpp>

namespace vkg::core {

namespace {

using nlohmann::json;

json meta_to_json(const StoreMeta& meta) {
  json j = {{"format", meta.format},
            {"dimension", meta.dimension},
            {"vocab_size", meta.vocab_size},
            {"triples", meta.triples},
            {"links", meta.links},
            {"build", meta.build},
            {"latest_document", meta.latest_document}};
  if (meta.complexity) {
    const auto& c = *meta.complexity;
    j["complexity"] = {{"context_window", c.context_window}, {"dimension", c.dimension},
                       {"hidden_size", c.hidden_size},       {"class_count", c.class_count},
                       {"relation_count", c.relation_count}, {"vocab_size", c.vocab_size},
                       {"total", c.total()}};
  }
  return j;
}

StoreMeta meta_from_json(const json& j) {
  StoreMeta meta;
  meta.format = j.at("format").get<int>();
  meta.dimension = j.at("dimension").get<std::size_t>();
  meta.vocab_size = j.at("vocab_size").get<std::size_t>();
  meta.triples = j.at("triples").get<std::size_t>();
  meta.links = j.at("links").get<std::size_t>();
  meta.build = j.value("build", std::map<std::string, std::string>{});
  meta.latest_document = j.value("latest_document", std::string());
  if (j.contains("complexity")) {
    const json& c = j.at("complexity");
    ComplexityEstimate e;
    e.context_window = c.at("context_window").get<std::uint64_t>();
    e.dimension = c.at("dimension").get<std::uint64_t>();
    e.hidden_size = c.at("hidden_size").get<std::uint64_t>();
    e.class_count = c.at("class_count").get<std::uint64_t>();
    e.relation_count = c.at("relation_count").get<std::uint64_t>();
    e.vocab_size = c.at("vocab_size").get<std::uint64_t>();
    meta.complexity = e;
  }
  return meta;
}

}  // namespace

void save_store(const VkgStore& store, const std::filesystem::path& dir, StoreMeta meta) {
  const kg::KnowledgeGraph& g = store.graph();
  kg::KnowledgeGraph graph(g.prefixes());
  kg::KnowledgeGraph links(g.prefixes());
  for (const kg::Triple& t : g.triples()) {
    (t.predicate == kg::vocab::has_vector ? links : graph).add(t);
  }
  meta.dimension = store.space().dimension();
  meta.vocab_size = store.space().size();
  meta.triples = graph.size();
  meta.links = links.size();
  kg::save_turtle(graph, dir / "graph.ttl");
  kg::save_turtle(links, dir / "links.ttl");
  vec::save_vectors(store.space(), dir / "vectors.txt");
  write_text(dir / "meta.json", meta_to_json(meta).dump(2) + "\n");
}

LoadedStore load_store(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a store directory");
  for (const char* name : {"graph.ttl", "links.ttl", "vectors.txt", "meta.json"}) {
    if (!fs::exists(dir / name)) throw Error(ErrorCode::InvalidStore, "missing " + (dir / name).string());
  }
  StoreMeta meta;
  try {
    meta = meta_from_json(json::parse(read_text(dir / "meta.json")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidStore, std::string("meta.json: ") + e.what());
  }
  kg::KnowledgeGraph graph = kg::load_turtle(dir / "graph.ttl");
  const kg::KnowledgeGraph links = kg::load_turtle(dir / "links.ttl");
  for (const auto& [label, expansion] : links.prefixes()) graph.declare_prefix(label, expansion);
  const std::size_t base_triples = graph.size();
  for (const kg::Triple& t : links.triples()) {
    if (t.predicate != kg::vocab::has_vector) {
      throw Error(ErrorCode::InvalidStore, "links.ttl holds a non-link triple: " + kg::render(t));
    }
    graph.add(t);
  }
  vec::VectorSpace space = vec::load_vectors(dir / "vectors.txt");

  auto mismatch = [](const char* what, std::size_t meta_value, std::size_t actual) {
    throw Error(ErrorCode::InvalidStore, std::string("meta.json ") + what + " is " + std::to_string(meta_value) +
                                             ", files have " + std::to_string(actual));
  };
  if (meta.dimension != space.dimension()) mismatch("dimension", meta.dimension, space.dimension());
  if (meta.vocab_size != space.size()) mismatch("vocab_size", meta.vocab_size, space.size());
  if (meta.triples != base_triples) mismatch("triples", meta.triples, base_triples);
  if (meta.links != links.size()) mismatch("links", meta.links, links.size());

  VkgStore store(std::move(graph), std::move(space));
  const auto problems = validate_store(store);
  if (!problems.empty()) throw Error(ErrorCode::InvalidStore, problems.front());
  return {std::move(store), std::move(meta)};
}

std::vector<std::string> validate_store(const VkgStore& store) {
  std::vector<std::string> problems;
  if (links_from_graph(store.graph()) != store.links()) {
    problems.push_back("link table differs from the graph's hasVector triples");
  }
  std::map<Iri, std::size_t> per_entity;
  for (const kg::Triple* t : store.graph().with_predicate(kg::vocab::has_vector)) ++per_entity[t->subject];
  for (const auto& [entity, count] : per_entity) {
    if (count != 1) problems.push_back(entity.render() + " has " + std::to_string(count) + " hasVector triples");
  }
  for (const auto& [entity, token] : store.links()) {
    if (!store.space().contains(token)) problems.push_back(entity.render() + " links to missing token '" + token + "'");
  }
  return problems;
}

}  // namespace vkg::core
