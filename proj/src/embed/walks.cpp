#include "vkg/embed/trainer.hpp"

#include <set>

namespace vkg::embed {

std::string node_token(const kg::Iri& node) {
  return node.is_entity() ? kg::normalize_token(node.local) : node.render();
}

namespace {

struct Edge {
  std::string relation;
  std::string target;
  std::size_t target_node;
};

}  // namespace

WalkCorpus generate_walks(const kg::KnowledgeGraph& graph, std::size_t walk_length,
                          std::size_t walks_per_entity, std::uint64_t seed) {
  WalkCorpus corpus;
  corpus.walk_length = walk_length;
  corpus.walks_per_entity = walks_per_entity;

  std::set<kg::Iri> node_set;
  for (const kg::Triple& t : graph.triples()) {
    const kg::Iri* o = kg::as_iri(t.object);
    if (o == nullptr) continue;
    node_set.insert(t.subject);
    node_set.insert(*o);
  }
  const std::vector<kg::Iri> nodes(node_set.begin(), node_set.end());
  std::map<kg::Iri, std::size_t> node_index;
  for (std::size_t i = 0; i < nodes.size(); ++i) node_index.emplace(nodes[i], i);

  // Triples iterate in sorted order, so adjacency lists are sorted too.
  std::vector<std::vector<Edge>> out_edges(nodes.size());
  for (const kg::Triple& t : graph.triples()) {
    const kg::Iri* o = kg::as_iri(t.object);
    if (o == nullptr) continue;
    out_edges[node_index.at(t.subject)].push_back(
        {t.predicate.render(), node_token(*o), node_index.at(*o)});
  }

  std::set<std::string> entity_tokens;
  Rng rng(seed);
  for (std::size_t start = 0; start < nodes.size(); ++start) {
    const std::string start_token = node_token(nodes[start]);
    entity_tokens.insert(start_token);
    for (std::size_t w = 0; w < walks_per_entity; ++w) {
      std::vector<std::string> sentence{start_token};
      std::size_t current = start;
      for (std::size_t step = 0; step < walk_length; ++step) {
        const auto& edges = out_edges[current];
        if (edges.empty()) break;
        const Edge& e = edges[rng.index(edges.size())];
        sentence.push_back(e.relation);
        sentence.push_back(e.target);
        current = e.target_node;
      }
      corpus.sentences.push_back(std::move(sentence));
    }
  }
  corpus.entity_tokens.assign(entity_tokens.begin(), entity_tokens.end());
  return corpus;
}

TokenVectors rdf2vec(const kg::KnowledgeGraph& graph, const Rdf2VecConfig& config) {
  const WalkCorpus walks =
      generate_walks(graph, config.walk_length, config.walks_per_entity, config.trainer.seed);
  TokenVectors out;
  if (walks.sentences.empty()) return out;
  TrainerConfig trainer = config.trainer;
  trainer.mode = Mode::SkipGram;
  const TrainingSnapshot snapshot = train(trainer, walks.sentences);
  for (const std::string& token : walks.entity_tokens) {
    if (auto row = snapshot.space.index_of(token)) {
      out.emplace(token, Vector(snapshot.space.row(*row)));
    }
  }
  return out;
}

}  // namespace vkg::embed
