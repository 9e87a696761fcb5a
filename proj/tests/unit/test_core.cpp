#include "test_support.hpp"

#include "vkg/core/vkg_store.hpp"
#include "vkg/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace vkg;
using namespace vkg::core;
using kg::Iri;
using kg::KnowledgeGraph;
using test::E;
using test::U;

namespace {

Vector v2(double x, double y) { return (Vector(2) << x, y).finished(); }

// Eight entities in 2-D; dos, mem_corruption and buffer_overflow are vulnerabilities.
VkgStore eight_entity_store() {
  KnowledgeGraph g;
  const std::pair<const char*, const char*> typed[] = {
      {"dos", "Vulnerability"},      {"mem_corruption", "Vulnerability"},
      {"buffer_overflow", "Vulnerability"}, {"chrome", "Product"},
      {"firefox", "Product"},        {"attacker", "Attacker"},
      {"xss_means", "Means"},        {"mysql", "Product"}};
  for (const auto& [name, cls] : typed) g.add(E(name), kg::vocab::rdf_type, U(cls));
  vec::VectorSpace s(2);
  s.add("dos", v2(1, 0));
  s.add("mem_corruption", v2(0.9, 0.2));
  s.add("buffer_overflow", v2(0.5, 0.5));
  s.add("chrome", v2(0.95, 0.1));
  s.add("firefox", v2(0.7, 0.6));
  s.add("attacker", v2(0.2, 0.9));
  s.add("xss_means", v2(-0.5, 0.5));
  s.add("mysql", v2(0, -1));
  return link_entities(std::move(g), std::move(s)).store;
}

std::vector<std::string> names(const std::vector<EntityHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.entity.local);
  return out;
}

}  // namespace

TEST(LinkEntities, LinksByNormalizedLocalName) {
  KnowledgeGraph g;
  g.add(E("denial_of_service"), kg::vocab::rdf_type, kg::vocab::vulnerability);
  vec::VectorSpace s(2);
  s.add("denial_of_service", v2(1, 0));
  auto [store, report] = link_entities(std::move(g), std::move(s));
  EXPECT_EQ(report.linked, 1u);
  EXPECT_EQ(store.token_of(E("denial_of_service")), std::optional<std::string>("denial_of_service"));
  EXPECT_TRUE(store.graph().contains(
      {E("denial_of_service"), kg::vocab::has_vector, kg::Literal{"denial_of_service"}}));
}

TEST(LinkEntities, EmptyVocabularyLinksNothing) {
  KnowledgeGraph g;
  g.add(E("MySQL"), kg::vocab::has_vulnerability, E("dos"));
  auto [store, report] = link_entities(std::move(g), vec::VectorSpace(3));
  EXPECT_EQ(report.linked, 0u);
  EXPECT_EQ(report.unlinked.size(), 2u);
  EXPECT_TRUE(store.links().empty());
}

TEST(LinkEntities, TenEntityFixtureLinksExactlySeven) {
  KnowledgeGraph g;
  g.add(E("Microsoft_Internet_Explorer"), kg::vocab::rdf_type, kg::vocab::product);
  g.add(E("Microsoft_Internet_Explorer"), kg::vocab::has_vulnerability, E("denial_of_service"));
  g.add(E("MySQL"), kg::vocab::has_vulnerability, E("SQL_Injection"));
  g.add(E("denial_of_service"), kg::vocab::has_attacker, E("remote_attackers"));
  g.add(E("denial_of_service"), kg::vocab::has_means, E("crafted_web_site"));
  g.add(E("Google_Chrome"), kg::vocab::rdf_type, kg::vocab::product);
  g.add(E("Thunderbird"), kg::vocab::rdf_type, kg::vocab::product);
  g.add(E("Google_Chrome"), kg::vocab::has_vulnerability, E("cross-site_scripting"));
  g.add(Iri{"dbp", "Internet_Explorer"}, Iri{"dbp", "releaseYear"}, kg::Literal{"1995"});
  g.add(E("Microsoft_Internet_Explorer"), kg::vocab::same_as, Iri{"dbp", "Internet_Explorer"});

  vec::VectorSpace s(2);
  for (const char* token : {"microsoft_internet_explorer", "mysql", "denial_of_service",
                            "sql_injection", "remote_attackers", "crafted_web_site",
                            "google_chrome", "firefox", "xss", "the"}) {
    s.add(token, v2(1, 1));
  }
  auto [store, report] = link_entities(std::move(g), std::move(s));
  // Unlinked: Thunderbird, cross-site_scripting, dbp:Internet_Explorer.
  EXPECT_EQ(report.linked, 7u);
  EXPECT_EQ(report.unlinked.size(), 3u);
  EXPECT_EQ(report.orphan_tokens, (std::vector<std::string>{"firefox", "the", "xss"}));
  EXPECT_EQ(store.token_of(E("Microsoft_Internet_Explorer")).value(), "microsoft_internet_explorer");
  EXPECT_EQ(links_from_graph(store.graph()), store.links());
}

TEST(LinkEntities, LoadedStoreRejectsDanglingLink) {
  KnowledgeGraph g;
  g.add(E("x"), kg::vocab::has_vector, kg::Literal{"missing"});
  try {
    VkgStore store(std::move(g), vec::VectorSpace(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidStore);
  }
}

TEST(VkgSearch, ClassFilterKeepsVulnerabilities) {
  const VkgStore store = eight_entity_store();
  SearchOptions opts;
  opts.k = 2;
  opts.class_filter = kg::vocab::vulnerability;
  const auto hits = vkg_search(store, E("dos"), opts);
  // Brute force from dos: chrome .99451, mem_corruption .97619, firefox .75926,
  // buffer_overflow .70711, attacker .21693, mysql 0, xss_means -.70711.
  EXPECT_EQ(names(hits), (std::vector<std::string>{"mem_corruption", "buffer_overflow"}));
  EXPECT_NEAR(hits[0].similarity, 0.9761870601839527, 1e-12);
  EXPECT_NEAR(hits[1].similarity, 0.7071067811865475, 1e-12);
  for (const auto& h : hits) EXPECT_TRUE(store.graph().class_of(h.entity).count(kg::vocab::vulnerability));
}

TEST(VkgSearch, NoFilterMatchesPlainTopK) {
  const VkgStore store = eight_entity_store();
  SearchOptions opts;
  opts.k = 4;
  const auto hits = vkg_search(store, E("dos"), opts);
  EXPECT_EQ(names(hits),
            (std::vector<std::string>{"chrome", "mem_corruption", "firefox", "buffer_overflow"}));
  const auto plain = vec::top_k(store.space(), "dos", 4, true);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    EXPECT_EQ(hits[i].entity.local, plain.neighbors[i].token);
    EXPECT_EQ(hits[i].similarity, plain.neighbors[i].similarity);
  }
}

TEST(VkgSearch, RetryWidensCandidatePool) {
  const VkgStore store = eight_entity_store();
  SearchOptions opts;
  opts.k = 2;
  opts.expansion = 1;
  opts.class_filter = kg::vocab::vulnerability;
  EXPECT_EQ(names(vkg_search(store, E("dos"), opts)),
            (std::vector<std::string>{"mem_corruption", "buffer_overflow"}));
}

TEST(VkgSearch, Errors) {
  const VkgStore store = eight_entity_store();
  SearchOptions opts;
  try {
    vkg_search(store, E("never_linked"), opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnlinkedEntity);
  }
  opts.class_filter = U("Spaceship");
  try {
    vkg_search(store, E("dos"), opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownClass);
  }
}

TEST(VkgSearchProperties, FilteredIsSubsetAndSorted) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    KnowledgeGraph g;
    vec::VectorSpace s(4);
    const int n = 30;
    for (int i = 0; i < n; ++i) {
      const std::string name = "e" + std::to_string(i);
      g.add(E(name), kg::vocab::rdf_type, rng.uniform() < 0.4 ? kg::vocab::vulnerability : kg::vocab::product);
      Vector v(4);
      for (auto& x : v) x = rng.normal();
      s.add(name, v);
    }
    const VkgStore store = link_entities(std::move(g), std::move(s)).store;
    const Iri seed = E("e" + std::to_string(rng.index(n)));
    SearchOptions plain;
    plain.k = 5;
    // Same candidate pool for both: the full scan.
    plain.expansion = n;
    SearchOptions filtered = plain;
    filtered.class_filter = kg::vocab::vulnerability;
    const auto all = vkg_search(store, seed, SearchOptions{static_cast<std::size_t>(n), {}, 1});
    const auto some = vkg_search(store, seed, filtered);
    for (const auto& h : some) {
      EXPECT_NE(std::find(all.begin(), all.end(), h), all.end());
      EXPECT_TRUE(store.linked(h.entity));
      EXPECT_NE(h.entity, seed);
    }
    for (std::size_t i = 1; i < some.size(); ++i) EXPECT_GE(some[i - 1].similarity, some[i].similarity);
    EXPECT_EQ(vkg_search(store, seed, filtered), some);
  }
}

TEST(Complexity, FormulaArithmetic) {
  ComplexityEstimate e;
  e.context_window = 1;
  e.dimension = 1;
  e.hidden_size = 1;
  EXPECT_EQ(e.total(), 1u);
  e = ComplexityEstimate{2, 3, 4, 5, 6, 7};
  EXPECT_EQ(e.total(), 42u);
  e.vocab_size = 7 + 246321;
  EXPECT_EQ(e.total(), 42u + 246321u);
}

TEST(Complexity, FromStore) {
  const VkgStore store = eight_entity_store();
  const auto e = complexity_estimate(store, 7);
  EXPECT_EQ(e.dimension, 2u);
  EXPECT_EQ(e.hidden_size, 2u);
  EXPECT_EQ(e.class_count, 4u);
  EXPECT_EQ(e.relation_count, 0u);
  EXPECT_EQ(e.vocab_size, 8u);
  EXPECT_EQ(e.total(), 7u * 2 * 2 + 4 + 0 + 8);
}
