#include "test_support.hpp"

#include "vkg/ingest/extract.hpp"
#include "vkg/ingest/synthetic.hpp"
#include "vkg/kg/turtle.hpp"
#include "vkg/alert/alerts.hpp"
#include "vkg/io.hpp"
#include "vkg/query/engine.hpp"
#include "vkg/rel/relation_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace vkg;
using namespace vkg::ingest;
using test::E;
using test::U;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

const char* const kIeSentence =
    "Microsoft Internet Explorer allows remote attackers to execute arbitrary code or cause a denial of "
    "service (memory corruption) via a crafted web site, aka ``Internet Explorer Memory Corruption "
    "Vulnerability.''";

std::vector<std::string> texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::string joined(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

std::size_t degree(const kg::KnowledgeGraph& g, const kg::Iri& node) {
  return g.with_subject(node).size() + g.with_object(node).size();
}

}  // namespace

TEST(Preprocess, CollapsesGazetteerPhrases) {
  const auto tokens = preprocess("denial of service (memory corruption)", bundled_gazetteer());
  EXPECT_EQ(tokens, (std::vector<std::string>{"denial_of_service", "memory", "corruption"}));
  EXPECT_TRUE(preprocess("", bundled_gazetteer()).empty());
  EXPECT_TRUE(preprocess("   \n\t ", bundled_gazetteer()).empty());
}

TEST(Preprocess, LongestMatchWins) {
  Gazetteer gaz;
  gaz.add("microsoft internet explorer", kg::vocab::product, "Microsoft_Internet_Explorer");
  gaz.add("internet explorer", kg::vocab::product, "Internet_Explorer");
  gaz.add("explorer", kg::vocab::product, "Explorer");
  gaz.add("microsoft", U("Vendor"), "Microsoft");
  const auto tokens = chunk("Microsoft Internet Explorer and Internet Explorer in Windows Explorer by Microsoft", gaz);
  EXPECT_EQ(texts(tokens), (std::vector<std::string>{"microsoft_internet_explorer", "and", "internet_explorer", "in",
                                                     "windows", "explorer", "by", "microsoft"}));
  std::vector<std::string> entities;
  for (const auto& t : tokens) {
    if (t.entity) entities.push_back(t.entity->entity.local);
  }
  EXPECT_EQ(entities, (std::vector<std::string>{"Microsoft_Internet_Explorer", "Internet_Explorer", "Explorer",
                                                "Microsoft"}));
  EXPECT_EQ(preprocess("Internet Explorer in Windows", gaz),
            (std::vector<std::string>{"internet_explorer", "windows"}));
}

TEST(Preprocess, IdempotentOnOwnOutput) {
  const Gazetteer gaz = bundled_gazetteer();
  std::vector<std::string> samples = {kIeSentence, "The Linux kernel and MySQL both had a buffer overflow."};
  const auto corpus = synthetic_corpus({});
  for (std::size_t i = 0; i < 10; ++i) samples.push_back(corpus.documents[i].text);
  for (const auto& text : samples) {
    const auto& g = text == samples[0] || text == samples[1] ? gaz : corpus.gazetteer;
    const auto once = preprocess(text, g);
    EXPECT_EQ(preprocess(joined(once), g), once) << text;
  }
}

TEST(Preprocess, NormalizerOnlyTouchesPlainWords) {
  const TokenNormalizer stem = [](std::string_view w) {
    std::string s(w);
    if (s.size() > 3 && s.back() == 's') s.pop_back();
    return s;
  };
  EXPECT_EQ(preprocess("remote attackers send crafted requests", bundled_gazetteer(), default_stopwords(), stem),
            (std::vector<std::string>{"remote_attackers", "send", "crafted", "request"}));
}

TEST(Sentences, SplitOnTerminalPunctuation) {
  EXPECT_EQ(split_sentences("One. Two! Three? Four"),
            (std::vector<std::string>{"One.", " Two!", " Three?", " Four"}));
  EXPECT_EQ(split_sentences("Version 1.2 is affected."), (std::vector<std::string>{"Version 1.2 is affected."}));
  EXPECT_TRUE(split_sentences("  ").empty());
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0x811c9dc5u);
  EXPECT_EQ(fnv1a("a"), 0xe40c292cu);
  EXPECT_EQ(fnv1a("foobar"), 0xbf9cf968u);
  EXPECT_EQ(intelligence_node("a"), E("Int" + std::to_string(0xe40c292cu)));
}

TEST(Extract, InternetExplorerSentenceMatchesExampleGraph) {
  const Document doc{"cve-2014-0322", "", kIeSentence, ""};
  const auto result = extract_document_graph(doc, bundled_gazetteer(), bundled_patterns());

  kg::KnowledgeGraph expected;
  const kg::Iri figure_int{"", "Int3482758232"};
  const auto figure = kg::load_turtle(test::data_dir() / "example_rdf.ttl");
  for (const kg::Triple& t : figure.triples()) {
    if (t.predicate == kg::vocab::same_as) continue;
    expected.add(t.subject == figure_int ? result.intelligence : t.subject, t.predicate, t.object);
  }
  EXPECT_EQ(result.graph, expected) << kg::serialize_turtle(result.graph);
  EXPECT_TRUE(result.graph.contains({E("execute_arbitrary_code"), U("hasMeans"), E("crafted_web_site")}));
  EXPECT_TRUE(result.graph.contains({E("denial_of_service"), U("hasAttacker"), E("remote_attackers")}));
}

TEST(Extract, NoHitsGivesBareIntelligenceNode) {
  const auto result = extract_document_graph({"empty", "", "Nothing to see here.", ""}, bundled_gazetteer(),
                                             bundled_patterns());
  ASSERT_EQ(result.graph.size(), 1u);
  EXPECT_TRUE(result.graph.contains({result.intelligence, kg::vocab::rdf_type, kg::vocab::intelligence}));

  const auto dated = extract_document_graph({"dated", "twitter", "", "2017-03-01"}, bundled_gazetteer(), {});
  EXPECT_EQ(dated.graph.size(), 3u);
  EXPECT_TRUE(dated.graph.contains({dated.intelligence, kg::vocab::intel_timestamp, kg::Literal{"2017-03-01"}}));
  EXPECT_TRUE(dated.graph.contains({dated.intelligence, kg::vocab::intel_source, kg::Literal{"twitter"}}));
}

TEST(Extract, TwoSentencesUnionWithoutCrossing) {
  const Document doc{"two", "", "Remote attackers can exploit a denial of service. "
                                "Attackers execute arbitrary code via a crafted web site.", ""};
  const auto g = extract_document_graph(doc, bundled_gazetteer(), bundled_patterns()).graph;
  EXPECT_TRUE(g.contains({E("denial_of_service"), U("hasAttacker"), E("remote_attackers")}));
  EXPECT_TRUE(g.contains({E("execute_arbitrary_code"), U("hasMeans"), E("crafted_web_site")}));
  EXPECT_FALSE(g.contains({E("denial_of_service"), U("hasMeans"), E("crafted_web_site")}));
  EXPECT_FALSE(g.contains({E("execute_arbitrary_code"), U("hasAttacker"), E("remote_attackers")}));
  EXPECT_EQ(g.with_predicate(U("hasAttacker")).size() + g.with_predicate(U("hasMeans")).size(), 2u);
}

TEST(Extract, EmittedNodesAreRecognized) {
  const auto corpus = synthetic_corpus({.documents = 30});
  std::set<kg::Iri> recognized;
  for (const auto& [phrase, entry] : corpus.gazetteer.entries) recognized.insert(entry.entity);
  for (const auto& doc : corpus.documents) {
    const auto result = extract_document_graph(doc, corpus.gazetteer, corpus.patterns);
    for (const kg::Triple& t : result.graph.triples()) {
      EXPECT_TRUE(recognized.count(t.subject) || t.subject == result.intelligence) << kg::render(t);
      if (t.predicate == kg::vocab::rdf_type) continue;
      if (const auto* o = kg::as_iri(t.object)) EXPECT_TRUE(recognized.count(*o)) << kg::render(t);
    }
  }
}

TEST(Patterns, JsonRoundTripAndValidation) {
  const auto patterns = bundled_patterns();
  const auto again = parse_patterns(patterns_to_json(patterns));
  ASSERT_EQ(again.size(), patterns.size());
  EXPECT_EQ(patterns_to_json(again), patterns_to_json(patterns));
  EXPECT_EQ(code_of([] {
              parse_patterns(R"({"patterns": [{"name": "bad", "trigger": ["Vulnerability", "via", "Means"],
                                "emits": [[0, "uco:hasMeans", 1]]}]})");
            }),
            ErrorCode::MalformedPattern);
  EXPECT_EQ(code_of([] {
              parse_patterns(R"([{"name": "bad", "trigger": ["Product", "Vulnerability"],
                                 "emits": [[0, "owl:sameAs", 1]]}])");
            }),
            ErrorCode::MalformedPattern);
  EXPECT_EQ(code_of([] { parse_patterns(R"([{"name": "bad", "trigger": [], "emits": []}])"); }),
            ErrorCode::MalformedPattern);
}

TEST(Gazetteer, JsonRoundTrip) {
  const Gazetteer gaz = bundled_gazetteer();
  const Gazetteer again = parse_gazetteer(gazetteer_to_json(gaz));
  EXPECT_EQ(gazetteer_to_json(again), gazetteer_to_json(gaz));
  EXPECT_EQ(again.longest_phrase(), gaz.longest_phrase());
  const Gazetteer bare = parse_gazetteer(R"([{"phrase": "Heap  Overflow", "class": "Vulnerability"}])");
  ASSERT_EQ(bare.entries.count("heap overflow"), 1u);
  EXPECT_EQ(bare.entries.at("heap overflow").entity, E("heap_overflow"));
  EXPECT_EQ(bare.entries.at("heap overflow").cls, kg::vocab::vulnerability);
  EXPECT_EQ(code_of([] { parse_gazetteer("{"); }), ErrorCode::InvalidArgument);
}

TEST(Merge, NameIdentityCoreference) {
  kg::KnowledgeGraph a;
  a.add(E("MySQL"), U("hasVulnerability"), E("denial_of_service"));
  kg::KnowledgeGraph b;
  b.add(E("Denial_of_Service"), U("hasAttacker"), E("remote_attackers"));
  b.add(E("denial_of_service"), kg::vocab::rdf_type, kg::vocab::vulnerability);
  const auto merged = merge_graphs({a, b});
  EXPECT_EQ(merged.size(), 3u);
  EXPECT_TRUE(merged.contains({E("MySQL"), U("hasVulnerability"), E("Denial_of_Service")}));
  EXPECT_TRUE(merged.contains({E("Denial_of_Service"), U("hasAttacker"), E("remote_attackers")}));
  EXPECT_TRUE(merged.with_subject(E("denial_of_service")).empty());

  kg::KnowledgeGraph c;
  c.add(E("Windows"), U("hasVulnerability"), E("buffer_overflow"));
  const auto disjoint = merge_graphs({a, c});
  EXPECT_EQ(disjoint.size(), a.size() + c.size());
}

TEST(Merge, SharedEntityDegreeIsHandSum) {
  // dos: 2 triples in g1, 3 in g2 (one repeating g1), absent from g3.
  kg::KnowledgeGraph g1, g2, g3;
  g1.add(E("MySQL"), U("hasVulnerability"), E("dos"));
  g1.add(E("dos"), kg::vocab::rdf_type, kg::vocab::vulnerability);
  g2.add(E("dos"), kg::vocab::rdf_type, kg::vocab::vulnerability);
  g2.add(E("dos"), U("hasAttacker"), E("remote_attackers"));
  g2.add(E("nginx"), U("hasVulnerability"), E("dos"));
  g3.add(E("Windows"), U("hasVulnerability"), E("buffer_overflow"));
  const auto merged = merge_graphs({g1, g2, g3});
  EXPECT_EQ(degree(merged, E("dos")), 4u);
  EXPECT_EQ(merged.size(), 5u);
}

TEST(Merge, AssociativeAndCommutative) {
  const auto corpus = synthetic_corpus({.documents = 12, .seed = 5});
  std::vector<kg::KnowledgeGraph> graphs;
  for (const auto& d : corpus.documents) {
    graphs.push_back(extract_document_graph(d, corpus.gazetteer, corpus.patterns).graph);
  }
  const auto all = merge_graphs(graphs);
  std::mt19937 shuffle(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto order = graphs;
    std::shuffle(order.begin(), order.end(), shuffle);
    EXPECT_EQ(merge_graphs(order), all);
    const std::size_t cut = 1 + trial % (order.size() - 1);
    const auto left = merge_graphs(std::vector<kg::KnowledgeGraph>(order.begin(), order.begin() + cut));
    const auto right = merge_graphs(std::vector<kg::KnowledgeGraph>(order.begin() + cut, order.end()));
    EXPECT_EQ(merge_graphs({left, right}), all);
  }
}

TEST(Synthetic, ExtractionRecoversGroundTruth) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto corpus = synthetic_corpus({.documents = 40, .seed = seed});
    std::vector<kg::KnowledgeGraph> graphs;
    for (const auto& d : corpus.documents) {
      graphs.push_back(extract_document_graph(d, corpus.gazetteer, corpus.patterns).graph);
    }
    EXPECT_EQ(merge_graphs(graphs), corpus.truth) << "seed " << seed;
  }
}

TEST(Synthetic, DeterministicAndGrouped) {
  const auto a = synthetic_corpus({.seed = 9});
  const auto b = synthetic_corpus({.seed = 9});
  const auto c = synthetic_corpus({.seed = 10});
  ASSERT_EQ(a.documents.size(), 60u);
  for (std::size_t i = 0; i < a.documents.size(); ++i) EXPECT_EQ(a.documents[i].text, b.documents[i].text);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_FALSE(a.truth == c.truth);
  EXPECT_EQ(a.documents[0].timestamp, "2017-01-01");
  EXPECT_EQ(a.documents[59].timestamp, "2017-03-01");
  for (const auto& g : a.groups) {
    EXPECT_GE(g.members.size(), 2u) << g.name;
    for (const auto& m : g.members) EXPECT_TRUE(kg::valid_local(m.local, true)) << m.local;
  }
  EXPECT_EQ(code_of([] { synthetic_corpus({.vendors = 9}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { synthetic_corpus({.start_date = "2017-02-30"}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_group_kind(group_kind_name(GroupKind::Attack)), GroupKind::Attack);
}

TEST(Corpus, ManifestRoundTripAndFallback) {
  const auto dir = test::scratch_dir("corpus");
  const auto corpus = synthetic_corpus({.documents = 5});
  save_corpus(dir, corpus.documents);
  const auto loaded = load_corpus(dir);
  ASSERT_EQ(loaded.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(loaded[i].id, corpus.documents[i].id);
    EXPECT_EQ(loaded[i].text, corpus.documents[i].text);
    EXPECT_EQ(loaded[i].source, corpus.documents[i].source);
    EXPECT_EQ(loaded[i].timestamp, corpus.documents[i].timestamp);
  }

  const auto plain = test::scratch_dir("corpus_plain");
  write_text(plain / "b.txt", "second");
  write_text(plain / "a.txt", "first");
  const auto docs = load_corpus(plain);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "a");
  EXPECT_EQ(docs[1].text, "second");

  EXPECT_EQ(code_of([] { load_corpus(test::scratch_dir("corpus_empty")); }), ErrorCode::EmptyCorpus);
  EXPECT_EQ(code_of([&] { load_corpus(plain / "a.txt"); }), ErrorCode::IoError);
}

TEST(CyberFixture, QueryOneFlipsWhenOverlapRemoved) {
  core::VkgStore store = cyber_fixture();
  const auto& g = store.graph();
  EXPECT_GE(g.instances_of(kg::vocab::vulnerability).size(), 15u);
  EXPECT_TRUE(g.contains({E("MySQL"), U("hasVulnerability"), kFixtureOverlap}));

  const auto yes = query::QueryEngine(store).execute(kQueryOne);
  ASSERT_NE(yes.verdict("alert"), nullptr);
  EXPECT_TRUE(yes.verdict("alert")->value);
  EXPECT_EQ(yes.verdict("alert")->witness, std::set<kg::Iri>{kFixtureOverlap});
  EXPECT_FALSE(yes.binding("V")->members.count(E("sql_injection")));

  store.mutable_graph().remove({E("MySQL"), U("hasVulnerability"), kFixtureOverlap});
  const auto no = query::QueryEngine(store).execute(kQueryOne);
  EXPECT_FALSE(no.verdict("alert")->value);
  EXPECT_EQ(no.binding("K")->members, std::set<kg::Iri>{E("sql_injection")});
}

TEST(CyberFixture, AndroidBufferOverflowPredictedAsVulnerability) {
  const core::VkgStore store = cyber_fixture();
  ASSERT_FALSE(store.graph().contains({E("Android"), U("hasVulnerability"), E("buffer_overflow")}));
  const auto training = rel::build_training_set(store, rel::default_relation_set());
  const auto model = rel::train_model(training.set, rel::ModelConfig{});
  const auto& space = store.space();
  const auto p = model.predict(space.vector("android"), space.vector("buffer_overflow"));
  EXPECT_EQ(p.relation, U("hasVulnerability"));
}

TEST(CyberFixture, AllTypedEntitiesLinked) {
  const core::VkgStore store = cyber_fixture();
  for (const auto& cls : {kg::vocab::product, kg::vocab::vulnerability, U("Attacker"), U("Means")}) {
    for (const auto& e : store.graph().instances_of(cls)) EXPECT_TRUE(store.linked(e)) << e.local;
  }
  EXPECT_EQ(store.links(), core::links_from_graph(store.graph()));
  EXPECT_NO_THROW(alert::parse_profile(cyber_fixture_profile()));
}
