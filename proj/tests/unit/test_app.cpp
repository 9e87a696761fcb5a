#include "test_support.hpp"

#include "vkg/app/pipeline.hpp"
#include "vkg/core/store_dir.hpp"
#include "vkg/error.hpp"
#include "vkg/ingest/synthetic.hpp"
#include "vkg/io.hpp"

#include <gtest/gtest.h>

using namespace vkg;
using test::E;

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

app::BuildConfig small_config() {
  app::BuildConfig c;
  c.trainer.dimension = 12;
  c.trainer.epochs = 3;
  c.trainer.seed = 11;
  return c;
}

}  // namespace

TEST(StoreDir, RoundTripIsExactAndStable) {
  const auto store = ingest::cyber_fixture();
  const auto dir = test::scratch_dir("store_roundtrip");
  core::StoreMeta meta;
  meta.build = {{"mode", "cbow"}};
  meta.latest_document = "2017-03-20";
  core::save_store(store, dir, meta);
  const auto loaded = core::load_store(dir);
  EXPECT_EQ(loaded.store.graph(), store.graph());
  EXPECT_EQ(loaded.store.space(), store.space());
  EXPECT_EQ(loaded.store.links(), store.links());
  EXPECT_EQ(loaded.meta.links, store.links().size());
  EXPECT_EQ(loaded.meta.triples + loaded.meta.links, store.graph().size());
  EXPECT_EQ(loaded.meta.build.at("mode"), "cbow");
  EXPECT_EQ(loaded.meta.latest_document, "2017-03-20");
  EXPECT_TRUE(core::validate_store(loaded.store).empty());
  EXPECT_EQ(test::read_file(dir / "graph.ttl").find("hasVector"), std::string::npos);

  const auto again = test::scratch_dir("store_roundtrip_2");
  core::save_store(loaded.store, again, loaded.meta);
  for (const char* f : {"graph.ttl", "links.ttl", "vectors.txt", "meta.json"}) {
    EXPECT_EQ(test::read_file(dir / f), test::read_file(again / f)) << f;
  }
}

TEST(StoreDir, LoadRejectsInconsistentFiles) {
  const auto store = ingest::cyber_fixture();
  const auto dir = test::scratch_dir("store_bad");
  core::save_store(store, dir);

  const std::string links = test::read_file(dir / "links.ttl");
  write_text(dir / "links.ttl", links + "\n<ghost> vkg:hasVector \"no_such_token\" .\n");
  EXPECT_EQ(code_of([&] { core::load_store(dir); }), ErrorCode::InvalidStore);
  write_text(dir / "links.ttl", links + "\n<ghost> a uco:Product .\n");
  EXPECT_EQ(code_of([&] { core::load_store(dir); }), ErrorCode::InvalidStore);
  write_text(dir / "links.ttl", links);
  EXPECT_NO_THROW(core::load_store(dir));

  const std::string meta = test::read_file(dir / "meta.json");
  std::string bumped = meta;
  bumped.replace(bumped.find("\"dimension\": 16"), 15, "\"dimension\": 17");
  write_text(dir / "meta.json", bumped);
  EXPECT_EQ(code_of([&] { core::load_store(dir); }), ErrorCode::InvalidStore);
  write_text(dir / "meta.json", "{");
  EXPECT_EQ(code_of([&] { core::load_store(dir); }), ErrorCode::InvalidStore);
  write_text(dir / "meta.json", meta);

  std::filesystem::remove(dir / "vectors.txt");
  EXPECT_EQ(code_of([&] { core::load_store(dir); }), ErrorCode::InvalidStore);
  EXPECT_EQ(code_of([&] { core::load_store(dir / "nowhere"); }), ErrorCode::IoError);
}

TEST(Pipeline, BuildLinksEveryRecognizedEntityInVocabulary) {
  const auto corpus = ingest::synthetic_corpus({.documents = 30, .seed = 4});
  const auto result = app::build_store(corpus.documents, corpus.gazetteer, corpus.patterns, small_config());
  const auto& store = result.store;

  std::size_t checked = 0;
  for (const auto& [phrase, entry] : corpus.gazetteer.entries) {
    if (!store.graph().with_subject(entry.entity).size()) continue;
    const auto token = kg::normalize_token(entry.entity.local);
    if (!store.space().contains(token)) continue;
    const auto& triples = store.graph().with_subject(entry.entity);
    const auto links = std::count_if(triples.begin(), triples.end(),
                                     [](const kg::Triple* t) { return t->predicate == kg::vocab::has_vector; });
    EXPECT_EQ(links, 1) << entry.entity.local;
    ++checked;
  }
  EXPECT_GT(checked, 20u);
  EXPECT_EQ(core::links_from_graph(store.graph()), store.links());

  kg::KnowledgeGraph without_links;
  for (const auto& t : store.graph().triples()) {
    if (t.predicate != kg::vocab::has_vector) without_links.add(t);
  }
  EXPECT_EQ(without_links, corpus.truth);

  EXPECT_EQ(result.complexity.context_window, 7u);
  EXPECT_EQ(result.complexity.dimension, 12u);
  EXPECT_EQ(result.complexity.hidden_size, 12u);
  EXPECT_EQ(result.complexity.vocab_size, store.space().size());
  EXPECT_EQ(result.documents, 30u);
  EXPECT_EQ(result.latest_document, corpus.documents.back().timestamp);
  EXPECT_NE(result.summary().find("complexity"), std::string::npos);
}

TEST(Pipeline, DeterministicAndThreadIndependent) {
  const auto corpus = ingest::synthetic_corpus({.documents = 20, .seed = 6});
  auto config = small_config();
  const auto a = app::build_store(corpus.documents, corpus.gazetteer, corpus.patterns, config);
  config.threads = 3;
  const auto b = app::build_store(corpus.documents, corpus.gazetteer, corpus.patterns, config);
  EXPECT_EQ(a.store.graph(), b.store.graph());
  EXPECT_EQ(a.store.space(), b.store.space());

  const auto da = test::scratch_dir("build_a");
  const auto db = test::scratch_dir("build_b");
  core::save_store(a.store, da, a.meta());
  core::save_store(b.store, db, b.meta());
  for (const char* f : {"graph.ttl", "links.ttl", "vectors.txt", "meta.json"}) {
    EXPECT_EQ(test::read_file(da / f), test::read_file(db / f)) << f;
  }
  EXPECT_TRUE(core::validate_store(core::load_store(da).store).empty());
}

TEST(Pipeline, GraphAugmentedBuild) {
  const auto corpus = ingest::synthetic_corpus({.documents = 10, .seed = 2});
  auto config = small_config();
  config.trainer.mode = embed::Mode::GraphAugmentedCbow;
  config.walks_per_entity = 4;
  const auto result = app::build_store(corpus.documents, corpus.gazetteer, corpus.patterns, config);
  EXPECT_GT(result.links.linked, 0u);
  EXPECT_EQ(result.meta().build.at("mode"), std::string(embed::mode_name(embed::Mode::GraphAugmentedCbow)));
}

TEST(Pipeline, Errors) {
  EXPECT_EQ(code_of([] {
              app::build_store({}, ingest::bundled_gazetteer(), ingest::bundled_patterns(), small_config());
            }),
            ErrorCode::EmptyCorpus);
  EXPECT_EQ(code_of([] {
              app::build_store({{"blank", "other", " . ", ""}}, ingest::bundled_gazetteer(),
                               ingest::bundled_patterns(), small_config());
            }),
            ErrorCode::EmptyCorpus);
  auto bad = small_config();
  bad.trainer.dimension = 0;
  EXPECT_EQ(code_of([&] {
              app::build_store({{"d", "other", "text", ""}}, ingest::bundled_gazetteer(), ingest::bundled_patterns(),
                               bad);
            }),
            ErrorCode::InvalidConfig);
}

TEST(BuildConfig, DescriptionRoundTrip) {
  auto c = small_config();
  c.trainer.learning_rate = 0.0125;
  c.trainer.mode = embed::Mode::SkipGram;
  const auto back = app::BuildConfig::from_description(c.describe());
  EXPECT_EQ(back.describe(), c.describe());
  EXPECT_EQ(back.trainer.learning_rate, 0.0125);
  EXPECT_EQ(code_of([] { app::BuildConfig::from_description({{"window", "seven"}}); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { app::BuildConfig::from_description({{"mode", "glove"}}); }), ErrorCode::InvalidConfig);
}
