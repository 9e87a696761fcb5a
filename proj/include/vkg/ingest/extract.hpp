#pragma once

#include "vkg/kg/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vkg::ingest {

using kg::Iri;

struct Document {
  std::string id;
  /// nvd, twitter, reddit, blog or other.
  std::string source = "other";
  std::string text;
  /// ISO date or date-time; empty when unknown.
  std::string timestamp;
};

struct GazetteerEntry {
  Iri entity;
  Iri cls;
};

/// Lowercase surface phrase -> entity and class.
struct Gazetteer {
  std::map<std::string, GazetteerEntry> entries;

  /// Phrase is lowercased and whitespace-collapsed; the entity defaults to
  /// the phrase with spaces as underscores.
  void add(std::string_view phrase, const Iri& cls, std::string_view entity = {});
  std::size_t longest_phrase() const noexcept { return longest_; }

 private:
  std::size_t longest_ = 0;
};

/// {"entries": [{"phrase": "...", "entity": "...", "class": "Product" | "uco:Product"}]}
Gazetteer parse_gazetteer(const std::string& json_text);
std::string gazetteer_to_json(const Gazetteer& gazetteer);
Gazetteer load_gazetteer(const std::filesystem::path& path);

/// One element of a pattern trigger: an entity of a class, or a literal keyword.
struct PatternElement {
  bool is_class = true;
  Iri cls;
  std::string keyword;
};

struct Emission {
  std::size_t subject = 0;
  Iri relation;
  std::size_t object = 0;
};

/// Fires on every ordered subsequence of a sentence matching `trigger`
/// (gaps allowed) and emits relations between the matched class elements.
struct ExtractionPattern {
  std::string name;
  std::vector<PatternElement> trigger;
  std::vector<Emission> emits;

  /// Throws MalformedPattern when an emission refers to a keyword, is out of
  /// range, or names a relation outside the uco vocabulary.
  void validate() const;
};

/// {"patterns": [{"name": "...", "trigger": ["Product", "via", ...],
///   "emits": [[0, "uco:hasVulnerability", 1]]}]}. Trigger items naming a
/// class (capitalized or prefixed) are class elements; lowercase words are keywords.
std::vector<ExtractionPattern> parse_patterns(const std::string& json_text);
std::string patterns_to_json(const std::vector<ExtractionPattern>& patterns);
std::vector<ExtractionPattern> load_patterns(const std::filesystem::path& path);

/// Bundled gazetteer and patterns covering the Internet Explorer example and
/// common NVD phrasing.
Gazetteer bundled_gazetteer();
std::vector<ExtractionPattern> bundled_patterns();

const std::set<std::string>& default_stopwords();

/// Token rewrite applied to non-entity tokens (stemming hook).
using TokenNormalizer = std::function<std::string(std::string_view)>;

struct Token {
  std::string text;
  /// Set for gazetteer matches.
  const GazetteerEntry* entity = nullptr;
};

/// Lowercased word tokens with gazetteer phrases collapsed, longest match
/// first, into the entity's normalized token. Stopwords are kept.
std::vector<Token> chunk(std::string_view text, const Gazetteer& gazetteer,
                         const TokenNormalizer& normalizer = {});

/// chunk() followed by stopword removal. Idempotent on its joined output.
std::vector<std::string> preprocess(std::string_view text, const Gazetteer& gazetteer,
                                    const std::set<std::string>& stopwords = default_stopwords(),
                                    const TokenNormalizer& normalizer = {});

/// Splits on `.`, `!` or `?` followed by whitespace or end of text.
std::vector<std::string> split_sentences(std::string_view text);

/// 32-bit FNV-1a.
std::uint32_t fnv1a(std::string_view data);

/// `<Int{fnv1a(id)}>`
Iri intelligence_node(std::string_view document_id);

struct DocumentGraph {
  kg::KnowledgeGraph graph;
  Iri intelligence;
};

/// Types recognized entities, fires patterns per sentence, and adds an
/// intelligence node carrying the document's hasVulnerability objects,
/// timestamp and source.
DocumentGraph extract_document_graph(const Document& doc, const Gazetteer& gazetteer,
                                     const std::vector<ExtractionPattern>& patterns);

/// Triple-set union with name-identity co-reference: corpus entities whose
/// normalized local names agree collapse onto the smallest local name.
kg::KnowledgeGraph merge_graphs(const std::vector<kg::KnowledgeGraph>& graphs);

/// Reads `manifest.json` ({"documents": [{"id", "file", "source", "timestamp"}]})
/// from a corpus directory. Throws EmptyCorpus when there are no documents.
std::vector<Document> load_corpus(const std::filesystem::path& dir);
void save_corpus(const std::filesystem::path& dir, const std::vector<Document>& docs);

}  // namespace vkg::ingest
