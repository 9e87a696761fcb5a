#include "vkg/ingest/extract.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

namespace vkg::ingest {

namespace {

using nlohmann::json;

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+';
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !word_char(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && word_char(text[j])) ++j;
    std::string_view w = text.substr(i, j - i);
    while (!w.empty() && w.front() == '-') w.remove_prefix(1);
    while (!w.empty() && w.back() == '-') w.remove_suffix(1);
    if (!w.empty()) {
      std::string lower(w);
      for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back(std::move(lower));
    }
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& ws, std::size_t from, std::size_t count) {
  std::string out;
  for (std::size_t k = from; k < from + count; ++k) {
    if (k > from) out += ' ';
    out += ws[k];
  }
  return out;
}

Iri class_iri(std::string_view name) {
  if (name.find(':') != std::string_view::npos) return kg::parse_iri(name);
  return Iri{"uco", std::string(name)};
}

bool names_class(std::string_view item) {
  return !item.empty() && (std::isupper(static_cast<unsigned char>(item.front())) ||
                           item.find(':') != std::string_view::npos);
}

void fire(const ExtractionPattern& p, const std::vector<Token>& tokens, std::size_t element,
          std::size_t from, std::vector<std::size_t>& picked, kg::KnowledgeGraph& g) {
  if (element == p.trigger.size()) {
    for (const Emission& e : p.emits) {
      const Iri& s = tokens[picked[e.subject]].entity->entity;
      const Iri& o = tokens[picked[e.object]].entity->entity;
      if (s != o) g.add(s, e.relation, o);
    }
    return;
  }
  const PatternElement& want = p.trigger[element];
  for (std::size_t i = from; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    const bool ok = want.is_class ? (t.entity && t.entity->cls == want.cls)
                                  : (!t.entity && t.text == want.keyword);
    if (!ok) continue;
    picked.push_back(i);
    fire(p, tokens, element + 1, i + 1, picked, g);
    picked.pop_back();
  }
}

}  // namespace

void Gazetteer::add(std::string_view phrase, const Iri& cls, std::string_view entity) {
  const auto ws = words(phrase);
  if (ws.empty()) throw Error(ErrorCode::InvalidArgument, "empty gazetteer phrase");
  const std::string key = join(ws, 0, ws.size());
  Iri e = entity.empty() ? Iri::entity(key) : Iri::entity(entity);
  if (!kg::valid_local(e.local, true)) {
    throw Error(ErrorCode::InvalidArgument, "gazetteer entity '" + e.local + "' is not a valid name");
  }
  entries[key] = GazetteerEntry{std::move(e), cls};
  longest_ = std::max(longest_, ws.size());
}

Gazetteer parse_gazetteer(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("gazetteer is not valid JSON: ") + e.what());
  }
  Gazetteer g;
  try {
    const json& entries = j.is_array() ? j : j.at("entries");
    for (const json& e : entries) {
      g.add(e.at("phrase").get<std::string>(), class_iri(e.at("class").get<std::string>()),
            e.value("entity", std::string()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("gazetteer schema: ") + e.what());
  }
  return g;
}

std::string gazetteer_to_json(const Gazetteer& gazetteer) {
  json entries = json::array();
  for (const auto& [phrase, e] : gazetteer.entries) {
    entries.push_back({{"phrase", phrase}, {"entity", e.entity.local}, {"class", e.cls.render()}});
  }
  return json{{"entries", entries}}.dump(2) + "\n";
}

Gazetteer load_gazetteer(const std::filesystem::path& path) { return parse_gazetteer(read_text(path)); }

void ExtractionPattern::validate() const {
  if (trigger.empty()) throw Error(ErrorCode::MalformedPattern, "pattern '" + name + "' has an empty trigger");
  for (const Emission& e : emits) {
    if (e.relation.prefix != "uco") {
      throw Error(ErrorCode::MalformedPattern,
                  "pattern '" + name + "' emits " + e.relation.render() + ", which is not a uco relation");
    }
    for (std::size_t idx : {e.subject, e.object}) {
      if (idx >= trigger.size() || !trigger[idx].is_class) {
        throw Error(ErrorCode::MalformedPattern,
                    "pattern '" + name + "' emits from element " + std::to_string(idx) +
                        ", which is not a class element");
      }
    }
  }
}

std::vector<ExtractionPattern> parse_patterns(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("patterns are not valid JSON: ") + e.what());
  }
  std::vector<ExtractionPattern> out;
  try {
    const json& list = j.is_array() ? j : j.at("patterns");
    for (const json& jp : list) {
      ExtractionPattern p;
      p.name = jp.at("name").get<std::string>();
      for (const json& item : jp.at("trigger")) {
        const auto text = item.get<std::string>();
        if (names_class(text)) {
          p.trigger.push_back({true, class_iri(text), ""});
        } else {
          p.trigger.push_back({false, Iri{}, text});
        }
      }
      for (const json& e : jp.at("emits")) {
        if (!e.is_array() || e.size() != 3) {
          throw Error(ErrorCode::MalformedPattern, "pattern '" + p.name + "': emission needs [subject, relation, object]");
        }
        p.emits.push_back({e[0].get<std::size_t>(), kg::parse_iri(e[1].get<std::string>()), e[2].get<std::size_t>()});
      }
      p.validate();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedPattern, std::string("pattern schema: ") + e.what());
  }
  return out;
}

std::string patterns_to_json(const std::vector<ExtractionPattern>& patterns) {
  json list = json::array();
  for (const auto& p : patterns) {
    json trigger = json::array();
    for (const auto& el : p.trigger) trigger.push_back(el.is_class ? el.cls.render() : el.keyword);
    json emits = json::array();
    for (const auto& e : p.emits) emits.push_back({e.subject, e.relation.render(), e.object});
    list.push_back({{"name", p.name}, {"trigger", trigger}, {"emits", emits}});
  }
  return json{{"patterns", list}}.dump(2) + "\n";
}

std::vector<ExtractionPattern> load_patterns(const std::filesystem::path& path) {
  return parse_patterns(read_text(path));
}

Gazetteer bundled_gazetteer() {
  Gazetteer g;
  const Iri product = kg::vocab::product;
  const Iri vuln = kg::vocab::vulnerability;
  const Iri attacker{"uco", "Attacker"};
  const Iri means{"uco", "Means"};
  g.add("microsoft internet explorer", product, "Microsoft_Internet_Explorer");
  g.add("internet explorer", product, "Microsoft_Internet_Explorer");
  g.add("google chrome", product, "Google_Chrome");
  g.add("chrome", product, "Google_Chrome");
  g.add("mozilla firefox", product, "Firefox");
  g.add("firefox", product, "Firefox");
  g.add("mozilla thunderbird", product, "Thunderbird");
  g.add("thunderbird", product, "Thunderbird");
  g.add("mysql", product, "MySQL");
  g.add("android", product, "Android");
  g.add("microsoft windows", product, "Windows");
  g.add("windows", product, "Windows");
  g.add("linux kernel", product, "Linux_Kernel");
  g.add("apache http server", product, "Apache_HTTP_Server");
  g.add("openssl", product, "OpenSSL");
  g.add("adobe flash player", product, "Adobe_Flash_Player");
  g.add("oracle database", product, "Oracle_Database");
  g.add("execute arbitrary code", vuln, "execute_arbitrary_code");
  g.add("denial of service", vuln, "denial_of_service");
  g.add("sql injection", vuln, "sql_injection");
  g.add("cross-site scripting", vuln, "cross-site_scripting");
  g.add("cross-site request forgery", vuln, "cross-site_request_forgery");
  g.add("buffer overflow", vuln, "buffer_overflow");
  g.add("heap-based buffer overflow", vuln, "buffer_overflow");
  g.add("gain privileges", vuln, "privilege_escalation");
  g.add("privilege escalation", vuln, "privilege_escalation");
  g.add("obtain sensitive information", vuln, "information_disclosure");
  g.add("directory traversal", vuln, "directory_traversal");
  g.add("bypass authentication", vuln, "authentication_bypass");
  g.add("use-after-free", vuln, "use-after-free");
  g.add("remote attackers", attacker, "remote_attackers");
  g.add("local users", attacker, "local_users");
  g.add("remote authenticated users", attacker, "remote_authenticated_users");
  g.add("physically proximate attackers", attacker, "physically_proximate_attackers");
  g.add("crafted web site", means, "crafted_web_site");
  g.add("crafted request", means, "crafted_request");
  g.add("crafted file", means, "crafted_file");
  g.add("crafted sql statement", means, "crafted_sql_statement");
  g.add("long string", means, "long_string");
  g.add("malicious script", means, "malicious_script");
  return g;
}

std::vector<ExtractionPattern> bundled_patterns() {
  const PatternElement product{true, kg::vocab::product, ""};
  const PatternElement vuln{true, kg::vocab::vulnerability, ""};
  const PatternElement attacker{true, Iri{"uco", "Attacker"}, ""};
  const PatternElement means{true, Iri{"uco", "Means"}, ""};
  auto keyword = [](const char* w) { return PatternElement{false, Iri{}, w}; };
  return {
      {"product_vulnerability", {product, vuln},
       {{0, kg::vocab::has_vulnerability, 1}, {1, kg::vocab::affects_product, 0}}},
      {"vulnerability_in_product", {vuln, keyword("in"), product},
       {{2, kg::vocab::has_vulnerability, 0}, {0, kg::vocab::affects_product, 2}}},
      {"attacker_vulnerability", {attacker, vuln}, {{1, kg::vocab::has_attacker, 0}}},
      {"vulnerability_via_means", {vuln, keyword("via"), means}, {{0, kg::vocab::has_means, 2}}},
  };
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",   "by",   "can",   "for",  "from",
      "has",  "have", "in",   "is",   "it",   "its",  "of",   "on",   "or",    "that", "the",
      "this", "to",   "was",  "were", "will", "with", "via",  "aka",  "which", "when", "than",
      "into", "may",  "been", "such", "also", "but",  "not",  "if",   "all",   "any",  "these"};
  return words;
}

std::vector<Token> chunk(std::string_view text, const Gazetteer& gazetteer, const TokenNormalizer& normalizer) {
  const auto ws = words(text);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < ws.size()) {
    bool matched = false;
    for (std::size_t len = std::min(gazetteer.longest_phrase(), ws.size() - i); len >= 1; --len) {
      const auto it = gazetteer.entries.find(join(ws, i, len));
      if (it == gazetteer.entries.end()) continue;
      out.push_back({kg::normalize_token(it->second.entity.local), &it->second});
      i += len;
      matched = true;
      break;
    }
    if (!matched) {
      out.push_back({normalizer ? normalizer(ws[i]) : ws[i], nullptr});
      ++i;
    }
  }
  return out;
}

std::vector<std::string> preprocess(std::string_view text, const Gazetteer& gazetteer,
                                    const std::set<std::string>& stopwords, const TokenNormalizer& normalizer) {
  std::vector<std::string> out;
  for (Token& t : chunk(text, gazetteer, normalizer)) {
    if (t.entity || !stopwords.count(t.text)) out.push_back(std::move(t.text));
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
    out.emplace_back(text.substr(start, i + 1 - start));
    start = i + 1;
  }
  if (start < text.size()) out.emplace_back(text.substr(start));
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const std::string& s) {
                             return std::all_of(s.begin(), s.end(),
                                                [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
                           }),
            out.end());
  return out;
}

std::uint32_t fnv1a(std::string_view data) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : data) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

Iri intelligence_node(std::string_view document_id) {
  return Iri{"", "Int" + std::to_string(fnv1a(document_id))};
}

DocumentGraph extract_document_graph(const Document& doc, const Gazetteer& gazetteer,
                                     const std::vector<ExtractionPattern>& patterns) {
  DocumentGraph out{kg::KnowledgeGraph{}, intelligence_node(doc.id)};
  kg::KnowledgeGraph& g = out.graph;
  for (const std::string& sentence : split_sentences(doc.text)) {
    const auto tokens = chunk(sentence, gazetteer);
    for (const Token& t : tokens) {
      if (t.entity) g.add(t.entity->entity, kg::vocab::rdf_type, t.entity->cls);
    }
    for (const ExtractionPattern& p : patterns) {
      std::vector<std::size_t> picked;
      fire(p, tokens, 0, 0, picked, g);
    }
  }
  std::vector<Iri> reported;
  for (const kg::Triple* t : g.with_predicate(kg::vocab::has_vulnerability)) {
    if (const Iri* o = kg::as_iri(t->object)) reported.push_back(*o);
  }
  g.add(out.intelligence, kg::vocab::rdf_type, kg::vocab::intelligence);
  for (const Iri& v : reported) g.add(out.intelligence, kg::vocab::intel_has_vulnerability, v);
  if (!doc.timestamp.empty()) g.add(out.intelligence, kg::vocab::intel_timestamp, kg::Literal{doc.timestamp});
  if (!doc.source.empty()) g.add(out.intelligence, kg::vocab::intel_source, kg::Literal{doc.source});
  return out;
}

kg::KnowledgeGraph merge_graphs(const std::vector<kg::KnowledgeGraph>& graphs) {
  std::map<std::string, std::string> canonical;
  auto note = [&](const Iri& i) {
    if (!i.is_entity()) return;
    auto [it, inserted] = canonical.emplace(kg::normalize_token(i.local), i.local);
    if (!inserted && i.local < it->second) it->second = i.local;
  };
  kg::PrefixTable prefixes = kg::default_prefixes();
  for (const auto& g : graphs) {
    for (const auto& [label, expansion] : g.prefixes()) prefixes.emplace(label, expansion);
    for (const kg::Triple& t : g.triples()) {
      note(t.subject);
      if (const Iri* o = kg::as_iri(t.object)) note(*o);
    }
  }
  auto canon = [&](const Iri& i) {
    return i.is_entity() ? Iri{"", canonical.at(kg::normalize_token(i.local))} : i;
  };
  kg::KnowledgeGraph merged(prefixes);
  for (const auto& g : graphs) {
    for (const kg::Triple& t : g.triples()) {
      kg::Term object = t.object;
      if (const Iri* o = kg::as_iri(t.object)) object = canon(*o);
      merged.add(canon(t.subject), t.predicate, object);
    }
  }
  return merged;
}

std::vector<Document> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<Document> docs;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    json j;
    try {
      j = json::parse(read_text(manifest));
      for (const json& d : j.at("documents")) {
        Document doc;
        doc.id = d.at("id").get<std::string>();
        doc.source = d.value("source", std::string("other"));
        doc.timestamp = d.value("timestamp", std::string());
        doc.text = d.contains("text") ? d.at("text").get<std::string>()
                                      : read_text(dir / d.at("file").get<std::string>());
        docs.push_back(std::move(doc));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, "corpus manifest: " + std::string(e.what()));
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.stem().string(), "other", read_text(f), ""});
  }
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents in " + dir.string());
  std::set<std::string> ids;
  for (const auto& d : docs) {
    if (!ids.insert(d.id).second) throw Error(ErrorCode::InvalidArgument, "document id '" + d.id + "' repeats");
  }
  return docs;
}

void save_corpus(const std::filesystem::path& dir, const std::vector<Document>& docs) {
  json list = json::array();
  for (const auto& d : docs) {
    const std::string file = d.id + ".txt";
    write_text(dir / file, d.text);
    list.push_back({{"id", d.id}, {"file", file}, {"source", d.source}, {"timestamp", d.timestamp}});
  }
  write_text(dir / "manifest.json", json{{"documents", list}}.dump(2) + "\n");
}

}  // namespace vkg::ingest
