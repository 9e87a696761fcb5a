#include "vkg/kg/turtle.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <vector>

namespace vkg::kg {

namespace {

enum class TokenKind { Directive, IriRef, Name, String, Dot, Semicolon, Comma, End };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    if (pos_ >= text_.size()) return {TokenKind::End, "", line_};
    const char c = text_[pos_];
    const std::size_t line = line_;
    switch (c) {
      case '.': ++pos_; return {TokenKind::Dot, ".", line};
      case ';': ++pos_; return {TokenKind::Semicolon, ";", line};
      case ',': ++pos_; return {TokenKind::Comma, ",", line};
      case '<': return iri_ref();
      case '"': return string();
      case '@': {
        std::string word = word_run();
        return {TokenKind::Directive, word, line};
      }
      default: break;
    }
    std::string word = word_run();
    if (word.empty()) fail("unexpected character '" + std::string(1, c) + "'");
    return {TokenKind::Name, word, line};
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::TurtleSyntax, "line " + std::to_string(line_) + ": " + what, line_);
  }

 private:
  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token iri_ref() {
    const std::size_t line = line_;
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '>') {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) fail("whitespace inside <...>");
      ++pos_;
    }
    if (pos_ >= text_.size()) fail("unterminated <...>");
    ++pos_;
    return {TokenKind::IriRef, std::string(text_.substr(start, pos_ - start)), line};
  }

  Token string() {
    const std::size_t line = line_;
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) fail("unterminated string literal");
    ++pos_;
    return {TokenKind::String, std::string(text_.substr(start, pos_ - start)), line};
  }

  // Prefixed names run to whitespace or punctuation; a trailing '.' is the
  // statement terminator, never part of the name.
  std::string word_run() {
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == ';' || c == ',' || c == '<' ||
          c == '>' || c == '"') {
        break;
      }
      ++pos_;
    }
    while (pos_ > start && text_[pos_ - 1] == '.') --pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  KnowledgeGraph run() {
    KnowledgeGraph graph;
    while (current_.kind != TokenKind::End) {
      if (current_.kind == TokenKind::Directive) {
        prefix_directive(graph);
      } else {
        statement(graph);
      }
    }
    return graph;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::TurtleSyntax, "line " + std::to_string(current_.line) + ": " + what,
                current_.line);
  }

  void expect(TokenKind kind, const char* what) {
    if (current_.kind != kind) fail(std::string("expected ") + what + ", found '" + current_.text + "'");
    advance();
  }

  void prefix_directive(KnowledgeGraph& graph) {
    if (current_.text != "@prefix") fail("unsupported directive '" + current_.text + "'");
    advance();
    if (current_.kind != TokenKind::Name || current_.text.empty() || current_.text.back() != ':') {
      fail("expected prefix label ending in ':'");
    }
    std::string label = current_.text.substr(0, current_.text.size() - 1);
    advance();
    if (current_.kind != TokenKind::IriRef) fail("expected <namespace> in @prefix");
    std::string expansion = current_.text.substr(1, current_.text.size() - 2);
    advance();
    expect(TokenKind::Dot, "'.' after @prefix");
    graph.declare_prefix(label, expansion);
  }

  Iri iri_token(const KnowledgeGraph& graph) {
    if (current_.kind != TokenKind::IriRef && current_.kind != TokenKind::Name) {
      fail("expected IRI, found '" + current_.text + "'");
    }
    Iri iri;
    try {
      iri = current_.text == "a" ? vocab::rdf_type : parse_iri(current_.text);
    } catch (const Error& e) {
      fail(e.what());
    }
    if (!graph.declared(iri)) {
      throw Error(ErrorCode::UndeclaredPrefix,
                  "line " + std::to_string(current_.line) + ": prefix '" + iri.prefix + "'",
                  current_.line);
    }
    advance();
    return iri;
  }

  Term object_token(const KnowledgeGraph& graph) {
    if (current_.kind == TokenKind::String) {
      Term term = parse_term(current_.text);
      advance();
      return term;
    }
    return iri_token(graph);
  }

  void statement(KnowledgeGraph& graph) {
    const Iri subject = iri_token(graph);
    while (true) {
      const Iri predicate = iri_token(graph);
      while (true) {
        graph.add(subject, predicate, object_token(graph));
        if (current_.kind != TokenKind::Comma) break;
        advance();
      }
      if (current_.kind == TokenKind::Semicolon) {
        advance();
        if (current_.kind == TokenKind::Dot) break;
        continue;
      }
      break;
    }
    expect(TokenKind::Dot, "'.' or ';'");
  }

  Lexer lexer_;
  Token current_{TokenKind::End, "", 0};
};

}  // namespace

KnowledgeGraph parse_turtle(std::string_view text) { return Parser(text).run(); }

std::string serialize_turtle(const KnowledgeGraph& graph) {
  std::ostringstream out;
  for (const auto& [label, expansion] : graph.prefixes()) {
    out << "@prefix " << label << ": <" << expansion << "> .\n";
  }

  // subject -> predicate -> objects, all keyed by rendered text.
  std::map<std::string, std::map<std::string, std::vector<std::string>>> grouped;
  for (const Triple& t : graph.triples()) {
    const std::string predicate =
        t.predicate == vocab::rdf_type ? std::string("a") : t.predicate.render();
    grouped[t.subject.render()][predicate].push_back(render(t.object));
  }

  for (auto& [subject, predicates] : grouped) {
    out << "\n" << subject;
    std::vector<std::string> order;
    if (predicates.count("a")) order.emplace_back("a");
    for (const auto& [p, _] : predicates) {
      if (p != "a") order.push_back(p);
    }
    bool first = true;
    for (const std::string& p : order) {
      auto& objects = predicates[p];
      std::sort(objects.begin(), objects.end());
      for (const std::string& o : objects) {
        out << (first ? " " : " ;\n    ") << p << " " << o;
        first = false;
      }
    }
    out << " .\n";
  }
  return out.str();
}

KnowledgeGraph load_turtle(const std::filesystem::path& path) {
  return parse_turtle(read_text(path));
}

void save_turtle(const KnowledgeGraph& graph, const std::filesystem::path& path) {
  write_text(path, serialize_turtle(graph));
}

}  // namespace vkg::kg
