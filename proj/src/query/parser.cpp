#include "vkg/query/ast.hpp"

#include "vkg/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

namespace vkg::query {

namespace {

enum class Tok { Open, Close, Comma, Separator, Quoted, Word, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

[[noreturn]] void syntax(std::size_t pos, std::string_view expected, std::string_view found) {
  throw Error(ErrorCode::SyntaxError, "at position " + std::to_string(pos) + ": expected " +
                                          std::string(expected) + ", found " + std::string(found));
}

// Opening quote -> closing quote.
const std::pair<std::string_view, std::string_view> kQuotes[] = {
    {"'", "'"}, {"\"", "\""}, {"`", "'"}, {"‘", "’"}, {"“", "”"}};
constexpr std::string_view kUnion = "∪";

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.' ||
         c == '*' || c == '<' || c == '>' || c == '#';
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '{' || c == '}' || c == ',' || c == ';') {
      const Tok k = c == '{' ? Tok::Open : c == '}' ? Tok::Close : c == ',' ? Tok::Comma : Tok::Separator;
      out.push_back({k, std::string(1, c), i});
      ++i;
      continue;
    }
    if (text.substr(i, kUnion.size()) == kUnion) {
      out.push_back({Tok::Separator, std::string(kUnion), i});
      i += kUnion.size();
      continue;
    }
    bool quoted = false;
    for (const auto& [open, close] : kQuotes) {
      if (text.substr(i, open.size()) != open) continue;
      const std::size_t start = i + open.size();
      const std::size_t end = text.find(close, start);
      if (end == std::string_view::npos) syntax(i, "closing quote", "end of query");
      out.push_back({Tok::Quoted, std::string(text.substr(start, end - start)), i});
      i = end + close.size();
      quoted = true;
      break;
    }
    if (quoted) continue;
    if (word_char(c)) {
      const std::size_t start = i;
      while (i < text.size() && word_char(text[i])) ++i;
      out.push_back({Tok::Word, std::string(text.substr(start, i - start)), start});
      continue;
    }
    syntax(i, "'{', '}', ',', ';', a quote or a name", std::string("'") + c + "'");
  }
  out.push_back({Tok::End, "", text.size()});
  return out;
}

bool identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::optional<std::size_t> integer(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct RawClause {
  std::string command;
  std::size_t pos;
  std::vector<Token> args;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  std::vector<RawClause> clauses() {
    // Optional outer braces: `{{...} ; {...}}`.
    bool outer = false;
    if (peek().kind == Tok::Open && toks_.size() > 1 && toks_[1].kind == Tok::Open) {
      ++at_;
      outer = true;
    }
    std::vector<RawClause> out;
    out.push_back(clause());
    while (peek().kind == Tok::Separator) {
      ++at_;
      out.push_back(clause());
    }
    if (outer) expect(Tok::Close, "'}' closing the query");
    expect(Tok::End, "';', '∪' or end of query");
    return out;
  }

 private:
  const Token& peek() const { return toks_[at_]; }

  const Token& expect(Tok kind, std::string_view expected) {
    const Token& t = peek();
    if (t.kind != kind) syntax(t.pos, expected, t.kind == Tok::End ? "end of query" : "'" + t.text + "'");
    ++at_;
    return t;
  }

  RawClause clause() {
    expect(Tok::Open, "'{' starting a clause");
    const Token& cmd = expect(Tok::Word, "command name");
    RawClause rc{cmd.text, cmd.pos, {}};
    while (peek().kind == Tok::Comma) {
      ++at_;
      const Token& t = peek();
      if (t.kind != Tok::Word && t.kind != Tok::Quoted) {
        syntax(t.pos, "argument", t.kind == Tok::End ? "end of query" : "'" + t.text + "'");
      }
      rc.args.push_back(t);
      ++at_;
    }
    const Token& t = peek();
    if (t.kind != Tok::Close) {
      syntax(t.pos, "',' or '}'", t.kind == Tok::End ? "end of query" : "'" + t.text + "'");
    }
    ++at_;
    return rc;
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
};

std::string set_name(const Token& t, std::string_view role) {
  if (t.kind != Tok::Word || !identifier(t.text)) {
    syntax(t.pos, std::string(role) + " (an identifier)", "'" + t.text + "'");
  }
  return t.text;
}

Arg to_arg(const Token& t) { return Arg{t.kind == Tok::Quoted, t.text}; }

Clause build(const RawClause& rc, const std::set<std::string>& produced) {
  const auto& a = rc.args;
  auto need = [&](std::size_t lo, std::size_t hi, std::string_view shape) {
    if (a.size() < lo || a.size() > hi) {
      syntax(rc.pos, shape, std::to_string(a.size()) + " arguments");
    }
  };
  if (rc.command == "search") {
    need(2, 4, "{search, 'term', [class], SetName, [k]}");
    SearchClause s;
    s.seed = a[0].text;
    std::size_t rest = a.size();
    if (rest >= 3) {
      if (auto k = integer(a.back().text); k && a.back().kind == Tok::Word) {
        if (*k == 0) syntax(a.back().pos, "positive k", "0");
        s.k = *k;
        --rest;
      }
    }
    if (rest == 3) s.class_filter = a[1].text;
    if (rest != 2 && rest != 3) syntax(rc.pos, "{search, 'term', [class], SetName, [k]}", "extra arguments");
    s.out = set_name(a[rest - 1], "output set name");
    return s;
  }
  if (rc.command == "list") {
    need(3, 3, "{list, relation, 'entity' | SetName, SetName}");
    ListClause l;
    l.relation = a[0].text;
    l.subject = to_arg(a[1]);
    l.out = set_name(a[2], "output set name");
    return l;
  }
  if (rc.command == "infer") {
    need(1, 64, "{infer, [rule], args..., Name}");
    InferClause inf;
    inf.rule = std::string(kDefaultRule);
    std::size_t first = 0;
    if (a.size() >= 2 && a[0].kind == Tok::Word && identifier(a[0].text) && !produced.count(a[0].text)) {
      inf.rule = a[0].text;
      first = 1;
    }
    for (std::size_t i = first; i + 1 < a.size(); ++i) inf.args.push_back(to_arg(a[i]));
    inf.out = set_name(a.back(), "output name");
    return inf;
  }
  throw Error(ErrorCode::UnknownCommand, "'" + rc.command + "' at position " + std::to_string(rc.pos) +
                                             " (commands: search, list, infer)");
}

std::string quote(const std::string& s) {
  if (s.find('\'') == std::string::npos) return "'" + s + "'";
  return "\"" + s + "\"";
}

std::string print_arg(const Arg& a) { return a.quoted ? quote(a.text) : a.text; }

}  // namespace

Command command_of(const Clause& clause) { return static_cast<Command>(clause.index()); }

std::string_view command_name(Command command) {
  switch (command) {
    case Command::Search: return "search";
    case Command::List: return "list";
    case Command::Infer: return "infer";
  }
  return "?";
}

std::string_view part_name(Part part) { return part == Part::Vector ? "vector" : "graph"; }

Part part_of(const Clause& clause) {
  return command_of(clause) == Command::Search ? Part::Vector : Part::Graph;
}

const std::string& output_of(const Clause& clause) {
  return std::visit([](const auto& c) -> const std::string& { return c.out; }, clause);
}

std::vector<std::string> inputs_of(const Clause& clause) {
  std::vector<std::string> out;
  if (const auto* l = std::get_if<ListClause>(&clause)) {
    if (!l->subject.quoted) out.push_back(l->subject.text);
  } else if (const auto* inf = std::get_if<InferClause>(&clause)) {
    for (const Arg& a : inf->args) {
      if (!a.quoted) out.push_back(a.text);
    }
  }
  return out;
}

void validate(const QueryAst& ast) {
  std::set<std::string> produced;
  for (const Clause& c : ast.clauses) {
    for (const std::string& in : inputs_of(c)) {
      if (!produced.count(in)) {
        throw Error(ErrorCode::UnboundSetName,
                    "'" + in + "' is used by " + print_clause(c) + " before any clause produces it");
      }
    }
    if (!produced.insert(output_of(c)).second) {
      throw Error(ErrorCode::DuplicateSetName, "'" + output_of(c) + "' is produced twice");
    }
  }
}

QueryAst parse_query(std::string_view text) {
  Parser parser(lex(text));
  QueryAst ast;
  std::set<std::string> produced;
  for (const RawClause& rc : parser.clauses()) {
    ast.clauses.push_back(build(rc, produced));
    produced.insert(output_of(ast.clauses.back()));
  }
  validate(ast);
  return ast;
}

std::string print_clause(const Clause& clause) {
  std::string out = "{";
  out += command_name(command_of(clause));
  if (const auto* s = std::get_if<SearchClause>(&clause)) {
    out += ", " + quote(s->seed);
    if (s->class_filter) out += ", " + *s->class_filter;
    out += ", " + s->out;
    if (s->k) out += ", " + std::to_string(*s->k);
  } else if (const auto* l = std::get_if<ListClause>(&clause)) {
    out += ", " + l->relation + ", " + print_arg(l->subject) + ", " + l->out;
  } else {
    const auto& inf = std::get<InferClause>(clause);
    out += ", " + inf.rule;
    for (const Arg& a : inf.args) out += ", " + print_arg(a);
    out += ", " + inf.out;
  }
  return out + "}";
}

std::string print_query(const QueryAst& ast) {
  std::string out;
  for (std::size_t i = 0; i < ast.clauses.size(); ++i) {
    if (i) out += " ; ";
    out += print_clause(ast.clauses[i]);
  }
  return out;
}

Decomposition decompose(const QueryAst& ast) {
  Decomposition d;
  std::map<std::string, std::size_t> producer;
  std::vector<std::size_t> level(ast.clauses.size(), 0);
  for (std::size_t i = 0; i < ast.clauses.size(); ++i) {
    const Clause& c = ast.clauses[i];
    (part_of(c) == Part::Vector ? d.vector_part : d.graph_part).push_back(i);
    for (const std::string& in : inputs_of(c)) {
      const auto it = producer.find(in);
      if (it != producer.end()) level[i] = std::max(level[i], level[it->second] + 1);
    }
    producer[output_of(c)] = i;
    if (d.plan.stages.size() <= level[i]) d.plan.stages.resize(level[i] + 1);
    d.plan.stages[level[i]].push_back(i);
  }
  return d;
}

}  // namespace vkg::query
