#include "vkg/alert/alerts.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace vkg::alert {

namespace {

using nlohmann::json;
using namespace std::chrono;

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw Error(ErrorCode::InvalidArgument, "timestamp too short: " + std::string(text));
  int v = 0;
  const auto res = std::from_chars(text.data() + pos, text.data() + pos + len, v);
  if (res.ec != std::errc() || res.ptr != text.data() + pos + len) {
    throw Error(ErrorCode::InvalidArgument, "bad timestamp '" + std::string(text) + "'");
  }
  return v;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::InvalidArgument, "bad timestamp '" + std::string(text) + "'");
  }
}

std::string render_term(const PatternTerm& t) {
  return t.is_variable() ? "?" + t.variable : kg::render(t.term);
}

bool binds(const PatternTerm& t, Bindings& b, const Term& value) {
  if (!t.is_variable()) return t.term == value;
  const auto it = b.find(t.variable);
  if (it != b.end()) return it->second == value;
  b.emplace(t.variable, value);
  return true;
}

std::optional<Term> resolved(const PatternTerm& t, const Bindings& b) {
  if (!t.is_variable()) return t.term;
  const auto it = b.find(t.variable);
  if (it == b.end()) return std::nullopt;
  return it->second;
}

bool current(const kg::KnowledgeGraph& g, const Bindings& b, TimePoint now, int window_days) {
  for (const auto& [var, value] : b) {
    const Iri* node = kg::as_iri(value);
    if (!node || !g.contains({*node, kg::vocab::rdf_type, kg::vocab::intelligence})) continue;
    std::optional<TimePoint> latest;
    for (const Term& t : g.objects(*node, kg::vocab::intel_timestamp)) {
      const auto* lit = std::get_if<kg::Literal>(&t);
      if (!lit) continue;
      try {
        const TimePoint ts = parse_timestamp(lit->value);
        if (!latest || ts > *latest) latest = ts;
      } catch (const Error&) {
      }
    }
    if (!latest) return false;
    if (now - *latest > days(window_days)) return false;
  }
  return true;
}

void search(const kg::KnowledgeGraph& g, const Rule& rule, std::size_t at, Bindings& b,
            std::vector<Triple>& evidence, TimePoint now, std::vector<Match>& out) {
  if (at == rule.antecedent.size()) {
    if (current(g, b, now, rule.window_days)) out.push_back({b, evidence});
    return;
  }
  const Pattern& p = rule.antecedent[at];
  const auto s = resolved(p.subject, b);
  const auto pr = resolved(p.predicate, b);
  const auto o = resolved(p.object, b);
  auto visit = [&](const Triple& t) {
    Bindings next = b;
    if (!binds(p.subject, next, t.subject) || !binds(p.predicate, next, t.predicate) ||
        !binds(p.object, next, t.object)) {
      return;
    }
    evidence.push_back(t);
    search(g, rule, at + 1, next, evidence, now, out);
    evidence.pop_back();
  };
  if (s && kg::as_iri(*s)) {
    for (const Triple* t : g.with_subject(*kg::as_iri(*s))) visit(*t);
  } else if (o && kg::as_iri(*o)) {
    for (const Triple* t : g.with_object(*kg::as_iri(*o))) visit(*t);
  } else if (pr && kg::as_iri(*pr)) {
    for (const Triple* t : g.with_predicate(*kg::as_iri(*pr))) visit(*t);
  } else {
    for (const Triple& t : g.triples()) visit(t);
  }
}

}  // namespace

TimePoint parse_timestamp(std::string_view text) {
  const int y = read_int(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = read_int(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = read_int(text, 8, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error(ErrorCode::InvalidArgument, "invalid date '" + std::string(text) + "'");
  TimePoint t = sys_days{ymd};
  std::size_t pos = 10;
  if (pos == text.size()) return t;
  if (text[pos] != 'T' && text[pos] != ' ') throw Error(ErrorCode::InvalidArgument, "bad timestamp '" + std::string(text) + "'");
  const int hh = read_int(text, pos + 1, 2);
  expect_char(text, pos + 3, ':');
  const int mm = read_int(text, pos + 4, 2);
  expect_char(text, pos + 6, ':');
  const int ss = read_int(text, pos + 7, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw Error(ErrorCode::InvalidArgument, "invalid time '" + std::string(text) + "'");
  t += hours(hh) + minutes(mm) + seconds(ss);
  pos += 9;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  if (pos == text.size()) return t;
  if (text[pos] == 'Z' && pos + 1 == text.size()) return t;
  if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size()) {
    const int oh = read_int(text, pos + 1, 2);
    expect_char(text, pos + 3, ':');
    const int om = read_int(text, pos + 4, 2);
    const auto offset = hours(oh) + minutes(om);
    return text[pos] == '+' ? t - offset : t + offset;
  }
  throw Error(ErrorCode::InvalidArgument, "bad timestamp suffix in '" + std::string(text) + "'");
}

std::string format_timestamp(TimePoint t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

PatternTerm parse_pattern_term(std::string_view text) {
  if (!text.empty() && text.front() == '?') {
    const std::string_view name = text.substr(1);
    const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
    if (!ok) throw Error(ErrorCode::MalformedPattern, "bad variable '" + std::string(text) + "'");
    return {std::string(name), Term{}};
  }
  try {
    return {"", kg::parse_term(text)};
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedPattern, "bad pattern term '" + std::string(text) + "': " + e.what());
  }
}

void Rule::validate() const {
  if (name.empty()) throw Error(ErrorCode::MalformedPattern, "rule without a name");
  if (antecedent.empty()) throw Error(ErrorCode::MalformedPattern, "rule '" + name + "' has no antecedent");
  if (window_days < 0) throw Error(ErrorCode::MalformedPattern, "rule '" + name + "' has a negative window");
  std::set<std::string> vars;
  for (const Pattern& p : antecedent) {
    for (const PatternTerm* t : {&p.subject, &p.predicate, &p.object}) {
      if (t->is_variable()) vars.insert(t->variable);
    }
    if (!p.subject.is_variable() && !std::holds_alternative<Iri>(p.subject.term)) {
      throw Error(ErrorCode::MalformedPattern, "rule '" + name + "': literal in subject position");
    }
    if (!p.predicate.is_variable() && !std::holds_alternative<Iri>(p.predicate.term)) {
      throw Error(ErrorCode::MalformedPattern, "rule '" + name + "': literal in predicate position");
    }
  }
  for (const std::string* v : {&product_var, &vulnerability_var}) {
    if (!vars.count(*v)) {
      throw Error(ErrorCode::MalformedPattern,
                  "rule '" + name + "': consequent variable ?" + *v + " is not bound by the antecedent");
    }
  }
}

const Rule* Rulebook::find(std::string_view name) const {
  for (const Rule& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

Rulebook default_rulebook() {
  Rule r;
  r.name = "current_vulnerability";
  r.antecedent = {
      {parse_pattern_term("?i"), parse_pattern_term("a"), parse_pattern_term("intel:Intelligence")},
      {parse_pattern_term("?i"), parse_pattern_term("intel:hasVulnerability"), parse_pattern_term("?v")},
      {parse_pattern_term("?p"), parse_pattern_term("uco:hasVulnerability"), parse_pattern_term("?v")}};
  r.product_var = "p";
  r.vulnerability_var = "v";
  return {{r}};
}

Rulebook parse_rulebook(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("rulebook is not valid JSON: ") + e.what());
  }
  Rulebook book;
  try {
    const json& rules = j.is_array() ? j : j.at("rules");
    std::set<std::string> names;
    for (const json& jr : rules) {
      Rule r;
      r.name = jr.at("name").get<std::string>();
      r.window_days = jr.value("window_days", 30);
      for (const json& pat : jr.at("antecedent")) {
        if (!pat.is_array() || pat.size() != 3) {
          throw Error(ErrorCode::MalformedPattern, "rule '" + r.name + "': a pattern needs three terms");
        }
        r.antecedent.push_back({parse_pattern_term(pat[0].get<std::string>()),
                                parse_pattern_term(pat[1].get<std::string>()),
                                parse_pattern_term(pat[2].get<std::string>())});
      }
      const json& head = jr.at("consequent");
      auto var = [&](const char* key) {
        const auto text = head.at(key).get<std::string>();
        if (text.size() < 2 || text[0] != '?') {
          throw Error(ErrorCode::MalformedPattern, "rule '" + r.name + "': consequent " + key + " must be a variable");
        }
        return text.substr(1);
      };
      r.product_var = var("product");
      r.vulnerability_var = var("vulnerability");
      r.validate();
      if (!names.insert(r.name).second) {
        throw Error(ErrorCode::MalformedPattern, "rule '" + r.name + "' is defined twice");
      }
      book.rules.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedPattern, std::string("rulebook schema: ") + e.what());
  }
  return book;
}

std::string rulebook_to_json(const Rulebook& book) {
  json rules = json::array();
  for (const Rule& r : book.rules) {
    json pats = json::array();
    for (const Pattern& p : r.antecedent) {
      pats.push_back({render_term(p.subject), render_term(p.predicate), render_term(p.object)});
    }
    rules.push_back({{"name", r.name},
                     {"window_days", r.window_days},
                     {"antecedent", pats},
                     {"consequent", {{"product", "?" + r.product_var}, {"vulnerability", "?" + r.vulnerability_var}}}});
  }
  return json{{"rules", rules}}.dump(2) + "\n";
}

Rulebook load_rulebook(const std::filesystem::path& path) { return parse_rulebook(read_text(path)); }

std::vector<Match> match_rule(const kg::KnowledgeGraph& graph, const Rule& rule, TimePoint now) {
  rule.validate();
  std::vector<Match> out;
  Bindings b;
  std::vector<Triple> evidence;
  search(graph, rule, 0, b, evidence, now, out);
  std::sort(out.begin(), out.end(), [](const Match& x, const Match& y) {
    return std::tie(x.bindings, x.evidence) < std::tie(y.bindings, y.evidence);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Match& x, const Match& y) { return x.bindings == y.bindings; }),
            out.end());
  return out;
}

std::optional<TimePoint> latest_intelligence(const kg::KnowledgeGraph& graph) {
  std::optional<TimePoint> latest;
  for (const Triple* t : graph.with_predicate(kg::vocab::intel_timestamp)) {
    const auto* lit = std::get_if<kg::Literal>(&t->object);
    if (!lit) continue;
    try {
      const TimePoint ts = parse_timestamp(lit->value);
      if (!latest || ts > *latest) latest = ts;
    } catch (const Error&) {
    }
  }
  return latest;
}

}  // namespace vkg::alert
