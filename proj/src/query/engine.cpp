#include "vkg/query/engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <exception>
#include <sstream>
#include <thread>

namespace vkg::query {

namespace {

std::string capitalized(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

/// The name itself plus a naive singular form ("vulnerabilities" -> "vulnerability").
std::vector<std::string> name_forms(std::string_view name) {
  std::vector<std::string> forms{std::string(name)};
  if (name.size() > 3 && name.substr(name.size() - 3) == "ies") {
    forms.push_back(std::string(name.substr(0, name.size() - 3)) + "y");
  } else if (name.size() > 1 && name.back() == 's') {
    forms.push_back(std::string(name.substr(0, name.size() - 1)));
  }
  return forms;
}

std::string join_iris(const std::set<Iri>& s) {
  std::string out;
  for (const Iri& i : s) {
    if (!out.empty()) out += ", ";
    out += i.render();
  }
  return out;
}

struct Outcome {
  std::optional<Binding> binding;
  std::optional<Verdict> verdict;
  TraceEntry trace;
  std::exception_ptr error;
};

}  // namespace

void RuleTable::add(const std::string& name, InferRule rule) { rules_[name] = std::move(rule); }

const InferRule* RuleTable::find(const std::string& name) const {
  const auto it = rules_.find(name);
  return it == rules_.end() ? nullptr : &it->second;
}

std::vector<std::string> RuleTable::names() const {
  std::vector<std::string> out;
  for (const auto& [name, rule] : rules_) out.push_back(name);
  return out;
}

RuleTable RuleTable::with_builtins() {
  RuleTable t;
  t.add(std::string(kDefaultRule),
        [](const core::VkgStore&, const std::vector<InferInput>& args) { return infer_overlap(args); });
  return t;
}

Verdict infer_overlap(const std::vector<InferInput>& args) {
  std::vector<const std::set<Iri>*> sets;
  std::vector<std::string> subjects;
  for (const InferInput& a : args) {
    if (a.is_set) {
      sets.push_back(&a.members);
    } else {
      subjects.push_back(a.text);
    }
  }
  if (sets.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "overlap needs at least two set arguments");
  }
  Verdict v;
  v.rule = std::string(kDefaultRule);
  v.witness = *sets[0];
  for (std::size_t i = 1; i < sets.size(); ++i) {
    std::set<Iri> next;
    std::set_intersection(v.witness.begin(), v.witness.end(), sets[i]->begin(), sets[i]->end(),
                          std::inserter(next, next.end()));
    v.witness = std::move(next);
  }
  v.value = !v.witness.empty();
  std::string who;
  for (const auto& s : subjects) who += (who.empty() ? "" : ", ") + s;
  v.detail = v.value ? "overlap of " + std::to_string(v.witness.size()) + " entities" : "no overlap";
  if (!who.empty()) v.detail += " for " + who;
  return v;
}

const Binding* QueryResult::binding(std::string_view name) const {
  for (const auto& b : bindings) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const Verdict* QueryResult::verdict(std::string_view name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::string QueryResult::to_text() const {
  std::ostringstream out;
  for (const Binding& b : bindings) {
    out << "set " << b.name << " (" << b.members.size() << "): " << join_iris(b.members) << "\n";
  }
  for (const Verdict& v : verdicts) {
    out << v.name << ": " << (v.value ? "yes" : "no") << " [" << v.rule << "] " << v.detail;
    if (!v.witness.empty()) out << "; witness: " << join_iris(v.witness);
    out << "\n";
  }
  out << "trace:\n";
  for (const TraceEntry& t : trace) {
    char micros[32];
    std::snprintf(micros, sizeof micros, "%.1f", t.micros);
    out << "  #" << t.clause << " " << command_name(t.command) << " -> " << part_name(t.part)
        << " part, stage " << t.stage + 1 << ", " << t.result_size << " results, " << micros << " us";
    if (!t.note.empty()) out << " (" << t.note << ")";
    out << "\n";
  }
  return out.str();
}

std::string QueryResult::to_json() const {
  using nlohmann::json;
  auto iris = [](const std::set<Iri>& s) {
    json a = json::array();
    for (const Iri& i : s) a.push_back(i.render());
    return a;
  };
  json j;
  j["bindings"] = json::array();
  for (const Binding& b : bindings) {
    json jb{{"name", b.name}, {"producer", b.producer}, {"members", iris(b.members)}};
    if (!b.ranked.empty()) {
      json r = json::array();
      for (const auto& h : b.ranked) r.push_back({{"entity", h.entity.render()}, {"similarity", h.similarity}});
      jb["ranked"] = r;
    }
    j["bindings"].push_back(jb);
  }
  j["verdicts"] = json::array();
  for (const Verdict& v : verdicts) {
    j["verdicts"].push_back({{"name", v.name}, {"rule", v.rule}, {"value", v.value},
                             {"witness", iris(v.witness)}, {"detail", v.detail}});
  }
  j["trace"] = json::array();
  for (const TraceEntry& t : trace) {
    j["trace"].push_back({{"clause", t.clause}, {"command", command_name(t.command)},
                          {"part", part_name(t.part)}, {"stage", t.stage}, {"micros", t.micros},
                          {"result_size", t.result_size}, {"note", t.note}});
  }
  return j.dump(2) + "\n";
}

QueryEngine::QueryEngine(const core::VkgStore& store, RuleTable rules, EngineOptions options)
    : store_(store), rules_(std::move(rules)), options_(options) {
  const auto& g = store_.graph();
  std::set<Iri> nodes;
  for (const kg::Triple& t : g.triples()) {
    nodes.insert(t.subject);
    if (const Iri* o = kg::as_iri(t.object); o && t.predicate != kg::vocab::rdf_type) nodes.insert(*o);
  }
  for (const Iri& n : nodes) by_normalized_[kg::normalize_token(n.local)].push_back(n);
}

std::optional<Iri> QueryEngine::resolve_entity(std::string_view term) const {
  const auto& g = store_.graph();
  if (!term.empty() && (term.front() == '<' || term.find(':') != std::string_view::npos)) {
    try {
      return kg::parse_iri(term);
    } catch (const Error&) {
    }
  }
  const Iri direct = Iri::entity(term);
  if (!g.with_subject(direct).empty() || !g.with_object(direct).empty()) return direct;
  const auto it = by_normalized_.find(kg::normalize_token(term));
  if (it == by_normalized_.end()) return std::nullopt;
  // Corpus entities sort first (empty prefix).
  return it->second.front();
}

Iri QueryEngine::resolve_relation(std::string_view name) const {
  if (name.find(':') != std::string_view::npos) return kg::parse_iri(name);
  if (name == "a" || name == "type") return kg::vocab::rdf_type;
  const auto preds = store_.graph().predicates();
  std::vector<Iri> candidates;
  for (const std::string& form : name_forms(name)) {
    candidates.push_back(Iri{"uco", "has" + capitalized(form)});
    candidates.push_back(Iri{"uco", form});
    candidates.push_back(Iri{"intel", "has" + capitalized(form)});
  }
  for (const Iri& c : candidates) {
    if (preds.count(c)) return c;
  }
  for (const Iri& p : preds) {
    for (const std::string& form : name_forms(name)) {
      if (kg::normalize_token(p.local) == kg::normalize_token(form)) return p;
    }
  }
  return candidates.front();
}

Iri QueryEngine::resolve_class(std::string_view name) const {
  if (name.find(':') != std::string_view::npos) return kg::parse_iri(name);
  for (const std::string& form : name_forms(name)) {
    for (const auto& [cls, supers] : store_.graph().classes()) {
      if (kg::normalize_token(cls.local) == kg::normalize_token(form)) return cls;
    }
  }
  return Iri{"uco", capitalized(name)};
}

QueryResult QueryEngine::execute(const QueryAst& ast) const {
  validate(ast);
  const Decomposition d = decompose(ast);
  QueryResult result;
  std::map<std::string, const Binding*> bound;
  std::vector<Outcome> outcomes(ast.clauses.size());

  auto run = [&](std::size_t index, std::size_t stage) {
    Outcome& o = outcomes[index];
    const Clause& clause = ast.clauses[index];
    o.trace.clause = index;
    o.trace.command = command_of(clause);
    o.trace.part = part_of(clause);
    o.trace.stage = stage;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (const auto* s = std::get_if<SearchClause>(&clause)) {
        const auto seed = resolve_entity(s->seed);
        if (!seed || !store_.linked(*seed)) {
          throw Error(ErrorCode::UnlinkedEntity, "search seed '" + s->seed + "' has no vector");
        }
        core::SearchOptions opts;
        opts.k = s->k.value_or(options_.default_k);
        if (s->class_filter) {
          if (*s->class_filter != "*" && *s->class_filter != "any") opts.class_filter = resolve_class(*s->class_filter);
        } else {
          const auto direct = store_.graph().direct_classes(*seed);
          if (!direct.empty()) opts.class_filter = *direct.begin();
        }
        o.trace.note = "seed " + seed->render() +
                       (opts.class_filter ? ", filter " + opts.class_filter->render() : ", no filter");
        Binding b{s->out, {}, index, core::vkg_search(store_, *seed, opts)};
        for (const auto& h : b.ranked) b.members.insert(h.entity);
        o.binding = std::move(b);
      } else if (const auto* l = std::get_if<ListClause>(&clause)) {
        const Iri relation = resolve_relation(l->relation);
        std::set<Iri> subjects;
        if (l->subject.quoted) {
          if (auto e = resolve_entity(l->subject.text)) {
            subjects.insert(*e);
          } else {
            o.trace.note = "'" + l->subject.text + "' is not in the graph; ";
          }
        } else {
          subjects = bound.at(l->subject.text)->members;
        }
        Binding b{l->out, {}, index, {}};
        for (const Iri& s : subjects) {
          const auto objs = store_.graph().list_objects(relation, s);
          b.members.insert(objs.begin(), objs.end());
        }
        o.trace.note += "relation " + relation.render();
        o.binding = std::move(b);
      } else {
        const auto& inf = std::get<InferClause>(clause);
        const InferRule* rule = rules_.find(inf.rule);
        if (!rule) throw Error(ErrorCode::UnknownRule, "no rule named '" + inf.rule + "'");
        std::vector<InferInput> inputs;
        for (const Arg& a : inf.args) {
          InferInput in;
          in.text = a.text;
          if (a.quoted) {
            in.entity = resolve_entity(a.text);
          } else {
            in.is_set = true;
            in.members = bound.at(a.text)->members;
          }
          inputs.push_back(std::move(in));
        }
        Verdict v = (*rule)(store_, inputs);
        v.name = inf.out;
        v.rule = inf.rule;
        o.trace.note = "rule " + inf.rule;
        o.verdict = std::move(v);
      }
    } catch (...) {
      o.error = std::current_exception();
    }
    o.trace.micros =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    o.trace.result_size = o.binding ? o.binding->members.size() : o.verdict ? o.verdict->witness.size() : 0;
  };

  for (std::size_t stage = 0; stage < d.plan.stages.size(); ++stage) {
    const auto& clauses = d.plan.stages[stage];
    const std::size_t workers = std::min(options_.threads, clauses.size());
    if (workers <= 1) {
      for (std::size_t idx : clauses) run(idx, stage);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < clauses.size(); i += workers) run(clauses[i], stage);
        });
      }
      for (auto& t : pool) t.join();
    }
    // Merge in clause order so results do not depend on scheduling.
    std::vector<std::size_t> ordered = clauses;
    std::sort(ordered.begin(), ordered.end());
    std::exception_ptr failure;
    for (std::size_t idx : ordered) {
      Outcome& o = outcomes[idx];
      if (o.error) {
        if (!failure) failure = o.error;
        continue;
      }
      result.trace.push_back(o.trace);
      if (o.binding) result.bindings.push_back(*o.binding);
      if (o.verdict) result.verdicts.push_back(*o.verdict);
    }
    if (failure) {
      try {
        std::rethrow_exception(failure);
      } catch (const Error& e) {
        throw QueryFailure(e, result);
      }
    }
    bound.clear();
    for (const Binding& b : result.bindings) bound[b.name] = &b;
  }
  return result;
}

}  // namespace vkg::query
