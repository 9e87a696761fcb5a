#include "vkg/alert/alerts.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace vkg::alert {

namespace {

using nlohmann::json;

ProfileEntry entry_from(const json& j) {
  if (j.is_string()) return {j.get<std::string>(), ""};
  return {j.at("name").get<std::string>(), j.value("version", std::string())};
}

json entry_json(const ProfileEntry& e) {
  json j{{"name", e.name}};
  if (!e.version.empty()) j["version"] = e.version;
  return j;
}

std::set<Iri> dependencies(const kg::KnowledgeGraph& g, const Iri& program) {
  std::set<Iri> out;
  for (const Term& t : g.objects(program, kg::vocab::has_dependency)) {
    if (const Iri* i = kg::as_iri(t)) out.insert(*i);
  }
  return out;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RuleMatch {
  Iri vulnerability;
  const Rule* rule;
  const Match* match;
};

}  // namespace

std::vector<std::string> SystemProfile::tokens() const {
  std::vector<std::string> out;
  if (os) out.push_back(kg::normalize_token(os->name));
  for (const auto& p : products) out.push_back(kg::normalize_token(p.name));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SystemProfile parse_profile(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("profile is not valid JSON: ") + e.what());
  }
  try {
    SystemProfile p;
    if (j.contains("os") && !j.at("os").is_null()) p.os = entry_from(j.at("os"));
    if (j.contains("products")) {
      for (const json& e : j.at("products")) p.products.push_back(entry_from(e));
    }
    p.similar_products = j.value("similar_product_alerts", true);
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("profile schema: ") + e.what());
  }
}

std::string profile_to_json(const SystemProfile& profile) {
  json j;
  if (profile.os) j["os"] = entry_json(*profile.os);
  j["products"] = json::array();
  for (const auto& p : profile.products) j["products"].push_back(entry_json(p));
  j["similar_product_alerts"] = profile.similar_products;
  return j.dump(2) + "\n";
}

SystemProfile load_profile(const std::filesystem::path& path) { return parse_profile(read_text(path)); }

std::string_view phase_name(Phase phase) {
  return phase == Phase::Factual ? "factual" : "similar_product";
}

std::vector<Alert> factual_alerts(const core::VkgStore& store, const SystemProfile& profile,
                                  const Rulebook& rules, TimePoint now) {
  const auto tokens = profile.tokens();
  std::vector<Alert> out;
  if (tokens.empty()) return out;
  for (const Rule& rule : rules.rules) {
    for (const Match& m : match_rule(store.graph(), rule, now)) {
      const Iri* product = kg::as_iri(m.bindings.at(rule.product_var));
      const Iri* vuln = kg::as_iri(m.bindings.at(rule.vulnerability_var));
      if (!product || !vuln) continue;
      if (!std::binary_search(tokens.begin(), tokens.end(), kg::normalize_token(product->local))) continue;
      Alert a;
      a.product = *product;
      a.vulnerability = *vuln;
      a.rule = rule.name;
      a.evidence = m.evidence;
      out.push_back(std::move(a));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Alert& x, const Alert& y) {
    return std::tie(x.product, x.vulnerability, x.rule) < std::tie(y.product, y.vulnerability, y.rule);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Alert& x, const Alert& y) {
                          return x.product == y.product && x.vulnerability == y.vulnerability && x.rule == y.rule;
                        }),
            out.end());
  return out;
}

double phase2_score(double similarity, std::size_t shared, std::size_t total) {
  const double factor = (1.0 + static_cast<double>(shared)) / (1.0 + static_cast<double>(total));
  return std::min(similarity * factor, std::nextafter(1.0, 0.0));
}

std::size_t shared_dependency_count(const kg::KnowledgeGraph& graph, const Iri& a, const Iri& b) {
  const auto da = dependencies(graph, a);
  const auto db = dependencies(graph, b);
  std::size_t n = 0;
  for (const Iri& d : da) n += db.count(d);
  return n;
}

SimilarResult similar_product_alerts(const core::VkgStore& store, const SystemProfile& profile,
                                     const Rulebook& rules, const SimilarOptions& options,
                                     TimePoint now, const std::vector<Alert>& phase1) {
  SimilarResult result;
  const auto& g = store.graph();
  std::vector<Match> all_matches;
  std::vector<std::pair<const Rule*, std::size_t>> owners;
  for (const Rule& rule : rules.rules) {
    for (Match& m : match_rule(g, rule, now)) {
      all_matches.push_back(std::move(m));
      owners.emplace_back(&rule, all_matches.size() - 1);
    }
  }
  std::map<Iri, std::vector<RuleMatch>> by_product;
  for (const auto& [rule, idx] : owners) {
    const Match& m = all_matches[idx];
    const Iri* product = kg::as_iri(m.bindings.at(rule->product_var));
    const Iri* vuln = kg::as_iri(m.bindings.at(rule->vulnerability_var));
    if (product && vuln) by_product[*product].push_back({*vuln, rule, &m});
  }
  std::set<std::pair<Iri, Iri>> alerted;
  for (const Alert& a : phase1) alerted.emplace(a.product, a.vulnerability);

  std::map<std::string, std::vector<Iri>> linked_by_token;
  for (const auto& [entity, token] : store.links()) {
    linked_by_token[kg::normalize_token(entity.local)].push_back(entity);
  }

  std::map<std::pair<Iri, Iri>, Alert> best;
  for (const std::string& token : profile.tokens()) {
    const auto it = linked_by_token.find(token);
    if (it == linked_by_token.end()) {
      result.diagnostics.push_back("UnlinkedEntity: profile entry '" + token +
                                   "' has no linked entity; skipped for similar-product alerts");
      continue;
    }
    for (const Iri& p : it->second) {
      std::vector<core::EntityHit> hits;
      try {
        hits = core::vkg_search(store, p, core::SearchOptions{options.k, kg::vocab::product, 4});
      } catch (const Error& e) {
        result.diagnostics.push_back(std::string(e.what()) + "; skipped " + p.render());
        continue;
      }
      const auto deps_p = dependencies(g, p);
      for (const core::EntityHit& hit : hits) {
        const auto found = by_product.find(hit.entity);
        if (found == by_product.end()) continue;
        const auto deps_n = dependencies(g, hit.entity);
        std::vector<Triple> dep_evidence;
        for (const Iri& d : deps_p) {
          if (!deps_n.count(d)) continue;
          dep_evidence.push_back({p, kg::vocab::has_dependency, d});
          dep_evidence.push_back({hit.entity, kg::vocab::has_dependency, d});
        }
        const std::size_t shared = dep_evidence.size() / 2;
        const double score = phase2_score(hit.similarity, shared, deps_p.size());
        if (!(score > 0.0) || score < options.threshold) continue;
        for (const RuleMatch& rm : found->second) {
          const auto key = std::make_pair(p, rm.vulnerability);
          if (alerted.count(key)) continue;
          Alert a;
          a.product = p;
          a.vulnerability = rm.vulnerability;
          a.phase = Phase::SimilarProduct;
          a.score = score;
          a.rule = rm.rule->name;
          a.evidence = rm.match->evidence;
          a.evidence.insert(a.evidence.end(), dep_evidence.begin(), dep_evidence.end());
          a.neighbor = hit.entity;
          a.similarity = hit.similarity;
          a.shared_dependencies = shared;
          a.total_dependencies = deps_p.size();
          auto slot = best.find(key);
          if (slot == best.end()) {
            best.emplace(key, std::move(a));
          } else if (std::tie(a.score, slot->second.neighbor, slot->second.rule) >
                     std::tie(slot->second.score, a.neighbor, a.rule)) {
            // Higher score wins; ties go to the smaller neighbor, then rule.
            slot->second = std::move(a);
          }
        }
      }
    }
  }
  for (auto& [key, a] : best) result.alerts.push_back(std::move(a));
  return result;
}

AlertReport run_alerts(const core::VkgStore& store, const SystemProfile& profile, const Rulebook& rules,
                       const SimilarOptions& options, std::optional<TimePoint> now) {
  AlertReport report;
  if (now) {
    report.now = *now;
  } else if (auto latest = latest_intelligence(store.graph())) {
    report.now = *latest;
  } else {
    report.now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    report.diagnostics.push_back("no intelligence timestamps in the store; evaluating at the current time");
  }
  report.alerts = factual_alerts(store, profile, rules, report.now);
  if (profile.similar_products) {
    auto phase2 = similar_product_alerts(store, profile, rules, options, report.now, report.alerts);
    report.alerts.insert(report.alerts.end(), phase2.alerts.begin(), phase2.alerts.end());
    report.diagnostics.insert(report.diagnostics.end(), phase2.diagnostics.begin(), phase2.diagnostics.end());
  }
  return report;
}

std::vector<Triple> parse_dependencies(std::string_view text) {
  std::set<Triple> seen;
  std::vector<Triple> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(ErrorCode::MalformedLine, "expected 'program<TAB>library'", line_no);
    }
    Triple t{Iri::entity(line.substr(0, tab)), kg::vocab::has_dependency, Iri::entity(line.substr(tab + 1))};
    if (!kg::valid_local(t.subject.local, true) || !kg::valid_local(kg::as_iri(t.object)->local, true)) {
      throw Error(ErrorCode::MalformedLine, "name cannot be used as an entity", line_no);
    }
    if (seen.insert(t).second) out.push_back(std::move(t));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<Triple> ingest_dependencies(const std::filesystem::path& path) {
  return parse_dependencies(read_text(path));
}

std::string alerts_to_text(const std::vector<Alert>& alerts) {
  std::ostringstream out;
  for (const Alert& a : alerts) {
    out << phase_name(a.phase) << " " << a.product.render() << " " << a.vulnerability.render() << " score "
        << format_score(a.score) << " [" << a.rule << "]";
    if (a.neighbor) {
      out << " via " << a.neighbor->render() << " (cosine " << format_score(a.similarity) << ", shared deps "
          << a.shared_dependencies << "/" << a.total_dependencies << ")";
    }
    out << "\n";
    for (const Triple& t : a.evidence) out << "    " << kg::render(t) << "\n";
  }
  return out.str();
}

kg::KnowledgeGraph alerts_graph(const std::vector<Alert>& alerts) {
  kg::KnowledgeGraph g;
  std::size_t n = 0;
  for (const Alert& a : alerts) {
    const Iri node{"vkg", "alert_" + std::to_string(++n)};
    g.add(node, kg::vocab::rdf_type, Iri{"vkg", "Alert"});
    g.add(node, Iri{"vkg", "product"}, a.product);
    g.add(node, Iri{"vkg", "vulnerability"}, a.vulnerability);
    g.add(node, Iri{"vkg", "phase"}, kg::Literal{std::string(phase_name(a.phase))});
    g.add(node, Iri{"vkg", "score"}, kg::Literal{shortest(a.score)});
    g.add(node, Iri{"vkg", "rule"}, kg::Literal{a.rule});
    if (a.neighbor) g.add(node, Iri{"vkg", "neighbor"}, *a.neighbor);
  }
  return g;
}

void register_rules(query::RuleTable& table, const Rulebook& rules, TimePoint now) {
  for (const Rule& rule : rules.rules) {
    table.add(rule.name, [rule, now](const core::VkgStore& store, const std::vector<query::InferInput>& args) {
      std::set<Iri> products;
      std::set<std::string> tokens;
      for (const auto& a : args) {
        if (a.is_set) {
          products.insert(a.members.begin(), a.members.end());
        } else if (a.entity) {
          products.insert(*a.entity);
        } else {
          tokens.insert(kg::normalize_token(a.text));
        }
      }
      const bool any = args.empty();
      query::Verdict v;
      for (const Match& m : match_rule(store.graph(), rule, now)) {
        const Iri* p = kg::as_iri(m.bindings.at(rule.product_var));
        const Iri* vuln = kg::as_iri(m.bindings.at(rule.vulnerability_var));
        if (!p || !vuln) continue;
        if (any || products.count(*p) || tokens.count(kg::normalize_token(p->local))) v.witness.insert(*vuln);
      }
      v.value = !v.witness.empty();
      v.detail = std::to_string(v.witness.size()) + " current vulnerabilities matched";
      return v;
    });
  }
}

}  // namespace vkg::alert
