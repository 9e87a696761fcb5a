#include "vkg/ingest/synthetic.hpp"

#include "vkg/error.hpp"
#include "vkg/math.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>

namespace vkg::ingest {

namespace {

struct Member {
  const char* phrase;
  const char* entity;
};

struct Family {
  const char* name;
  std::vector<Member> members;
  std::vector<const char*> context;
};

const std::vector<const char*>& vendors() {
  static const std::vector<const char*> v = {"acme", "globex", "initech", "hooli",
                                             "vandelay", "soylent", "tyrell", "wonka"};
  return v;
}

struct ProductFamily {
  const char* noun;
  std::vector<const char*> context;
};

const std::vector<ProductFamily>& product_families() {
  static const std::vector<ProductFamily> f = {
      {"browser", {"rendering", "tabs", "extensions"}},
      {"mailer", {"attachments", "inbox", "calendar"}},
      {"database", {"tables", "replication", "indexes"}},
      {"webserver", {"modules", "vhosts", "proxying"}},
      {"kernel", {"drivers", "syscalls", "scheduler"}},
      {"router", {"firmware", "ports", "management"}},
  };
  return f;
}

const std::vector<Family>& vulnerability_families() {
  static const std::vector<Family> f = {
      {"memory",
       {{"heap overflow", "heap_overflow"},
        {"stack overflow", "stack_overflow"},
        {"use after free", "use_after_free"},
        {"double free", "double_free"}},
       {"allocator", "pointer", "buffers"}},
      {"injection",
       {{"sql injection", "sql_injection"},
        {"command injection", "command_injection"},
        {"code injection", "code_injection"},
        {"ldap injection", "ldap_injection"}},
       {"query", "parameter", "sanitizer"}},
      {"disclosure",
       {{"information leak", "information_leak"},
        {"path disclosure", "path_disclosure"},
        {"credential exposure", "credential_exposure"}},
       {"logs", "headers", "cache"}},
      {"availability",
       {{"denial of service", "denial_of_service"},
        {"dos", "DOS"},
        {"resource exhaustion", "resource_exhaustion"},
        {"infinite loop", "infinite_loop"}},
       {"requests", "cpu", "threads"}},
      {"access",
       {{"authentication bypass", "authentication_bypass"},
        {"privilege escalation", "privilege_escalation"},
        {"cross-site request forgery", "cross-site_request_forgery"},
        {"csrf", "CSRF"}},
       {"cookies", "roles", "tokens"}},
  };
  return f;
}

const std::vector<Member>& attackers() {
  static const std::vector<Member> a = {{"remote attackers", "remote_attackers"},
                                        {"local users", "local_users"},
                                        {"authenticated users", "authenticated_users"},
                                        {"adjacent attackers", "adjacent_attackers"}};
  return a;
}

const std::vector<Family>& means_families() {
  static const std::vector<Family> f = {
      {"network", {{"crafted packet", "crafted_packet"}, {"malformed frame", "malformed_frame"}}, {}},
      {"file", {{"crafted file", "crafted_file"}, {"malicious document", "malicious_document"}}, {}},
      {"web", {{"crafted url", "crafted_url"}, {"malicious link", "malicious_link"}}, {}},
  };
  return f;
}

const char* const kSources[] = {"nvd", "twitter", "reddit", "blog"};

std::string title_case(std::string s) {
  bool start = true;
  for (char& c : s) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = c == ' ';
  }
  return s;
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string add_days(const std::string& date, std::size_t days) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (std::sscanf(date.c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
    throw Error(ErrorCode::InvalidArgument, "start date '" + date + "' is not YYYY-MM-DD");
  }
  using namespace std::chrono;
  const year_month_day start{year{y}, month{m}, day{d}};
  if (!start.ok()) throw Error(ErrorCode::InvalidArgument, "start date '" + date + "' is not a calendar date");
  const year_month_day out{sys_days(start) + std::chrono::days(static_cast<int>(days))};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(out.year()),
                static_cast<unsigned>(out.month()), static_cast<unsigned>(out.day()));
  return buffer;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.index(items.size())];
}

}  // namespace

std::string_view group_kind_name(GroupKind kind) {
  switch (kind) {
    case GroupKind::Product: return "product";
    case GroupKind::Vulnerability: return "vulnerability";
    case GroupKind::Attack: return "attack";
  }
  return "product";
}

GroupKind parse_group_kind(std::string_view name) {
  if (name == "product") return GroupKind::Product;
  if (name == "vulnerability") return GroupKind::Vulnerability;
  if (name == "attack") return GroupKind::Attack;
  throw Error(ErrorCode::InvalidArgument, "unknown group kind '" + std::string(name) + "'");
}

SyntheticCorpus synthetic_corpus(const SyntheticCorpusConfig& config) {
  if (config.vendors < 2 || config.vendors > vendors().size()) {
    throw Error(ErrorCode::InvalidArgument, "vendors must be in [2, 8]");
  }
  if (config.documents == 0 || config.sentences_per_document == 0) {
    throw Error(ErrorCode::InvalidArgument, "documents and sentences per document must be positive");
  }
  const Iri attacker_class{"uco", "Attacker"};
  const Iri means_class{"uco", "Means"};

  SyntheticCorpus out;
  out.patterns = bundled_patterns();
  Gazetteer& gaz = out.gazetteer;

  for (const auto& pf : product_families()) {
    SimilarityGroup group{std::string(pf.noun) + "s", GroupKind::Product, {}};
    for (std::size_t v = 0; v < config.vendors; ++v) {
      const std::string phrase = std::string(vendors()[v]) + " " + pf.noun;
      const std::string local = std::string(vendors()[v]) + "_" + pf.noun;
      gaz.add(phrase, kg::vocab::product, local);
      group.members.insert(Iri::entity(local));
    }
    out.groups.push_back(std::move(group));
  }
  for (const auto& vf : vulnerability_families()) {
    SimilarityGroup group{vf.name, GroupKind::Vulnerability, {}};
    for (const Member& m : vf.members) {
      gaz.add(m.phrase, kg::vocab::vulnerability, m.entity);
      group.members.insert(Iri::entity(m.entity));
    }
    out.groups.push_back(std::move(group));
  }
  for (const Member& a : attackers()) gaz.add(a.phrase, attacker_class, a.entity);
  for (const auto& mf : means_families()) {
    SimilarityGroup group{mf.name, GroupKind::Attack, {}};
    for (const Member& m : mf.members) {
      gaz.add(m.phrase, means_class, m.entity);
      group.members.insert(Iri::entity(m.entity));
    }
    out.groups.push_back(std::move(group));
  }

  Rng rng(config.seed);
  kg::KnowledgeGraph& truth = out.truth;
  const auto& pfs = product_families();
  const auto& vfs = vulnerability_families();
  for (std::size_t d = 0; d < config.documents; ++d) {
    char id[32];
    std::snprintf(id, sizeof(id), "doc%05zu", d);
    Document doc{id, kSources[d % 4], "", add_days(config.start_date, d)};
    const Iri intel = intelligence_node(doc.id);
    truth.add(intel, kg::vocab::rdf_type, kg::vocab::intelligence);
    truth.add(intel, kg::vocab::intel_timestamp, kg::Literal{doc.timestamp});
    truth.add(intel, kg::vocab::intel_source, kg::Literal{doc.source});

    for (std::size_t s = 0; s < config.sentences_per_document; ++s) {
      const std::size_t f = rng.index(pfs.size());
      const ProductFamily& pf = pfs[f];
      const std::string vendor = vendors()[rng.index(config.vendors)];
      const std::string product_phrase = title_case(vendor + " " + pf.noun);
      const Iri product = Iri::entity(vendor + "_" + pf.noun);
      // Each product family leans towards two vulnerability families.
      const Family& vf = vfs[rng.uniform() < 0.5 ? f % vfs.size() : (f + 2) % vfs.size()];
      const Member& vm = pick(rng, vf.members);
      const Iri vuln = Iri::entity(vm.entity);
      const Member& am = pick(rng, attackers());
      const Iri attacker = Iri::entity(am.entity);
      const Family& mf = pick(rng, means_families());
      const Member& mm = pick(rng, mf.members);
      const Iri means = Iri::entity(mm.entity);
      const std::string pctx = pick(rng, pf.context);
      const std::string vctx = pick(rng, vf.context);

      const double roll = rng.uniform();
      std::string sentence;
      if (roll < 0.3) {
        sentence = product_phrase + " allows " + am.phrase + " to cause " + vm.phrase + " via " + mm.phrase +
                   " through the " + pctx + " " + vctx + ".";
        truth.add(product, kg::vocab::has_vulnerability, vuln);
        truth.add(vuln, kg::vocab::affects_product, product);
        truth.add(vuln, kg::vocab::has_attacker, attacker);
        truth.add(vuln, kg::vocab::has_means, means);
        truth.add(intel, kg::vocab::intel_has_vulnerability, vuln);
        for (const auto& [e, c] : {std::pair{product, kg::vocab::product}, {vuln, kg::vocab::vulnerability},
                                   {attacker, attacker_class}, {means, means_class}}) {
          truth.add(e, kg::vocab::rdf_type, c);
        }
      } else if (roll < 0.6) {
        sentence = std::string("A ") + vm.phrase + " in " + product_phrase + " lets " + am.phrase + " reach the " + vctx +
                   " via " + mm.phrase + ".";
        truth.add(product, kg::vocab::has_vulnerability, vuln);
        truth.add(vuln, kg::vocab::affects_product, product);
        truth.add(vuln, kg::vocab::has_means, means);
        truth.add(intel, kg::vocab::intel_has_vulnerability, vuln);
        for (const auto& [e, c] : {std::pair{product, kg::vocab::product}, {vuln, kg::vocab::vulnerability},
                                   {attacker, attacker_class}, {means, means_class}}) {
          truth.add(e, kg::vocab::rdf_type, c);
        }
      } else if (roll < 0.9) {
        sentence = capitalize(am.phrase) + " can trigger " + vm.phrase + " in " + product_phrase + " with " +
                   vctx + " " + pctx + ".";
        truth.add(product, kg::vocab::has_vulnerability, vuln);
        truth.add(vuln, kg::vocab::affects_product, product);
        truth.add(vuln, kg::vocab::has_attacker, attacker);
        truth.add(intel, kg::vocab::intel_has_vulnerability, vuln);
        for (const auto& [e, c] : {std::pair{product, kg::vocab::product}, {vuln, kg::vocab::vulnerability},
                                   {attacker, attacker_class}}) {
          truth.add(e, kg::vocab::rdf_type, c);
        }
      } else {
        sentence = "The " + pctx + " " + vctx + " issue was reported by the vendor.";
      }
      if (!doc.text.empty()) doc.text += ' ';
      doc.text += sentence;
    }
    out.documents.push_back(std::move(doc));
  }
  return out;
}

core::VkgStore cyber_fixture() {
  using kg::vocab::rdf_type;
  const Iri attacker_class{"uco", "Attacker"};
  const Iri means_class{"uco", "Means"};
  kg::KnowledgeGraph g;
  auto E = [](const char* name) { return Iri::entity(name); };

  struct Placed {
    const char* entity;
    Iri cls;
    const char* family;
  };
  const std::vector<Placed> placed = {
      {"MySQL", kg::vocab::product, "database"},
      {"Oracle_Database", kg::vocab::product, "database"},
      {"PostgreSQL", kg::vocab::product, "database"},
      {"Microsoft_Internet_Explorer", kg::vocab::product, "browser"},
      {"Google_Chrome", kg::vocab::product, "browser"},
      {"Firefox", kg::vocab::product, "browser"},
      {"Opera", kg::vocab::product, "browser"},
      {"Safari", kg::vocab::product, "browser"},
      {"Thunderbird", kg::vocab::product, "mozilla"},
      {"Android", kg::vocab::product, "os"},
      {"Windows", kg::vocab::product, "os"},
      {"Linux_Kernel", kg::vocab::product, "os"},
      {"Apache_HTTP_Server", kg::vocab::product, "server"},
      {"nginx", kg::vocab::product, "server"},
      {"OpenSSL", kg::vocab::product, "library"},
      {"NSS", kg::vocab::product, "library"},
      {"libpng", kg::vocab::product, "library"},
      {"denial_of_service", kg::vocab::vulnerability, "availability"},
      {"resource_exhaustion", kg::vocab::vulnerability, "availability"},
      {"memory_exhaustion", kg::vocab::vulnerability, "availability"},
      {"infinite_loop", kg::vocab::vulnerability, "availability"},
      {"application_crash", kg::vocab::vulnerability, "availability"},
      {"null_pointer_dereference", kg::vocab::vulnerability, "availability"},
      {"execute_arbitrary_code", kg::vocab::vulnerability, "code"},
      {"buffer_overflow", kg::vocab::vulnerability, "code"},
      {"heap_overflow", kg::vocab::vulnerability, "code"},
      {"use-after-free", kg::vocab::vulnerability, "code"},
      {"sql_injection", kg::vocab::vulnerability, "web"},
      {"cross-site_scripting", kg::vocab::vulnerability, "web"},
      {"cross-site_request_forgery", kg::vocab::vulnerability, "web"},
      {"directory_traversal", kg::vocab::vulnerability, "web"},
      {"open_redirect", kg::vocab::vulnerability, "web"},
      {"information_disclosure", kg::vocab::vulnerability, "access"},
      {"privilege_escalation", kg::vocab::vulnerability, "access"},
      {"authentication_bypass", kg::vocab::vulnerability, "access"},
      {"remote_attackers", attacker_class, "remote"},
      {"remote_authenticated_users", attacker_class, "remote"},
      {"local_users", attacker_class, "local"},
      {"crafted_web_site", means_class, "web_means"},
      {"crafted_request", means_class, "web_means"},
      {"crafted_file", means_class, "file_means"},
      {"long_string", means_class, "file_means"},
  };

  constexpr std::size_t dim = 16;
  Rng rng(20170101);
  auto random_vector = [&](double scale) {
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = scale * rng.normal();
    return v;
  };
  std::map<std::string, Vector> class_center;
  std::map<std::string, Vector> family_center;
  for (const Placed& p : placed) {
    if (!class_center.count(p.cls.local)) class_center.emplace(p.cls.local, random_vector(1.0));
    if (!family_center.count(p.family)) family_center.emplace(p.family, random_vector(1.0));
  }

  vec::VectorSpace space(dim);
  std::map<std::string, Vector> placed_vectors;
  for (const Placed& p : placed) {
    Vector v = class_center.at(p.cls.local) + 1.2 * family_center.at(p.family) + random_vector(0.3);
    const std::string name = p.entity;
    if (name == "Thunderbird") v = 0.8 * placed_vectors.at("Firefox") + random_vector(0.2);
    if (name == "sql_injection") v -= 1.5 * family_center.at("availability");
    placed_vectors.emplace(name, v);
    space.add(kg::normalize_token(name), v);
    g.add(E(p.entity), rdf_type, p.cls);
  }
  for (const char* word : {"exploit", "patch", "advisory", "attack"}) space.add(word, random_vector(1.0));

  auto affects = [&](const char* product, std::initializer_list<const char*> vulns) {
    for (const char* v : vulns) {
      g.add(E(product), kg::vocab::has_vulnerability, E(v));
      g.add(E(v), kg::vocab::affects_product, E(product));
    }
  };
  affects("MySQL", {"resource_exhaustion", "sql_injection"});
  affects("Oracle_Database", {"sql_injection", "privilege_escalation"});
  affects("PostgreSQL", {"sql_injection", "infinite_loop"});
  affects("Microsoft_Internet_Explorer", {"execute_arbitrary_code", "denial_of_service"});
  affects("Google_Chrome", {"use-after-free", "cross-site_scripting"});
  affects("Firefox", {"memory_exhaustion", "heap_overflow"});
  affects("Opera", {"cross-site_scripting", "open_redirect"});
  affects("Safari", {"use-after-free", "application_crash"});
  affects("Android", {"privilege_escalation", "execute_arbitrary_code", "information_disclosure"});
  affects("Windows", {"buffer_overflow", "privilege_escalation"});
  affects("Linux_Kernel", {"buffer_overflow", "null_pointer_dereference", "privilege_escalation"});
  affects("Apache_HTTP_Server", {"directory_traversal", "denial_of_service"});
  affects("nginx", {"heap_overflow", "resource_exhaustion"});
  affects("OpenSSL", {"information_disclosure", "denial_of_service"});
  affects("libpng", {"buffer_overflow"});

  auto via = [&](const char* vuln, const char* attacker, const char* means) {
    g.add(E(vuln), kg::vocab::has_attacker, E(attacker));
    g.add(E(vuln), kg::vocab::has_means, E(means));
  };
  via("denial_of_service", "remote_attackers", "crafted_web_site");
  via("execute_arbitrary_code", "remote_attackers", "crafted_web_site");
  via("resource_exhaustion", "remote_attackers", "crafted_request");
  via("sql_injection", "remote_authenticated_users", "crafted_request");
  via("cross-site_scripting", "remote_attackers", "crafted_web_site");
  via("buffer_overflow", "local_users", "long_string");
  via("heap_overflow", "remote_attackers", "crafted_file");
  via("privilege_escalation", "local_users", "crafted_file");
  via("directory_traversal", "remote_attackers", "crafted_request");
  via("use-after-free", "remote_attackers", "crafted_web_site");

  for (const auto& [product, dep] : std::vector<std::pair<const char*, const char*>>{
           {"Firefox", "NSS"}, {"Firefox", "libpng"}, {"Firefox", "OpenSSL"},
           {"Thunderbird", "NSS"}, {"Thunderbird", "libpng"}, {"Thunderbird", "OpenSSL"},
           {"Google_Chrome", "libpng"}, {"MySQL", "OpenSSL"}, {"nginx", "OpenSSL"},
           {"Apache_HTTP_Server", "OpenSSL"}}) {
    g.add(E(product), kg::vocab::has_dependency, E(dep));
  }

  g.add(E("Microsoft_Internet_Explorer"), kg::vocab::same_as, Iri{"dbp", "Internet_Explorer"});
  g.add(E("denial_of_service"), kg::vocab::same_as, Iri{"dbp", "Denial-of-service_attack"});
  g.add(E("execute_arbitrary_code"), kg::vocab::same_as, Iri{"dbp", "Arbitrary_code_execution"});

  struct Report {
    const char* id;
    const char* source;
    const char* timestamp;
    std::vector<const char*> vulns;
  };
  for (const Report& r : std::vector<Report>{
           {"nvd-2017-0001", "nvd", "2017-03-01", {"execute_arbitrary_code", "denial_of_service"}},
           {"nvd-2017-0002", "nvd", "2017-03-10", {"resource_exhaustion", "sql_injection"}},
           {"tweet-0003", "twitter", "2017-03-12", {"memory_exhaustion", "heap_overflow"}},
           {"reddit-0004", "reddit", "2017-03-15", {"buffer_overflow", "privilege_escalation"}},
           {"blog-0005", "blog", "2017-03-20", {"use-after-free", "cross-site_scripting"}}}) {
    const Iri intel = intelligence_node(r.id);
    g.add(intel, rdf_type, kg::vocab::intelligence);
    g.add(intel, kg::vocab::intel_timestamp, kg::Literal{r.timestamp});
    g.add(intel, kg::vocab::intel_source, kg::Literal{r.source});
    for (const char* v : r.vulns) g.add(intel, kg::vocab::intel_has_vulnerability, E(v));
  }

  return core::link_entities(std::move(g), std::move(space)).store;
}

std::string cyber_fixture_profile() {
  return nlohmann::json{{"os", "Linux_Kernel"}, {"products", {"MySQL", "Thunderbird"}}, {"similar_product_alerts", true}}
             .dump(2) +
         "\n";
}

}  // namespace vkg::ingest
