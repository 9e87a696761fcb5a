#include "vkg/kg/iri.hpp"

#include "vkg/error.hpp"

#include <cctype>

namespace vkg::kg {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string escape_literal(const std::string& value) {
  std::string out;
  out.reserve(value.size() + 2);
  out.push_back('"');
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace

Iri Iri::entity(std::string_view name) {
  std::string local(name);
  for (char& c : local) {
    if (c == ' ') c = '_';
  }
  return Iri{"", std::move(local)};
}

std::string Iri::render() const {
  if (prefix.empty()) return "<" + local + ">";
  return prefix + ":" + local;
}

std::string render(const Term& term) {
  if (const Iri* iri = as_iri(term)) return iri->render();
  return escape_literal(std::get<Literal>(term).value);
}

std::string render(const Triple& triple) {
  return triple.subject.render() + " " + triple.predicate.render() + " " + render(triple.object);
}

bool valid_local(std::string_view local, bool entity_form) {
  if (local.empty()) return false;
  for (char c : local) {
    if (is_space(c) || c == '<' || c == '>' || c == '"') return false;
    if (!entity_form && (c == ';' || c == ',' || c == '#')) return false;
  }
  if (!entity_form && local.back() == '.') return false;
  return true;
}

Iri parse_iri(std::string_view text) {
  if (text.size() >= 2 && text.front() == '<' && text.back() == '>') {
    std::string_view local = text.substr(1, text.size() - 2);
    if (!valid_local(local, true)) {
      throw Error(ErrorCode::InvalidArgument, "bad entity IRI '" + std::string(text) + "'");
    }
    return Iri{"", std::string(local)};
  }
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::InvalidArgument, "not an IRI: '" + std::string(text) + "'");
  }
  std::string_view prefix = text.substr(0, colon);
  std::string_view local = text.substr(colon + 1);
  for (char c : prefix) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      throw Error(ErrorCode::InvalidArgument, "bad prefix in '" + std::string(text) + "'");
    }
  }
  if (!valid_local(local, false)) {
    throw Error(ErrorCode::InvalidArgument, "bad local name in '" + std::string(text) + "'");
  }
  return Iri{std::string(prefix), std::string(local)};
}

Term parse_term(std::string_view text) {
  if (text == "a") return vocab::rdf_type;
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    std::string value;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      char c = text[i];
      if (c == '\\' && i + 2 < text.size()) {
        char n = text[++i];
        switch (n) {
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 't': value.push_back('\t'); break;
          default: value.push_back(n);
        }
      } else {
        value.push_back(c);
      }
    }
    return Literal{std::move(value)};
  }
  return parse_iri(text);
}

std::string normalize_token(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == ' ') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace vkg::kg
