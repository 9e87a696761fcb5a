#pragma once

#include "vkg/core/vkg_store.hpp"
#include "vkg/ingest/extract.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vkg::ingest {

enum class GroupKind { Product, Vulnerability, Attack };

std::string_view group_kind_name(GroupKind kind);
/// Throws InvalidArgument.
GroupKind parse_group_kind(std::string_view name);

/// Entities judged similar to each other, e.g. one product family.
struct SimilarityGroup {
  std::string name;
  GroupKind kind = GroupKind::Product;
  std::set<Iri> members;
};

struct SyntheticCorpusConfig {
  std::size_t documents = 60;
  std::size_t sentences_per_document = 4;
  /// Vendors per product family, at most 8.
  std::size_t vendors = 4;
  std::uint64_t seed = 1;
  /// Date of the first document; document i is dated i days later.
  std::string start_date = "2017-01-01";
};

/// NVD-style documents together with the graph an exact extractor must
/// produce from them and the similarity groups the generator drew from.
struct SyntheticCorpus {
  std::vector<Document> documents;
  Gazetteer gazetteer;
  std::vector<ExtractionPattern> patterns;
  kg::KnowledgeGraph truth;
  std::vector<SimilarityGroup> groups;
};

SyntheticCorpus synthetic_corpus(const SyntheticCorpusConfig& config);

/// The four-clause form of the MySQL overlap query.
inline constexpr std::string_view kQueryOne =
    "{search, 'denial_of_service', V} ; {list, vulnerability, 'MySQL', K} ; "
    "{infer, overlap, V, K, 'MySQL', alert}";

/// Vulnerability asserted on MySQL that sits next to denial_of_service in
/// the fixture's vector space.
inline const Iri kFixtureOverlap = Iri::entity("resource_exhaustion");

/// Hand-built cyber store: products, vulnerabilities, attackers and means
/// with family-clustered 16-dimensional vectors, dependencies, dated
/// intelligence and a few owl:sameAs links. Unsealed.
core::VkgStore cyber_fixture();

/// Profile JSON matching the fixture (MySQL and Thunderbird).
std::string cyber_fixture_profile();

}  // namespace vkg::ingest
