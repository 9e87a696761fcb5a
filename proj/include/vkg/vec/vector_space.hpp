#pragma once

#include "vkg/math.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vkg::vec {

struct Neighbor {
  std::string token;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct SearchResult {
  std::vector<Neighbor> neighbors;
  /// Candidates skipped because their vector has zero norm.
  std::size_t zero_vectors = 0;
};

/// Vocabulary-keyed embedding table of fixed dimension. Rows are stored
/// contiguously in insertion order; norms are cached so a query costs one
/// matrix-vector product plus a partial sort.
class VectorSpace {
 public:
  explicit VectorSpace(std::size_t dimension);

  /// Throws DimensionMismatch, DuplicateToken, or InvalidArgument for
  /// non-finite components.
  void add(const std::string& token, const Vector& values);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  bool contains(std::string_view token) const;
  std::optional<std::size_t> index_of(std::string_view token) const;
  const std::string& token(std::size_t row) const { return tokens_[row]; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Throws UnknownToken.
  Vector vector(std::string_view token) const;
  Eigen::Map<const Vector> row(std::size_t r) const {
    return Eigen::Map<const Vector>(data_.data() + r * dimension_,
                                    static_cast<Eigen::Index>(dimension_));
  }
  double norm(std::size_t r) const { return norms_[r]; }
  Eigen::Map<const RowMatrix> matrix() const {
    return Eigen::Map<const RowMatrix>(data_.data(), static_cast<Eigen::Index>(size()),
                                       static_cast<Eigen::Index>(dimension_));
  }

  double similarity(std::string_view a, std::string_view b) const;

  bool operator==(const VectorSpace& other) const;

 private:
  std::size_t dimension_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> norms_;
};

/// Restricts which rows may appear in a result.
using RowFilter = std::function<bool(std::size_t row)>;

/// Exact top-k by cosine similarity: descending similarity, ties by ascending
/// token. A zero query vector throws ZeroVector.
SearchResult top_k(const VectorSpace& space, const Vector& query, std::size_t k,
                   const RowFilter& filter = {});

/// Token query; `exclude_self` drops the query token from the ranking.
/// Throws UnknownToken.
SearchResult top_k(const VectorSpace& space, std::string_view token, std::size_t k,
                   bool exclude_self, const RowFilter& filter = {});

/// Ranks tokens near v(b) - v(a) + v(c), excluding a, b and c.
SearchResult analogy(const VectorSpace& space, std::string_view a, std::string_view b,
                     std::string_view c, std::size_t k);

/// word2vec text format: header "V D", then one "token v1 ... vD" line per
/// entry. Reals are written in the shortest form that
/// reads back to the same double.
VectorSpace parse_vectors(std::string_view text);
std::string format_vectors(const VectorSpace& space);
VectorSpace load_vectors(const std::filesystem::path& path);
void save_vectors(const VectorSpace& space, const std::filesystem::path& path);

}  // namespace vkg::vec
