#include "vkg/vec/vector_space.hpp"

#include "vkg/error.hpp"
#include "vkg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace vkg::vec {

VectorSpace::VectorSpace(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "vector dimension must be >= 1");
}

void VectorSpace::add(const std::string& token, const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "token '" + token + "' has " +
                                                  std::to_string(values.size()) +
                                                  " components, expected " +
                                                  std::to_string(dimension_));
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "token '" + token + "' has non-finite components");
  }
  if (index_.count(token)) throw Error(ErrorCode::DuplicateToken, token);
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  data_.insert(data_.end(), values.data(), values.data() + values.size());
  norms_.push_back(values.norm());
}

bool VectorSpace::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

std::optional<std::size_t> VectorSpace::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vector VectorSpace::vector(std::string_view token) const {
  auto row_index = index_of(token);
  if (!row_index) throw Error(ErrorCode::UnknownToken, std::string(token));
  return row(*row_index);
}

double VectorSpace::similarity(std::string_view a, std::string_view b) const {
  return cosine(vector(a), vector(b));
}

bool VectorSpace::operator==(const VectorSpace& other) const {
  return dimension_ == other.dimension_ && tokens_ == other.tokens_ && data_ == other.data_;
}

SearchResult top_k(const VectorSpace& space, const Vector& query, std::size_t k,
                   const RowFilter& filter) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (static_cast<std::size_t>(query.size()) != space.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(query.size()) +
                                                  " components, space has " +
                                                  std::to_string(space.dimension()));
  }
  const double query_norm = query.norm();
  if (query_norm == 0.0) throw Error(ErrorCode::ZeroVector, "query vector has zero norm");

  SearchResult result;
  if (space.empty()) return result;
  const Vector dots = space.matrix() * query;

  struct Candidate {
    std::size_t row;
    double similarity;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(space.size());
  for (std::size_t r = 0; r < space.size(); ++r) {
    if (filter && !filter(r)) continue;
    const double n = space.norm(r);
    if (n == 0.0) {
      ++result.zero_vectors;
      continue;
    }
    const double sim = std::clamp(dots[static_cast<Eigen::Index>(r)] / (query_norm * n), -1.0, 1.0);
    candidates.push_back({r, sim});
  }

  auto better = [&space](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return space.token(a.row) < space.token(b.row);
  };
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  result.neighbors.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    result.neighbors.push_back({space.token(candidates[i].row), candidates[i].similarity});
  }
  return result;
}

SearchResult top_k(const VectorSpace& space, std::string_view token, std::size_t k,
                   bool exclude_self, const RowFilter& filter) {
  auto self = space.index_of(token);
  if (!self) throw Error(ErrorCode::UnknownToken, std::string(token));
  const std::size_t self_row = *self;
  RowFilter combined = filter;
  if (exclude_self) {
    combined = [&filter, self_row](std::size_t r) {
      return r != self_row && (!filter || filter(r));
    };
  }
  return top_k(space, Vector(space.row(self_row)), k, combined);
}

SearchResult analogy(const VectorSpace& space, std::string_view a, std::string_view b,
                     std::string_view c, std::size_t k) {
  const Vector query = space.vector(b) - space.vector(a) + space.vector(c);
  const std::size_t ra = *space.index_of(a);
  const std::size_t rb = *space.index_of(b);
  const std::size_t rc = *space.index_of(c);
  return top_k(space, query, k, [=](std::size_t r) { return r != ra && r != rb && r != rc; });
}

namespace {

std::string format_real(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

bool parse_real(std::string_view text, double& value) {
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && end == text.data() + text.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

VectorSpace parse_vectors(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw Error(ErrorCode::MalformedLine, "line 1: missing header", 1);
  const auto header = split_ws(line);
  double declared_v = 0;
  double declared_d = 0;
  if (header.size() != 2 || !parse_real(header[0], declared_v) ||
      !parse_real(header[1], declared_d) || declared_v < 0 || declared_d < 1 ||
      declared_v != std::floor(declared_v) || declared_d != std::floor(declared_d)) {
    throw Error(ErrorCode::MalformedLine, "line 1: header must be \"V D\"", 1);
  }
  const auto dimension = static_cast<std::size_t>(declared_d);
  VectorSpace space(dimension);

  while (next_line(line)) {
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != dimension + 1) {
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": expected token and " +
                      std::to_string(dimension) + " values, found " +
                      std::to_string(fields.size() - 1),
                  line_no);
    }
    Vector values(static_cast<Eigen::Index>(dimension));
    for (std::size_t j = 0; j < dimension; ++j) {
      double v = 0;
      if (!parse_real(fields[j + 1], v) || !std::isfinite(v)) {
        throw Error(ErrorCode::MalformedLine,
                    "line " + std::to_string(line_no) + ": bad real '" +
                        std::string(fields[j + 1]) + "'",
                    line_no);
      }
      values[static_cast<Eigen::Index>(j)] = v;
    }
    const std::string token(fields[0]);
    if (space.contains(token)) {
      throw Error(ErrorCode::DuplicateToken,
                  "line " + std::to_string(line_no) + ": '" + token + "'", line_no);
    }
    space.add(token, values);
  }
  if (space.size() != static_cast<std::size_t>(declared_v)) {
    throw Error(ErrorCode::DimensionMismatch, "header declares " + std::string(header[0]) +
                                                  " vectors, file has " +
                                                  std::to_string(space.size()));
  }
  return space;
}

std::string format_vectors(const VectorSpace& space) {
  std::string out = std::to_string(space.size()) + " " + std::to_string(space.dimension()) + "\n";
  for (std::size_t r = 0; r < space.size(); ++r) {
    out += space.token(r);
    const auto row = space.row(r);
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      out.push_back(' ');
      out += format_real(row[j]);
    }
    out.push_back('\n');
  }
  return out;
}

VectorSpace load_vectors(const std::filesystem::path& path) {
  return parse_vectors(read_text(path));
}

void save_vectors(const VectorSpace& space, const std::filesystem::path& path) {
  write_text(path, format_vectors(space));
}

}  // namespace vkg::vec
