#pragma once

#include "vkg/kg/graph.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace vkg::kg {

/// Turtle subset: @prefix lines, `a`, `;` predicate lists, `,` object lists,
/// `.` terminators, IRIs and plain string literals. No blank nodes,
/// collections, or datatyped literals. Parsing starts from the default prefix
/// table; prefixes declared in the text are added to it.
KnowledgeGraph parse_turtle(std::string_view text);

/// Deterministic rendering: prefix block sorted by label, then one block per
/// subject in lexicographic order with `a` first and remaining predicates
/// (and their objects) sorted.
std::string serialize_turtle(const KnowledgeGraph& graph);

KnowledgeGraph load_turtle(const std::filesystem::path& path);
void save_turtle(const KnowledgeGraph& graph, const std::filesystem::path& path);

}  // namespace vkg::kg
