#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sje/types.hpp"

namespace sje {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Strict decimal parse; the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

std::vector<std::string_view> split_fields(std::string_view s, char sep);

// Whole file as lines, trailing '\r' stripped. Throws IoError.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view contents);

/// Feature-matrix file:
///
///   D=<int>
///   <class_name>\t<v1>,...,<vD>
///
/// Without `known_classes`, classes are numbered in order of first
/// appearance. With it, ids follow that list and any other name is an error.
InputEmbeddingSet load_feature_matrix(const std::filesystem::path& path,
                                      const std::vector<std::string>* known_classes = nullptr);
std::string format_feature_matrix(const InputEmbeddingSet& data);
void write_feature_matrix(const std::filesystem::path& path, const InputEmbeddingSet& data);

/// Embedding-table file:
///
///   E=<int> kind=<tag>
///   <class_name>\t<v1>,...,<vE>
///
/// If `expected` is set it must match the header tag.
OutputEmbeddingTable load_output_table(const std::filesystem::path& path,
                                       std::optional<EmbeddingKind> expected = std::nullopt);
std::string format_output_table(const OutputEmbeddingTable& table);
void write_output_table(const std::filesystem::path& path, const OutputEmbeddingTable& table);

/// Split file: one `<class_name>\t{train|val|test}` line per class.
SplitSpec load_split(const std::filesystem::path& path, const std::vector<std::string>& class_names);
std::string format_split(const SplitSpec& split, const std::vector<std::string>& class_names);
void write_split(const std::filesystem::path& path, const SplitSpec& split,
                 const std::vector<std::string>& class_names);

}  // namespace sje
