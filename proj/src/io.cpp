#include "sje/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace sje {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
}

// Parses "<key>=<int>" and returns the integer.
std::optional<long long> header_value(std::string_view field, std::string_view key) {
  if (field.size() <= key.size() + 1 || field.substr(0, key.size()) != key || field[key.size()] != '=') {
    return std::nullopt;
  }
  return parse_int(field.substr(key.size() + 1));
}

std::vector<std::string_view> header_fields(std::string_view line) {
  std::vector<std::string_view> out;
  for (auto f : split_fields(line, ' ')) {
    if (!f.empty()) out.push_back(f);
  }
  return out;
}

// "<name>\t<v1>,...,<vk>" -> (name, values). Throws with line number.
std::pair<std::string, std::vector<double>> parse_named_row(const std::filesystem::path& path, std::size_t lineno,
                                                            std::string_view line, std::size_t expected_dim) {
  auto tab = line.find('\t');
  if (tab == std::string_view::npos) parse_fail(path, lineno, "expected '<class_name>\\t<values>'");
  std::string name(line.substr(0, tab));
  if (name.empty()) parse_fail(path, lineno, "empty class name");
  std::vector<double> values;
  for (auto f : split_fields(line.substr(tab + 1), ',')) {
    auto v = parse_double(f);
    if (!v) parse_fail(path, lineno, "bad number '" + std::string(f) + "'");
    if (!std::isfinite(*v)) parse_fail(path, lineno, "non-finite value");
    values.push_back(*v);
  }
  if (values.size() != expected_dim) {
    parse_fail(path, lineno, "row length mismatch at line " + std::to_string(lineno) + " (expected " +
                                 std::to_string(expected_dim) + ", got " + std::to_string(values.size()) + ")");
  }
  return {std::move(name), std::move(values)};
}

std::string join_row(const auto& row) {
  std::string out;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j) out += ',';
    out += format_double(row(j));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_fields(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return lines;
}

void write_text(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

InputEmbeddingSet load_feature_matrix(const std::filesystem::path& path,
                                      const std::vector<std::string>* known_classes) {
  auto lines = read_lines(path);
  if (lines.empty()) parse_fail(path, 1, "missing header 'D=<int>'");
  auto fields = header_fields(lines[0]);
  std::optional<long long> dim;
  if (fields.size() == 1) dim = header_value(fields[0], "D");
  if (!dim || *dim < 1) parse_fail(path, 1, "malformed header, expected 'D=<positive int>'");

  std::unordered_map<std::string, ClassId> ids;
  std::vector<std::string> names;
  if (known_classes) {
    names = *known_classes;
    for (std::size_t i = 0; i < names.size(); ++i) ids.emplace(names[i], class_at(i));
  }

  std::vector<std::vector<double>> rows;
  std::vector<ClassId> labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto [name, values] = parse_named_row(path, i + 1, lines[i], static_cast<std::size_t>(*dim));
    auto it = ids.find(name);
    if (it == ids.end()) {
      if (known_classes) parse_fail(path, i + 1, "unknown class name '" + name + "'");
      it = ids.emplace(name, class_at(names.size())).first;
      names.push_back(name);
    }
    labels.push_back(it->second);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) parse_fail(path, lines.size(), "no samples: N >= 1 violated");

  InputEmbeddingSet data;
  data.class_names = std::move(names);
  data.labels = std::move(labels);
  data.features.resize(static_cast<Eigen::Index>(rows.size()), *dim);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    data.features.row(static_cast<Eigen::Index>(n)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[n].data(), static_cast<Eigen::Index>(rows[n].size()));
  }
  data.validate();
  return data;
}

std::string format_feature_matrix(const InputEmbeddingSet& data) {
  std::string out = "D=" + std::to_string(data.dim()) + "\n";
  for (std::size_t n = 0; n < data.size(); ++n) {
    out += data.class_names[index_of(data.labels[n])];
    out += '\t';
    out += join_row(data.features.row(static_cast<Eigen::Index>(n)));
    out += '\n';
  }
  return out;
}

void write_feature_matrix(const std::filesystem::path& path, const InputEmbeddingSet& data) {
  write_text(path, format_feature_matrix(data));
}

OutputEmbeddingTable load_output_table(const std::filesystem::path& path, std::optional<EmbeddingKind> expected) {
  auto lines = read_lines(path);
  if (lines.empty()) parse_fail(path, 1, "missing header 'E=<int> kind=<tag>'");
  auto fields = header_fields(lines[0]);
  std::optional<long long> dim;
  std::optional<EmbeddingKind> kind;
  if (fields.size() == 2) {
    dim = header_value(fields[0], "E");
    if (fields[1].substr(0, 5) == "kind=") {
      try {
        kind = parse_embedding_kind(fields[1].substr(5));
      } catch (const ValidationError& e) {
        parse_fail(path, 1, e.what());
      }
    }
  }
  if (!dim || *dim < 1 || !kind) parse_fail(path, 1, "malformed header, expected 'E=<positive int> kind=<tag>'");
  if (expected && *expected != *kind) {
    parse_fail(path, 1, "kind is '" + std::string(to_string(*kind)) + "', expected '" +
                            std::string(to_string(*expected)) + "'");
  }

  OutputEmbeddingTable table;
  table.kind = *kind;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto [name, values] = parse_named_row(path, i + 1, lines[i], static_cast<std::size_t>(*dim));
    if (!seen.emplace(name, i + 1).second) parse_fail(path, i + 1, "duplicate class '" + name + "'");
    if (*kind == EmbeddingKind::kAttributesBinary) {
      for (double v : values) {
        if (v != 0.0 && v != 1.0) parse_fail(path, i + 1, "attributes-binary value outside {0,1}");
      }
    }
    table.class_names.push_back(std::move(name));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) parse_fail(path, lines.size(), "table has no rows");
  table.rows.resize(static_cast<Eigen::Index>(rows.size()), *dim);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    table.rows.row(static_cast<Eigen::Index>(n)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[n].data(), static_cast<Eigen::Index>(rows[n].size()));
  }
  table.validate();
  return table;
}

std::string format_output_table(const OutputEmbeddingTable& table) {
  std::string out = "E=" + std::to_string(table.dim()) + " kind=" + std::string(to_string(table.kind)) + "\n";
  for (std::size_t c = 0; c < table.num_classes(); ++c) {
    out += table.class_names[c];
    out += '\t';
    out += join_row(table.rows.row(static_cast<Eigen::Index>(c)));
    out += '\n';
  }
  return out;
}

void write_output_table(const std::filesystem::path& path, const OutputEmbeddingTable& table) {
  write_text(path, format_output_table(table));
}

SplitSpec load_split(const std::filesystem::path& path, const std::vector<std::string>& class_names) {
  std::unordered_map<std::string, ClassId> ids;
  for (std::size_t i = 0; i < class_names.size(); ++i) ids.emplace(class_names[i], class_at(i));
  auto lines = read_lines(path);
  SplitSpec split;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_fields(lines[i], '\t');
    if (fields.size() != 2) parse_fail(path, i + 1, "expected '<class_name>\\t{train|val|test}'");
    std::string name(fields[0]);
    auto it = ids.find(name);
    if (it == ids.end()) parse_fail(path, i + 1, "unknown class name '" + name + "'");
    if (!seen.emplace(name, i + 1).second) parse_fail(path, i + 1, "class '" + name + "' listed twice");
    if (fields[1] == "train") {
      split.train.push_back(it->second);
    } else if (fields[1] == "val") {
      split.val.push_back(it->second);
    } else if (fields[1] == "test") {
      split.test.push_back(it->second);
    } else {
      parse_fail(path, i + 1, "unknown split role '" + std::string(fields[1]) + "'");
    }
  }
  for (auto* v : {&split.train, &split.val, &split.test}) std::sort(v->begin(), v->end());
  split.validate();
  return split;
}

std::string format_split(const SplitSpec& split, const std::vector<std::string>& class_names) {
  std::string out;
  auto emit = [&](const std::vector<ClassId>& set, const char* role) {
    for (ClassId c : set) out += class_names[index_of(c)] + "\t" + role + "\n";
  };
  emit(split.train, "train");
  emit(split.val, "val");
  emit(split.test, "test");
  return out;
}

void write_split(const std::filesystem::path& path, const SplitSpec& split,
                 const std::vector<std::string>& class_names) {
  write_text(path, format_split(split, class_names));
}

}  // namespace sje
