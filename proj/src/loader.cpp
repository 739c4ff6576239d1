#include "rtj/loader.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rtj {

namespace {

struct RawRelation {
  std::string name;
  std::size_t arity = 0;
  std::vector<std::vector<std::string>> rows;
  std::string source;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<Value> parse_value(const std::string& s) {
  if (s.empty()) return std::nullopt;
  Value v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Reads one TSV block (header + rows) from consecutive nonblank lines.
RawRelation parse_block(const std::vector<std::string>& lines, const std::string& source) {
  RawRelation raw;
  raw.source = source;
  auto header = split_tabs(lines.front());
  if (header.empty() || header.front().empty())
    throw usage_error(source + ": missing relation name in header");
  raw.name = header.front();
  raw.arity = header.size() - 1;
  if (raw.arity == 0) throw usage_error(source + ": relation " + raw.name + " has no columns");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_tabs(lines[i]);
    if (fields.size() != raw.arity)
      throw usage_error(source + ": ragged row " + std::to_string(i + 1) + " in relation " +
                        raw.name + " (expected " + std::to_string(raw.arity) + " fields, got " +
                        std::to_string(fields.size()) + ")");
    raw.rows.push_back(std::move(fields));
  }
  return raw;
}

Database assemble(const std::vector<RawRelation>& raws) {
  Database db;
  Value max_int = 0;
  bool any_int = false;

  // First pass: per-column typing.
  std::map<std::string, std::vector<ColumnType>> types;
  for (const auto& raw : raws) {
    if (db.relations.count(raw.name))
      throw usage_error(raw.source + ": duplicate relation " + raw.name);
    db.relations.emplace(raw.name, Relation(raw.name, raw.arity));
    std::vector<ColumnType> cols(raw.arity, ColumnType::integer);
    for (std::size_t c = 0; c < raw.arity; ++c) {
      std::size_t numeric = 0;
      for (const auto& row : raw.rows)
        if (parse_value(row[c])) ++numeric;
      if (numeric == raw.rows.size())
        cols[c] = ColumnType::integer;
      else if (numeric == 0)
        cols[c] = ColumnType::text;
      else
        throw usage_error(raw.source + ": mixed integer/text values in column " +
                          std::to_string(c + 1) + " of relation " + raw.name);
    }
    types[raw.name] = std::move(cols);
  }

  // Second pass: intern text in first-seen order, collect tuples.
  for (const auto& raw : raws) {
    Relation& rel = db.relations.at(raw.name);
    const auto& cols = types.at(raw.name);
    for (const auto& row : raw.rows) {
      Tuple t(raw.arity);
      for (std::size_t c = 0; c < raw.arity; ++c) {
        if (cols[c] == ColumnType::integer) {
          t[c] = *parse_value(row[c]);
          max_int = std::max(max_int, t[c]);
          any_int = true;
        } else {
          t[c] = db.intern(row[c]);
        }
      }
      rel.tuples.push_back(std::move(t));
    }
    rel.finalize();
  }

  db.column_types = std::move(types);
  Value dict_size = db.dictionary.size();
  db.universe_size = std::max<Value>({any_int ? max_int + 1 : 0, dict_size, 1});
  return db;
}

std::vector<std::string> nonblank_lines(std::istream& in, bool stop_at_blank) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (stop_at_blank && !lines.empty()) break;
      continue;
    }
    if (line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Database load_database(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& path : paths) {
    if (fs::is_directory(path)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".tsv")
          found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(path);
    }
  }
  if (files.empty()) throw usage_error("no relation files found");

  std::vector<RawRelation> raws;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw usage_error("cannot open " + file);
    auto lines = nonblank_lines(in, false);
    if (lines.empty()) throw usage_error(file + ": empty relation file");
    raws.push_back(parse_block(lines, file));
  }
  return assemble(raws);
}

LoadedBundle load_bundle(std::istream& in) {
  LoadedBundle bundle;
  std::vector<RawRelation> raws;
  std::vector<std::string> block;
  std::string line;
  auto flush = [&]() {
    if (block.empty()) return;
    if (block.front().find(":-") != std::string::npos) {
      std::string joined;
      for (const auto& l : block) joined += l + "\n";
      bundle.query_text = joined;
    } else {
      raws.push_back(parse_block(block, "<stream>"));
    }
    block.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    block.push_back(line);
  }
  flush();
  if (raws.empty()) throw usage_error("bundle contains no relation blocks");
  bundle.db = assemble(raws);
  return bundle;
}

void write_tsv(std::ostream& out, const Database& db, const std::string& relation) {
  const Relation& rel = db.relation(relation);
  out << rel.name;
  for (std::size_t c = 0; c < rel.arity; ++c) out << "\t" << "c" << c;
  out << "\n";
  for (const auto& t : rel.tuples) {
    for (std::size_t c = 0; c < rel.arity; ++c) out << (c ? "\t" : "") << t[c];
    out << "\n";
  }
}

void write_bundle(std::ostream& out, const Database& db, const std::string& query_text) {
  out << query_text << "\n\n";
  bool first = true;
  for (const auto& [name, rel] : db.relations) {
    if (!first) out << "\n";
    first = false;
    write_tsv(out, db, name);
  }
}

}  // namespace rtj
