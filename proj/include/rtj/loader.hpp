#ifndef RTJ_LOADER_HPP
#define RTJ_LOADER_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rtj/relmodel.hpp"

namespace rtj {

// Loads TSV relation files (or directories of *.tsv). Each file: a header
// line `name<TAB>col1<TAB>...` followed by one tuple per line. A column is
// integer when every value parses as a non-negative integer, text when none
// does; anything else is a typing error. Text values are dictionary-encoded
// in first-seen order.
Database load_database(const std::vector<std::string>& paths);

// A bundle is a single stream holding an optional query line (recognised by
// its `:-`) and one or more blank-line-separated TSV relation blocks, as
// written by the generators.
struct LoadedBundle {
  Database db;
  std::optional<std::string> query_text;
};

LoadedBundle load_bundle(std::istream& in);

// Bundle writers used by the `gen` subcommands.
void write_bundle(std::ostream& out, const Database& db, const std::string& query_text);
void write_tsv(std::ostream& out, const Database& db, const std::string& relation);

}  // namespace rtj

#endif
