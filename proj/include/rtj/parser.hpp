#ifndef RTJ_PARSER_HPP
#define RTJ_PARSER_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtj/relmodel.hpp"

namespace rtj {

struct parse_error : std::runtime_error {
  int line;
  int column;
  parse_error(const std::string& what, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
};

// Surface syntax, before constants are resolved against a database
// dictionary.
struct SurfaceTerm {
  enum class Kind { variable, number, string } kind = Kind::variable;
  std::string text;          // variable name or string literal
  std::uint64_t number = 0;  // numeric literal
};

struct SurfaceAtom {
  std::string predicate;
  std::vector<SurfaceTerm> args;
};

struct SurfaceConstraint {
  std::string var;
  CompareOp op = CompareOp::le;
  SurfaceTerm literal;
};

struct ParsedQuery {
  std::string head_name;
  std::vector<std::string> head_vars;
  std::vector<SurfaceAtom> atoms;
  std::vector<SurfaceConstraint> constraints;
};

// Grammar: Head(v1,...,vk) :- Atom{, Atom}{, Constraint}.
//   Atom       = Name(term{,term})
//   term       = identifier | non-negative integer | quoted string
//   Constraint = ident op literal,  op in { <=, <, >=, >, =, != }
// `#` starts a comment running to end of line.
ParsedQuery parse_query(const std::string& text);

std::string print_query(const ParsedQuery& q);

// Resolves string literals through the dictionary and checks predicates,
// arities and the full-conjunctive-query head against the database.
ConjunctiveQuery bind_query(const ParsedQuery& pq, const Database& db);

// Print type per head variable, derived from the columns it binds.
std::vector<ColumnType> head_column_types(const ParsedQuery& pq, const Database& db);

}  // namespace rtj

#endif
