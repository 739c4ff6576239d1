#include "rtj/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace rtj {

namespace {

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& text) : text(text) {}

  [[noreturn]] void fail(const std::string& what) const { throw parse_error(what, line, col); }

  void bump() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_space() {
    while (pos < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        bump();
      } else if (text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') bump();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_space();
    return pos >= text.size();
  }

  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    bump();
  }

  bool accept(char c) {
    if (peek() != c) return false;
    bump();
    return true;
  }

  bool accept_str(const std::string& s) {
    skip_space();
    if (text.compare(pos, s.size(), s) != 0) return false;
    for (std::size_t i = 0; i < s.size(); ++i) bump();
    return true;
  }

  std::string identifier() {
    skip_space();
    if (pos >= text.size() || !(std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      fail("expected identifier");
    std::string out;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
      out += text[pos];
      bump();
    }
    return out;
  }

  std::uint64_t number() {
    skip_space();
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      fail("expected number");
    std::uint64_t v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      std::uint64_t next = v * 10 + (text[pos] - '0');
      if (next < v) fail("numeric literal overflows 64 bits");
      v = next;
      bump();
    }
    return v;
  }

  std::string string_literal() {
    skip_space();
    if (pos >= text.size() || text[pos] != '"') fail("expected string literal");
    bump();
    std::string out;
    while (pos < text.size() && text[pos] != '"') {
      if (text[pos] == '\n') fail("unterminated string literal");
      out += text[pos];
      bump();
    }
    if (pos >= text.size()) fail("unterminated string literal");
    bump();  // closing quote
    return out;
  }

  SurfaceTerm term() {
    char c = peek();
    SurfaceTerm t;
    if (c == '"') {
      t.kind = SurfaceTerm::Kind::string;
      t.text = string_literal();
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = SurfaceTerm::Kind::number;
      t.number = number();
    } else {
      t.kind = SurfaceTerm::Kind::variable;
      t.text = identifier();
    }
    return t;
  }
};

}  // namespace

ParsedQuery parse_query(const std::string& text) {
  Lexer lex(text);
  ParsedQuery q;
  q.head_name = lex.identifier();
  lex.expect('(');
  q.head_vars.push_back(lex.identifier());
  while (lex.accept(',')) q.head_vars.push_back(lex.identifier());
  lex.expect(')');
  if (!lex.accept_str(":-")) lex.fail("expected ':-'");

  bool more = true;
  while (more) {
    // Lookahead decides atom vs constraint: an atom name is followed by '('.
    std::size_t save_pos = lex.pos;
    int save_line = lex.line, save_col = lex.col;
    std::string name = lex.identifier();
    if (lex.peek() == '(') {
      SurfaceAtom atom;
      atom.predicate = name;
      lex.expect('(');
      atom.args.push_back(lex.term());
      while (lex.accept(',')) atom.args.push_back(lex.term());
      lex.expect(')');
      q.atoms.push_back(std::move(atom));
    } else {
      lex.pos = save_pos;
      lex.line = save_line;
      lex.col = save_col;
      SurfaceConstraint c;
      c.var = lex.identifier();
      if (lex.accept_str("<="))
        c.op = CompareOp::le;
      else if (lex.accept_str(">="))
        c.op = CompareOp::ge;
      else if (lex.accept_str("!="))
        c.op = CompareOp::ne;
      else if (lex.accept_str("<"))
        c.op = CompareOp::lt;
      else if (lex.accept_str(">"))
        c.op = CompareOp::gt;
      else if (lex.accept_str("="))
        c.op = CompareOp::eq;
      else
        lex.fail("expected comparison operator");
      c.literal = lex.term();
      if (c.literal.kind == SurfaceTerm::Kind::variable)
        lex.fail("constraint bound must be a literal");
      q.constraints.push_back(std::move(c));
    }
    more = lex.accept(',');
  }
  lex.expect('.');
  if (!lex.at_end()) lex.fail("trailing input after query");
  if (q.atoms.empty()) lex.fail("query needs at least one atom");
  return q;
}

namespace {
std::string term_text(const SurfaceTerm& t) {
  switch (t.kind) {
    case SurfaceTerm::Kind::variable: return t.text;
    case SurfaceTerm::Kind::number: return std::to_string(t.number);
    case SurfaceTerm::Kind::string: return "\"" + t.text + "\"";
  }
  return "";
}
}  // namespace

std::string print_query(const ParsedQuery& q) {
  std::ostringstream out;
  out << q.head_name << "(";
  for (std::size_t i = 0; i < q.head_vars.size(); ++i) out << (i ? "," : "") << q.head_vars[i];
  out << ") :- ";
  bool first = true;
  for (const auto& atom : q.atoms) {
    if (!first) out << ", ";
    first = false;
    out << atom.predicate << "(";
    for (std::size_t i = 0; i < atom.args.size(); ++i)
      out << (i ? "," : "") << term_text(atom.args[i]);
    out << ")";
  }
  for (const auto& c : q.constraints) {
    out << ", " << c.var << " " << to_string(c.op) << " " << term_text(c.literal);
  }
  out << ".";
  return out.str();
}

namespace {
Value resolve_literal(const SurfaceTerm& t, const Database& db) {
  if (t.kind == SurfaceTerm::Kind::number) return t.number;
  auto id = db.lookup(t.text);
  if (!id) throw config_error("string literal \"" + t.text + "\" not present in the database");
  return *id;
}
}  // namespace

ConjunctiveQuery bind_query(const ParsedQuery& pq, const Database& db) {
  ConjunctiveQuery q;
  q.head_vars = pq.head_vars;
  for (const auto& atom : pq.atoms) {
    Atom a;
    a.predicate = atom.predicate;
    for (const auto& t : atom.args) {
      if (t.kind == SurfaceTerm::Kind::variable)
        a.args.push_back(Term::make_var(t.text));
      else
        a.args.push_back(Term::make_const(resolve_literal(t, db)));
    }
    q.atoms.push_back(std::move(a));
  }
  for (const auto& c : pq.constraints)
    q.constraints.push_back({c.var, c.op, resolve_literal(c.literal, db)});
  validate_query(q, db);
  return q;
}

std::vector<ColumnType> head_column_types(const ParsedQuery& pq, const Database& db) {
  std::map<std::string, ColumnType> var_type;
  for (const auto& atom : pq.atoms) {
    auto types = db.column_types.find(atom.predicate);
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      if (atom.args[i].kind != SurfaceTerm::Kind::variable) continue;
      ColumnType t = types != db.column_types.end() && i < types->second.size()
                         ? types->second[i]
                         : ColumnType::integer;
      auto [it, fresh] = var_type.emplace(atom.args[i].text, t);
      if (!fresh && it->second != t)
        throw config_error("variable " + atom.args[i].text +
                           " joins integer and text columns");
    }
  }
  std::vector<ColumnType> out;
  for (const auto& v : pq.head_vars) {
    auto it = var_type.find(v);
    out.push_back(it == var_type.end() ? ColumnType::integer : it->second);
  }
  return out;
}

}  // namespace rtj
