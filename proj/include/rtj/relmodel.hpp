#ifndef RTJ_RELMODEL_HPP
#define RTJ_RELMODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtj {

// Dictionary-encoded element of the universe [0, universe_size).
using Value = std::uint64_t;
using Tuple = std::vector<Value>;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_overflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct size_guard_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A named finite set of fixed-arity tuples. Set semantics: ingestion sorts
// and deduplicates, so `tuples` is always strictly increasing.
struct Relation {
  std::string name;
  std::size_t arity = 0;
  std::vector<Tuple> tuples;

  Relation() = default;
  Relation(std::string name, std::size_t arity) : name(std::move(name)), arity(arity) {}

  void insert(Tuple t);
  // Restores the sorted-unique invariant after bulk appends.
  void finalize();
  std::size_t size() const { return tuples.size(); }
  bool contains(const Tuple& t) const;
};

enum class ColumnType { integer, text };

struct Database {
  std::map<std::string, Relation> relations;
  Value universe_size = 0;
  // Dictionary for text data: id -> string, allocated in first-seen order.
  std::vector<std::string> dictionary;
  std::map<std::string, Value> dictionary_index;
  // Per relation, per column: how values print (all-integer loads leave this
  // defaulted to integer).
  std::map<std::string, std::vector<ColumnType>> column_types;

  std::size_t max_relation_size() const;
  const Relation& relation(const std::string& name) const;
  bool has_relation(const std::string& name) const { return relations.count(name) != 0; }
  Value intern(const std::string& s);
  std::optional<Value> lookup(const std::string& s) const;
};

enum class CompareOp { le, lt, ge, gt, eq, ne };

const char* to_string(CompareOp op);
bool compare(Value lhs, CompareOp op, Value rhs);

struct Term {
  enum class Kind { variable, constant } kind = Kind::variable;
  std::string var;
  Value value = 0;

  static Term make_var(std::string name) {
    Term t;
    t.kind = Kind::variable;
    t.var = std::move(name);
    return t;
  }
  static Term make_const(Value v) {
    Term t;
    t.kind = Kind::constant;
    t.value = v;
    return t;
  }
  bool is_var() const { return kind == Kind::variable; }
  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;
  bool operator==(const Atom&) const = default;
};

struct InequalityConstraint {
  std::string var;
  CompareOp op = CompareOp::le;
  Value bound = 0;
  bool operator==(const InequalityConstraint&) const = default;
};

// Full conjunctive query: every variable occurring in an atom is a head
// variable. `bound_head` records head variables that normalisation fixed to
// a constant (rewritten into the atoms); they no longer occur in `atoms`.
struct ConjunctiveQuery {
  std::vector<std::string> head_vars;
  std::vector<Atom> atoms;
  std::vector<InequalityConstraint> constraints;
  std::vector<std::pair<std::string, Value>> bound_head;

  // Head variables that still occur in atoms, in head order.
  std::vector<std::string> free_vars() const;
  std::optional<Value> bound_value(const std::string& var) const;
};

struct Hypergraph {
  std::vector<std::string> vertices;            // first-occurrence order
  std::vector<std::vector<std::string>> edges;  // one per atom, distinct vars
};

// One hyperedge per atom over the atom's distinct variables; constants
// contribute nothing.
Hypergraph build_hypergraph(const ConjunctiveQuery& q);

// Removes syntactically identical duplicate atoms and duplicate constraints,
// then rewrites `var = const` constraints into constants inside the atoms.
// A variable mentioned by more than one constraint keeps its equality as a
// pruning constraint instead of being substituted.
ConjunctiveQuery normalize_query(const ConjunctiveQuery& q);

// True iff some tuple of `rel` agrees with `binding` on every bound position.
bool semijoin_check(const Relation& rel, const std::vector<std::optional<Value>>& binding);

// Row over head_vars from an assignment of the free variables plus the
// normalisation-bound values.
Tuple assemble_row(const ConjunctiveQuery& q, const std::map<std::string, Value>& assignment);

// Checks arity agreement, head/atom variable consistency and constant range
// against a database. Throws config_error on violation.
void validate_query(const ConjunctiveQuery& q, const Database& db);

}  // namespace rtj

#endif
