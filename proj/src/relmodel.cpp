#include "rtj/relmodel.hpp"

#include <algorithm>
#include <set>

namespace rtj {

void Relation::insert(Tuple t) {
  if (t.size() != arity) throw usage_error("tuple arity mismatch for relation " + name);
  auto it = std::lower_bound(tuples.begin(), tuples.end(), t);
  if (it == tuples.end() || *it != t) tuples.insert(it, std::move(t));
}

void Relation::finalize() {
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
}

bool Relation::contains(const Tuple& t) const {
  return std::binary_search(tuples.begin(), tuples.end(), t);
}

std::size_t Database::max_relation_size() const {
  std::size_t n = 0;
  for (const auto& [_, rel] : relations) n = std::max(n, rel.size());
  return n;
}

const Relation& Database::relation(const std::string& name) const {
  auto it = relations.find(name);
  if (it == relations.end()) throw config_error("unknown relation: " + name);
  return it->second;
}

Value Database::intern(const std::string& s) {
  auto it = dictionary_index.find(s);
  if (it != dictionary_index.end()) return it->second;
  Value id = dictionary.size();
  dictionary.push_back(s);
  dictionary_index.emplace(s, id);
  return id;
}

std::optional<Value> Database::lookup(const std::string& s) const {
  auto it = dictionary_index.find(s);
  if (it == dictionary_index.end()) return std::nullopt;
  return it->second;
}

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::le: return "<=";
    case CompareOp::lt: return "<";
    case CompareOp::ge: return ">=";
    case CompareOp::gt: return ">";
    case CompareOp::eq: return "=";
    case CompareOp::ne: return "!=";
  }
  return "?";
}

bool compare(Value lhs, CompareOp op, Value rhs) {
  switch (op) {
    case CompareOp::le: return lhs <= rhs;
    case CompareOp::lt: return lhs < rhs;
    case CompareOp::ge: return lhs >= rhs;
    case CompareOp::gt: return lhs > rhs;
    case CompareOp::eq: return lhs == rhs;
    case CompareOp::ne: return lhs != rhs;
  }
  return false;
}

std::vector<std::string> ConjunctiveQuery::free_vars() const {
  std::set<std::string> in_atoms;
  for (const auto& atom : atoms)
    for (const auto& t : atom.args)
      if (t.is_var()) in_atoms.insert(t.var);
  std::vector<std::string> out;
  for (const auto& v : head_vars)
    if (in_atoms.count(v)) out.push_back(v);
  return out;
}

std::optional<Value> ConjunctiveQuery::bound_value(const std::string& var) const {
  for (const auto& [v, c] : bound_head)
    if (v == var) return c;
  return std::nullopt;
}

Hypergraph build_hypergraph(const ConjunctiveQuery& q) {
  Hypergraph h;
  std::set<std::string> seen;
  for (const auto& atom : q.atoms) {
    std::vector<std::string> edge;
    for (const auto& t : atom.args) {
      if (!t.is_var()) continue;
      if (std::find(edge.begin(), edge.end(), t.var) == edge.end()) edge.push_back(t.var);
      if (seen.insert(t.var).second) h.vertices.push_back(t.var);
    }
    std::sort(edge.begin(), edge.end());
    h.edges.push_back(std::move(edge));
  }
  return h;
}

ConjunctiveQuery normalize_query(const ConjunctiveQuery& q) {
  ConjunctiveQuery out;
  out.head_vars = q.head_vars;
  out.bound_head = q.bound_head;
  for (const auto& atom : q.atoms)
    if (std::find(out.atoms.begin(), out.atoms.end(), atom) == out.atoms.end())
      out.atoms.push_back(atom);
  for (const auto& c : q.constraints)
    if (std::find(out.constraints.begin(), out.constraints.end(), c) == out.constraints.end())
      out.constraints.push_back(c);

  // Substitute x = c into the atoms when the equality is the only constraint
  // mentioning x; otherwise the equality stays behind as a pruning constraint.
  for (auto it = out.constraints.begin(); it != out.constraints.end();) {
    const auto& c = *it;
    bool sole_mention = c.op == CompareOp::eq;
    if (sole_mention)
      for (const auto& other : out.constraints)
        if (&other != &c && other.var == c.var) sole_mention = false;
    if (!sole_mention) {
      ++it;
      continue;
    }
    for (auto& atom : out.atoms)
      for (auto& term : atom.args)
        if (term.is_var() && term.var == c.var) term = Term::make_const(c.bound);
    out.bound_head.emplace_back(c.var, c.bound);
    it = out.constraints.erase(it);
  }
  return out;
}

bool semijoin_check(const Relation& rel, const std::vector<std::optional<Value>>& binding) {
  if (binding.size() != rel.arity) throw usage_error("binding arity mismatch");
  for (const auto& t : rel.tuples) {
    bool agree = true;
    for (std::size_t i = 0; i < binding.size() && agree; ++i)
      if (binding[i] && *binding[i] != t[i]) agree = false;
    if (agree) return true;
  }
  return false;
}

Tuple assemble_row(const ConjunctiveQuery& q, const std::map<std::string, Value>& assignment) {
  Tuple row;
  row.reserve(q.head_vars.size());
  for (const auto& head : q.head_vars) {
    if (auto fixed = q.bound_value(head)) {
      row.push_back(*fixed);
      continue;
    }
    auto it = assignment.find(head);
    if (it == assignment.end()) throw usage_error("no binding for head variable " + head);
    row.push_back(it->second);
  }
  return row;
}

void validate_query(const ConjunctiveQuery& q, const Database& db) {
  if (q.atoms.empty()) throw config_error("query has no atoms");
  std::set<std::string> atom_vars;
  for (const auto& atom : q.atoms) {
    const Relation& rel = db.relation(atom.predicate);
    if (atom.args.size() != rel.arity)
      throw config_error("arity mismatch for " + atom.predicate + ": query uses " +
                         std::to_string(atom.args.size()) + ", relation has " +
                         std::to_string(rel.arity));
    for (const auto& t : atom.args)
      if (t.is_var()) atom_vars.insert(t.var);
  }
  for (const auto& v : atom_vars)
    if (std::find(q.head_vars.begin(), q.head_vars.end(), v) == q.head_vars.end())
      throw config_error("variable " + v + " missing from the head");
  for (const auto& v : q.head_vars) {
    bool ok = atom_vars.count(v) || q.bound_value(v).has_value();
    if (!ok) throw config_error("head variable " + v + " does not occur in any atom");
  }
  for (const auto& c : q.constraints)
    if (!atom_vars.count(c.var))
      throw config_error("constraint references unknown variable " + c.var);
}

}  // namespace rtj
