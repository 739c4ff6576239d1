#include "rtj/baseline.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace rtj {

ResultSet brute_force_join(const ConjunctiveQuery& q, const Database& db) {
  validate_query(q, db);
  std::vector<std::string> vars = q.free_vars();
  std::size_t n = vars.size();
  Value u = std::max<Value>(db.universe_size, 1);

  double space = 1;
  for (std::size_t i = 0; i < n; ++i) space *= static_cast<double>(u);
  if (space > double(1 << 24))
    throw size_guard_error("brute force refused: |U|^n exceeds 2^24");

  std::map<std::string, std::size_t> var_slot;
  for (std::size_t i = 0; i < n; ++i) var_slot[vars[i]] = i;

  ResultSet rows;
  std::vector<Value> assignment(n, 0);
  while (true) {
    bool ok = true;
    for (const auto& atom : q.atoms) {
      Tuple t;
      t.reserve(atom.args.size());
      for (const auto& term : atom.args)
        t.push_back(term.is_var() ? assignment[var_slot[term.var]] : term.value);
      if (!db.relation(atom.predicate).contains(t)) {
        ok = false;
        break;
      }
    }
    for (const auto& c : q.constraints) {
      if (!ok) break;
      ok = compare(assignment[var_slot[c.var]], c.op, c.bound);
    }
    if (ok) {
      std::map<std::string, Value> binding;
      for (std::size_t i = 0; i < n; ++i) binding[vars[i]] = assignment[i];
      rows.push_back(assemble_row(q, binding));
    }
    // odometer
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++assignment[i] < u) break;
      assignment[i] = 0;
    }
    if (i == n) break;
    if (n == 0) break;
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<Value> leapfrog_unary(const std::vector<std::vector<Value>>& lists) {
  for (const auto& list : lists)
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i - 1] >= list[i]) throw usage_error("leapfrog input must be strictly ascending");

  std::vector<Value> out;
  if (lists.empty()) return out;
  std::vector<std::size_t> pos(lists.size(), 0);
  for (const auto& list : lists)
    if (list.empty()) return out;

  while (true) {
    Value max_key = 0;
    for (std::size_t i = 0; i < lists.size(); ++i)
      max_key = std::max(max_key, lists[i][pos[i]]);
    bool all_equal = true;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      if (lists[i][pos[i]] == max_key) continue;
      all_equal = false;
      // advance to the first element not smaller than the current maximum
      auto it = std::lower_bound(lists[i].begin() + pos[i], lists[i].end(), max_key);
      if (it == lists[i].end()) return out;
      pos[i] = static_cast<std::size_t>(it - lists[i].begin());
    }
    if (all_equal) {
      out.push_back(max_key);
      if (++pos[0] >= lists[0].size()) return out;
    }
  }
}

namespace {

// LFTJ works on rewritten atoms with pairwise-distinct variables. Repeated
// variables and constants become auxiliary variables constrained by virtual
// (never materialised) identity / singleton relations.
struct LftjAtom {
  enum class Kind { stored, identity, singleton } kind = Kind::stored;
  std::vector<std::string> vars;       // in induced (rank-sorted) order
  std::vector<Tuple> rows;             // stored: column-permuted, sorted
  Value const_value = 0;               // singleton
};

struct StoredRange {
  std::size_t lo = 0, hi = 0;
};

struct LftjRunner {
  std::vector<LftjAtom> atoms;
  std::vector<std::string> order;           // full variable order incl. aux
  std::vector<std::string> real_vars;       // free query variables
  Value universe = 1;
  ProbeStats stats;
  std::vector<std::map<std::string, Value>> matches;

  // per stored atom: range stack, one entry per bound prefix length
  std::vector<std::vector<StoredRange>> ranges;
  std::map<std::string, Value> binding;

  struct LevelIter {
    LftjAtom* atom = nullptr;
    std::size_t atom_index = 0;
    std::size_t col = 0;       // stored: column at this depth
    std::size_t pos = 0;       // stored: row cursor
    std::size_t hi = 0;        // stored: range end
    Value virt_key = 0;        // identity first var / singleton / identity second
    bool exhausted = false;
  };

  Value key(const LevelIter& it) const {
    if (it.atom->kind == LftjAtom::Kind::stored) return it.atom->rows[it.pos][it.col];
    return it.virt_key;
  }

  void seek(LevelIter& it, Value target) {
    ++stats.seeks;
    if (it.atom->kind == LftjAtom::Kind::stored) {
      // gallop, then binary search within the located window
      std::size_t step = 1, lo = it.pos;
      while (lo + step < it.hi && it.atom->rows[lo + step][it.col] < target) {
        lo += step;
        step <<= 1;
      }
      auto begin = it.atom->rows.begin();
      auto found = std::lower_bound(begin + lo, begin + std::min(it.hi, lo + step + 1),
                                    Tuple{}, [&](const Tuple& row, const Tuple&) {
                                      return row[it.col] < target;
                                    });
      it.pos = static_cast<std::size_t>(found - begin);
      if (it.pos >= it.hi) it.exhausted = true;
    } else if (it.atom->kind == LftjAtom::Kind::identity && it.col == 0) {
      it.virt_key = std::max(it.virt_key, target);
      if (it.virt_key >= universe) it.exhausted = true;
    } else {  // singleton value (identity second var behaves the same)
      if (target > it.virt_key) it.exhausted = true;
    }
  }

  void solve(std::size_t depth) {
    if (depth == order.size()) {
      matches.push_back(binding);
      return;
    }
    const std::string& var = order[depth];

    std::vector<LevelIter> iters;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      LftjAtom& atom = atoms[a];
      auto it = std::find(atom.vars.begin(), atom.vars.end(), var);
      if (it == atom.vars.end()) continue;
      std::size_t col = static_cast<std::size_t>(it - atom.vars.begin());
      LevelIter iter;
      iter.atom = &atom;
      iter.atom_index = a;
      iter.col = col;
      if (atom.kind == LftjAtom::Kind::stored) {
        StoredRange r = ranges[a].back();
        iter.pos = r.lo;
        iter.hi = r.hi;
        iter.exhausted = r.lo >= r.hi;
      } else if (atom.kind == LftjAtom::Kind::identity) {
        if (col == 0) {
          iter.virt_key = 0;
          iter.exhausted = universe == 0;
        } else {
          iter.virt_key = binding.at(atom.vars[0]);
        }
      } else {
        iter.virt_key = atom.const_value;
      }
      iters.push_back(iter);
    }
    if (iters.empty()) throw config_error("variable " + var + " occurs in no atom");

    while (true) {
      Value max_key = 0;
      bool exhausted = false;
      for (auto& it : iters) {
        if (it.exhausted) {
          exhausted = true;
          break;
        }
        max_key = std::max(max_key, key(it));
      }
      if (exhausted) break;

      bool aligned = true;
      for (auto& it : iters)
        if (key(it) != max_key) {
          aligned = false;
          seek(it, max_key);
          if (it.exhausted) break;
        }
      if (!aligned) continue;

      // all iterators agree: bind and recurse
      ++stats.bindings;
      binding[var] = max_key;
      for (auto& it : iters) {
        if (it.atom->kind != LftjAtom::Kind::stored) continue;
        auto begin = it.atom->rows.begin();
        auto end_it = std::upper_bound(begin + it.pos, begin + it.hi, Tuple{},
                                       [&](const Tuple&, const Tuple& row) {
                                         return max_key < row[it.col];
                                       });
        ranges[it.atom_index].push_back(
            {it.pos, static_cast<std::size_t>(end_it - begin)});
      }
      solve(depth + 1);
      for (auto& it : iters)
        if (it.atom->kind == LftjAtom::Kind::stored) ranges[it.atom_index].pop_back();
      binding.erase(var);

      seek(iters[0], max_key + 1);
      if (max_key + 1 == 0) break;  // wrapped
    }
  }
};

}  // namespace

std::pair<ResultSet, ProbeStats> lftj(const ConjunctiveQuery& q, const Database& db,
                                      const std::vector<std::string>& var_order) {
  validate_query(q, db);
  LftjRunner runner;
  runner.universe = std::max<Value>(db.universe_size, 1);
  runner.real_vars = q.free_vars();

  std::vector<std::string> order = var_order.empty() ? runner.real_vars : var_order;
  {
    auto sorted_order = order;
    auto sorted_free = runner.real_vars;
    std::sort(sorted_order.begin(), sorted_order.end());
    std::sort(sorted_free.begin(), sorted_free.end());
    if (sorted_order != sorted_free)
      throw config_error("variable order must be a permutation of the query variables");
  }

  // Rewrite: fresh auxiliaries for constants and repeated in-atom variables.
  std::size_t aux_counter = 0;
  std::vector<std::pair<std::vector<std::string>, const Relation*>> stored;  // raw arg vars
  std::vector<LftjAtom> virtuals;
  for (const auto& atom : q.atoms) {
    std::vector<std::string> arg_vars;
    std::set<std::string> seen;
    for (const auto& term : atom.args) {
      if (!term.is_var()) {
        std::string aux = "$c" + std::to_string(aux_counter++);
        LftjAtom c;
        c.kind = LftjAtom::Kind::singleton;
        c.vars = {aux};
        c.const_value = term.value;
        virtuals.push_back(std::move(c));
        arg_vars.push_back(aux);
        order.push_back(aux);
      } else if (seen.count(term.var)) {
        std::string aux = "$i" + std::to_string(aux_counter++);
        LftjAtom ident;
        ident.kind = LftjAtom::Kind::identity;
        ident.vars = {term.var, aux};  // reordered by rank below
        virtuals.push_back(std::move(ident));
        arg_vars.push_back(aux);
        order.push_back(aux);
      } else {
        seen.insert(term.var);
        arg_vars.push_back(term.var);
      }
    }
    stored.emplace_back(std::move(arg_vars), &db.relation(atom.predicate));
  }

  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

  for (auto& [arg_vars, rel] : stored) {
    std::vector<std::size_t> perm(arg_vars.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
      return rank[arg_vars[a]] < rank[arg_vars[b]];
    });
    LftjAtom atom;
    atom.kind = LftjAtom::Kind::stored;
    for (std::size_t p : perm) atom.vars.push_back(arg_vars[p]);
    for (const auto& t : rel->tuples) {
      Tuple row;
      row.reserve(perm.size());
      for (std::size_t p : perm) row.push_back(t[p]);
      atom.rows.push_back(std::move(row));
    }
    std::sort(atom.rows.begin(), atom.rows.end());
    runner.atoms.push_back(std::move(atom));
  }
  for (auto& v : virtuals) {
    if (v.kind == LftjAtom::Kind::identity && rank[v.vars[0]] > rank[v.vars[1]])
      std::swap(v.vars[0], v.vars[1]);
    runner.atoms.push_back(std::move(v));
  }

  runner.order = order;
  runner.ranges.assign(runner.atoms.size(), {});
  for (std::size_t a = 0; a < runner.atoms.size(); ++a)
    runner.ranges[a].push_back({0, runner.atoms[a].rows.size()});

  runner.solve(0);

  ResultSet rows;
  for (const auto& match : runner.matches) {
    bool ok = true;
    for (const auto& c : q.constraints)
      if (!compare(match.at(c.var), c.op, c.bound)) {
        ok = false;
        break;
      }
    if (ok) rows.push_back(assemble_row(q, match));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return {std::move(rows), runner.stats};
}

ResultSet pairwise_hash_join(const ConjunctiveQuery& q, const Database& db) {
  validate_query(q, db);

  struct Intermediate {
    std::vector<std::string> vars;
    std::vector<Tuple> rows;
  };

  // Filtered projection of one atom onto its distinct variables.
  auto project_atom = [&](const Atom& atom) {
    Intermediate out;
    std::vector<std::size_t> keep;  // positions of first variable occurrences
    for (std::size_t i = 0; i < atom.args.size(); ++i)
      if (atom.args[i].is_var() &&
          std::find(out.vars.begin(), out.vars.end(), atom.args[i].var) == out.vars.end()) {
        out.vars.push_back(atom.args[i].var);
        keep.push_back(i);
      }
    std::set<Tuple> dedup;
    for (const auto& t : db.relation(atom.predicate).tuples) {
      bool ok = true;
      std::map<std::string, Value> first_val;
      for (std::size_t i = 0; i < atom.args.size() && ok; ++i) {
        const Term& term = atom.args[i];
        if (!term.is_var()) {
          ok = t[i] == term.value;
        } else {
          auto [it, fresh] = first_val.emplace(term.var, t[i]);
          ok = fresh || it->second == t[i];
        }
      }
      if (!ok) continue;
      Tuple row;
      for (std::size_t i : keep) row.push_back(t[i]);
      dedup.insert(std::move(row));
    }
    out.rows.assign(dedup.begin(), dedup.end());
    return out;
  };

  Intermediate acc = project_atom(q.atoms.front());
  for (std::size_t ai = 1; ai < q.atoms.size(); ++ai) {
    Intermediate next = project_atom(q.atoms[ai]);
    std::vector<std::size_t> acc_shared, next_shared, next_new;
    for (std::size_t i = 0; i < next.vars.size(); ++i) {
      auto it = std::find(acc.vars.begin(), acc.vars.end(), next.vars[i]);
      if (it == acc.vars.end())
        next_new.push_back(i);
      else {
        acc_shared.push_back(static_cast<std::size_t>(it - acc.vars.begin()));
        next_shared.push_back(i);
      }
    }

    std::unordered_multimap<std::string, std::size_t> hash;
    auto key_of = [](const Tuple& row, const std::vector<std::size_t>& idx) {
      std::string key;
      for (std::size_t i : idx) key += std::to_string(row[i]) + ",";
      return key;
    };
    for (std::size_t r = 0; r < next.rows.size(); ++r)
      hash.emplace(key_of(next.rows[r], next_shared), r);

    Intermediate joined;
    joined.vars = acc.vars;
    for (std::size_t i : next_new) joined.vars.push_back(next.vars[i]);
    for (const auto& row : acc.rows) {
      auto [lo, hi] = hash.equal_range(key_of(row, acc_shared));
      for (auto it = lo; it != hi; ++it) {
        Tuple combined = row;
        for (std::size_t i : next_new) combined.push_back(next.rows[it->second][i]);
        joined.rows.push_back(std::move(combined));
      }
    }
    acc = std::move(joined);
  }

  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < acc.vars.size(); ++i) slot[acc.vars[i]] = i;
  ResultSet rows;
  for (const auto& row : acc.rows) {
    bool ok = true;
    for (const auto& c : q.constraints)
      if (!compare(row[slot.at(c.var)], c.op, c.bound)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    std::map<std::string, Value> binding;
    for (std::size_t i = 0; i < acc.vars.size(); ++i) binding[acc.vars[i]] = row[i];
    rows.push_back(assemble_row(q, binding));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

}  // namespace rtj
