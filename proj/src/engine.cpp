#include "rtj/engine.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <thread>

namespace rtj {

std::uint64_t RecursionStats::total_nodes() const {
  return std::accumulate(nodes_per_level.begin(), nodes_per_level.end(), std::uint64_t{0});
}

std::uint64_t RecursionStats::total_candidates() const {
  return std::accumulate(candidates_per_level.begin(), candidates_per_level.end(),
                         std::uint64_t{0});
}

namespace {

struct Searcher {
  const BooleanQuery& q;
  const ExpansionPlan& plan;
  const std::vector<const BitTrie*>& tries;
  std::size_t k;

  std::vector<std::int8_t> assign;                 // -1 unset
  std::vector<std::vector<TrieCursor>> cursors;    // [level][atom]
  std::vector<std::uint64_t> next_candidate;       // per level
  std::vector<std::vector<std::size_t>> group_pruners;  // pruners touching each group
  std::vector<std::uint64_t> prefix_width;         // bits bound before level d

  RecursionStats stats;
  std::vector<std::vector<std::uint8_t>> solutions;
  std::vector<std::vector<std::uint64_t>> level_sets;
  bool capture = false;
  std::ostream* trace = nullptr;

  Searcher(const BooleanQuery& q, const ExpansionPlan& plan,
           const std::vector<const BitTrie*>& tries)
      : q(q), plan(plan), tries(tries), k(plan.group_count()) {
    assign.assign(q.bool_var_count(), -1);
    cursors.assign(k + 1, std::vector<TrieCursor>(q.atoms.size()));
    next_candidate.assign(k + 1, 0);
    stats.nodes_per_level.assign(k + 1, 0);
    stats.candidates_per_level.assign(k + 1, 0);

    group_pruners.assign(k, {});
    for (std::size_t d = 0; d < k; ++d)
      for (std::size_t pi = 0; pi < q.pruners.size(); ++pi)
        for (std::uint32_t id : plan.groups[d])
          if (id / q.spec.width == q.pruners[pi].var) {
            group_pruners[d].push_back(pi);
            break;
          }

    prefix_width.assign(k + 1, 0);
    for (std::size_t d = 0; d < k; ++d)
      prefix_width[d + 1] = prefix_width[d] + plan.groups[d].size();
  }

  // Setup descents: prefix constants, performed once from each root. A failed
  // descent (or an empty trie) leaves the cursor invalid, failing every
  // candidate that later consults this atom.
  void init_root() {
    for (std::size_t a = 0; a < q.atoms.size(); ++a) {
      TrieCursor cur = tries[a]->root();
      if (tries[a]->empty()) cur.node = -1;
      const auto& sched = plan.schedules[a];
      auto [b, e] = sched.ranges[0];
      for (std::uint32_t p = b; p < e && cur.valid(); ++p)
        cur = tries[a]->descend(cur, sched.positions[p].const_bit);
      cursors[0][a] = cur;
    }
  }

  bool pruners_ok(std::size_t d) const {
    for (std::size_t pi : group_pruners[d]) {
      const RangePruner& pruner = q.pruners[pi];
      PartialBits bits(q.spec.width);
      for (unsigned j = 0; j < q.spec.width; ++j) {
        std::int8_t v = assign[pruner.var * q.spec.width + j];
        if (v >= 0) bits[j] = static_cast<std::uint8_t>(v);
      }
      InequalityConstraint c{q.var_names[pruner.var], pruner.op, pruner.bound};
      if (!range_can_extend(bits, c, q.spec)) return false;
    }
    return true;
  }

  bool advance_atoms(std::size_t d) {
    for (std::size_t a = 0; a < q.atoms.size(); ++a) {
      TrieCursor cur = cursors[d][a];
      if (!cur.valid()) return false;
      const auto& sched = plan.schedules[a];
      auto [b, e] = sched.ranges[d + 1];
      for (std::uint32_t p = b; p < e; ++p) {
        const BoolPosition& pos = sched.positions[p];
        std::uint8_t bit =
            pos.is_const ? pos.const_bit : static_cast<std::uint8_t>(assign[pos.bool_var]);
        cur = tries[a]->descend(cur, bit);
        if (!cur.valid()) return false;
      }
      cursors[d + 1][a] = cur;
    }
    return true;
  }

  std::uint64_t pack_prefix(std::size_t level) const {
    std::uint64_t packed = 0;
    std::uint64_t i = 0;
    for (std::size_t g = 0; g < level; ++g)
      for (std::uint32_t id : plan.groups[g]) {
        if (assign[id] > 0) packed |= std::uint64_t{1} << i;
        ++i;
      }
    return packed;
  }

  void emit_node(std::size_t level) {
    if (capture) level_sets[level].push_back(pack_prefix(level));
    if (trace) {
      *trace << "node\tlevel=" << level << "\tprefix=(";
      bool first = true;
      for (std::size_t g = 0; g < level; ++g)
        for (std::uint32_t id : plan.groups[g]) {
          *trace << (first ? "" : ",") << int(assign[id]);
          first = false;
        }
      *trace << ")";
      if (level == k) *trace << "\tsolution";
      *trace << "\n";
    }
  }

  void set_group(std::size_t d, std::uint64_t candidate) {
    const auto& group = plan.groups[d];
    for (std::size_t i = 0; i < group.size(); ++i)
      assign[group[i]] = (candidate >> (group.size() - 1 - i)) & 1;
  }

  void clear_group(std::size_t d) {
    for (std::uint32_t id : plan.groups[d]) assign[id] = -1;
  }

  // Explores all descendants of the current state, entering at `base` with
  // levels < base already bound. Candidates are tried in ascending binary
  // value of the group assignment.
  void search_from(std::size_t base) {
    if (k == base) return;
    std::size_t d = base;
    next_candidate[d] = 0;
    while (true) {
      std::uint64_t limit = std::uint64_t{1} << plan.groups[d].size();
      bool descended = false;
      while (next_candidate[d] < limit) {
        std::uint64_t c = next_candidate[d]++;
        ++stats.candidates_per_level[d + 1];
        set_group(d, c);
        if (!pruners_ok(d) || !advance_atoms(d)) continue;
        ++stats.nodes_per_level[d + 1];
        emit_node(d + 1);
        if (d + 1 == k) {
          ++stats.solutions;
          solutions.emplace_back(assign.begin(), assign.end());
          continue;
        }
        ++d;
        next_candidate[d] = 0;
        descended = true;
        break;
      }
      if (descended) continue;
      clear_group(d);
      if (d == base) break;
      --d;
    }
  }
};

ExecOutcome run_single(const BooleanQuery& q, const ExpansionPlan& plan,
                       const std::vector<const BitTrie*>& tries, const EngineOptions& opts) {
  Searcher searcher(q, plan, tries);
  searcher.capture = opts.capture_level_sets;
  searcher.trace = opts.trace;
  if (searcher.capture) {
    if (q.bool_var_count() > 64)
      throw config_error("level-set capture supports at most 64 Boolean variables");
    searcher.level_sets.assign(searcher.k + 1, {});
  }
  searcher.init_root();
  searcher.stats.nodes_per_level[0] = 1;
  searcher.emit_node(0);
  if (searcher.k == 0) {
    // Every position was a constant: the answer is the empty tuple iff all
    // setup descents went through.
    bool ok = true;
    for (const auto& cur : searcher.cursors[0]) ok = ok && cur.valid();
    if (ok) {
      ++searcher.stats.solutions;
      searcher.solutions.emplace_back();
    }
  } else {
    searcher.search_from(0);
  }

  ExecOutcome out;
  out.solutions = std::move(searcher.solutions);
  out.stats = std::move(searcher.stats);
  out.level_sets = std::move(searcher.level_sets);
  return out;
}

// Root level is explored once; surviving level-1 states are then split
// across workers with private stats, merged by summation.
ExecOutcome run_parallel(const BooleanQuery& q, const ExpansionPlan& plan,
                         const std::vector<const BitTrie*>& tries, unsigned jobs) {
  std::size_t k = plan.group_count();
  Searcher root(q, plan, tries);
  root.init_root();
  root.stats.nodes_per_level[0] = 1;

  struct Level1State {
    std::uint64_t candidate;
    std::vector<TrieCursor> cursors;
  };
  std::vector<Level1State> survivors;
  std::uint64_t limit = std::uint64_t{1} << plan.groups[0].size();
  for (std::uint64_t c = 0; c < limit; ++c) {
    ++root.stats.candidates_per_level[1];
    root.set_group(0, c);
    if (!root.pruners_ok(0) || !root.advance_atoms(0)) continue;
    ++root.stats.nodes_per_level[1];
    survivors.push_back({c, root.cursors[1]});
  }
  root.clear_group(0);

  unsigned worker_count = std::max(1u, std::min<unsigned>(jobs, survivors.size()));
  std::vector<Searcher> workers;
  workers.reserve(worker_count);
  for (unsigned t = 0; t < worker_count; ++t) workers.emplace_back(q, plan, tries);

  auto work = [&](unsigned t) {
    Searcher& s = workers[t];
    s.init_root();
    for (std::size_t i = t; i < survivors.size(); i += worker_count) {
      s.set_group(0, survivors[i].candidate);
      s.cursors[1] = survivors[i].cursors;
      if (1 == k) {
        ++s.stats.solutions;
        s.solutions.emplace_back(s.assign.begin(), s.assign.end());
      } else {
        s.search_from(1);
      }
      s.clear_group(0);
    }
  };
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < worker_count; ++t) threads.emplace_back(work, t);
  for (auto& th : threads) th.join();

  ExecOutcome out;
  out.stats = std::move(root.stats);
  for (auto& w : workers) {
    for (std::size_t d = 0; d <= k; ++d) {
      out.stats.nodes_per_level[d] += d >= 2 ? w.stats.nodes_per_level[d] : 0;
      out.stats.candidates_per_level[d] += d >= 2 ? w.stats.candidates_per_level[d] : 0;
    }
    out.stats.solutions += w.stats.solutions;
    for (auto& s : w.solutions) out.solutions.push_back(std::move(s));
  }
  return out;
}

}  // namespace

ExecOutcome execute_plan(const BooleanQuery& q, const ExpansionPlan& plan,
                         const std::vector<const BitTrie*>& atom_tries,
                         const EngineOptions& opts) {
  if (atom_tries.size() != q.atoms.size())
    throw config_error("one trie per atom required");
  for (std::size_t a = 0; a < q.atoms.size(); ++a)
    if (atom_tries[a]->leaf_depth() != q.atoms[a].arity * q.spec.width)
      throw config_error("trie depth does not match atom " + std::to_string(a));

  auto start = std::chrono::steady_clock::now();
  ExecOutcome out;
  if (opts.jobs > 1 && plan.group_count() >= 1) {
    if (opts.capture_level_sets || opts.trace)
      throw config_error("tracing and level capture are single-threaded");
    out = run_parallel(q, plan, atom_tries, opts.jobs);
  } else {
    out = run_single(q, plan, atom_tries, opts);
  }
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

IndexedDatabase index_database(const Database& db, const EncodingSpec& spec,
                               const std::map<std::string, std::vector<std::uint32_t>>& betas) {
  IndexedDatabase idb;
  idb.db = &db;
  idb.spec = spec;
  for (const auto& [name, rel] : db.relations) {
    auto it = betas.find(name);
    AttributeBitOrder order = it == betas.end()
                                  ? interleaved_attribute_order(rel.arity, spec.width)
                                  : interleaved_attribute_order(rel.arity, spec.width, it->second);
    idb.tries.emplace(name, BitTrie::build(rel, order, spec));
    idb.orders.emplace(name, std::move(order));
  }
  return idb;
}

ResultSet decode_results(const std::vector<std::vector<std::uint8_t>>& solutions,
                         const BooleanQuery& bq, const ConjunctiveQuery& q) {
  std::map<std::string, std::uint32_t> var_index;
  for (std::uint32_t i = 0; i < bq.var_names.size(); ++i) var_index[bq.var_names[i]] = i;

  ResultSet rows;
  rows.reserve(solutions.size());
  for (const auto& bits : solutions) {
    Tuple row;
    row.reserve(q.head_vars.size());
    for (const auto& head : q.head_vars) {
      if (auto fixed = q.bound_value(head)) {
        row.push_back(*fixed);
        continue;
      }
      std::uint32_t v = var_index.at(head);
      BitString var_bits(bq.spec.width);
      for (unsigned j = 0; j < bq.spec.width; ++j)
        var_bits[j] = bits[v * bq.spec.width + j];
      row.push_back(decode(var_bits, bq.spec));
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

JoinResult run_grtj(const ConjunctiveQuery& q, const Database& db, const EncodingSpec& spec,
                    const VariableOrder& order, const EngineOptions& opts) {
  JoinResult result;
  result.bq = booleanise_query(q, spec);
  result.plan = plan_for_variable_order(result.bq, order);

  // Order-consistent secondary index per atom, built on demand.
  std::vector<BitTrie> atom_tries;
  atom_tries.reserve(result.bq.atoms.size());
  for (std::size_t a = 0; a < result.bq.atoms.size(); ++a)
    atom_tries.push_back(
        BitTrie::build(db.relation(result.bq.atoms[a].relation),
                       result.plan.schedules[a].order, spec));
  std::vector<const BitTrie*> trie_ptrs;
  for (const auto& t : atom_tries) trie_ptrs.push_back(&t);

  result.raw = execute_plan(result.bq, result.plan, trie_ptrs, opts);
  result.stats = result.raw.stats;
  result.results = decode_results(result.raw.solutions, result.bq, q);
  return result;
}

JoinResult run_rtj(const ConjunctiveQuery& q, const IndexedDatabase& idb,
                   const std::vector<std::uint32_t>& canonical_rank, const EngineOptions& opts) {
  JoinResult result;
  result.bq = booleanise_query(q, idb.spec);
  result.plan = plan_for_query(result.bq, idb.orders, canonical_rank);

  std::vector<const BitTrie*> trie_ptrs;
  for (const auto& atom : result.bq.atoms) {
    auto it = idb.tries.find(atom.relation);
    if (it == idb.tries.end()) throw config_error("no index for relation " + atom.relation);
    trie_ptrs.push_back(&it->second);
  }

  result.raw = execute_plan(result.bq, result.plan, trie_ptrs, opts);
  result.stats = result.raw.stats;
  result.results = decode_results(result.raw.solutions, result.bq, q);
  return result;
}

}  // namespace rtj
