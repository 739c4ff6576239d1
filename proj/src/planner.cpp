#include "rtj/planner.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace rtj {

VariableOrder interleaved_variable_order(std::size_t var_count, unsigned width,
                                         const std::vector<std::uint32_t>& alpha) {
  if (alpha.size() != var_count) throw usage_error("alpha must be a permutation of the variables");
  std::vector<bool> seen(var_count, false);
  for (auto a : alpha) {
    if (a >= var_count || seen[a]) throw usage_error("alpha is not a permutation");
    seen[a] = true;
  }
  VariableOrder order;
  order.seq.reserve(var_count * width);
  for (unsigned j = 0; j < width; ++j)
    for (std::size_t i = 0; i < var_count; ++i)
      order.seq.push_back(alpha[i] * width + j);
  return order;
}

VariableOrder interleaved_variable_order(std::size_t var_count, unsigned width) {
  std::vector<std::uint32_t> alpha(var_count);
  std::iota(alpha.begin(), alpha.end(), 0);
  return interleaved_variable_order(var_count, width, alpha);
}

namespace {

// Extracts beta from an interleaved order, or throws if the order is not the
// cyclic interleaving of some attribute permutation.
std::vector<std::uint32_t> extract_beta(const AttributeBitOrder& order, std::size_t arity,
                                        unsigned width) {
  if (order.size() != arity * width) throw config_error("index order length mismatch");
  std::vector<std::uint32_t> beta;
  for (std::size_t i = 0; i < arity; ++i) beta.push_back(order.positions[i].first);
  try {
    AttributeBitOrder expect = interleaved_attribute_order(arity, width, beta);
    if (expect.positions != order.positions)
      throw config_error("index order is not interleaved");
  } catch (const usage_error&) {
    throw config_error("index order is not interleaved");
  }
  return beta;
}

// Variable at layer-0 position of each attribute in index order; constants
// yield no vertex (nullopt).
std::vector<std::optional<std::uint32_t>> layer_vars(const BoolAtom& atom,
                                                     const std::vector<std::uint32_t>& beta,
                                                     unsigned width) {
  std::vector<std::optional<std::uint32_t>> vars;
  for (auto attr : beta) {
    const BoolPosition& pos = atom.positions[attr * width];  // bit 0 of the attribute
    if (pos.is_const)
      vars.push_back(std::nullopt);
    else
      vars.push_back(pos.bool_var / width);  // original variable index
  }
  return vars;
}

}  // namespace

PrecedenceGraph induced_constraints(
    const BooleanQuery& q, const std::map<std::string, AttributeBitOrder>& index_orders) {
  PrecedenceGraph g;
  g.vertex_count = q.var_count();
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& atom : q.atoms) {
    auto it = index_orders.find(atom.relation);
    if (it == index_orders.end())
      throw config_error("no index order for relation " + atom.relation);
    auto beta = extract_beta(it->second, atom.arity, q.spec.width);
    auto vars = layer_vars(atom, beta, q.spec.width);
    std::optional<std::uint32_t> prev;
    for (const auto& v : vars) {
      if (!v) continue;  // constants contribute no vertices
      if (prev && *prev != *v) edges.emplace(*prev, *v);
      prev = v;
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

namespace {

struct TarjanState {
  const std::vector<std::vector<std::uint32_t>>& adj;
  std::vector<std::int32_t> index, lowlink;
  std::vector<bool> on_stack;
  std::vector<std::uint32_t> stack;
  std::int32_t counter = 0;
  std::vector<std::vector<std::uint32_t>> components;

  explicit TarjanState(const std::vector<std::vector<std::uint32_t>>& adj)
      : adj(adj), index(adj.size(), -1), lowlink(adj.size(), 0), on_stack(adj.size(), false) {}

  void visit(std::uint32_t v) {
    index[v] = lowlink[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::uint32_t w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        lowlink[v] = std::min(lowlink[v], lowlink[w]);
      } else if (on_stack[w]) {
        lowlink[v] = std::min(lowlink[v], index[w]);
      }
    }
    if (lowlink[v] == index[v]) {
      std::vector<std::uint32_t> comp;
      std::uint32_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      components.push_back(std::move(comp));
    }
  }
};

}  // namespace

std::vector<std::vector<std::uint32_t>> scc_expansion_order(
    const PrecedenceGraph& g, const std::vector<std::uint32_t>& canonical_rank) {
  std::size_t n = g.vertex_count;
  std::vector<std::uint32_t> rank(n);
  if (canonical_rank.empty()) {
    std::iota(rank.begin(), rank.end(), 0);
  } else {
    if (canonical_rank.size() != n) throw usage_error("canonical rank size mismatch");
    rank = canonical_rank;
  }

  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [from, to] : g.edges) {
    if (from >= n || to >= n) throw usage_error("edge endpoint out of range");
    adj[from].push_back(to);
  }
  TarjanState tarjan(adj);
  for (std::uint32_t v = 0; v < n; ++v)
    if (tarjan.index[v] < 0) tarjan.visit(v);

  auto& comps = tarjan.components;
  std::vector<std::uint32_t> comp_of(n, 0);
  for (std::uint32_t c = 0; c < comps.size(); ++c) {
    auto& members = comps[c];
    std::sort(members.begin(), members.end(),
              [&](std::uint32_t a, std::uint32_t b) { return rank[a] < rank[b]; });
    for (std::uint32_t v : members) comp_of[v] = c;
  }

  // Kahn's algorithm over the condensation; ready components are picked by
  // the canonical rank of their smallest member.
  std::vector<std::set<std::uint32_t>> cadj(comps.size());
  std::vector<std::uint32_t> indegree(comps.size(), 0);
  for (const auto& [from, to] : g.edges) {
    std::uint32_t cf = comp_of[from], ct = comp_of[to];
    if (cf != ct && cadj[cf].insert(ct).second) ++indegree[ct];
  }
  auto comp_rank = [&](std::uint32_t c) {
    std::uint32_t best = UINT32_MAX;
    for (std::uint32_t v : comps[c]) best = std::min(best, rank[v]);
    return best;
  };
  using Entry = std::pair<std::uint32_t, std::uint32_t>;  // (rank key, component)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::uint32_t c = 0; c < comps.size(); ++c)
    if (indegree[c] == 0) ready.emplace(comp_rank(c), c);

  std::vector<std::vector<std::uint32_t>> ordered;
  while (!ready.empty()) {
    auto [_, c] = ready.top();
    ready.pop();
    ordered.push_back(comps[c]);
    for (std::uint32_t d : cadj[c])
      if (--indegree[d] == 0) ready.emplace(comp_rank(d), d);
  }
  return ordered;
}

std::size_t ExpansionPlan::max_group_size() const {
  std::size_t p = 0;
  for (const auto& g : groups) p = std::max(p, g.size());
  return p;
}

namespace {

// Greedy schedule: after each group binds, every position whose value is now
// known (constant, or variable bound by this or an earlier group) is
// consumed, in index order.
std::vector<std::pair<std::uint32_t, std::uint32_t>> schedule_ranges(
    const std::vector<BoolPosition>& positions,
    const std::vector<std::vector<std::uint32_t>>& groups, std::size_t bool_var_count) {
  std::vector<bool> bound(bool_var_count, false);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
  std::uint32_t next = 0;
  auto consume = [&]() {
    std::uint32_t begin = next;
    while (next < positions.size() &&
           (positions[next].is_const || bound[positions[next].bool_var]))
      ++next;
    ranges.emplace_back(begin, next);
  };
  consume();  // setup: prefix constants
  for (const auto& group : groups) {
    for (std::uint32_t id : group) bound[id] = true;
    consume();
  }
  if (next != positions.size())
    throw config_error("expansion plan does not cover the index order of an atom");
  return ranges;
}

std::vector<BoolPosition> positions_in_order(const BoolAtom& atom, const AttributeBitOrder& order,
                                             unsigned width) {
  std::vector<BoolPosition> out;
  out.reserve(order.size());
  for (const auto& [attr, bit] : order.positions)
    out.push_back(atom.positions[attr * width + bit]);
  return out;
}

}  // namespace

ExpansionPlan plan_for_query(const BooleanQuery& q,
                             const std::map<std::string, AttributeBitOrder>& index_orders,
                             const std::vector<std::uint32_t>& canonical_rank) {
  unsigned w = q.spec.width;
  PrecedenceGraph layer = induced_constraints(q, index_orders);
  auto layer_groups = scc_expansion_order(layer, canonical_rank);

  ExpansionPlan plan;
  for (unsigned j = 0; j < w; ++j)
    for (const auto& group : layer_groups) {
      std::vector<std::uint32_t> bits;
      bits.reserve(group.size());
      for (std::uint32_t v : group) bits.push_back(v * w + j);
      plan.groups.push_back(std::move(bits));
    }

  for (const auto& atom : q.atoms) {
    AtomSchedule sched;
    sched.order = index_orders.at(atom.relation);
    sched.positions = positions_in_order(atom, sched.order, w);
    sched.ranges = schedule_ranges(sched.positions, plan.groups, q.bool_var_count());
    plan.schedules.push_back(std::move(sched));
  }
  return plan;
}

ExpansionPlan plan_for_variable_order(const BooleanQuery& q, const VariableOrder& order) {
  std::size_t nbool = q.bool_var_count();
  if (order.seq.size() != nbool) throw config_error("variable order must cover all Boolean variables");
  std::vector<std::uint32_t> rank(nbool, UINT32_MAX);
  for (std::uint32_t r = 0; r < order.seq.size(); ++r) {
    std::uint32_t id = order.seq[r];
    if (id >= nbool || rank[id] != UINT32_MAX)
      throw config_error("variable order is not a permutation");
    rank[id] = r;
  }

  ExpansionPlan plan;
  for (std::uint32_t id : order.seq) plan.groups.push_back({id});

  unsigned w = q.spec.width;
  for (const auto& atom : q.atoms) {
    // Order-consistent per-atom index: constants first, then variable
    // positions by expansion rank (stable on ties from repeated variables).
    std::vector<std::uint32_t> posidx(atom.positions.size());
    std::iota(posidx.begin(), posidx.end(), 0);
    auto key = [&](std::uint32_t p) {
      const BoolPosition& pos = atom.positions[p];
      return pos.is_const ? std::int64_t{-1} : std::int64_t{rank[pos.bool_var]};
    };
    std::stable_sort(posidx.begin(), posidx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });

    AtomSchedule sched;
    for (std::uint32_t p : posidx) {
      sched.order.positions.emplace_back(p / w, p % w);
      sched.positions.push_back(atom.positions[p]);
    }
    sched.ranges = schedule_ranges(sched.positions, plan.groups, nbool);
    plan.schedules.push_back(std::move(sched));
  }
  return plan;
}

std::string describe_plan(const ExpansionPlan& plan, const BooleanQuery& q) {
  std::ostringstream out;
  out << "expansion plan: k=" << plan.group_count() << " p=" << plan.max_group_size() << "\n";
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    out << "  S" << g + 1 << " = {";
    for (std::size_t i = 0; i < plan.groups[g].size(); ++i)
      out << (i ? ", " : "") << q.bool_var_name(plan.groups[g][i]);
    out << "}\n";
  }
  for (std::size_t a = 0; a < plan.schedules.size(); ++a) {
    const auto& sched = plan.schedules[a];
    out << "  atom " << a << " (" << q.atoms[a].relation << "): order";
    for (const auto& [attr, bit] : sched.order.positions)
      out << " " << char('A' + attr % 26) << bit;
    out << "; descents per level";
    for (const auto& [b, e] : sched.ranges) out << " " << (e - b);
    out << "\n";
  }
  return out.str();
}

}  // namespace rtj
