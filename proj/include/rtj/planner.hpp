#ifndef RTJ_PLANNER_HPP
#define RTJ_PLANNER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rtj/bittrie.hpp"
#include "rtj/boolean.hpp"

namespace rtj {

// Total order on the Boolean variables of a query (packed ids).
struct VariableOrder {
  std::vector<std::uint32_t> seq;
};

// x_{alpha(1)}^(0) ... x_{alpha(n)}^(0) x_{alpha(1)}^(1) ... cyclically.
// `alpha` is a permutation of 0..n-1; ids are packed as var * width + bit.
VariableOrder interleaved_variable_order(std::size_t var_count, unsigned width,
                                         const std::vector<std::uint32_t>& alpha);
VariableOrder interleaved_variable_order(std::size_t var_count, unsigned width);

// Directed precedence constraints between vertices (original-variable indices
// for one bit layer). Edge (x, y) means some index order requires x before y.
struct PrecedenceGraph {
  std::size_t vertex_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

// Per-layer precedence constraints induced by the relations' interleaved
// index orders: one edge per consecutive pair of variable positions in each
// atom's order. Constants are skipped; self-loops are dropped.
PrecedenceGraph induced_constraints(const BooleanQuery& q,
                                    const std::map<std::string, AttributeBitOrder>& index_orders);

// Ordered partition of the graph's vertices: SCCs in a topological order of
// the condensation. Ties between ready components go to the one whose
// smallest member ranks earliest in `canonical_rank` (identity if empty).
std::vector<std::vector<std::uint32_t>> scc_expansion_order(
    const PrecedenceGraph& g, const std::vector<std::uint32_t>& canonical_rank = {});

// How one atom consumes its trie: `positions` lists the atom's Booleanised
// positions in the trie's index order, and `ranges[g]` is the half-open
// position range descended after binding group g-1 (`ranges[0]` holds the
// setup descents, available before any variable binds).
struct AtomSchedule {
  AttributeBitOrder order;
  std::vector<BoolPosition> positions;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
};

// Ordered partition S_1 < ... < S_k of the Boolean variable set plus the
// per-atom descent schedules realising it.
struct ExpansionPlan {
  std::vector<std::vector<std::uint32_t>> groups;
  std::vector<AtomSchedule> schedules;

  std::size_t group_count() const { return groups.size(); }
  std::size_t max_group_size() const;
};

// SCC-based plan for fixed (interleaved) per-relation index orders: layer j's
// groups repeat the layer-0 SCC partition on that layer's variables, layers
// in bit-index order. Rejects non-interleaved index orders.
ExpansionPlan plan_for_query(const BooleanQuery& q,
                             const std::map<std::string, AttributeBitOrder>& index_orders,
                             const std::vector<std::uint32_t>& canonical_rank = {});

// Singleton-group plan for an arbitrary total order on the Boolean variables.
// Each atom gets its own order-consistent index: constant positions first,
// variable positions sorted by their rank in `order`.
ExpansionPlan plan_for_variable_order(const BooleanQuery& q, const VariableOrder& order);

// Human-readable plan dump: groups in order, p, k, per-atom schedules.
std::string describe_plan(const ExpansionPlan& plan, const BooleanQuery& q);

}  // namespace rtj

#endif
