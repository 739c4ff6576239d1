#ifndef RTJ_ENGINE_HPP
#define RTJ_ENGINE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rtj/bittrie.hpp"
#include "rtj/boolean.hpp"
#include "rtj/planner.hpp"
#include "rtj/relmodel.hpp"

namespace rtj {

using ResultSet = std::vector<Tuple>;

struct RecursionStats {
  std::vector<std::uint64_t> nodes_per_level;       // length k+1, [0] = 1 (root)
  std::vector<std::uint64_t> candidates_per_level;  // [j] = candidates tested to build level j
  std::uint64_t solutions = 0;
  double wall_seconds = 0;

  std::uint64_t total_nodes() const;
  std::uint64_t total_candidates() const;
};

struct EngineOptions {
  bool capture_level_sets = false;  // needs <= 64 Boolean variables
  std::ostream* trace = nullptr;
  unsigned jobs = 1;
};

// Raw engine output: one bit vector per solution, indexed by packed Boolean
// variable id.
struct ExecOutcome {
  std::vector<std::vector<std::uint8_t>> solutions;
  RecursionStats stats;
  // level_sets[d] = surviving partial assignments at depth d, packed with bit
  // i holding the i-th variable of the flattened group order.
  std::vector<std::vector<std::uint64_t>> level_sets;
};

// Runs the backtracking recursion for `plan` over one trie per atom, testing
// every truth assignment of each group and keeping those where all scheduled
// descents succeed and every pruner can still be satisfied.
ExecOutcome execute_plan(const BooleanQuery& q, const ExpansionPlan& plan,
                         const std::vector<const BitTrie*>& atom_tries,
                         const EngineOptions& opts = {});

// Query-independent per-relation indexes, precomputed once per database.
struct IndexedDatabase {
  const Database* db = nullptr;
  EncodingSpec spec;
  std::map<std::string, AttributeBitOrder> orders;
  std::map<std::string, BitTrie> tries;
};

IndexedDatabase index_database(
    const Database& db, const EncodingSpec& spec,
    const std::map<std::string, std::vector<std::uint32_t>>& betas = {});

struct JoinResult {
  ResultSet results;  // decoded rows in head order, sorted
  RecursionStats stats;
  ExpansionPlan plan;
  BooleanQuery bq;
  ExecOutcome raw;
};

// One bit per level over per-atom order-consistent tries built on demand.
JoinResult run_grtj(const ConjunctiveQuery& q, const Database& db, const EncodingSpec& spec,
                    const VariableOrder& order, const EngineOptions& opts = {});

// One plan group per level over the shared per-relation interleaved tries.
JoinResult run_rtj(const ConjunctiveQuery& q, const IndexedDatabase& idb,
                   const std::vector<std::uint32_t>& canonical_rank = {},
                   const EngineOptions& opts = {});

// Regroups solution bits per variable, decodes them, and re-inserts values
// fixed by normalisation, in head order. Rows come out sorted.
ResultSet decode_results(const std::vector<std::vector<std::uint8_t>>& solutions,
                         const BooleanQuery& bq, const ConjunctiveQuery& q);

}  // namespace rtj

#endif
