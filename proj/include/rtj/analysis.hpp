#ifndef RTJ_ANALYSIS_HPP
#define RTJ_ANALYSIS_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "rtj/engine.hpp"
#include "rtj/planner.hpp"
#include "rtj/relmodel.hpp"

namespace rtj {

// |Q_{I_1}|, ..., |Q_{I_k}| along one expansion order.
struct SubquerySizeProfile {
  std::vector<std::uint64_t> sizes;
};

// Subquery sizes computed without tries or recursion: enumerate {0,1}^I and
// test membership in each atom's projected tuple set.
class SubqueryOracle {
 public:
  SubqueryOracle(const BooleanQuery& q, const Database& db);

  // `prefix` lists Boolean variable ids; `consumed[a]` lists the attr-major
  // positions of atom a that participate (its projection). Packed answers
  // put the i-th prefix variable at bit i.
  std::set<std::uint64_t> answers(const std::vector<std::uint32_t>& prefix,
                                  const std::vector<std::vector<std::uint32_t>>& consumed) const;
  std::uint64_t size(const std::vector<std::uint32_t>& prefix,
                     const std::vector<std::vector<std::uint32_t>>& consumed) const;

 private:
  const BooleanQuery* q_;
  std::vector<std::vector<BitString>> atom_rows_;
};

// Natural-join reading: atom a participates with every constant position and
// every position whose variable lies in the prefix.
std::vector<std::vector<std::uint32_t>> consumed_positions_full(
    const BooleanQuery& q, const std::vector<std::uint32_t>& prefix);

// Index-aware reading: the longest prefix of each atom's scheduled position
// order whose variable positions are all in `prefix` (constants never block).
std::vector<std::vector<std::uint32_t>> consumed_positions_scheduled(
    const BooleanQuery& q, const ExpansionPlan& plan, const std::vector<std::uint32_t>& prefix);

// Flattened groups[0..level) in group order (the engine's packing order).
std::vector<std::uint32_t> plan_prefix(const ExpansionPlan& plan, std::size_t level);

std::uint64_t subquery_size_oracle(const BooleanQuery& q, const Database& db,
                                   const std::vector<std::uint32_t>& prefix);

// Per-level subquery sizes for a full plan (index-aware reading).
SubquerySizeProfile subquery_profile(const BooleanQuery& q, const Database& db,
                                     const ExpansionPlan& plan);

struct BoundReport {
  bool ok = true;
  std::string first_mismatch;
  std::uint64_t total_candidates = 0;
  std::uint64_t expected_candidates = 0;
};

// Checks nodes_per_level[j] = |Q_{I_j}| and the exact candidate counts
// candidates[j] = 2^{|S_j|} * nodes[j-1] for every level.
BoundReport verify_instance_bound(const RecursionStats& stats, const SubquerySizeProfile& profile,
                                  const ExpansionPlan& plan);

// Exact rational arithmetic for the edge-cover LP.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n);  // NOLINT(google-explicit-constructor)
  Rational(long long n, long long d);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  std::string str() const;
};

struct FractionalCover {
  std::vector<Rational> weights;  // one per hyperedge
  Rational total;
};

// Minimum-weight fractional edge cover, solved exactly by enumerating basic
// feasible solutions. Guarded to at most 12 edges and 12 vertices.
FractionalCover fractional_edge_cover(const Hypergraph& h);

// Hypergraph induced by a vertex subset: each edge projects to its
// intersection with `keep`.
Hypergraph project_hypergraph(const Hypergraph& h, const std::vector<std::string>& keep);

struct GeneratedInstance {
  Database db;
  ConjunctiveQuery query;
  std::uint64_t max_relation_size = 0;
  std::int64_t expected_output = -1;   // -1 when unknown
  double expected_exponent = -1;
};

// R = S = T = {0..q-1}^2 under the triangle query; output is exactly q^3.
GeneratedInstance gen_agm_grid(std::uint64_t q_side);

// R = {(2i, 2i+1)} under Q(x) :- R(x,x); the answer is empty.
GeneratedInstance gen_pathological_pairs(std::uint64_t count);

// `tuples` distinct uniform tuples of the given arity over a 2^16 universe;
// the query is a single-atom partial match with `specified` leading
// constants.
GeneratedInstance gen_bernoulli_relation(std::uint64_t tuples, std::size_t arity,
                                         std::size_t specified, std::uint64_t seed);

// Least-squares slope of log(count) vs log(n). Requires >= 4 points; the
// smallest-n point is dropped when its count is below the noise floor of 32.
double fit_scaling_exponent(std::vector<std::pair<double, double>> points);

}  // namespace rtj

#endif
