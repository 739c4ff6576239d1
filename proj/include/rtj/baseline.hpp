#ifndef RTJ_BASELINE_HPP
#define RTJ_BASELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rtj/engine.hpp"
#include "rtj/relmodel.hpp"

namespace rtj {

// Exact answer by enumerating U^{free vars} and testing every atom and
// constraint. Refuses when |U|^n exceeds 2^24.
ResultSet brute_force_join(const ConjunctiveQuery& q, const Database& db);

// Intersection of strictly ascending lists via the max-tracking seek loop;
// terminates as soon as any iterator is exhausted.
std::vector<Value> leapfrog_unary(const std::vector<std::vector<Value>>& lists);

struct ProbeStats {
  std::uint64_t bindings = 0;  // variable bindings attempted
  std::uint64_t seeks = 0;     // lower-bound probes into sorted indexes
};

// Leapfrog triejoin over per-atom sorted indexes. Repeated variables inside
// an atom go through the identity-relation rewrite and constants through a
// virtual singleton relation; both stay non-materialised. `var_order` lists
// the query's free variables (defaults to head order when empty).
std::pair<ResultSet, ProbeStats> lftj(const ConjunctiveQuery& q, const Database& db,
                                      const std::vector<std::string>& var_order = {});

// Left-deep pairwise hash joins in atom order, constraints filtered last.
ResultSet pairwise_hash_join(const ConjunctiveQuery& q, const Database& db);

}  // namespace rtj

#endif
