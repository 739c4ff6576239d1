#include "rtj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_set>

namespace rtj {

SubqueryOracle::SubqueryOracle(const BooleanQuery& q, const Database& db) : q_(&q) {
  for (const auto& atom : q.atoms)
    atom_rows_.push_back(booleanise_relation(db.relation(atom.relation), q.spec));
}

std::set<std::uint64_t> SubqueryOracle::answers(
    const std::vector<std::uint32_t>& prefix,
    const std::vector<std::vector<std::uint32_t>>& consumed) const {
  if (prefix.size() > 24) throw size_guard_error("subquery oracle limited to 24 variables");
  if (consumed.size() != q_->atoms.size()) throw usage_error("consumed positions per atom");

  std::vector<std::int64_t> prefix_slot(q_->bool_var_count(), -1);
  for (std::size_t i = 0; i < prefix.size(); ++i) prefix_slot[prefix[i]] = std::int64_t(i);

  // Per atom: the projection of its Booleanised tuples onto the consumed
  // positions, with constant positions filtered out up front.
  std::vector<std::unordered_set<std::uint64_t>> projections(q_->atoms.size());
  std::vector<std::vector<std::uint32_t>> var_positions(q_->atoms.size());
  for (std::size_t a = 0; a < q_->atoms.size(); ++a) {
    const BoolAtom& atom = q_->atoms[a];
    std::vector<std::uint32_t> vars, consts;
    for (std::uint32_t p : consumed[a]) {
      if (p >= atom.positions.size()) throw usage_error("consumed position out of range");
      if (atom.positions[p].is_const)
        consts.push_back(p);
      else {
        if (prefix_slot[atom.positions[p].bool_var] < 0)
          throw usage_error("consumed variable position outside the prefix");
        vars.push_back(p);
      }
    }
    if (vars.size() > 64) throw size_guard_error("too many projected positions");
    for (const auto& row : atom_rows_[a]) {
      bool ok = true;
      for (std::uint32_t p : consts)
        if (row[p] != atom.positions[p].const_bit) {
          ok = false;
          break;
        }
      if (!ok) continue;
      std::uint64_t key = 0;
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (row[vars[i]]) key |= std::uint64_t{1} << i;
      projections[a].insert(key);
    }
    var_positions[a] = std::move(vars);
  }

  std::set<std::uint64_t> out;
  std::uint64_t space = std::uint64_t{1} << prefix.size();
  for (std::uint64_t t = 0; t < space; ++t) {
    bool ok = true;
    for (std::size_t a = 0; a < q_->atoms.size() && ok; ++a) {
      std::uint64_t key = 0;
      for (std::size_t i = 0; i < var_positions[a].size(); ++i) {
        std::uint32_t p = var_positions[a][i];
        std::int64_t slot = prefix_slot[q_->atoms[a].positions[p].bool_var];
        if ((t >> slot) & 1) key |= std::uint64_t{1} << i;
      }
      ok = projections[a].count(key) != 0;
    }
    // Inequality pruners: a candidate survives only if its fixed bits can
    // still be completed to a satisfying value.
    for (const auto& pruner : q_->pruners) {
      if (!ok) break;
      PartialBits bits(q_->spec.width);
      for (unsigned j = 0; j < q_->spec.width; ++j) {
        std::int64_t slot = prefix_slot[q_->bool_var(pruner.var, j)];
        if (slot >= 0) bits[j] = static_cast<std::uint8_t>((t >> slot) & 1);
      }
      InequalityConstraint c{q_->var_names[pruner.var], pruner.op, pruner.bound};
      ok = range_can_extend(bits, c, q_->spec);
    }
    if (ok) out.insert(t);
  }
  return out;
}

std::uint64_t SubqueryOracle::size(const std::vector<std::uint32_t>& prefix,
                                   const std::vector<std::vector<std::uint32_t>>& consumed) const {
  return answers(prefix, consumed).size();
}

std::vector<std::vector<std::uint32_t>> consumed_positions_full(
    const BooleanQuery& q, const std::vector<std::uint32_t>& prefix) {
  std::vector<bool> in_prefix(q.bool_var_count(), false);
  for (std::uint32_t id : prefix) in_prefix[id] = true;
  std::vector<std::vector<std::uint32_t>> consumed;
  for (const auto& atom : q.atoms) {
    std::vector<std::uint32_t> positions;
    for (std::uint32_t p = 0; p < atom.positions.size(); ++p)
      if (atom.positions[p].is_const || in_prefix[atom.positions[p].bool_var])
        positions.push_back(p);
    consumed.push_back(std::move(positions));
  }
  return consumed;
}

std::vector<std::vector<std::uint32_t>> consumed_positions_scheduled(
    const BooleanQuery& q, const ExpansionPlan& plan, const std::vector<std::uint32_t>& prefix) {
  std::vector<bool> in_prefix(q.bool_var_count(), false);
  for (std::uint32_t id : prefix) in_prefix[id] = true;
  std::vector<std::vector<std::uint32_t>> consumed;
  for (std::size_t a = 0; a < q.atoms.size(); ++a) {
    const AtomSchedule& sched = plan.schedules[a];
    std::vector<std::uint32_t> positions;
    unsigned w = q.spec.width;
    for (std::size_t s = 0; s < sched.positions.size(); ++s) {
      const BoolPosition& pos = sched.positions[s];
      if (!pos.is_const && !in_prefix[pos.bool_var]) break;
      const auto& [attr, bit] = sched.order.positions[s];
      positions.push_back(attr * w + bit);
    }
    consumed.push_back(std::move(positions));
  }
  return consumed;
}

std::vector<std::uint32_t> plan_prefix(const ExpansionPlan& plan, std::size_t level) {
  std::vector<std::uint32_t> prefix;
  for (std::size_t g = 0; g < level; ++g)
    prefix.insert(prefix.end(), plan.groups[g].begin(), plan.groups[g].end());
  return prefix;
}

std::uint64_t subquery_size_oracle(const BooleanQuery& q, const Database& db,
                                   const std::vector<std::uint32_t>& prefix) {
  SubqueryOracle oracle(q, db);
  return oracle.size(prefix, consumed_positions_full(q, prefix));
}

SubquerySizeProfile subquery_profile(const BooleanQuery& q, const Database& db,
                                     const ExpansionPlan& plan) {
  SubqueryOracle oracle(q, db);
  SubquerySizeProfile profile;
  for (std::size_t level = 1; level <= plan.group_count(); ++level) {
    auto prefix = plan_prefix(plan, level);
    profile.sizes.push_back(oracle.size(prefix, consumed_positions_scheduled(q, plan, prefix)));
  }
  return profile;
}

BoundReport verify_instance_bound(const RecursionStats& stats, const SubquerySizeProfile& profile,
                                  const ExpansionPlan& plan) {
  BoundReport report;
  std::size_t k = plan.group_count();
  auto fail = [&](const std::string& what) {
    if (report.ok) {
      report.ok = false;
      report.first_mismatch = what;
    }
  };
  if (stats.nodes_per_level.size() != k + 1 || profile.sizes.size() != k) {
    fail("dimension mismatch between stats and profile");
    return report;
  }
  if (stats.nodes_per_level[0] != 1) fail("root level must hold exactly one node");
  for (std::size_t j = 1; j <= k; ++j) {
    std::uint64_t expected_nodes = profile.sizes[j - 1];
    std::uint64_t expected_cands =
        (std::uint64_t{1} << plan.groups[j - 1].size()) * stats.nodes_per_level[j - 1];
    report.expected_candidates += expected_cands;
    if (stats.nodes_per_level[j] != expected_nodes)
      fail("level " + std::to_string(j) + ": nodes " + std::to_string(stats.nodes_per_level[j]) +
           " != subquery size " + std::to_string(expected_nodes));
    if (stats.candidates_per_level[j] != expected_cands)
      fail("level " + std::to_string(j) + ": candidates " +
           std::to_string(stats.candidates_per_level[j]) + " != " + std::to_string(expected_cands));
  }
  if (stats.solutions != stats.nodes_per_level[k]) fail("solutions != nodes at final level");
  report.total_candidates = stats.total_candidates();
  return report;
}

namespace {
long long gcd_ll(long long a, long long b) {
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

long long checked_ll(__int128 v) {
  if (v > __int128(INT64_MAX) || v < -__int128(INT64_MAX))
    throw std::overflow_error("rational overflow");
  return static_cast<long long>(v);
}
}  // namespace

Rational::Rational(long long n) : num(n), den(1) {}

Rational::Rational(long long n, long long d) {
  if (d == 0) throw usage_error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  long long g = gcd_ll(n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

Rational Rational::operator+(const Rational& o) const {
  __int128 n = __int128(num) * o.den + __int128(o.num) * den;
  __int128 d = __int128(den) * o.den;
  return Rational(checked_ll(n), checked_ll(d));
}

Rational Rational::operator-(const Rational& o) const {
  return *this + Rational(-o.num, o.den);
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(checked_ll(__int128(num) * o.num), checked_ll(__int128(den) * o.den));
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num == 0) throw usage_error("division by zero");
  return Rational(checked_ll(__int128(num) * o.den), checked_ll(__int128(den) * o.num));
}

bool Rational::operator<(const Rational& o) const {
  return __int128(num) * o.den < __int128(o.num) * den;
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

namespace {

// Solves a square rational system by Gaussian elimination. Returns false when
// singular.
bool solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b,
                  std::vector<Rational>& x) {
  std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col].num == 0) ++pivot;
    if (pivot == n) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col].num == 0) continue;
      Rational factor = a[row][col] / a[col][col];
      for (std::size_t c2 = col; c2 < n; ++c2) a[row][c2] = a[row][c2] - factor * a[col][c2];
      b[row] = b[row] - factor * b[col];
    }
  }
  x.assign(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

}  // namespace

FractionalCover fractional_edge_cover(const Hypergraph& h) {
  std::size_t edges = h.edges.size();
  std::size_t verts = h.vertices.size();
  if (edges > 12 || verts > 12)
    throw size_guard_error("edge cover LP limited to 12 edges and 12 vertices");

  FractionalCover cover;
  cover.weights.assign(edges, Rational(0));
  cover.total = Rational(0);
  if (verts == 0) return cover;
  if (edges == 0) throw config_error("vertices cannot be covered without edges");

  std::map<std::string, std::size_t> vert_index;
  for (std::size_t i = 0; i < verts; ++i) vert_index[h.vertices[i]] = i;
  // incidence[v][e] = 1 iff vertex v lies in edge e
  std::vector<std::vector<int>> incidence(verts, std::vector<int>(edges, 0));
  for (std::size_t e = 0; e < edges; ++e)
    for (const auto& v : h.edges[e]) {
      auto it = vert_index.find(v);
      if (it == vert_index.end()) throw config_error("edge vertex missing from vertex set");
      incidence[it->second][e] = 1;
    }
  for (std::size_t v = 0; v < verts; ++v)
    if (std::accumulate(incidence[v].begin(), incidence[v].end(), 0) == 0)
      throw config_error("vertex " + h.vertices[v] + " lies in no edge");

  // Constraint rows: verts cover rows (>= 1) then edges nonnegativity rows
  // (>= 0). A basic solution makes `edges` of them tight.
  std::size_t rows = verts + edges;
  auto row_coeff = [&](std::size_t row, std::size_t e) {
    return row < verts ? Rational(incidence[row][e]) : Rational(row - verts == e ? 1 : 0);
  };
  auto row_rhs = [&](std::size_t row) { return Rational(row < verts ? 1 : 0); };

  bool found = false;
  std::vector<std::size_t> pick(edges);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    for (std::size_t r : pick) {
      std::vector<Rational> row;
      for (std::size_t e = 0; e < edges; ++e) row.push_back(row_coeff(r, e));
      a.push_back(std::move(row));
      b.push_back(row_rhs(r));
    }
    std::vector<Rational> w;
    if (solve_square(std::move(a), std::move(b), w)) {
      bool feasible = true;
      for (std::size_t e = 0; e < edges && feasible; ++e)
        feasible = Rational(0) <= w[e];
      for (std::size_t v = 0; v < verts && feasible; ++v) {
        Rational sum(0);
        for (std::size_t e = 0; e < edges; ++e)
          if (incidence[v][e]) sum = sum + w[e];
        feasible = Rational(1) <= sum;
      }
      if (feasible) {
        Rational total(0);
        for (const auto& we : w) total = total + we;
        if (!found || total < cover.total) {
          cover.total = total;
          cover.weights = w;
          found = true;
        }
      }
    }
    // next combination of `edges` rows out of `rows`
    std::size_t i = edges;
    while (i > 0 && pick[i - 1] == rows - edges + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < edges; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (!found) throw config_error("edge cover LP infeasible");
  return cover;
}

Hypergraph project_hypergraph(const Hypergraph& h, const std::vector<std::string>& keep) {
  Hypergraph out;
  std::set<std::string> keep_set(keep.begin(), keep.end());
  for (const auto& v : h.vertices)
    if (keep_set.count(v)) out.vertices.push_back(v);
  for (const auto& edge : h.edges) {
    std::vector<std::string> projected;
    for (const auto& v : edge)
      if (keep_set.count(v)) projected.push_back(v);
    out.edges.push_back(std::move(projected));
  }
  return out;
}

GeneratedInstance gen_agm_grid(std::uint64_t q_side) {
  if (q_side == 0) throw usage_error("grid side must be positive");
  GeneratedInstance inst;
  for (const char* name : {"R", "S", "T"}) {
    Relation rel(name, 2);
    for (Value a = 0; a < q_side; ++a)
      for (Value b = 0; b < q_side; ++b) rel.tuples.push_back({a, b});
    rel.finalize();
    inst.db.relations.emplace(name, std::move(rel));
  }
  inst.db.universe_size = q_side;
  inst.query.head_vars = {"a", "b", "c"};
  inst.query.atoms = {
      {"R", {Term::make_var("a"), Term::make_var("b")}},
      {"S", {Term::make_var("b"), Term::make_var("c")}},
      {"T", {Term::make_var("a"), Term::make_var("c")}},
  };
  inst.max_relation_size = q_side * q_side;
  inst.expected_output = static_cast<std::int64_t>(q_side * q_side * q_side);
  inst.expected_exponent = 1.5;
  return inst;
}

GeneratedInstance gen_pathological_pairs(std::uint64_t count) {
  if (count == 0) throw usage_error("pair count must be positive");
  GeneratedInstance inst;
  Relation rel("R", 2);
  for (std::uint64_t i = 0; i < count; ++i) rel.tuples.push_back({2 * i, 2 * i + 1});
  rel.finalize();
  inst.db.relations.emplace("R", std::move(rel));
  inst.db.universe_size = 2 * count;
  inst.query.head_vars = {"x"};
  inst.query.atoms = {{"R", {Term::make_var("x"), Term::make_var("x")}}};
  inst.max_relation_size = count;
  inst.expected_output = 0;
  return inst;
}

GeneratedInstance gen_bernoulli_relation(std::uint64_t tuples, std::size_t arity,
                                         std::size_t specified, std::uint64_t seed) {
  if (arity == 0 || specified > arity) throw usage_error("need 0 <= specified <= arity >= 1");
  constexpr Value kUniverse = 1 << 16;
  if (double(tuples) > std::pow(double(kUniverse), double(arity)) / 2)
    throw usage_error("tuple count too dense for the fixed universe");
  GeneratedInstance inst;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Value> pick(0, kUniverse - 1);

  Relation rel("R", arity);
  std::set<Tuple> dedup;
  while (dedup.size() < tuples) {
    Tuple t(arity);
    for (auto& v : t) v = pick(rng);
    dedup.insert(std::move(t));
  }
  rel.tuples.assign(dedup.begin(), dedup.end());
  inst.db.relations.emplace("R", std::move(rel));
  inst.db.universe_size = kUniverse;

  Atom atom;
  atom.predicate = "R";
  for (std::size_t i = 0; i < specified; ++i) atom.args.push_back(Term::make_const(pick(rng)));
  for (std::size_t i = specified; i < arity; ++i) {
    std::string var = "y" + std::to_string(i - specified);
    atom.args.push_back(Term::make_var(var));
    inst.query.head_vars.push_back(var);
  }
  if (specified == arity) inst.query.head_vars = {};  // no free components
  inst.query.atoms = {atom};
  inst.max_relation_size = tuples;
  inst.expected_exponent = 1.0 - double(specified) / double(arity);
  return inst;
}

double fit_scaling_exponent(std::vector<std::pair<double, double>> points) {
  if (points.size() < 4) throw usage_error("scaling fit needs at least 4 points");
  std::sort(points.begin(), points.end());
  if (points.front().second < 32) points.erase(points.begin());  // noise floor

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [n, count] : points) {
    double x = std::log(n);
    double y = std::log(std::max(count, 1.0));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = double(points.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace rtj
