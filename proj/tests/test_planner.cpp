#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <random>

#include "rtj/planner.hpp"
#include "test_util.hpp"

using namespace rtj;

namespace {

BooleanQuery example_scc_query(unsigned width) {
  // Q(x, y, z) :- R(x, y), S(y, x, z)
  ConjunctiveQuery q;
  q.head_vars = {"x", "y", "z"};
  q.atoms = {
      {"R", {Term::make_var("x"), Term::make_var("y")}},
      {"S", {Term::make_var("y"), Term::make_var("x"), Term::make_var("z")}},
  };
  return booleanise_query(q, EncodingSpec(width, BitIndexConvention::lsb_at_0));
}

std::map<std::string, AttributeBitOrder> identity_orders(const BooleanQuery& q) {
  std::map<std::string, AttributeBitOrder> orders;
  for (const auto& atom : q.atoms)
    orders.emplace(atom.relation, interleaved_attribute_order(atom.arity, q.spec.width));
  return orders;
}

}  // namespace

TEST_CASE("interleaved_variable_order") {
  SUBCASE("three variables, two bits, identity") {
    VariableOrder order = interleaved_variable_order(3, 2);
    // x1^0 x2^0 x3^0 x1^1 x2^1 x3^1, ids packed as var*width+bit
    CHECK(order.seq == std::vector<std::uint32_t>{0, 2, 4, 1, 3, 5});
  }
  SUBCASE("single variable lists its bits in index order") {
    VariableOrder order = interleaved_variable_order(1, 3);
    CHECK(order.seq == std::vector<std::uint32_t>{0, 1, 2});
  }
  SUBCASE("explicit permutation") {
    VariableOrder order = interleaved_variable_order(2, 1, {1, 0});
    CHECK(order.seq == std::vector<std::uint32_t>{1, 0});
  }
  SUBCASE("n-th prefix is the bit-0 family") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 30; ++round) {
      std::size_t n = 1 + rng() % 5;
      unsigned w = 1 + rng() % 5;
      auto alpha = testutil::random_permutation(rng, n);
      VariableOrder order = interleaved_variable_order(n, w, alpha);
      std::set<std::uint32_t> prefix(order.seq.begin(), order.seq.begin() + n);
      for (std::uint32_t v = 0; v < n; ++v) CHECK(prefix.count(v * w) == 1);
    }
  }
}

TEST_CASE("induced_constraints") {
  SUBCASE("worked example: R(x,y), S(y,x,z)") {
    BooleanQuery bq = example_scc_query(1);
    PrecedenceGraph g = induced_constraints(bq, identity_orders(bq));
    // x=0, y=1, z=2 in head order
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges(g.edges.begin(), g.edges.end());
    std::set<std::pair<std::uint32_t, std::uint32_t>> expect{{0, 1}, {1, 0}, {0, 2}};
    CHECK(edges == expect);
  }
  SUBCASE("single atom with distinct variables gives a chain") {
    ConjunctiveQuery q;
    q.head_vars = {"x", "y", "z"};
    q.atoms = {{"R", {Term::make_var("x"), Term::make_var("y"), Term::make_var("z")}}};
    BooleanQuery bq = booleanise_query(q, EncodingSpec(1, BitIndexConvention::lsb_at_0));
    PrecedenceGraph g = induced_constraints(bq, identity_orders(bq));
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges(g.edges.begin(), g.edges.end());
    CHECK(edges == std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 2}});
  }
  SUBCASE("self-loops from repeated variables are dropped") {
    ConjunctiveQuery q;
    q.head_vars = {"x"};
    q.atoms = {{"R", {Term::make_var("x"), Term::make_var("x")}}};
    BooleanQuery bq = booleanise_query(q, EncodingSpec(1, BitIndexConvention::lsb_at_0));
    PrecedenceGraph g = induced_constraints(bq, identity_orders(bq));
    CHECK(g.edges.empty());
  }
  SUBCASE("missing index order is a configuration error") {
    BooleanQuery bq = example_scc_query(1);
    std::map<std::string, AttributeBitOrder> orders;
    CHECK_THROWS_AS(induced_constraints(bq, orders), config_error);
  }
}

TEST_CASE("scc_expansion_order") {
  SUBCASE("conflict collapses into one group before the tail") {
    PrecedenceGraph g;
    g.vertex_count = 3;
    g.edges = {{0, 1}, {1, 0}, {0, 2}};
    auto groups = scc_expansion_order(g);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == std::vector<std::uint32_t>{0, 1});
    CHECK(groups[1] == std::vector<std::uint32_t>{2});
  }
  SUBCASE("no edges give singletons in canonical order") {
    PrecedenceGraph g;
    g.vertex_count = 2;
    auto groups = scc_expansion_order(g);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == std::vector<std::uint32_t>{0});
    CHECK(groups[1] == std::vector<std::uint32_t>{1});
  }
  SUBCASE("bidirectional clique is a single group") {
    PrecedenceGraph g;
    g.vertex_count = 3;
    for (std::uint32_t a = 0; a < 3; ++a)
      for (std::uint32_t b = 0; b < 3; ++b)
        if (a != b) g.edges.emplace_back(a, b);
    auto groups = scc_expansion_order(g);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].size() == 3);
  }
  SUBCASE("canonical rank drives tie-breaking") {
    PrecedenceGraph g;
    g.vertex_count = 2;
    auto groups = scc_expansion_order(g, {1, 0});  // vertex 1 ranks first
    CHECK(groups[0] == std::vector<std::uint32_t>{1});
    CHECK(groups[1] == std::vector<std::uint32_t>{0});
  }
  SUBCASE("random graphs: every cross-group edge respects the order") {
    std::mt19937_64 rng(41);
    for (int round = 0; round < 100; ++round) {
      PrecedenceGraph g;
      g.vertex_count = 1 + rng() % 8;
      std::size_t edges = rng() % 16;
      for (std::size_t e = 0; e < edges; ++e)
        g.edges.emplace_back(rng() % g.vertex_count, rng() % g.vertex_count);
      auto groups = scc_expansion_order(g);
      std::vector<std::size_t> group_of(g.vertex_count);
      std::size_t covered = 0;
      for (std::size_t i = 0; i < groups.size(); ++i)
        for (auto v : groups[i]) {
          group_of[v] = i;
          ++covered;
        }
      CHECK(covered == g.vertex_count);
      for (auto [from, to] : g.edges)
        if (group_of[from] != group_of[to]) CHECK(group_of[from] < group_of[to]);
    }
  }
}

TEST_CASE("plan_for_query") {
  SUBCASE("triangle query, width one: singleton chain") {
    BooleanQuery bq = booleanise_query(testutil::triangle_query(),
                                       EncodingSpec(1, BitIndexConvention::lsb_at_0));
    ExpansionPlan plan = plan_for_query(bq, identity_orders(bq));
    CHECK(plan.group_count() == 3);
    CHECK(plan.max_group_size() == 1);
    std::size_t total = 0;
    for (const auto& g : plan.groups) total += g.size();
    CHECK(total == bq.bool_var_count());
  }
  SUBCASE("worked example groups {x,y} before {z}") {
    BooleanQuery bq = example_scc_query(1);
    ExpansionPlan plan = plan_for_query(bq, identity_orders(bq));
    REQUIRE(plan.group_count() == 2);
    CHECK(plan.groups[0] == std::vector<std::uint32_t>{0, 1});
    CHECK(plan.groups[1] == std::vector<std::uint32_t>{2});
  }
  SUBCASE("repeated relation over one index: layer groups {x0,y0} then {x1,y1}") {
    ConjunctiveQuery q;
    q.head_vars = {"x", "y"};
    q.atoms = {
        {"R", {Term::make_var("x"), Term::make_var("y")}},
        {"R", {Term::make_var("y"), Term::make_var("x")}},
    };
    BooleanQuery bq = booleanise_query(q, EncodingSpec(2, BitIndexConvention::lsb_at_0));
    ExpansionPlan plan = plan_for_query(bq, identity_orders(bq));
    REQUIRE(plan.group_count() == 2);
    // ids: x.0=0 x.1=1 y.0=2 y.1=3
    CHECK(plan.groups[0] == std::vector<std::uint32_t>{0, 2});
    CHECK(plan.groups[1] == std::vector<std::uint32_t>{1, 3});
    CHECK(plan.max_group_size() == 2);
  }
  SUBCASE("one-atom query with distinct variables degenerates to p = 1") {
    ConjunctiveQuery q;
    q.head_vars = {"x", "y"};
    q.atoms = {{"R", {Term::make_var("x"), Term::make_var("y")}}};
    BooleanQuery bq = booleanise_query(q, EncodingSpec(1, BitIndexConvention::lsb_at_0));
    ExpansionPlan plan = plan_for_query(bq, identity_orders(bq));
    CHECK(plan.group_count() == 2);
    CHECK(plan.max_group_size() == 1);
  }
  SUBCASE("non-interleaved index order is rejected") {
    BooleanQuery bq = example_scc_query(2);
    auto orders = identity_orders(bq);
    std::swap(orders.at("R").positions[1], orders.at("R").positions[2]);
    CHECK_THROWS_AS(plan_for_query(bq, orders), config_error);
  }
  SUBCASE("interleaved plans keep p at most n") {
    std::mt19937_64 rng(53);
    for (int round = 0; round < 60; ++round) {
      testutil::RandomSpec spec;
      spec.repeated_vars = true;
      spec.repeated_relations = true;
      auto inst = testutil::random_instance(rng, spec);
      ConjunctiveQuery q = normalize_query(inst.query);
      unsigned w = compute_width(inst.db.universe_size) + rng() % 2;
      BooleanQuery bq = booleanise_query(q, EncodingSpec(w, BitIndexConvention::lsb_at_0));
      std::map<std::string, AttributeBitOrder> orders;
      for (const auto& atom : bq.atoms)
        if (!orders.count(atom.relation))
          orders.emplace(atom.relation,
                         interleaved_attribute_order(
                             atom.arity, w, testutil::random_permutation(rng, atom.arity)));
      ExpansionPlan plan = plan_for_query(bq, orders);
      CHECK(plan.max_group_size() <= bq.var_count());
      std::size_t total = 0;
      for (const auto& g : plan.groups) total += g.size();
      CHECK(total == bq.bool_var_count());
    }
  }
}

TEST_CASE("plan_for_variable_order covers every atom position") {
  std::mt19937_64 rng(61);
  for (int round = 0; round < 60; ++round) {
    testutil::RandomSpec spec;
    spec.repeated_vars = true;
    spec.constants = true;
    auto inst = testutil::random_instance(rng, spec);
    ConjunctiveQuery q = normalize_query(inst.query);
    unsigned w = compute_width(inst.db.universe_size) + rng() % 2;
    BooleanQuery bq = booleanise_query(q, EncodingSpec(w, BitIndexConvention::lsb_at_0));
    VariableOrder order;
    order.seq = testutil::random_permutation(rng, bq.bool_var_count());
    ExpansionPlan plan = plan_for_variable_order(bq, order);
    CHECK(plan.group_count() == bq.bool_var_count());
    CHECK(plan.max_group_size() <= 1);
    for (std::size_t a = 0; a < plan.schedules.size(); ++a) {
      const auto& sched = plan.schedules[a];
      CHECK(sched.positions.size() == bq.atoms[a].positions.size());
      CHECK(sched.ranges.back().second == sched.positions.size());
    }
  }
}

TEST_CASE("planner runtime stays near-linear in query size") {
  // Chain queries of doubling size; the min wall time over repetitions may
  // only grow by a bounded multiple of the size ratio.
  auto plan_time = [](std::size_t atoms) {
    ConjunctiveQuery q;
    for (std::size_t a = 0; a < atoms; ++a) {
      std::string x = "v" + std::to_string(a);
      std::string y = "v" + std::to_string(a + 1);
      q.atoms.push_back({"E" + std::to_string(a), {Term::make_var(x), Term::make_var(y)}});
    }
    for (std::size_t v = 0; v <= atoms; ++v) q.head_vars.push_back("v" + std::to_string(v));
    BooleanQuery bq = booleanise_query(q, EncodingSpec(2, BitIndexConvention::lsb_at_0));
    std::map<std::string, AttributeBitOrder> orders;
    for (const auto& atom : bq.atoms)
      orders.emplace(atom.relation, interleaved_attribute_order(atom.arity, 2));
    double best = 1e9;
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      ExpansionPlan plan = plan_for_query(bq, orders);
      double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      best = std::min(best, dt);
      CHECK(plan.group_count() >= atoms);
    }
    return best;
  };
  double small = plan_time(64);
  double large = plan_time(512);
  CHECK(large < std::max(small, 1e-4) * 8 * 16);  // 8x size, generous constant
}
