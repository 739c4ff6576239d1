#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rtj/boolean.hpp"
#include "test_util.hpp"

using namespace rtj;

namespace {
const EncodingSpec msb2{2, BitIndexConvention::msb_at_0};
const EncodingSpec lsb2{2, BitIndexConvention::lsb_at_0};
}  // namespace

TEST_CASE("compute_width") {
  CHECK(compute_width(3) == 2);
  CHECK(compute_width(2) == 1);
  CHECK(compute_width(1024) == 10);
  CHECK(compute_width(1) == 1);
  CHECK(compute_width(1025) == 11);
  CHECK_THROWS_AS(compute_width(0), usage_error);
}

TEST_CASE("encode/decode") {
  CHECK(encode(2, msb2) == BitString{1, 0});
  CHECK(encode(0, msb2) == BitString{0, 0});
  CHECK(encode(0, lsb2) == BitString{0, 0});
  CHECK(encode(2, lsb2) == BitString{0, 1});
  CHECK_THROWS_AS(encode(4, msb2), domain_overflow);

  SUBCASE("round-trip, both conventions") {
    for (auto conv : {BitIndexConvention::lsb_at_0, BitIndexConvention::msb_at_0}) {
      EncodingSpec spec(10, conv);
      for (Value v = 0; v < 1024; ++v) CHECK(decode(encode(v, spec), spec) == v);
    }
  }
}

TEST_CASE("booleanise_relation reproduces the two-bit example") {
  Relation r("R", 2), s("S", 2), t("T", 2);
  r.insert({0, 1});
  s.insert({1, 2});
  t.insert({0, 2});
  CHECK(booleanise_relation(r, msb2) == std::vector<BitString>{{0, 0, 0, 1}});
  CHECK(booleanise_relation(s, msb2) == std::vector<BitString>{{0, 1, 1, 0}});
  CHECK(booleanise_relation(t, msb2) == std::vector<BitString>{{0, 0, 1, 0}});

  Relation empty("E", 3);
  CHECK(booleanise_relation(empty, msb2).empty());
}

TEST_CASE("booleanise_relation is injective and cardinality preserving") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 30; ++round) {
    std::size_t arity = 1 + rng() % 3;
    unsigned width = 1 + rng() % 5;
    Relation rel("X", arity);
    for (int t = 0; t < 64; ++t) {
      Tuple tup(arity);
      for (auto& v : tup) v = rng() % (1u << width);
      rel.tuples.push_back(tup);
    }
    rel.finalize();
    EncodingSpec spec(width, rng() % 2 ? BitIndexConvention::lsb_at_0
                                       : BitIndexConvention::msb_at_0);
    auto rows = booleanise_relation(rel, spec);
    CHECK(rows.size() == rel.size());
    std::set<BitString> distinct(rows.begin(), rows.end());
    CHECK(distinct.size() == rows.size());
  }
}

TEST_CASE("booleanise_query") {
  ConjunctiveQuery q = testutil::triangle_query();
  SUBCASE("two-bit triangle blows up to six variables") {
    BooleanQuery bq = booleanise_query(q, msb2);
    CHECK(bq.var_count() == 3);
    CHECK(bq.bool_var_count() == 6);
    CHECK(bq.atoms.size() == 3);
    for (const auto& atom : bq.atoms) CHECK(atom.positions.size() == 4);
  }
  SUBCASE("width one keeps the variable count") {
    BooleanQuery bq = booleanise_query(q, EncodingSpec(1, BitIndexConvention::lsb_at_0));
    CHECK(bq.bool_var_count() == 3);
  }
  SUBCASE("constants become fixed bits") {
    ConjunctiveQuery c;
    c.head_vars = {"x"};
    c.atoms = {{"R", {Term::make_var("x"), Term::make_const(2)}}};
    BooleanQuery bq = booleanise_query(c, msb2);
    CHECK(bq.atoms[0].positions[0] == BoolPosition::variable(0));
    CHECK(bq.atoms[0].positions[1] == BoolPosition::variable(1));
    CHECK(bq.atoms[0].positions[2] == BoolPosition::constant(1));
    CHECK(bq.atoms[0].positions[3] == BoolPosition::constant(0));
    CHECK_THROWS_AS(([&] {
                      ConjunctiveQuery bad = c;
                      bad.atoms[0].args[1] = Term::make_const(9);
                      booleanise_query(bad, msb2);
                    }()),
                    domain_overflow);
  }
  SUBCASE("constraints become pruners") {
    q.constraints = {{"a", CompareOp::le, 4}};
    BooleanQuery bq = booleanise_query(q, EncodingSpec(4, BitIndexConvention::lsb_at_0));
    REQUIRE(bq.pruners.size() == 1);
    CHECK(bq.pruners[0].var == 0);
    CHECK(bq.pruners[0].op == CompareOp::le);
    CHECK(bq.pruners[0].bound == 4);
  }
}

TEST_CASE("range_can_extend") {
  EncodingSpec lsb4(4, BitIndexConvention::lsb_at_0);
  InequalityConstraint le4{"x", CompareOp::le, 4};

  SUBCASE("high-order bit forces failure under x <= 4") {
    PartialBits bits(4);
    bits[3] = 1;  // minimum completion is 8
    CHECK_FALSE(range_can_extend(bits, le4, lsb4));
  }
  SUBCASE("no fixed bits can always reach zero") {
    CHECK(range_can_extend(PartialBits(4), le4, lsb4));
  }
  SUBCASE("minimum completion five exceeds four") {
    PartialBits bits(4);
    bits[2] = 1;
    bits[0] = 1;
    CHECK_FALSE(range_can_extend(bits, le4, lsb4));
  }
  SUBCASE("not-equal fails only when fully fixed at the bound") {
    InequalityConstraint ne5{"x", CompareOp::ne, 5};
    PartialBits bits(4);
    bits[0] = 1;
    bits[2] = 1;
    CHECK(range_can_extend(bits, ne5, lsb4));  // bits 1,3 still free
    bits[1] = 0;
    bits[3] = 0;
    CHECK_FALSE(range_can_extend(bits, ne5, lsb4));  // decodes to exactly 5
    bits[1] = 1;
    CHECK(range_can_extend(bits, ne5, lsb4));
  }
  SUBCASE("matches exhaustive completion enumeration") {
    std::mt19937_64 rng(17);
    CompareOp ops[] = {CompareOp::le, CompareOp::lt, CompareOp::ge,
                       CompareOp::gt, CompareOp::eq, CompareOp::ne};
    for (int round = 0; round < 500; ++round) {
      unsigned w = 1 + rng() % 8;
      EncodingSpec spec(w, rng() % 2 ? BitIndexConvention::lsb_at_0
                                     : BitIndexConvention::msb_at_0);
      PartialBits bits(w);
      std::vector<unsigned> free_positions;
      for (unsigned j = 0; j < w; ++j) {
        int state = rng() % 3;
        if (state < 2)
          bits[j] = static_cast<std::uint8_t>(state);
        else
          free_positions.push_back(j);
      }
      InequalityConstraint c{"x", ops[rng() % 6], rng() % (1u << w)};
      bool expected = false;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << free_positions.size()); ++m) {
        PartialBits complete = bits;
        for (std::size_t i = 0; i < free_positions.size(); ++i)
          complete[free_positions[i]] = (m >> i) & 1;
        BitString bs(w);
        for (unsigned j = 0; j < w; ++j) bs[j] = *complete[j];
        expected |= compare(decode(bs, spec), c.op, c.bound);
      }
      CHECK(range_can_extend(bits, c, spec) == expected);
    }
  }
}
