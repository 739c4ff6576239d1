#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "rtj/bittrie.hpp"
#include "test_util.hpp"

using namespace rtj;

TEST_CASE("interleaved_attribute_order") {
  SUBCASE("two attributes, two bits, identity") {
    AttributeBitOrder order = interleaved_attribute_order(2, 2);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> expect{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK(order.positions == expect);
    CHECK(order.prefix_consistent());
  }
  SUBCASE("single attribute lists its bits in index order") {
    AttributeBitOrder order = interleaved_attribute_order(1, 3);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> expect{{0, 0}, {0, 1}, {0, 2}};
    CHECK(order.positions == expect);
  }
  SUBCASE("three attributes, one bit") {
    AttributeBitOrder order = interleaved_attribute_order(3, 1);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> expect{{0, 0}, {1, 0}, {2, 0}};
    CHECK(order.positions == expect);
  }
  SUBCASE("prefix property: the first r positions are the bit-0 attributes") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 50; ++round) {
      std::size_t r = 1 + rng() % 4;
      unsigned w = 1 + rng() % 6;
      auto beta = testutil::random_permutation(rng, r);
      AttributeBitOrder order = interleaved_attribute_order(r, w, beta);
      std::set<std::pair<std::uint32_t, std::uint32_t>> prefix(order.positions.begin(),
                                                               order.positions.begin() + r);
      for (std::uint32_t attr = 0; attr < r; ++attr)
        CHECK(prefix.count({attr, 0}) == 1);
      CHECK(order.prefix_consistent());
    }
  }
  SUBCASE("bad beta rejected") {
    CHECK_THROWS_AS(interleaved_attribute_order(2, 1, {0, 0}), usage_error);
    CHECK_THROWS_AS(interleaved_attribute_order(2, 1, {0}), usage_error);
  }
}

TEST_CASE("build and descend") {
  EncodingSpec msb2(2, BitIndexConvention::msb_at_0);
  SUBCASE("interleaving the single-tuple relation") {
    Relation r("R", 2);
    r.insert({0, 1});
    BitTrie trie = BitTrie::build(r, interleaved_attribute_order(2, 2), msb2);
    CHECK(trie.tuple_count() == 1);
    // The one root-to-leaf path reads A0,B0,A1,B1 = 0,0,0,1.
    CHECK(trie.all_rows() == std::vector<BitString>{{0, 0, 0, 1}});

    TrieCursor cur = trie.root();
    TrieCursor down = trie.descend(cur, 0);
    CHECK(down.valid());
    CHECK(down.depth == 1);
    CHECK_FALSE(trie.descend(cur, 1).valid());
  }
  SUBCASE("empty relation gives an empty root") {
    Relation e("E", 2);
    BitTrie trie = BitTrie::build(e, interleaved_attribute_order(2, 1), EncodingSpec(1, BitIndexConvention::lsb_at_0));
    CHECK(trie.empty());
    CHECK(trie.count_below(trie.root()) == 0);
    CHECK_FALSE(trie.descend(trie.root(), 0).valid());
    CHECK_FALSE(trie.descend(trie.root(), 1).valid());
  }
  SUBCASE("three leaves at depth two") {
    Relation r("R", 2);
    for (auto t : std::vector<Tuple>{{0, 0}, {1, 0}, {1, 1}}) r.insert(t);
    EncodingSpec one(1, BitIndexConvention::lsb_at_0);
    BitTrie trie = BitTrie::build(r, interleaved_attribute_order(2, 1), one);
    CHECK(trie.tuple_count() == 3);
    CHECK(trie.leaf_depth() == 2);
    CHECK(trie.count_below(trie.root()) == 3);
    TrieCursor ones = trie.descend(trie.root(), 1);
    CHECK(trie.count_below(ones) == 2);
    TrieCursor leaf = trie.descend(ones, 1);
    CHECK(trie.count_below(leaf) == 1);
  }
  SUBCASE("descending past leaf depth is a usage error") {
    Relation r("R", 1);
    r.insert({0});
    EncodingSpec one(1, BitIndexConvention::lsb_at_0);
    BitTrie trie = BitTrie::build(r, interleaved_attribute_order(1, 1), one);
    TrieCursor leaf = trie.descend(trie.root(), 0);
    CHECK_THROWS_AS(trie.descend(leaf, 0), usage_error);
  }
}

TEST_CASE("round-trip and counts on random relations") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 40; ++round) {
    std::size_t arity = 1 + rng() % 4;
    unsigned width = 1 + rng() % 6;
    EncodingSpec spec(width, rng() % 2 ? BitIndexConvention::lsb_at_0
                                       : BitIndexConvention::msb_at_0);
    Relation rel("X", arity);
    std::size_t tuples = rng() % 1024;
    for (std::size_t t = 0; t < tuples; ++t) {
      Tuple tup(arity);
      for (auto& v : tup) v = rng() % (1u << width);
      rel.tuples.push_back(tup);
    }
    rel.finalize();
    auto beta = testutil::random_permutation(rng, arity);
    AttributeBitOrder order = interleaved_attribute_order(arity, width, beta);
    BitTrie trie = BitTrie::build(rel, order, spec);

    CHECK(trie.count_below(trie.root()) == rel.size());
    CHECK(trie_to_tuples(trie, order, spec, arity) == rel.tuples);

    // Membership equivalence: a full descent sequence succeeds iff the
    // decoded tuple is in the relation.
    for (int probe = 0; probe < 20; ++probe) {
      Tuple candidate(arity);
      for (auto& v : candidate) v = rng() % (1u << width);
      TrieCursor cur = trie.root();
      bool ok = !trie.empty();
      for (std::size_t k = 0; k < order.size() && ok; ++k) {
        auto [attr, bit] = order.positions[k];
        cur = trie.descend(cur, encode_bit(candidate[attr], bit, spec));
        ok = cur.valid();
      }
      CHECK(ok == rel.contains(candidate));
    }
  }
}

TEST_CASE("node counts are consistent sums") {
  std::mt19937_64 rng(29);
  Relation rel("X", 2);
  for (int t = 0; t < 200; ++t) rel.tuples.push_back({rng() % 16, rng() % 16});
  rel.finalize();
  EncodingSpec spec(4, BitIndexConvention::lsb_at_0);
  BitTrie trie = BitTrie::build(rel, interleaved_attribute_order(2, 4), spec);

  // Walk every node: interior counts equal the sum of their children.
  std::vector<TrieCursor> stack{trie.root()};
  while (!stack.empty()) {
    TrieCursor cur = stack.back();
    stack.pop_back();
    if (cur.depth == trie.leaf_depth()) {
      CHECK(trie.count_below(cur) == 1);
      continue;
    }
    std::uint64_t sum = 0;
    for (std::uint8_t bit : {0, 1}) {
      TrieCursor child = trie.descend(cur, bit);
      if (child.valid()) {
        sum += trie.count_below(child);
        stack.push_back(child);
      }
    }
    CHECK(trie.count_below(cur) == sum);
  }
}

TEST_CASE("serialisation round-trips") {
  Relation rel("X", 2);
  rel.insert({0, 1});
  rel.insert({2, 3});
  rel.insert({3, 0});
  EncodingSpec spec(2, BitIndexConvention::msb_at_0);
  AttributeBitOrder order = interleaved_attribute_order(2, 2, {1, 0});
  BitTrie trie = BitTrie::build(rel, order, spec);

  std::stringstream stream;
  trie.save(stream, order, spec);
  auto loaded = LoadedTrie::load(stream);
  CHECK(loaded.spec.width == 2);
  CHECK(loaded.spec.convention == BitIndexConvention::msb_at_0);
  CHECK(loaded.order.positions == order.positions);
  CHECK(loaded.trie.tuple_count() == 3);
  CHECK(trie_to_tuples(loaded.trie, loaded.order, loaded.spec, 2) == rel.tuples);

  std::stringstream bad("not a trie");
  CHECK_THROWS_AS(LoadedTrie::load(bad), usage_error);
}
