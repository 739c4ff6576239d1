#ifndef RTJ_BITTRIE_HPP
#define RTJ_BITTRIE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rtj/boolean.hpp"
#include "rtj/relmodel.hpp"

namespace rtj {

// A permutation of the (attribute, bit) positions of a Booleanised relation.
// Within each attribute the bit indices must appear in increasing order.
struct AttributeBitOrder {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positions;  // (attr, bit)

  std::size_t size() const { return positions.size(); }
  bool prefix_consistent() const;
};

// A_{beta(1)}^(0) ... A_{beta(r)}^(0) A_{beta(1)}^(1) ... cyclically through
// bit index w-1. `beta` is a permutation of 0..r-1.
AttributeBitOrder interleaved_attribute_order(std::size_t arity, unsigned width,
                                              const std::vector<std::uint32_t>& beta);
AttributeBitOrder interleaved_attribute_order(std::size_t arity, unsigned width);

struct TrieCursor {
  std::int32_t node = -1;
  std::uint32_t depth = 0;
  bool valid() const { return node >= 0; }
};

// Binary trie over the interleaved bit positions of one relation. Immutable
// after build; every node lies on a root-to-leaf path and caches its leaf
// count (the empty trie's root has count 0).
class BitTrie {
 public:
  BitTrie() = default;

  static BitTrie build(const Relation& rel, const AttributeBitOrder& order,
                       const EncodingSpec& spec);
  // Builds directly from fixed-length bit rows (row[k] is the bit consumed at
  // depth k). Used by tests and the serialised form.
  static BitTrie from_bit_rows(const std::vector<BitString>& rows, std::uint32_t depth);

  TrieCursor root() const { return {0, 0}; }
  TrieCursor descend(TrieCursor cur, std::uint8_t bit) const;
  std::uint64_t count_below(TrieCursor cur) const;

  std::uint32_t leaf_depth() const { return leaf_depth_; }
  std::uint64_t tuple_count() const { return nodes_.empty() ? 0 : nodes_[0].count; }
  bool empty() const { return tuple_count() == 0; }

  // Enumerates all root-to-leaf bit rows (in trie order, 0-child first).
  std::vector<BitString> all_rows() const;

  // Version-tagged binary serialisation; load rejects other versions.
  void save(std::ostream& out, const AttributeBitOrder& order, const EncodingSpec& spec) const;

 private:
  friend struct LoadedTrie;
  struct Node {
    std::int32_t child[2] = {-1, -1};
    std::uint64_t count = 0;
  };
  std::vector<Node> nodes_;
  std::uint32_t leaf_depth_ = 0;
};

struct LoadedTrie {
  BitTrie trie;
  AttributeBitOrder order;
  EncodingSpec spec;

  static LoadedTrie load(std::istream& in);
};

// Decodes every root-to-leaf path of `trie` back to relation tuples through
// (order, spec). Inverse of build.
std::vector<Tuple> trie_to_tuples(const BitTrie& trie, const AttributeBitOrder& order,
                                  const EncodingSpec& spec, std::size_t arity);

}  // namespace rtj

#endif
