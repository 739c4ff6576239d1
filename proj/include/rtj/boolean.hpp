#ifndef RTJ_BOOLEAN_HPP
#define RTJ_BOOLEAN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtj/relmodel.hpp"

namespace rtj {

// Where bit index 0 of a bitstring sits. Under lsb_at_0 index j has
// significance 2^j; under msb_at_0 it has significance 2^(w-1-j).
enum class BitIndexConvention { lsb_at_0, msb_at_0 };

struct EncodingSpec {
  unsigned width = 1;
  BitIndexConvention convention = BitIndexConvention::lsb_at_0;

  EncodingSpec() = default;
  EncodingSpec(unsigned width, BitIndexConvention convention);

  std::uint64_t significance(unsigned bit_index) const;
};

using BitString = std::vector<std::uint8_t>;

// Smallest width that encodes [0, universe_size) injectively; at least 1.
unsigned compute_width(std::uint64_t universe_size);

BitString encode(Value v, const EncodingSpec& spec);
Value decode(const BitString& bits, const EncodingSpec& spec);
std::uint8_t encode_bit(Value v, unsigned bit_index, const EncodingSpec& spec);

// Attribute-major bit layout: tuple (v1,...,vr) becomes the concatenation
// E(v1) E(v2) ... E(vr), one row per input tuple.
std::vector<BitString> booleanise_relation(const Relation& rel, const EncodingSpec& spec);

// Identifier of one Boolean variable x_i^(j): original variable index i and
// bitstring index j. Packed id = var * width + bit.
struct BoolVar {
  std::uint32_t var = 0;
  std::uint32_t bit = 0;
  bool operator==(const BoolVar&) const = default;
};

// One position of a Booleanised atom: either a fixed bit (from a constant
// argument) or a Boolean variable.
struct BoolPosition {
  bool is_const = false;
  std::uint8_t const_bit = 0;
  std::uint32_t bool_var = 0;  // packed id, valid when !is_const

  static BoolPosition constant(std::uint8_t bit) { return {true, bit, 0}; }
  static BoolPosition variable(std::uint32_t id) { return {false, 0, id}; }
  bool operator==(const BoolPosition&) const = default;
};

struct BoolAtom {
  std::string relation;
  std::size_t arity = 0;
  // Attribute-major positions, length arity * width.
  std::vector<BoolPosition> positions;
};

// Inequality constraint carried into the Booleanisation; prunes partial bit
// assignments of one variable family.
struct RangePruner {
  std::uint32_t var = 0;  // original variable index
  CompareOp op = CompareOp::le;
  Value bound = 0;
};

struct BooleanQuery {
  EncodingSpec spec;
  std::vector<std::string> var_names;  // free variables, canonical order
  std::vector<BoolAtom> atoms;
  std::vector<RangePruner> pruners;

  std::size_t var_count() const { return var_names.size(); }
  std::size_t bool_var_count() const { return var_names.size() * spec.width; }
  std::uint32_t bool_var(std::uint32_t var, std::uint32_t bit) const {
    return var * spec.width + bit;
  }
  BoolVar split(std::uint32_t id) const {
    return {id / spec.width, id % spec.width};
  }
  std::string bool_var_name(std::uint32_t id) const;
};

// Variables become width-many Boolean variables; constants become fixed bits;
// constraints become RangePruners. Expects a normalised query.
BooleanQuery booleanise_query(const ConjunctiveQuery& q, const EncodingSpec& spec);

// Partial bit assignment for one variable family: fixed[j] set means bit
// index j is pinned to that value.
using PartialBits = std::vector<std::optional<std::uint8_t>>;

// True iff some completion of the unfixed bits decodes to a value satisfying
// the constraint. Exact: evaluated against the min- and max-completions (and
// per-bit agreement for = / all-fixed equality for !=).
bool range_can_extend(const PartialBits& fixed_bits, const InequalityConstraint& c,
                      const EncodingSpec& spec);

}  // namespace rtj

#endif
