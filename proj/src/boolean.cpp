#include "rtj/boolean.hpp"

#include <algorithm>
#include <map>

namespace rtj {

EncodingSpec::EncodingSpec(unsigned width, BitIndexConvention convention)
    : width(width), convention(convention) {
  if (width == 0 || width > 63) throw config_error("encoding width must be in [1, 63]");
}

std::uint64_t EncodingSpec::significance(unsigned bit_index) const {
  unsigned shift =
      convention == BitIndexConvention::lsb_at_0 ? bit_index : width - 1 - bit_index;
  return std::uint64_t{1} << shift;
}

unsigned compute_width(std::uint64_t universe_size) {
  if (universe_size == 0) throw usage_error("universe size must be positive");
  unsigned w = 0;
  while ((std::uint64_t{1} << w) < universe_size) ++w;
  return std::max(w, 1u);
}

std::uint8_t encode_bit(Value v, unsigned bit_index, const EncodingSpec& spec) {
  return (v & spec.significance(bit_index)) ? 1 : 0;
}

BitString encode(Value v, const EncodingSpec& spec) {
  if (spec.width < 64 && v >= (std::uint64_t{1} << spec.width))
    throw domain_overflow("value " + std::to_string(v) + " exceeds " +
                          std::to_string(spec.width) + "-bit encoding");
  BitString bits(spec.width);
  for (unsigned j = 0; j < spec.width; ++j) bits[j] = encode_bit(v, j, spec);
  return bits;
}

Value decode(const BitString& bits, const EncodingSpec& spec) {
  if (bits.size() != spec.width) throw usage_error("bitstring length does not match width");
  Value v = 0;
  for (unsigned j = 0; j < spec.width; ++j)
    if (bits[j]) v += spec.significance(j);
  return v;
}

std::vector<BitString> booleanise_relation(const Relation& rel, const EncodingSpec& spec) {
  std::vector<BitString> out;
  out.reserve(rel.size());
  for (const auto& t : rel.tuples) {
    BitString row;
    row.reserve(rel.arity * spec.width);
    for (Value v : t) {
      BitString bits = encode(v, spec);
      row.insert(row.end(), bits.begin(), bits.end());
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string BooleanQuery::bool_var_name(std::uint32_t id) const {
  BoolVar bv = split(id);
  return var_names[bv.var] + "." + std::to_string(bv.bit);
}

BooleanQuery booleanise_query(const ConjunctiveQuery& q, const EncodingSpec& spec) {
  BooleanQuery bq;
  bq.spec = spec;
  bq.var_names = q.free_vars();
  std::map<std::string, std::uint32_t> var_index;
  for (std::uint32_t i = 0; i < bq.var_names.size(); ++i) var_index[bq.var_names[i]] = i;

  for (const auto& atom : q.atoms) {
    BoolAtom ba;
    ba.relation = atom.predicate;
    ba.arity = atom.args.size();
    ba.positions.reserve(ba.arity * spec.width);
    for (const auto& term : atom.args) {
      if (term.is_var()) {
        std::uint32_t v = var_index.at(term.var);
        for (unsigned j = 0; j < spec.width; ++j)
          ba.positions.push_back(BoolPosition::variable(bq.bool_var(v, j)));
      } else {
        BitString bits = encode(term.value, spec);
        for (unsigned j = 0; j < spec.width; ++j)
          ba.positions.push_back(BoolPosition::constant(bits[j]));
      }
    }
    bq.atoms.push_back(std::move(ba));
  }

  for (const auto& c : q.constraints) {
    auto it = var_index.find(c.var);
    if (it == var_index.end()) throw config_error("constraint on unknown variable " + c.var);
    bq.pruners.push_back({it->second, c.op, c.bound});
  }
  return bq;
}

bool range_can_extend(const PartialBits& fixed_bits, const InequalityConstraint& c,
                      const EncodingSpec& spec) {
  if (fixed_bits.size() != spec.width) throw usage_error("partial bits length mismatch");

  if (c.op == CompareOp::eq) {
    if (spec.width < 64 && c.bound >= (std::uint64_t{1} << spec.width)) return false;
    for (unsigned j = 0; j < spec.width; ++j)
      if (fixed_bits[j] && *fixed_bits[j] != encode_bit(c.bound, j, spec)) return false;
    return true;
  }
  if (c.op == CompareOp::ne) {
    Value v = 0;
    for (unsigned j = 0; j < spec.width; ++j) {
      if (!fixed_bits[j]) return true;  // a free bit can always avoid the bound
      if (*fixed_bits[j]) v += spec.significance(j);
    }
    return v != c.bound;
  }

  Value min_completion = 0, max_completion = 0;
  for (unsigned j = 0; j < spec.width; ++j) {
    std::uint64_t sig = spec.significance(j);
    if (fixed_bits[j]) {
      if (*fixed_bits[j]) {
        min_completion += sig;
        max_completion += sig;
      }
    } else {
      max_completion += sig;
    }
  }
  switch (c.op) {
    case CompareOp::le: return min_completion <= c.bound;
    case CompareOp::lt: return min_completion < c.bound;
    case CompareOp::ge: return max_completion >= c.bound;
    case CompareOp::gt: return max_completion > c.bound;
    default: return true;  // eq/ne handled above
  }
}

}  // namespace rtj
