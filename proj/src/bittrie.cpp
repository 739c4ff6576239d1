#include "rtj/bittrie.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

namespace rtj {

bool AttributeBitOrder::prefix_consistent() const {
  std::vector<std::int64_t> last_bit;
  for (const auto& [attr, bit] : positions) {
    if (attr >= last_bit.size()) last_bit.resize(attr + 1, -1);
    if (static_cast<std::int64_t>(bit) <= last_bit[attr]) return false;
    last_bit[attr] = bit;
  }
  return true;
}

AttributeBitOrder interleaved_attribute_order(std::size_t arity, unsigned width,
                                              const std::vector<std::uint32_t>& beta) {
  if (beta.size() != arity) throw usage_error("beta must be a permutation of the attributes");
  std::vector<bool> seen(arity, false);
  for (auto b : beta) {
    if (b >= arity || seen[b]) throw usage_error("beta is not a permutation");
    seen[b] = true;
  }
  AttributeBitOrder order;
  order.positions.reserve(arity * width);
  for (unsigned j = 0; j < width; ++j)
    for (std::size_t i = 0; i < arity; ++i) order.positions.emplace_back(beta[i], j);
  return order;
}

AttributeBitOrder interleaved_attribute_order(std::size_t arity, unsigned width) {
  std::vector<std::uint32_t> beta(arity);
  std::iota(beta.begin(), beta.end(), 0);
  return interleaved_attribute_order(arity, width, beta);
}

BitTrie BitTrie::from_bit_rows(const std::vector<BitString>& rows, std::uint32_t depth) {
  BitTrie trie;
  trie.leaf_depth_ = depth;
  trie.nodes_.push_back(Node{});
  for (const auto& row : rows) {
    if (row.size() != depth) throw usage_error("bit row length mismatch");
    // Duplicate rows collapse onto one leaf; counts only grow for new paths.
    std::int32_t node = 0;
    bool fresh = false;
    std::vector<std::int32_t> path{0};
    for (std::uint32_t d = 0; d < depth; ++d) {
      std::uint8_t bit = row[d] ? 1 : 0;
      std::int32_t child = trie.nodes_[node].child[bit];
      if (child < 0) {
        child = static_cast<std::int32_t>(trie.nodes_.size());
        trie.nodes_.push_back(Node{});
        trie.nodes_[node].child[bit] = child;
        fresh = true;
      }
      node = child;
      path.push_back(node);
    }
    if (fresh || depth == 0) {
      if (trie.nodes_[node].count == 0)
        for (std::int32_t p : path) ++trie.nodes_[p].count;
    }
  }
  return trie;
}

BitTrie BitTrie::build(const Relation& rel, const AttributeBitOrder& order,
                       const EncodingSpec& spec) {
  if (order.size() != rel.arity * spec.width)
    throw usage_error("attribute order length does not match arity * width");
  std::vector<BitString> rows;
  rows.reserve(rel.size());
  for (const auto& t : rel.tuples) {
    BitString row(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& [attr, bit] = order.positions[k];
      row[k] = encode_bit(t[attr], bit, spec);
      if (spec.width < 64 && t[attr] >= (std::uint64_t{1} << spec.width))
        throw domain_overflow("value exceeds encoding width in relation " + rel.name);
    }
    rows.push_back(std::move(row));
  }
  return from_bit_rows(rows, static_cast<std::uint32_t>(order.size()));
}

TrieCursor BitTrie::descend(TrieCursor cur, std::uint8_t bit) const {
  if (!cur.valid()) throw usage_error("descend from invalid cursor");
  if (cur.depth >= leaf_depth_) throw usage_error("descend past leaf depth");
  return {nodes_[cur.node].child[bit ? 1 : 0], cur.depth + 1};
}

std::uint64_t BitTrie::count_below(TrieCursor cur) const {
  if (!cur.valid()) return 0;
  return nodes_[cur.node].count;
}

std::vector<BitString> BitTrie::all_rows() const {
  std::vector<BitString> out;
  if (empty()) return out;
  BitString row(leaf_depth_);
  // Depth-first walk with an explicit stack; (node, next bit to try).
  std::vector<std::pair<std::int32_t, int>> path;
  path.emplace_back(0, 0);
  while (!path.empty()) {
    auto& [node, next_bit] = path.back();
    std::uint32_t depth = static_cast<std::uint32_t>(path.size()) - 1;
    if (depth == leaf_depth_) {
      out.push_back(row);
      path.pop_back();
      continue;
    }
    if (next_bit > 1) {
      path.pop_back();
      continue;
    }
    int bit = next_bit++;
    std::int32_t child = nodes_[node].child[bit];
    if (child < 0) continue;
    row[depth] = static_cast<std::uint8_t>(bit);
    path.emplace_back(child, 0);
  }
  return out;
}

std::vector<Tuple> trie_to_tuples(const BitTrie& trie, const AttributeBitOrder& order,
                                  const EncodingSpec& spec, std::size_t arity) {
  std::vector<Tuple> tuples;
  for (const auto& row : trie.all_rows()) {
    Tuple t(arity, 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& [attr, bit] = order.positions[k];
      if (row[k]) t[attr] += spec.significance(bit);
    }
    tuples.push_back(std::move(t));
  }
  std::sort(tuples.begin(), tuples.end());
  return tuples;
}

namespace {
constexpr char kTrieMagic[8] = {'R', 'T', 'J', 'T', 'R', 'I', 'E', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw usage_error("truncated trie stream");
  return v;
}
}  // namespace

void BitTrie::save(std::ostream& out, const AttributeBitOrder& order,
                   const EncodingSpec& spec) const {
  out.write(kTrieMagic, sizeof(kTrieMagic));
  std::uint32_t arity = 0;
  for (const auto& [attr, _] : order.positions) arity = std::max(arity, attr + 1);
  write_pod<std::uint32_t>(out, arity);
  write_pod<std::uint32_t>(out, spec.width);
  write_pod<std::uint8_t>(out, spec.convention == BitIndexConvention::msb_at_0 ? 1 : 0);
  write_pod<std::uint64_t>(out, order.positions.size());
  for (const auto& [attr, bit] : order.positions) {
    write_pod<std::uint32_t>(out, attr);
    write_pod<std::uint32_t>(out, bit);
  }
  write_pod<std::uint32_t>(out, leaf_depth_);
  write_pod<std::uint64_t>(out, nodes_.size());
  for (const auto& n : nodes_) {
    write_pod<std::int32_t>(out, n.child[0]);
    write_pod<std::int32_t>(out, n.child[1]);
    write_pod<std::uint64_t>(out, n.count);
  }
}

LoadedTrie LoadedTrie::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kTrieMagic))
    throw usage_error("not a trie stream (bad magic)");
  LoadedTrie loaded;
  read_pod<std::uint32_t>(in);  // arity, implied by the order below
  std::uint32_t width = read_pod<std::uint32_t>(in);
  std::uint8_t conv = read_pod<std::uint8_t>(in);
  loaded.spec = EncodingSpec(
      width, conv ? BitIndexConvention::msb_at_0 : BitIndexConvention::lsb_at_0);
  std::uint64_t npos = read_pod<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < npos; ++k) {
    std::uint32_t attr = read_pod<std::uint32_t>(in);
    std::uint32_t bit = read_pod<std::uint32_t>(in);
    loaded.order.positions.emplace_back(attr, bit);
  }
  loaded.trie.leaf_depth_ = read_pod<std::uint32_t>(in);
  std::uint64_t nnodes = read_pod<std::uint64_t>(in);
  loaded.trie.nodes_.resize(nnodes);
  for (auto& n : loaded.trie.nodes_) {
    n.child[0] = read_pod<std::int32_t>(in);
    n.child[1] = read_pod<std::int32_t>(in);
    n.count = read_pod<std::uint64_t>(in);
  }
  if (nnodes == 0) throw usage_error("trie stream has no root");
  return loaded;
}

}  // namespace rtj
