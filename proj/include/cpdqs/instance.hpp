#ifndef CPDQS_INSTANCE_HPP
#define CPDQS_INSTANCE_HPP

#include <Eigen/Core>

#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cpdqs/errors.hpp"

namespace cpdqs {

using Index = Eigen::Index;

// Partition of a length-m vector into n contiguous blocks.  Block i of x is
// x.segment(offset(i), size(i)).  All indices are 0-based; file formats and
// user-facing output use 1-based indices, converted at the io boundary.
class BlockLayout {
public:
  BlockLayout() = default;

  explicit BlockLayout(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
    offsets_.reserve(sizes_.size() + 1);
    Index off = 0;
    for (Index s : sizes_) {
      if (s <= 0) throw ConformanceError("block sizes must be positive");
      offsets_.push_back(off);
      off += s;
    }
    offsets_.push_back(off);
  }

  Index blocks() const { return static_cast<Index>(sizes_.size()); }
  Index size(Index i) const { return sizes_[static_cast<std::size_t>(i)]; }
  Index offset(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }
  Index total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<Index>& sizes() const { return sizes_; }

  Index max_block_size() const {
    Index m = 0;
    for (Index s : sizes_) m = std::max(m, s);
    return m;
  }

  template <typename Derived>
  auto segment(Eigen::MatrixBase<Derived>& x, Index i) const {
    return x.segment(offset(i), size(i));
  }
  template <typename Derived>
  auto segment(const Eigen::MatrixBase<Derived>& x, Index i) const {
    return x.segment(offset(i), size(i));
  }

  template <typename Derived>
  void check_conformal(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != total())
      throw ConformanceError("vector of length " + std::to_string(x.size()) +
                             " does not match block layout of total length " +
                             std::to_string(total()));
  }

  friend bool operator==(const BlockLayout& a, const BlockLayout& b) {
    return a.sizes_ == b.sizes_;
  }

private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

// Dense interaction block between two positions i < j.  The mirrored block
// (j, i) is the transpose and is never stored.
template <typename Scalar>
struct PairBlock {
  Index i = 0;
  Index j = 0;
  Eigen::MatrixX<Scalar> values;
};

// One rotamer index per position, 0-based.  Equivalent to the 0/1 vector with
// exactly one unit entry per block (see expand()).
struct Assignment {
  std::vector<Index> choice;

  friend bool operator==(const Assignment& a, const Assignment& b) {
    return a.choice == b.choice;
  }
  friend bool operator!=(const Assignment& a, const Assignment& b) {
    return !(a == b);
  }
};

// The full problem datum: block structure, unary energies a, and the sparse
// set of pairwise blocks B_ij (i < j).  Absent pairs are all-zero.  Immutable
// after construction and safe to share across concurrent solver runs.
template <typename Scalar>
class BasicInstance {
public:
  using Vector = Eigen::VectorX<Scalar>;

  BasicInstance(std::string name, std::vector<Index> block_sizes, Vector unary,
                std::vector<PairBlock<Scalar>> pairwise)
      : name_(std::move(name)),
        layout_(std::move(block_sizes)),
        unary_(std::move(unary)),
        pairwise_(std::move(pairwise)) {
    layout_.check_conformal(unary_);
    const Index n = layout_.blocks();
    pair_index_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    for (std::size_t p = 0; p < pairwise_.size(); ++p) {
      const PairBlock<Scalar>& pb = pairwise_[p];
      if (pb.i < 0 || pb.j >= n || pb.i >= pb.j)
        throw ConformanceError("pairwise block (" + std::to_string(pb.i + 1) +
                               ", " + std::to_string(pb.j + 1) +
                               ") must satisfy 1 <= i < j <= n");
      if (pb.values.rows() != layout_.size(pb.i) ||
          pb.values.cols() != layout_.size(pb.j))
        throw ConformanceError("pairwise block (" + std::to_string(pb.i + 1) +
                               ", " + std::to_string(pb.j + 1) +
                               ") has wrong dimensions");
      long& slot = pair_index_[static_cast<std::size_t>(pb.i) * n + pb.j];
      if (slot != -1)
        throw ConformanceError("duplicate pairwise block (" +
                               std::to_string(pb.i + 1) + ", " +
                               std::to_string(pb.j + 1) + ")");
      slot = static_cast<long>(p);
    }
  }

  const std::string& name() const { return name_; }
  const BlockLayout& layout() const { return layout_; }
  Index positions() const { return layout_.blocks(); }
  Index dimension() const { return layout_.total(); }
  const Vector& unary() const { return unary_; }
  const std::vector<PairBlock<Scalar>>& pair_blocks() const { return pairwise_; }

  // Stored block for the ordered pair i < j, or nullptr when the interaction
  // is absent (all-zero).
  const Eigen::MatrixX<Scalar>* pair(Index i, Index j) const {
    const long p = pair_index_[static_cast<std::size_t>(i) * positions() + j];
    return p < 0 ? nullptr : &pairwise_[static_cast<std::size_t>(p)].values;
  }

  // Interaction energy between rotamer r at position i and rotamer s at
  // position j, for any i != j.
  Scalar pair_energy(Index i, Index r, Index j, Index s) const {
    if (i > j) return pair_energy(j, s, i, r);
    const Eigen::MatrixX<Scalar>* b = pair(i, j);
    return b ? (*b)(r, s) : Scalar(0);
  }

  Scalar unary_energy(Index i, Index r) const {
    return unary_[layout_.offset(i) + r];
  }

private:
  std::string name_;
  BlockLayout layout_;
  Vector unary_;
  std::vector<PairBlock<Scalar>> pairwise_;
  std::vector<long> pair_index_;  // n*n lookup, -1 for absent pairs
};

using Instance = BasicInstance<double>;

// Indicator expansion: the 0/1 vector with a single unit entry per block,
// placed at the chosen rotamer.
template <typename Scalar>
Eigen::VectorX<Scalar> expand(const BasicInstance<Scalar>& inst,
                              const Assignment& a) {
  const BlockLayout& layout = inst.layout();
  if (static_cast<Index>(a.choice.size()) != layout.blocks())
    throw InvalidAssignmentError("assignment has " +
                                 std::to_string(a.choice.size()) +
                                 " choices for " +
                                 std::to_string(layout.blocks()) + " positions");
  Eigen::VectorX<Scalar> x = Eigen::VectorX<Scalar>::Zero(layout.total());
  for (Index i = 0; i < layout.blocks(); ++i) {
    const Index r = a.choice[static_cast<std::size_t>(i)];
    if (r < 0 || r >= layout.size(i))
      throw InvalidAssignmentError(
          "choice " + std::to_string(r + 1) + " out of range for position " +
          std::to_string(i + 1) + " with " + std::to_string(layout.size(i)) +
          " rotamers");
    x[layout.offset(i) + r] = Scalar(1);
  }
  return x;
}

// Defaulted support threshold: iterates of a first-order method carry
// floating-point dust, so strictly-positive is tested against a small tol.
inline constexpr double kSupportTol = 1e-9;

// Per-block ascending lists of indices whose entry exceeds tol.
template <typename Scalar>
std::vector<std::vector<Index>> support_profile(
    const BlockLayout& layout, const Eigen::Ref<const Eigen::VectorX<Scalar>>& x,
    Scalar tol = Scalar(kSupportTol)) {
  layout.check_conformal(x);
  std::vector<std::vector<Index>> supports(
      static_cast<std::size_t>(layout.blocks()));
  for (Index i = 0; i < layout.blocks(); ++i) {
    auto seg = layout.segment(x, i);
    for (Index r = 0; r < layout.size(i); ++r)
      if (seg[r] > tol) supports[static_cast<std::size_t>(i)].push_back(r);
  }
  return supports;
}

}  // namespace cpdqs

#endif  // CPDQS_INSTANCE_HPP
