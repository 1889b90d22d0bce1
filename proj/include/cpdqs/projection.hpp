#ifndef CPDQS_PROJECTION_HPP
#define CPDQS_PROJECTION_HPP

#include <Eigen/Core>

#include <algorithm>
#include <vector>

#include "cpdqs/instance.hpp"

namespace cpdqs {

// The two feasible sets the solvers project onto: the product of per-block
// unit simplices, and the nonnegative orthant.
enum class FeasibleSetKind { BlockSimplex, NonnegativeOrthant };

namespace detail {

// Threshold for the Euclidean projection of one block onto the unit simplex.
// Scans the values in descending order and keeps the longest prefix whose
// running mean keeps every kept coordinate positive:
//   khat = max{ k : u_(k) > (sum_{p<=k} u_(p) - 1) / k },   that = that mean.
// This is the standard descending form of the sort-and-threshold projection;
// the ascending scan that accepts t_i once t_i >= u_(i) (with the equal-split
// fallback when no index qualifies) selects the same threshold.  The excess
// mass is subtracted evenly from the surviving coordinates.
template <typename Scalar>
Scalar simplex_threshold(std::vector<Scalar>& buf) {
  std::sort(buf.begin(), buf.end(), std::greater<Scalar>());
  Scalar cumsum = 0;
  Scalar that = 0;
  for (std::size_t k = 0; k < buf.size(); ++k) {
    cumsum += buf[k];
    const Scalar t = (cumsum - Scalar(1)) / static_cast<Scalar>(k + 1);
    if (buf[k] > t)
      that = t;
    else
      break;
  }
  return that;
}

}  // namespace detail

// Projects each block of x onto its unit simplex, independently per block.
// O(l log l) per block from the sort.
template <typename Scalar>
void project_block_simplex_in_place(const BlockLayout& layout,
                                    Eigen::VectorX<Scalar>& x) {
  layout.check_conformal(x);
  std::vector<Scalar> buf;
  buf.reserve(static_cast<std::size_t>(layout.max_block_size()));
  for (Index i = 0; i < layout.blocks(); ++i) {
    auto seg = layout.segment(x, i);
    buf.assign(seg.begin(), seg.end());
    const Scalar that = detail::simplex_threshold(buf);
    seg = (seg.array() - that).max(Scalar(0));
  }
}

template <typename Scalar>
Eigen::VectorX<Scalar> project_block_simplex(const BlockLayout& layout,
                                             Eigen::VectorX<Scalar> x) {
  project_block_simplex_in_place(layout, x);
  return x;
}

// Projection onto the nonnegative orthant: componentwise positive part.
template <typename Scalar>
void project_nonneg_in_place(Eigen::VectorX<Scalar>& x) {
  x = x.cwiseMax(Scalar(0));
}

template <typename Scalar>
Eigen::VectorX<Scalar> project_nonneg(Eigen::VectorX<Scalar> x) {
  project_nonneg_in_place(x);
  return x;
}

// Binds a feasible-set kind to the block layout it may need, exposing an
// in-place projection call.
class Projector {
public:
  Projector(FeasibleSetKind kind, BlockLayout layout)
      : kind_(kind), layout_(std::move(layout)) {}

  FeasibleSetKind kind() const { return kind_; }
  const BlockLayout& layout() const { return layout_; }

  template <typename Scalar>
  void operator()(Eigen::VectorX<Scalar>& x) const {
    if (kind_ == FeasibleSetKind::BlockSimplex)
      project_block_simplex_in_place(layout_, x);
    else
      project_nonneg_in_place(x);
  }

private:
  FeasibleSetKind kind_;
  BlockLayout layout_;
};

// || P(x - g) - x ||_inf, the fixed-point residual of the projected gradient
// map at unit step.  Zero exactly at stationary points of the constrained
// problem.
template <typename Scalar, typename ProjectFn>
Scalar stationarity_residual(const Eigen::VectorX<Scalar>& x,
                             const Eigen::VectorX<Scalar>& g,
                             const ProjectFn& project) {
  Eigen::VectorX<Scalar> p = x - g;
  project(p);
  p -= x;
  return p.size() == 0 ? Scalar(0) : p.template lpNorm<Eigen::Infinity>();
}

}  // namespace cpdqs

#endif  // CPDQS_PROJECTION_HPP
