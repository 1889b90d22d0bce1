#ifndef CPDQS_ENERGY_HPP
#define CPDQS_ENERGY_HPP

#include <Eigen/Core>

#include "cpdqs/instance.hpp"

namespace cpdqs {

// Quadratic objective f(x) = 1/2 x'Bx + a'x evaluated through the stored
// pairwise blocks.  B has zero diagonal blocks and B_ji = B_ij', so the
// quadratic form reduces to a single pass over the i < j blocks:
//   1/2 x'Bx = sum_{i<j} x_i' B_ij x_j.
template <typename Scalar>
Scalar objective(const BasicInstance<Scalar>& inst,
                 const Eigen::Ref<const Eigen::VectorX<Scalar>>& x) {
  const BlockLayout& layout = inst.layout();
  layout.check_conformal(x);
  Scalar quad = 0;
  for (const PairBlock<Scalar>& pb : inst.pair_blocks()) {
    auto xi = layout.segment(x, pb.i);
    auto xj = layout.segment(x, pb.j);
    quad += xi.dot(pb.values * xj);
  }
  return quad + inst.unary().dot(x);
}

// In-place gradient of f: block i of Bx + a is
//   a_i + sum_{j>i} B_ij x_j + sum_{j<i} B_ji' x_j.
// One fused pass over the stored blocks; B is never materialized.
template <typename Scalar>
void gradient_into(const BasicInstance<Scalar>& inst,
                   const Eigen::Ref<const Eigen::VectorX<Scalar>>& x,
                   Eigen::VectorX<Scalar>& g) {
  const BlockLayout& layout = inst.layout();
  layout.check_conformal(x);
  g = inst.unary();
  for (const PairBlock<Scalar>& pb : inst.pair_blocks()) {
    layout.segment(g, pb.i).noalias() += pb.values * layout.segment(x, pb.j);
    layout.segment(g, pb.j).noalias() +=
        pb.values.transpose() * layout.segment(x, pb.i);
  }
}

template <typename Scalar>
Eigen::VectorX<Scalar> gradient(const BasicInstance<Scalar>& inst,
                                const Eigen::Ref<const Eigen::VectorX<Scalar>>& x) {
  Eigen::VectorX<Scalar> g;
  gradient_into(inst, x, g);
  return g;
}

// Weight of the quadratic penalty on the per-block sum-to-one constraints.
template <typename Scalar>
struct PenaltyParams {
  Scalar sigma;

  explicit PenaltyParams(Scalar s) : sigma(s) {
    if (!(sigma > 0)) throw Error("penalty weight sigma must be positive");
  }
};

// f(x) + sigma/2 * sum_i (sum_r x_i[r] - 1)^2.  Coincides with f on the
// block-simplex set, where every residual vanishes.
template <typename Scalar>
Scalar penalized_objective(const BasicInstance<Scalar>& inst,
                           const Eigen::Ref<const Eigen::VectorX<Scalar>>& x,
                           const PenaltyParams<Scalar>& p) {
  const BlockLayout& layout = inst.layout();
  Scalar penalty = 0;
  layout.check_conformal(x);
  for (Index i = 0; i < layout.blocks(); ++i) {
    const Scalar r = layout.segment(x, i).sum() - Scalar(1);
    penalty += r * r;
  }
  return objective(inst, x) + (p.sigma / 2) * penalty;
}

// Gradient of the penalized objective: adds sigma * (block sum - 1) to every
// entry of the block.
template <typename Scalar>
void penalized_gradient_into(const BasicInstance<Scalar>& inst,
                             const Eigen::Ref<const Eigen::VectorX<Scalar>>& x,
                             const PenaltyParams<Scalar>& p,
                             Eigen::VectorX<Scalar>& g) {
  gradient_into(inst, x, g);
  const BlockLayout& layout = inst.layout();
  for (Index i = 0; i < layout.blocks(); ++i) {
    const Scalar r = layout.segment(x, i).sum() - Scalar(1);
    layout.segment(g, i).array() += p.sigma * r;
  }
}

template <typename Scalar>
Eigen::VectorX<Scalar> penalized_gradient(
    const BasicInstance<Scalar>& inst,
    const Eigen::Ref<const Eigen::VectorX<Scalar>>& x,
    const PenaltyParams<Scalar>& p) {
  Eigen::VectorX<Scalar> g;
  penalized_gradient_into(inst, x, p, g);
  return g;
}

}  // namespace cpdqs

#endif  // CPDQS_ENERGY_HPP
