#ifndef CPDQS_ROUNDING_HPP
#define CPDQS_ROUNDING_HPP

#include <Eigen/Core>

#include <string>

#include "cpdqs/energy.hpp"
#include "cpdqs/instance.hpp"

namespace cpdqs {

// How the surviving index of a multi-support block is chosen when collapsing
// a relaxed point to a 0/1 assignment.  Ties break to the lowest index.
//   MaxValue:     keep the largest entry of the block; O(m) total, used for
//                 the cheap per-iteration stall probe.
//   GreedyEnergy: keep the index minimizing the objective with the rest of
//                 the point held fixed; the objective is linear in one block,
//                 so this is the argmin of that block's gradient coordinates.
enum class RoundingRule { MaxValue, GreedyEnergy };

// Collapses x block by block into a feasible assignment.  Blocks whose
// support is already a singleton keep their index; multi-support blocks are
// resolved in position order, each collapse feeding into the next (the
// greedy rule sees earlier blocks already rounded).  A block with empty
// support, which penalized iterates can produce, falls back to the smallest
// unary energy.  Entries must be >= -tol; values below tol count as zero.
template <typename Scalar>
Assignment round_to_assignment(const BasicInstance<Scalar>& inst,
                               const Eigen::Ref<const Eigen::VectorX<Scalar>>& x,
                               RoundingRule rule,
                               Scalar tol = Scalar(kSupportTol)) {
  const BlockLayout& layout = inst.layout();
  layout.check_conformal(x);
  if ((x.array() < -tol).any())
    throw InvalidInputError("rounding input has negative entries beyond -" +
                            std::to_string(static_cast<double>(tol)));

  const bool greedy = rule == RoundingRule::GreedyEnergy;
  Eigen::VectorX<Scalar> work;
  Eigen::VectorX<Scalar> coeff;  // Bx + a at the current working point
  if (greedy) {
    work = x;
    gradient_into<Scalar>(inst, work, coeff);
  }

  Assignment out;
  out.choice.resize(static_cast<std::size_t>(layout.blocks()));
  for (Index jb = 0; jb < layout.blocks(); ++jb) {
    const Index l = layout.size(jb);
    auto seg = layout.segment(x, jb);

    Index support_size = 0;
    Index first_support = -1;
    for (Index r = 0; r < l; ++r) {
      if (seg[r] > tol) {
        ++support_size;
        if (first_support < 0) first_support = r;
      }
    }

    Index pick;
    if (support_size == 0) {
      pick = 0;
      auto a = layout.segment(inst.unary(), jb);
      for (Index r = 1; r < l; ++r)
        if (a[r] < a[pick]) pick = r;
    } else if (support_size == 1) {
      pick = first_support;
    } else if (!greedy) {
      pick = first_support;
      for (Index r = first_support + 1; r < l; ++r)
        if (seg[r] > tol && seg[r] > seg[pick]) pick = r;
    } else {
      auto c = layout.segment(coeff, jb);
      pick = first_support;
      for (Index r = first_support + 1; r < l; ++r)
        if (seg[r] > tol && c[r] < c[pick]) pick = r;
    }
    out.choice[static_cast<std::size_t>(jb)] = pick;

    if (greedy) {
      // Collapse block jb in the working point and propagate the change of
      // this block into the linear coefficients of every touching block.
      auto wseg = layout.segment(work, jb);
      Eigen::VectorX<Scalar> delta = -wseg;
      delta[pick] += Scalar(1);
      wseg.setZero();
      wseg[pick] = Scalar(1);
      for (const PairBlock<Scalar>& pb : inst.pair_blocks()) {
        if (pb.j == jb)
          layout.segment(coeff, pb.i).noalias() += pb.values * delta;
        else if (pb.i == jb)
          layout.segment(coeff, pb.j).noalias() +=
              pb.values.transpose() * delta;
      }
    }
  }
  return out;
}

}  // namespace cpdqs

#endif  // CPDQS_ROUNDING_HPP
