#include "qrflow/flows.hpp"

namespace qrflow {

namespace {

void check_block(Index expected, const Matrix& block) {
  if (block.rows() != expected || block.cols() != expected) {
    throw Error(ErrorKind::DimensionMismatch,
                "working block does not match the column's trailing size");
  }
}

Vector checked(Vector rate) {
  if (!rate.allFinite()) {
    throw Error(ErrorKind::NonFinite, "coordinate rate is not finite");
  }
  return rate;
}

}  // namespace

Vector column_rhs(const HouseholderFrames& frames, Index col,
                  const Vector& state, const Matrix& block) {
  check_block(frames.block_size(col), block);
  switch (frames.variant) {
    case ReflectorVariant::u: return checked(rhs_u(state, block));
    case ReflectorVariant::v: return checked(rhs_v(state, block));
    case ReflectorVariant::w: return checked(rhs_w(state, block));
  }
  return {};
}

Vector column_rhs(const GivensFrames& frames, Index col, const Vector& state,
                  const Matrix& block) {
  check_block(frames.block_size(col), block);
  return checked(rhs_theta(state, frames.order[col], block));
}

void column_update(const HouseholderFrames& frames, Index col,
                   const Vector& state, const Vector& rate, Matrix& block) {
  check_block(frames.block_size(col), block);
  householder_update(block, reflector_vector(frames.variant, state),
                     reflector_rate(frames.variant, rate));
}

void column_update(const GivensFrames& frames, Index col, const Vector& state,
                   const Vector& rate, Matrix& block) {
  check_block(frames.block_size(col), block);
  givens_update(block, state, rate, frames.order[col]);
}

namespace {

template <typename F>
Vector progressive_diag(const F& frames, const Matrix& a,
                        const std::vector<Vector>& states) {
  if (a.rows() != frames.n || a.cols() != frames.n) {
    throw Error(ErrorKind::DimensionMismatch, "A does not match the frames");
  }
  Vector diag(frames.p);
  Matrix block = a;
  for (Index i = 0; i < frames.p; ++i) {
    const Vector rate = column_rhs(frames, i, states[i], block);
    column_update(frames, i, states[i], rate, block);
    diag(i) = block(0, 0);
    if (i + 1 < frames.p) {
      Matrix next = block.bottomRightCorner(block.rows() - 1, block.cols() - 1);
      block = std::move(next);
    }
  }
  return diag;
}

}  // namespace

Vector transformed_diag(const HouseholderFrames& frames, const Matrix& a) {
  return progressive_diag(frames, a, frames.coords);
}

Vector transformed_diag(const GivensFrames& frames, const Matrix& a) {
  return progressive_diag(frames, a, frames.angles);
}

Vector transformed_diag(const ProjectedFrames& frames, const Matrix& a) {
  // Q^T Q' has a zero diagonal along the flow, so only Q^T A Q contributes.
  return (frames.q.transpose() * a * frames.q).diagonal();
}

Vector transformed_diag(const Frames& frames, const Matrix& a) {
  return std::visit([&](const auto& f) { return transformed_diag(f, a); },
                    frames);
}

}  // namespace qrflow
