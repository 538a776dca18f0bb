#pragma once

#include <string_view>

#include "qrflow/linalg.hpp"

namespace qrflow {

/// Explicit embedded pair. `b` advances the solution (order q+1), `bhat` is
/// the embedded order-q formula used only for the error estimate.
struct ButcherPair {
  std::string_view name;
  Index stages = 0;
  Vector c;
  Matrix a;  // strictly lower triangular
  Vector b;
  Vector bhat;
  int order = 0;     // q + 1
  int embedded = 0;  // q
};

enum class PairKind { rk38, dp5 };

/// 3/8-rule Runge-Kutta 4(3), five stages; the fifth stage only feeds bhat.
const ButcherPair& rk38_pair();

/// Dormand-Prince 5(4), seven stages.
const ButcherPair& dp5_pair();

const ButcherPair& pair_for(PairKind kind);

}  // namespace qrflow
