#include "qrflow/butcher.hpp"

namespace qrflow {

namespace {

ButcherPair make_rk38() {
  ButcherPair p;
  p.name = "rk38";
  p.stages = 5;
  p.c.resize(5);
  p.c << 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0;
  p.a = Matrix::Zero(5, 5);
  p.a(1, 0) = 1.0 / 3.0;
  p.a(2, 0) = -1.0 / 3.0;
  p.a(2, 1) = 1.0;
  p.a(3, 0) = 1.0;
  p.a(3, 1) = -1.0;
  p.a(3, 2) = 1.0;
  p.a(4, 0) = 1.0 / 8.0;
  p.a(4, 1) = 3.0 / 8.0;
  p.a(4, 2) = 3.0 / 8.0;
  p.a(4, 3) = 1.0 / 8.0;
  p.b.resize(5);
  p.b << 1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0, 0.0;
  p.bhat.resize(5);
  p.bhat << 1.0 / 12.0, 1.0 / 2.0, 1.0 / 4.0, 0.0, 1.0 / 6.0;
  p.order = 4;
  p.embedded = 3;
  return p;
}

ButcherPair make_dp5() {
  ButcherPair p;
  p.name = "dp5";
  p.stages = 7;
  p.c.resize(7);
  p.c << 0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0;
  p.a = Matrix::Zero(7, 7);
  p.a(1, 0) = 1.0 / 5.0;
  p.a(2, 0) = 3.0 / 40.0;
  p.a(2, 1) = 9.0 / 40.0;
  p.a(3, 0) = 44.0 / 45.0;
  p.a(3, 1) = -56.0 / 15.0;
  p.a(3, 2) = 32.0 / 9.0;
  p.a(4, 0) = 19372.0 / 6561.0;
  p.a(4, 1) = -25360.0 / 2187.0;
  p.a(4, 2) = 64448.0 / 6561.0;
  p.a(4, 3) = -212.0 / 729.0;
  p.a(5, 0) = 9017.0 / 3168.0;
  p.a(5, 1) = -355.0 / 33.0;
  p.a(5, 2) = 46732.0 / 5247.0;
  p.a(5, 3) = 49.0 / 176.0;
  p.a(5, 4) = -5103.0 / 18656.0;
  p.a(6, 0) = 35.0 / 384.0;
  p.a(6, 2) = 500.0 / 1113.0;
  p.a(6, 3) = 125.0 / 192.0;
  p.a(6, 4) = -2187.0 / 6784.0;
  p.a(6, 5) = 11.0 / 84.0;
  p.b.resize(7);
  p.b << 35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
      11.0 / 84.0, 0.0;
  p.bhat.resize(7);
  p.bhat << 5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
      -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0;
  p.order = 5;
  p.embedded = 4;
  return p;
}

}  // namespace

const ButcherPair& rk38_pair() {
  static const ButcherPair pair = make_rk38();
  return pair;
}

const ButcherPair& dp5_pair() {
  static const ButcherPair pair = make_dp5();
  return pair;
}

const ButcherPair& pair_for(PairKind kind) {
  return kind == PairKind::rk38 ? rk38_pair() : dp5_pair();
}

}  // namespace qrflow
