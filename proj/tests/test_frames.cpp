#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <limits>

#include "oracles.hpp"
#include "properties.hpp"
#include "qrflow/frames.hpp"

using namespace qrflow;

namespace {
constexpr double eps = std::numeric_limits<double>::epsilon();

Matrix col34() {
  Matrix x(2, 1);
  x << 3, 4;
  return x;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(xs.size());
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

HouseholderFrames single_v(const Vector& v) {
  HouseholderFrames f;
  f.variant = ReflectorVariant::v;
  f.n = v.size();
  f.p = 1;
  f.coords = {v};
  f.sigma = {-1};
  return f;
}
}  // namespace

TEST_CASE("householder init on the identity") {
  const auto f = init_householder(Matrix::Identity(3, 3), ReflectorVariant::u);
  REQUIRE(f.coords.size() == 3);
  CHECK(f.sigma[0] == -1);
  CHECK(f.coords[0](0) == doctest::Approx(2));
  CHECK(f.coords[0](1) == 0.0);
  CHECK(f.coords[0](2) == 0.0);
  CHECK(f.coords[0](3) == doctest::Approx(-1));  // rho
  // each column is reflected onto sigma * e_i
  CHECK((form_q(f, 3) + Matrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("householder init on [3,4]") {
  const auto fu = init_householder(col34(), ReflectorVariant::u);
  CHECK(fu.sigma[0] == -1);
  CHECK(fu.coords[0](0) == doctest::Approx(8));
  CHECK(fu.coords[0](1) == doctest::Approx(4));
  CHECK(fu.coords[0](2) == doctest::Approx(-5));

  const auto fw = init_householder(col34(), ReflectorVariant::w);
  CHECK(fw.sigma[0] == -1);
  REQUIRE(fw.coords[0].size() == 1);
  CHECK(fw.coords[0](0) == doctest::Approx(0.5));

  // P e1 = x / (sigma ||x||)
  const Matrix q = form_q(fw, 1);
  CHECK(q(0, 0) == doctest::Approx(-0.6));
  CHECK(q(1, 0) == doctest::Approx(-0.8));
  CHECK(orthonormality_defect(q) < 1e-15);

  const auto fv = init_householder(col34(), ReflectorVariant::v);
  CHECK(fv.coords[0].norm() == doctest::Approx(1));
}

TEST_CASE("householder init agrees with the dense factorization") {
  std::mt19937_64 rng(21);
  for (auto var : {ReflectorVariant::u, ReflectorVariant::v, ReflectorVariant::w}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix x = oracle::random_matrix(rng, 6, 4);
      const auto f = init_householder(x, var);
      std::vector<double> vs;
      for (const auto& s : f.coords) vs.push_back(s(0) >= 0 ? 1 : -1);
      const auto ref = oracle::householder_factor(x, var, f.sigma, vs);
      Matrix r = x;
      for (Index i = 0; i < 4; ++i) {
        // cancellation-free sign on the reduced column
        const Vector col = r.col(i).tail(6 - i);
        CHECK(f.sigma[i] == (col(0) >= 0 ? -1 : 1));
        r.bottomRows(6 - i) =
            oracle::reflector(oracle::full_vector(var, ref[i])) * r.bottomRows(6 - i);
        CHECK((f.coords[i] - ref[i]).cwiseAbs().maxCoeff() < 1e-12 * (1 + ref[i].norm()));
      }
      // Q spans the columns of X with R upper triangular
      const Matrix q = form_q(f, 4);
      CHECK(oracle::q_distance(q, oracle::thin_q(x)) < 1e-12);
    }
  }
}

TEST_CASE("givens init examples") {
  CHECK(rotator_order_for(vec({1, 2, -7, 3})) == std::vector<Index>{0, 2, 1, 3});
  CHECK(rotator_order_for(vec({1, 3, -3, 2})) == std::vector<Index>{0, 1, 2, 3});

  const auto f = init_givens(col34());
  REQUIRE(f.angles[0].size() == 1);
  CHECK(f.angles[0](0) == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(f.angles[0](0) == doctest::Approx(0.9273).epsilon(1e-4));
  const Matrix q = form_q(f, 1);
  CHECK(q(0, 0) == doctest::Approx(0.6));
  CHECK(q(1, 0) == doctest::Approx(0.8));

  const auto id = init_givens(Matrix::Identity(4, 3));
  for (const auto& a : id.angles) CHECK(a.cwiseAbs().maxCoeff() == 0.0);
  CHECK((form_q(id, 3) - Matrix::Identity(4, 3)).norm() == 0.0);
}

TEST_CASE("givens init agrees with dense triangularization") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = oracle::random_matrix(rng, 6, 3);
    const auto f = init_givens(x);
    Matrix r = x;
    for (Index i = 0; i < 3; ++i) {
      const Vector col = r.col(i).tail(6 - i);
      CHECK(f.order[i] == oracle::order_for(col));
      const Vector ref = oracle::givens_angles(col, f.order[i]);
      CHECK((f.angles[i] - ref).cwiseAbs().maxCoeff() < 1e-12);
      r.bottomRows(6 - i) =
          oracle::givens_product(ref, f.order[i]).transpose() * r.bottomRows(6 - i);
    }
    // R has a positive diagonal, so Q matches the positive-diagonal thin QR
    CHECK((form_q(f, 3) - oracle::thin_q(x)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(first_unhealthy(f) == 3);
  }
}

TEST_CASE("init rejects rank deficient data") {
  Matrix x(3, 2);
  x << 1, 2, 0, 0, 0, 0;
  for (auto var : {ReflectorVariant::u, ReflectorVariant::v, ReflectorVariant::w}) {
    try {
      init_householder(x, var);
      FAIL("expected ZeroColumn");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ZeroColumn);
      CHECK(e.column() == 1);
    }
  }
  CHECK_THROWS_AS(init_givens(x), Error);
}

TEST_CASE("health predicates on small frames") {
  CHECK_FALSE(column_healthy(single_v(vec({0.6, 0.8})), 0));
  CHECK(column_healthy(single_v(vec({0.8, 0.6})), 0));

  HouseholderFrames w;
  w.variant = ReflectorVariant::w;
  w.n = 2;
  w.p = 1;
  w.coords = {vec({0.5})};
  w.sigma = {-1};
  CHECK(column_healthy(w, 0));
  w.coords = {vec({1.5})};
  CHECK_FALSE(column_healthy(w, 0));

  GivensFrames g;
  g.n = 4;
  g.p = 2;
  g.angles = {Vector::Zero(3), Vector::Zero(2)};
  g.order = {{0, 1, 2, 3}, {0, 1, 2}};
  CHECK(frame_health(g) == std::vector<bool>{true, true});
  g.angles[1](1) = 1.2;  // s^2 > c^2 at the second position
  CHECK(frame_health(g) == std::vector<bool>{true, false});
  CHECK(first_unhealthy(g) == 1);
}

TEST_CASE("u health follows the sign of the leading entry") {
  // x = [3,4] with sigma = -1: u = [8,4], rho = -5 -> healthy
  auto f = init_householder(col34(), ReflectorVariant::u);
  CHECK(column_healthy(f, 0));
  // same column with the opposite sign: u = [-2, 4], rho = 5 -> not healthy
  const int flipped[] = {1};
  f = init_householder(col34(), ReflectorVariant::u, flipped);
  CHECK(f.coords[0](0) == doctest::Approx(-2));
  CHECK_FALSE(column_healthy(f, 0));
}

TEST_CASE("reimbedding a healthy frame keeps Q") {
  std::mt19937_64 rng(31);
  const Matrix x = oracle::random_matrix(rng, 5, 3);
  for (auto var : {ReflectorVariant::u, ReflectorVariant::v, ReflectorVariant::w}) {
    const auto f = init_householder(x, var);
    const auto g = reimbed_householder(f, 0.0);
    CHECK(oracle::q_distance(form_q(f, 3), form_q(g, 3)) < 1e-13);
    CHECK(g.sigma == f.sigma);
    CHECK(first_unhealthy(g) == 3);
  }
  const auto gf = init_givens(x);
  const auto gg = reimbed_givens(gf, 0.0);
  CHECK((form_q(gf, 3) - form_q(gg, 3)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(gg.order == gf.order);
}

TEST_CASE("reimbedding an unhealthy 2x1 v frame") {
  const auto f = single_v(vec({0.6, 0.8}));
  const auto g = reimbed_householder(f, 0.0);
  CHECK(g.coords[0](0) * g.coords[0](0) >= 0.5);
  CHECK(column_healthy(g, 0));
  // oracle: the represented column, refactored with the cancellation-free sign
  const Vector y = f.sigma[0] * form_q(f, 1).col(0);  // x / ||x||
  const auto hv = householder_vector_from(y);
  CHECK(g.sigma[0] == hv.sigma);
  CHECK(oracle::q_distance(form_q(f, 1), form_q(g, 1)) < 1e-15 * 10 * 2);
}

TEST_CASE("reimbedding perturbed frames preserves Q") {
  std::mt19937_64 rng(32);
  for (auto var : {ReflectorVariant::u, ReflectorVariant::v, ReflectorVariant::w}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Index n = 3 + trial % 4;
      const Index p = 2;
      auto f = init_householder(oracle::random_matrix(rng, n, p), var);
      for (auto& s : f.coords) s += oracle::random_vector(rng, s.size(), 2.0);
      renormalize(f);
      const auto g = reimbed_householder(f, 0.0);
      CHECK(oracle::q_distance(form_q(f, p), form_q(g, p)) < 1e-13);
      CHECK(first_unhealthy(g) == p);
    }
  }
}

TEST_CASE("reimbedding only from the first failing column") {
  std::mt19937_64 rng(33);
  auto f = init_householder(oracle::random_matrix(rng, 5, 3), ReflectorVariant::w);
  f.coords[1] = oracle::random_vector(rng, 3, 3.0);
  const auto g = reimbed_householder(f, 0.0, 1);
  CHECK(g.coords[0] == f.coords[0]);
  CHECK(oracle::q_distance(form_q(f, 3), form_q(g, 3)) < 1e-13);
  CHECK(first_unhealthy(g) == 3);
}

TEST_CASE("givens reimbedding") {
  GivensFrames zero;
  zero.n = 4;
  zero.p = 2;
  zero.angles = {Vector::Zero(3), Vector::Zero(2)};
  zero.order = {{0, 1, 2, 3}, {0, 1, 2}};
  const auto z = reimbed_givens(zero, 0.0);
  CHECK(z.order == zero.order);
  for (const auto& a : z.angles) CHECK(a.cwiseAbs().maxCoeff() == 0.0);

  // n=3, p=1: small cosine at the last position
  GivensFrames f;
  f.n = 3;
  f.p = 1;
  f.angles = {vec({0.1, 1.4})};
  f.order = {{0, 1, 2}};
  CHECK_FALSE(column_healthy(f, 0));
  const auto g = reimbed_givens(f, 0.0);
  const Vector x = form_q(f, 1).col(0);
  CHECK(g.order[0] == oracle::order_for(x));
  CHECK(g.order[0][1] == 2);
  CHECK(column_healthy(g, 0));
  CHECK((form_q(g, 1) - form_q(f, 1)).cwiseAbs().maxCoeff() < 1e-14);

  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    GivensFrames r;
    r.n = 4;
    r.p = 2;
    r.angles = {oracle::random_vector(rng, 3, M_PI), oracle::random_vector(rng, 2, M_PI)};
    r.order = {{0, 1, 2, 3}, {0, 1, 2}};
    const auto s = reimbed_givens(r, 0.0);
    CHECK((form_q(r, 2) - form_q(s, 2)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(first_unhealthy(s) == 2);
  }
}

TEST_CASE("chart changes on larger random frames") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 10 + 2 * (trial % 6);
    const Index p = n / 2;
    GivensFrames r;
    r.n = n;
    r.p = p;
    for (Index i = 0; i < p; ++i) {
      r.angles.push_back(oracle::random_vector(rng, n - i - 1, M_PI));
      std::vector<Index> o(n - i);
      for (Index j = 0; j < n - i; ++j) o[j] = j;
      r.order.push_back(o);
    }
    CHECK((form_q(r, p) - form_q(reimbed_givens(r, 0.0), p)).cwiseAbs().maxCoeff() < 1e-12);

    auto h = init_householder(oracle::random_matrix(rng, n, p), ReflectorVariant::w);
    for (auto& s : h.coords) s += oracle::random_vector(rng, s.size());
    CHECK(oracle::q_distance(form_q(h, p), form_q(reimbed_householder(h, 0.0), p)) < 1e-12);
  }
}

TEST_CASE("form_q is orthonormal for arbitrary coordinates") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 8;
    const Index p = 1 + trial % n;
    const double tol = 10 * n * eps;
    HouseholderFrames u;
    u.variant = ReflectorVariant::w;
    u.n = n;
    u.p = p;
    for (Index i = 0; i < p; ++i) {
      u.coords.push_back(oracle::random_vector(rng, n - i - 1, 3.0));
      u.sigma.push_back(-1);
    }
    CHECK(orthonormality_defect(form_q(u, p)) <= tol);
    CHECK((form_q(u, p) - oracle::householder_q(ReflectorVariant::w, n, u.coords))
              .cwiseAbs()
              .maxCoeff() < 1e-13);

    GivensFrames g;
    g.n = n;
    g.p = p;
    for (Index i = 0; i < p; ++i) {
      g.angles.push_back(oracle::random_vector(rng, n - i - 1, 10.0));
      std::vector<Index> o(n - i);
      for (Index j = 0; j < n - i; ++j) o[j] = j;
      std::shuffle(o.begin() + 1, o.end(), rng);
      g.order.push_back(o);
    }
    CHECK(orthonormality_defect(form_q(g, p)) <= tol);
    CHECK((form_q(g, p) - oracle::givens_q(n, g.angles, g.order)).cwiseAbs().maxCoeff() <
          1e-13);
  }
}

TEST_CASE("renormalization and angle wrapping") {
  auto f = single_v(vec({2, 0}));
  renormalize(f);
  CHECK(f.coords[0](0) == 1.0);

  GivensFrames g;
  g.n = 2;
  g.p = 1;
  g.angles = {vec({3 * M_PI / 2})};
  g.order = {{0, 1}};
  const Matrix before = form_q(g, 1);
  wrap_angles(g);
  CHECK(g.angles[0](0) == doctest::Approx(-M_PI / 2));
  CHECK((form_q(g, 1) - before).norm() < 1e-15);
}

TEST_CASE("arbitrary signs reimbed to the cancellation-free chart") {
  const auto s = props::bestcoord1(30, 101);
  INFO(s.first_failure);
  CHECK(s.mismatches == 0);
}

TEST_CASE("arbitrary rotator orderings reimbed to the direct chart") {
  const auto s = props::bestcoord2(30, 102);
  INFO(s.first_failure);
  CHECK(s.mismatches == 0);
}

TEST_CASE("health predicates agree with their column-space forms") {
  const auto h = props::wellscaled_equivalence(300, 103);
  INFO(h.first_failure);
  CHECK(h.mismatches == 0);
  const auto g = props::cheapcos_equivalence(300, 104);
  INFO(g.first_failure);
  CHECK(g.mismatches == 0);
}
