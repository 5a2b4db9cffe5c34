#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "manifold_ekf/errors.hpp"
#include "manifold_ekf/geometry.hpp"
#include "test_support.hpp"

using namespace manifold_ekf;
using namespace test_support;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(So3Exp, ClosedFormCases) {
  EXPECT_EQ(so3_exp(Eigen::Vector3d::Zero()).matrix(), Eigen::Matrix3d::Identity());
  const Eigen::Matrix3d half = so3_exp(Eigen::Vector3d(kPi, 0, 0)).matrix();
  EXPECT_LT((half - Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix()).norm(), 1e-15);
}

TEST(So3Exp, MatchesPowerSeries) {
  const Eigen::Vector3d u(0.3, 0.2, 0.1);
  EXPECT_LT((so3_exp(u).matrix() - matrix_exp_series(skew(u))).cwiseAbs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d v = random_tangent(rng, 3, 3.0);
    EXPECT_LT((so3_exp(v).matrix() - matrix_exp_series(skew(v))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(So3Exp, SmallAngleBranch) {
  const Eigen::Vector3d u(3e-9, -1e-9, 2e-9);
  EXPECT_LT((so3_exp(u).matrix() - matrix_exp_series(skew(u))).cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_LT((so3_log(so3_exp(u)) - u).norm(), 1e-20);
}

TEST(So3Log, AxisCasesAndRoundTrip) {
  EXPECT_EQ(so3_log(Rotation::identity()), Eigen::Vector3d::Zero());
  const Rotation rz(Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix());
  EXPECT_LT((so3_log(rz) - Eigen::Vector3d(0, 0, kPi / 2)).norm(), 1e-15);

  std::mt19937_64 rng(22);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d u = random_tangent(rng, 3, 3.0);
    EXPECT_LT((so3_log(so3_exp(u)) - u).norm(), 1e-10);
    EXPECT_NEAR(rotation_angle(so3_exp(u)), u.norm(), 1e-10);
  }
}

TEST(So3Log, RefusesCutLocus) {
  EXPECT_THROW(so3_log(so3_exp(Eigen::Vector3d(0, kPi, 0))), ChartDomainError);
  EXPECT_THROW(so3_log(so3_exp(Eigen::Vector3d(0, 0, kPi - 1e-7))), ChartDomainError);
  EXPECT_NO_THROW(so3_log(so3_exp(Eigen::Vector3d(0, 0, kPi - 1e-5))));
  EXPECT_NEAR(rotation_angle(so3_exp(Eigen::Vector3d(0, kPi, 0))), kPi, 1e-12);
}

TEST(Rotation, ConstructionChecksGroupMembership) {
  EXPECT_THROW(Rotation(Eigen::Matrix3d::Identity() * 1.001), std::invalid_argument);
  EXPECT_THROW(Rotation(Eigen::Vector3d(1, 1, -1).asDiagonal().toDenseMatrix()),
               std::invalid_argument);
  EXPECT_THROW(Rotation::from_point(Point(Eigen::Vector3d::Zero())), DimensionError);
  const Eigen::Matrix3d perturbed = so3_exp(Eigen::Vector3d(0.1, 0.2, 0.3)).matrix() * 1.01;
  EXPECT_LT(Rotation::project(perturbed).orthogonality_error(), 1e-14);
}

TEST(Rotation, DriftBoundedOverLongCompositions) {
  Rotation r;
  const Rotation step = so3_exp(Eigen::Vector3d(0.013, -0.021, 0.007));
  for (int i = 0; i < 100000; ++i) r = (r * step).orthonormalized();
  EXPECT_LT(r.orthogonality_error(), 1e-9);
}

TEST(So3Transport, ZeroIsIdentity) {
  std::mt19937_64 rng(23);
  const TransportMatrix p = so3_transport(random_rotation(rng), Eigen::Vector3d::Zero());
  EXPECT_EQ(p.mat, Eigen::MatrixXd::Identity(3, 3));
}

TEST(So3Transport, MatchesOdeOracle) {
  std::mt19937_64 rng(24);
  const SO3Manifold m;
  for (int i = 0; i < 50; ++i) {
    const Rotation xi = random_rotation(rng);
    const Eigen::Vector3d mu = random_tangent(rng, 3, 3.0);
    const TransportMatrix closed = so3_transport(xi, mu);
    const TransportMatrix ode = ode_transport_oracle(m, xi.to_point(), mu);
    EXPECT_LT((closed.mat - ode.mat).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((closed.mat.transpose() * closed.mat - Eigen::Matrix3d::Identity()).norm(), 1e-10);
  }
}

TEST(So3Transport, ComposesAlongContinuation) {
  const SO3Manifold m;
  const Rotation xi = so3_exp(Eigen::Vector3d(0.2, -0.1, 0.4));
  const Eigen::Vector3d mu(0.5, 0.3, -0.6);
  const TransportMatrix first = so3_transport(xi, mu);
  // On a one-parameter subgroup the body-frame velocity is constant.
  const TransportMatrix second = so3_transport(Rotation::from_point(first.to), mu);
  const TransportMatrix doubled = ode_transport_oracle(m, xi.to_point(), 2.0 * mu);
  EXPECT_LT((second.mat * first.mat - doubled.mat).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(So3Geodesic, TracesOneParameterSubgroup) {
  const SO3Manifold m;
  const Rotation xi = so3_exp(Eigen::Vector3d(-0.7, 0.2, 0.1));
  const Eigen::Vector3d mu(0.4, 1.1, -0.5);
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    const Eigen::Matrix3d expected = xi.matrix() * matrix_exp_series(skew(t * mu));
    EXPECT_LT((Rotation::from_point(m.boxplus(xi.to_point(), t * mu)).matrix() - expected)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(SphereBasis, DeterministicOrthonormalFrame) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 200; ++i) {
    const UnitVector p = random_unit(rng);
    const SphereBasis b = sphere_basis(p);
    EXPECT_LT((b.transpose() * b - Eigen::Matrix2d::Identity()).norm(), 1e-14);
    EXPECT_LT((b.transpose() * p.vec()).norm(), 1e-14);
    EXPECT_LT((b.col(1) - p.vec().cross(b.col(0))).norm(), 1e-14);
  }
  // Ties pick the lowest index: at the north pole the first vector is e_x.
  const SphereBasis north = sphere_basis(UnitVector(Eigen::Vector3d(0, 0, 1)));
  EXPECT_EQ(north.col(0), Eigen::Vector3d(1, 0, 0));
  EXPECT_EQ(north.col(1), Eigen::Vector3d(0, 1, 0));
}

TEST(UnitVectorType, RejectsNonUnit) {
  EXPECT_THROW(UnitVector(Eigen::Vector3d(1, 0, 1e-5)), std::invalid_argument);
  EXPECT_NO_THROW(UnitVector::normalized(Eigen::Vector3d(3, 0, 4)));
  EXPECT_THROW(UnitVector::normalized(Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST(SphereExpLog, ClosedFormCases) {
  const UnitVector north(Eigen::Vector3d(0, 0, 1));
  EXPECT_EQ(sphere_exp(north, Eigen::Vector2d::Zero()).vec(), north.vec());
  const Eigen::Vector2d v = sphere_basis(north).transpose() * Eigen::Vector3d(kPi / 2, 0, 0);
  EXPECT_LT((sphere_exp(north, v).vec() - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
  EXPECT_EQ(sphere_log(north, north), Eigen::Vector2d::Zero());
  const Eigen::Vector2d l = sphere_log(UnitVector(Eigen::Vector3d(1, 0, 0)), north);
  EXPECT_LT((sphere_basis(north) * l - Eigen::Vector3d(kPi / 2, 0, 0)).norm(), 1e-15);
}

TEST(SphereExpLog, RoundTripAndNorm) {
  std::mt19937_64 rng(26);
  for (int i = 0; i < 1000; ++i) {
    const UnitVector p = random_unit(rng);
    const Eigen::Vector2d v = random_tangent(rng, 2, 3.0);
    EXPECT_LT((sphere_log(sphere_exp(p, v), p) - v).norm(), 1e-10);
    const UnitVector q = random_unit(rng);
    EXPECT_LT((sphere_exp(p, sphere_log(q, p)).vec() - q.vec()).norm(), 1e-10);
  }
  // A pair at a known angle of 2 rad.
  const UnitVector p = random_unit(rng);
  const Eigen::Vector3d axis = sphere_basis(p).col(0);
  const UnitVector q = UnitVector::normalized(std::cos(2.0) * p.vec() + std::sin(2.0) * axis);
  EXPECT_NEAR(sphere_log(q, p).norm(), 2.0, 1e-12);
}

TEST(SphereExpLog, SmallAngleSeries) {
  const UnitVector p(Eigen::Vector3d(0, 0, 1));
  const Eigen::Vector2d v(3e-9, -4e-9);
  EXPECT_LT((sphere_log(sphere_exp(p, v), p) - v).norm(), 1e-20);
}

TEST(SphereExpLog, Errors) {
  const UnitVector p(Eigen::Vector3d(0, 0, 1));
  EXPECT_THROW(sphere_exp(p, Eigen::Vector2d(kPi, 0)), ChartDomainError);
  EXPECT_THROW(sphere_log(UnitVector(Eigen::Vector3d(0, 0, -1)), p), ChartDomainError);
}

TEST(SphereTransport, ZeroAndOrthogonalityAndOracle) {
  std::mt19937_64 rng(27);
  const SphereManifold m;
  const UnitVector p0 = random_unit(rng);
  EXPECT_EQ(sphere_transport(p0, Eigen::Vector2d::Zero()).mat, Eigen::MatrixXd::Identity(2, 2));
  for (int i = 0; i < 50; ++i) {
    const UnitVector p = random_unit(rng);
    const Eigen::Vector2d v = random_tangent(rng, 2, 3.0);
    const TransportMatrix t = sphere_transport(p, v);
    EXPECT_LT((t.mat.transpose() * t.mat - Eigen::Matrix2d::Identity()).norm(), 1e-10);
    EXPECT_NEAR(t.mat.determinant(), 1.0, 1e-10);
    EXPECT_LT((t.mat - ode_transport_oracle(m, p.to_point(), v).mat).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SphereTransport, CarriesGeodesicVelocity) {
  // The velocity of a geodesic is parallel along it.
  std::mt19937_64 rng(28);
  for (int i = 0; i < 100; ++i) {
    const UnitVector p = random_unit(rng);
    const Eigen::Vector2d v = random_tangent(rng, 2, 3.0);
    const TransportMatrix t = sphere_transport(p, v);
    const UnitVector q = UnitVector::from_point(t.to);
    const Eigen::Vector2d end_velocity = -sphere_log(p, q);
    EXPECT_LT((t.mat * v - end_velocity).norm(), 1e-9);
  }
}

TEST(Product, EuclideanFactorsBehaveAsConcatenation) {
  const auto m = product_manifold({euclidean(2), euclidean(3)});
  EXPECT_EQ(m->dim(), 5);
  EXPECT_TRUE(std::isinf(m->injectivity_radius()));
  Eigen::VectorXd x(5), u(5);
  x << 1, 2, 3, 4, 5;
  u << 0.5, -1, 2, 0, 1;
  EXPECT_EQ(m->boxplus(Point(x), u).coords(), x + u);
  EXPECT_EQ(m->boxminus(Point(x + u), Point(x)), u);
  EXPECT_EQ(m->transport_along_geodesic(Point(x), u).mat, Eigen::MatrixXd::Identity(5, 5));
}

TEST(Product, SpherePairTransportIsBlockDiagonal) {
  std::mt19937_64 rng(29);
  const auto m = sphere_pair();
  const UnitVector a = random_unit(rng), b = random_unit(rng);
  const Eigen::Vector2d va = random_tangent(rng, 2, 2.0), vb = random_tangent(rng, 2, 2.0);
  Eigen::VectorXd mu(4);
  mu << va, vb;
  const auto* prod = dynamic_cast<const ProductManifold*>(m.get());
  ASSERT_NE(prod, nullptr);
  const TransportMatrix t = m->transport_along_geodesic(prod->join({a.to_point(), b.to_point()}), mu);
  EXPECT_EQ(t.mat.topLeftCorner(2, 2), sphere_transport(a, va).mat);
  EXPECT_EQ(t.mat.bottomRightCorner(2, 2), sphere_transport(b, vb).mat);
  EXPECT_EQ(t.mat.topRightCorner(2, 2), Eigen::Matrix2d::Zero());
  EXPECT_EQ(t.mat.bottomLeftCorner(2, 2), Eigen::Matrix2d::Zero());
  EXPECT_NEAR(m->injectivity_radius(), kPi, 0.0);
}

TEST(Product, ChartDomainIsPerFactor) {
  const auto m = sphere_pair();
  const Point o = origin_of(*m);
  Eigen::VectorXd u(4);
  // Total norm exceeds π but each block stays inside its factor's chart.
  u << 2.5, 0, 0, 2.5;
  EXPECT_NO_THROW(m->boxplus(o, u));
  u << 3.2, 0, 0, 0.1;
  EXPECT_THROW(m->boxplus(o, u), ChartDomainError);
}

TEST(Product, RejectsMalformedInput) {
  EXPECT_THROW(ProductManifold({}), std::invalid_argument);
  const auto m = sphere_pair();
  EXPECT_THROW(m->validate(Point(Eigen::Vector3d(0, 0, 1))), DimensionError);
  EXPECT_THROW(m->boxplus(origin_of(*m), Eigen::VectorXd::Zero(5)), DimensionError);
}
