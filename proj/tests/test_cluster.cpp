#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cluster_suite.hpp"
#include "json.hpp"
#include "specgeo/cluster.hpp"
#include "specgeo/experiments/figures.hpp"

using namespace specgeo;
using specgeo::testing::ocs_cloud;

namespace {

constexpr double pi = std::numbers::pi;

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix polar_points(const std::vector<double>& angles) {
  Matrix p(static_cast<Eigen::Index>(angles.size()), 2);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    p(static_cast<Eigen::Index>(i), 0) = std::cos(angles[i]);
    p(static_cast<Eigen::Index>(i), 1) = std::sin(angles[i]);
  }
  return p;
}

Matrix rotation(double a) {
  Matrix r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

// Ten points per label on the two coordinate axes.
struct AxisData {
  Matrix points;
  std::vector<std::size_t> labels;
};

AxisData axis_data() {
  std::vector<double> angles;
  AxisData d;
  for (std::size_t m = 0; m < 2; ++m)
    for (int i = 0; i < 10; ++i) {
      angles.push_back(m * pi / 2);
      d.labels.push_back(m);
    }
  d.points = polar_points(angles);
  for (Eigen::Index i = 0; i < d.points.rows(); ++i) d.points.row(i) *= 1.0 + 0.1 * static_cast<double>(i);
  return d;
}

double within_sum(const KMeansState& s, const Matrix& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    total += (s.means.col(static_cast<Eigen::Index>(s.assignments[static_cast<std::size_t>(i)])) - y.row(i).transpose())
                 .squaredNorm();
  return total;
}

}  // namespace

TEST(AngleBetween, Examples) {
  EXPECT_DOUBLE_EQ(angle_between(vec2(1, 0), vec2(0, 1)), pi / 2);
  EXPECT_DOUBLE_EQ(angle_between(vec2(1, 0), vec2(1, 0)), 0.0);
  EXPECT_NEAR(angle_between(vec2(1, 1), vec2(1, 0)), pi / 4, 1e-15);
  EXPECT_DOUBLE_EQ(angle_between(vec2(1, 1e-9), vec2(1, 1e-9)), 0.0);
  EXPECT_THROW(angle_between(vec2(0, 0), vec2(1, 0)), Error);
}

TEST(OcsAlpha, AxisAlignedClustersHaveZeroAlpha) {
  const AxisData d = axis_data();
  for (double theta : {1e-6, pi / 8, 0.7}) {
    const OCSCertificate c = ocs_alpha(d.points, d.labels, Matrix::Identity(2, 2), theta);
    EXPECT_EQ(c.alpha, 0.0);
  }
}

TEST(OcsAlpha, OneOutlierOfTen) {
  AxisData d = axis_data();
  d.points.row(3) = vec2(1, 1).transpose();
  const OCSCertificate c = ocs_alpha(d.points, d.labels, Matrix::Identity(2, 2), pi / 8);
  EXPECT_DOUBLE_EQ(c.per_cluster_alpha[0], 0.1);
  EXPECT_DOUBLE_EQ(c.per_cluster_alpha[1], 0.0);
  EXPECT_DOUBLE_EQ(c.alpha, 0.1);
}

TEST(OcsAlpha, SwappedBasisGivesAlphaOne) {
  const AxisData d = axis_data();
  Matrix swapped(2, 2);
  swapped << 0, 1, 1, 0;
  EXPECT_EQ(ocs_alpha(d.points, d.labels, swapped, pi / 8).alpha, 1.0);
}

TEST(OcsAlpha, Errors) {
  const AxisData d = axis_data();
  for (double theta : {0.0, pi / 4, 1.0}) {
    try {
      ocs_alpha(d.points, d.labels, Matrix::Identity(2, 2), theta);
      FAIL() << "expected BadTheta";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BadTheta);
    }
  }
  std::vector<std::size_t> one_label(d.labels.size(), 0);
  try {
    ocs_alpha(d.points, one_label, Matrix::Identity(2, 2), 0.3);
    FAIL() << "expected EmptyCluster";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCluster);
  }
}

TEST(OcsAlpha, MonotoneInTheta) {
  Rng rng(41);
  const auto cloud = ocs_cloud(200, 0.1, 0.5, rng);
  double previous = 1.0;
  for (double theta = 0.01; theta < pi / 4; theta += 0.01) {
    const double a = ocs_alpha(cloud.points, cloud.labels, cloud.basis, theta).alpha;
    EXPECT_LE(a, previous);
    previous = a;
  }
}

TEST(OcsSearch, RecoversRotatedAxes) {
  const AxisData d = axis_data();
  for (double rot : {0.0, 0.3, 2.0, -1.1}) {
    const Matrix r = rotation(rot);
    const Matrix pts = d.points * r.transpose();
    const OCSCertificate c = ocs_search(pts, d.labels, pi / 8);
    EXPECT_EQ(c.alpha, 0.0);
    EXPECT_LE((c.basis - r).norm(), 1e-12) << "rotation " << rot;
    EXPECT_LE((c.basis.transpose() * c.basis - Matrix::Identity(2, 2)).norm(), 1e-10);
  }
}

TEST(OcsSearch, SingleClusterUsesMeanDirection) {
  Matrix pts = polar_points({0.1, -0.1, 0.05, -0.05, 1.2});
  const std::vector<std::size_t> labels(5, 0);
  const OCSCertificate c = ocs_search(pts.col(0), labels, 0.3);
  EXPECT_EQ(c.basis.rows(), 1);
  EXPECT_DOUBLE_EQ(std::abs(c.basis(0, 0)), 1.0);
  EXPECT_EQ(c.alpha, 0.0);
}

TEST(OcsSearch, OutliersAreCounted) {
  Rng rng(42);
  const auto cloud = ocs_cloud(500, 0.02, pi / 10, rng);
  const OCSCertificate truth = ocs_alpha(cloud.points, cloud.labels, cloud.basis, pi / 10);
  // Ten outliers out of 500 per cluster, up to rounding of 1 - 490/500.
  EXPECT_LE(truth.alpha, 0.02 + 1e-15);
  EXPECT_LE(ocs_search(cloud.points, cloud.labels, pi / 8).alpha, 0.02 + 1e-15);
}

TEST(OcsSearch, DegenerateMeans) {
  const Matrix pts = polar_points({0.2, 0.2, 0.2, 0.2});
  const std::vector<std::size_t> labels = {0, 0, 1, 1};
  try {
    ocs_search(pts, labels, 0.3);
    FAIL() << "expected DegenerateMeans";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMeans);
  }
}

TEST(OcsSearch, GaussianPairPilotReproduces) {
  std::ifstream in(std::string(SPECGEO_FIXTURE_DIR) + "/ocs_pilot.json");
  ASSERT_TRUE(in);
  const nlohmann::json pilot = nlohmann::json::parse(in);
  experiments::RunConfig cfg;
  cfg.seed = pilot.at("seed").get<std::uint64_t>();
  cfg.embed_n = pilot.at("n").get<std::size_t>();
  cfg.embed_mu = pilot.at("mu").get<double>();
  cfg.embed_nu = pilot.at("nu").get<double>();
  cfg.embed_offset = pilot.at("offset").get<double>();
  const auto [e, x] = experiments::gaussian_pair_embedding(cfg);
  const double alpha = ocs_search(e.points, e.labels, pilot.at("ocs_theta").get<double>()).alpha;
  EXPECT_NEAR(alpha, pilot.at("pilot_alpha").get<double>(), 1e-12);
  EXPECT_LE(alpha, pilot.at("alpha_threshold").get<double>());
  Rng tuples(derive_seed(cfg.seed, pilot.at("orth_tuple_stream").get<std::uint64_t>()));
  const double frac = theta_orthogonal_fraction(e.points, e.labels, pilot.at("orth_theta").get<double>(),
                                                pilot.at("orth_tuples").get<std::size_t>(), tuples);
  EXPECT_NEAR(frac, pilot.at("pilot_orthogonal_fraction").get<double>(), 1e-12);
  EXPECT_GE(frac, pilot.at("orthogonal_fraction_threshold").get<double>());
}

TEST(ThetaOrthogonalFraction, AxesAndCollinear) {
  const AxisData d = axis_data();
  Rng rng(43);
  for (double theta : {1e-6, 0.3, pi / 4}) EXPECT_EQ(theta_orthogonal_fraction(d.points, d.labels, theta, 500, rng), 1.0);
  const Matrix same = polar_points(std::vector<double>(20, 0.4));
  EXPECT_EQ(theta_orthogonal_fraction(same, d.labels, pi / 4, 500, rng), 0.0);
  EXPECT_THROW(theta_orthogonal_fraction(d.points, std::vector<std::size_t>(20, 1), 0.3, 10, rng), Error);
}

TEST(KMeansUpdate, PointsAtMeansAreFixed) {
  Matrix y(4, 2);
  y << 1, 0, 1, 0, 0, 1, 0, 1;
  KMeansState s;
  s.means = Matrix::Identity(2, 2);
  s.assignments = {0, 0, 1, 1};
  const KMeansState next = kmeans_update(s, y);
  EXPECT_EQ(next.assignments, s.assignments);
  EXPECT_EQ(next.means, s.means);
  EXPECT_EQ(next.iteration, 1u);
}

TEST(KMeansUpdate, MeansBecomeRayAverages) {
  const Matrix y = polar_points({0.1, -0.1, pi / 2 + 0.2, pi / 2});
  KMeansState s;
  s.means = rotation(0.3);
  const KMeansState next = kmeans_update(s, y);
  EXPECT_EQ(next.assignments, (std::vector<std::size_t>{0, 0, 1, 1}));
  EXPECT_NEAR(next.means(0, 0), std::cos(0.1), 1e-15);
  EXPECT_NEAR(next.means(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(next.means(0, 1), 0.5 * std::cos(pi / 2 + 0.2), 1e-15);
  EXPECT_NEAR(next.means(1, 1), 0.5 * (std::sin(pi / 2 + 0.2) + 1.0), 1e-15);
}

TEST(KMeansUpdate, TiesGoToLowestIndexAndEmptyClustersKeepMean) {
  const Matrix y = polar_points({pi / 4});
  KMeansState s;
  s.means = Matrix::Identity(2, 2);
  const KMeansState next = kmeans_update(s, y);
  EXPECT_EQ(next.assignments[0], 0u);
  EXPECT_EQ(next.means.col(1), s.means.col(1));
}

TEST(KMeansUpdate, WithinSumNeverIncreases) {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = ocs_cloud(100, 0.2, 0.6, rng);
    const Matrix y = normalize_rows(cloud.points);
    KMeansState s;
    s.means = random_orthonormal(2, rng);
    s = kmeans_update(s, y);
    for (int it = 0; it < 5; ++it) {
      const KMeansState next = kmeans_update(s, y);
      // The assignment step lowers the sum against the old means, the mean
      // step lowers it again.
      EXPECT_LE(within_sum(next, y), within_sum(s, y) + 1e-12);
      s = next;
    }
  }
}

TEST(KMeansUpdate, OrientedInitConvergesInOneStep) {
  const AxisData d = axis_data();
  const Matrix y = normalize_rows(d.points);
  const double theta = pi / 10;
  // Init rotated away from the axes but not within theta/2 of a bisector.
  KMeansState s;
  s.means = rotation(pi / 4 - theta);
  const KMeansState one = kmeans_update(s, y);
  EXPECT_EQ(misclustering(one.assignments, d.labels), 0.0);
  const KMeansState two = kmeans_update(one, y);
  EXPECT_EQ(two.assignments, one.assignments);
  EXPECT_EQ(two.means, one.means);
}

TEST(KMeansUpdate, ReflectedInitMergesClusters) {
  // The same first vector with the second one reflected: both axes are then
  // closer to the first mean and the second cluster never forms.
  const AxisData d = axis_data();
  const Matrix y = normalize_rows(d.points);
  KMeansState s;
  s.means = rotation(pi / 4 - pi / 10);
  s.means.col(1) = -s.means.col(1);
  for (int it = 0; it < 10; ++it) s = kmeans_update(s, y);
  EXPECT_EQ(misclustering(s.assignments, d.labels), 0.5);
}

TEST(KMeansRun, DeterministicUnderSeed) {
  Rng cloud_rng(45);
  const auto cloud = ocs_cloud(300, 0.02, pi / 10, cloud_rng);
  Rng a(7), b(7);
  const KMeansResult ra = kmeans_run(cloud.points, 2, a), rb = kmeans_run(cloud.points, 2, b);
  EXPECT_EQ(ra.assignments, rb.assignments);
  EXPECT_EQ(ra.initialization, rb.initialization);
  EXPECT_EQ(ra.n_iterations, rb.n_iterations);
}

TEST(KMeansRun, DuplicatedPointsKeepAssignments) {
  Rng cloud_rng(46);
  const auto cloud = ocs_cloud(200, 0.02, pi / 10, cloud_rng);
  Matrix doubled(2 * cloud.points.rows(), 2);
  doubled << cloud.points, cloud.points;
  Rng a(8), b(8);
  const KMeansResult ra = kmeans_run(cloud.points, 2, a), rb = kmeans_run(doubled, 2, b);
  for (std::size_t i = 0; i < ra.assignments.size(); ++i) {
    EXPECT_EQ(rb.assignments[i], ra.assignments[i]);
    EXPECT_EQ(rb.assignments[i + ra.assignments.size()], ra.assignments[i]);
  }
}

TEST(KMeansRun, InitIsOrthonormalAndZeroRowsDropped) {
  Matrix pts = polar_points({0.0, 0.1, pi / 2, pi / 2 - 0.1});
  pts.row(1).setZero();
  Rng rng(9);
  const KMeansResult r = kmeans_run(pts, 2, rng);
  EXPECT_LE((r.initialization.transpose() * r.initialization - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_EQ(r.dropped, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.assignments[1], kUnassigned);
  EXPECT_THROW(kmeans_run(pts, 3, rng), Error);
}

TEST(KMeansRun, RandomOrthonormalSignsAreBalanced) {
  // The determinant of a Haar orthogonal matrix is +1 or -1 with equal odds.
  Rng rng(47);
  int positive = 0;
  for (int i = 0; i < 4000; ++i) positive += random_orthonormal(2, rng).determinant() > 0.0 ? 1 : 0;
  EXPECT_NEAR(positive / 4000.0, 0.5, 3.0 * 0.5 / std::sqrt(4000.0));
}

TEST(Misclustering, Examples) {
  const std::vector<std::size_t> labels = {0, 0, 1, 1, 2, 2};
  EXPECT_EQ(misclustering(std::vector<std::size_t>{2, 2, 0, 0, 1, 1}, labels), 0.0);
  std::vector<std::size_t> z(100, 0), a(100, 0);
  for (std::size_t i = 50; i < 100; ++i) z[i] = a[i] = 1;
  a[7] = 1;
  EXPECT_DOUBLE_EQ(misclustering(a, z), 0.01);
  EXPECT_THROW(misclustering(a, labels), Error);
}

TEST(Misclustering, RandomLabelsAtMostHalf) {
  Rng rng(48);
  std::vector<std::size_t> z(5000), a(5000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = rng.below(2);
    a[i] = rng.below(2);
  }
  const double m = misclustering(a, z);
  EXPECT_LE(m, 0.5);
  EXPECT_GT(m, 0.45);
}

TEST(Misclustering, InvariantUnderAlphabetPermutation) {
  Rng rng(49);
  std::vector<std::size_t> z(300), a(300);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = rng.below(4);
    a[i] = rng.below(3) == 0 ? rng.below(4) : z[i];
  }
  const double base = misclustering(a, z);
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  while (std::next_permutation(perm.begin(), perm.end())) {
    std::vector<std::size_t> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = perm[a[i]];
    EXPECT_EQ(misclustering(b, z), base);
  }
}

TEST(Proposition1Condition, Examples) {
  const std::size_t equal[] = {500, 500};
  EXPECT_TRUE(proposition1_condition(0.0, 1e-9, equal, 1000));
  EXPECT_FALSE(proposition1_condition(0.4, 1e-9, equal, 1000));
  // alpha = 0.4: first ratio is 400/300 before the sine term.
  EXPECT_GT(400.0 / 300.0, std::sin(pi / 8));
  const std::size_t unit[] = {1, 1};
  EXPECT_TRUE(proposition1_condition(0.0, pi / 8, unit, 2));
  EXPECT_FALSE(proposition1_condition(0.0, pi / 8 + 1e-12, unit, 2));
}

TEST(Proposition1Condition, AcceptanceParameters) {
  const std::size_t sizes[] = {500, 500};
  const double first = 20.0 / 490.0 + std::sin(pi / 10);
  const double second = (490.0 * std::cos(pi / 10) - 20.0) / 520.0;
  EXPECT_LE(first, std::sin(pi / 8));
  EXPECT_GE(second, 0.5);
  EXPECT_TRUE(proposition1_condition(0.02, pi / 10, sizes, 1000));
  EXPECT_FALSE(proposition1_condition(0.05, pi / 10, sizes, 1000));
}
