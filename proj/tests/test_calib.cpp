#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "opttomo/calib.hpp"
#include "opttomo/errors.hpp"

using namespace opttomo;

namespace {

Eigen::Matrix3d reference_k() {
  Eigen::Matrix3d k;
  k << 1200, 0, 640, 0, 1150, 360, 0, 0, 1;
  return k;
}

Eigen::Matrix3d pose_rotation(double rx, double ry, double rz) {
  return (Eigen::AngleAxisd(rz, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(ry, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rx, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// Thirteen squares across three tilted planes, all corners in view for
// reference_k with a 1280 x 720 sensor.
std::vector<SquareObservation> synthetic_squares(const Eigen::Matrix3d& k) {
  std::vector<SquareObservation> squares;
  struct Pose {
    Eigen::Matrix3d rot;
    Eigen::Vector3d trans;
    int count;
  };
  const Pose poses[] = {
      {pose_rotation(0.25, 0.35, 0.05), {0.0, -0.1, 2.2}, 5},
      {pose_rotation(-0.2, -0.3, 0.1), {0.1, 0.05, 2.6}, 4},
      {pose_rotation(0.15, 0.1, -0.4), {-0.15, 0.0, 2.0}, 4},
  };
  int plane = 0;
  for (const Pose& pose : poses) {
    for (int i = 0; i < pose.count; ++i) {
      const double ox = -0.45 + 0.3 * i;
      const double oy = -0.3 + 0.12 * i;
      squares.push_back(
          project_square(k, pose.rot, pose.trans, ox, oy, 0.2, plane));
    }
    ++plane;
  }
  return squares;
}

std::vector<SquareObservation> with_noise(std::vector<SquareObservation> squares,
                                          double sigma_px, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> noise(0.0, sigma_px);
  for (auto& sq : squares)
    for (auto& c : sq.corners) {
      c.u += noise(gen);
      c.v += noise(gen);
    }
  return squares;
}

double max_relative_error(const CameraIntrinsics& got, const Eigen::Matrix3d& k) {
  return std::max({std::abs(got.f_x - k(0, 0)) / k(0, 0),
                   std::abs(got.f_y - k(1, 1)) / k(1, 1),
                   std::abs(got.c_x - k(0, 2)) / k(0, 2),
                   std::abs(got.c_y - k(1, 2)) / k(1, 2)});
}

}  // namespace

TEST_CASE("normalization centres the cloud at mean distance sqrt(2)") {
  std::vector<PixelPoint> points{{100, 40}, {900, 60}, {880, 700}, {120, 680},
                                 {500, 380}};
  NormalizationTransform t = compute_normalization(points);
  double cu = 0, cv = 0, dist = 0;
  std::vector<PixelPoint> mapped;
  for (const auto& p : points) mapped.push_back(t.apply(p));
  for (const auto& p : mapped) {
    cu += p.u;
    cv += p.v;
  }
  cu /= static_cast<double>(mapped.size());
  cv /= static_cast<double>(mapped.size());
  CHECK(std::abs(cu) < 1e-12);
  CHECK(std::abs(cv) < 1e-12);
  for (const auto& p : mapped) dist += std::hypot(p.u - cu, p.v - cv);
  dist /= static_cast<double>(mapped.size());
  CHECK(dist == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  Eigen::Matrix3d prod = t.matrix() * t.inverse_matrix();
  CHECK((prod - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("normalization needs at least two distinct points") {
  std::vector<PixelPoint> same{{5, 5}, {5, 5}, {5, 5}, {5, 5}};
  CHECK_THROWS_AS(compute_normalization(same), Error);
}

TEST_CASE("square homography reproduces its observations") {
  SquareObservation sq;
  sq.corners = {PixelPoint{2.0, 1.0}, PixelPoint{5.5, 1.4}, PixelPoint{1.8, 4.6},
                PixelPoint{5.9, 5.2}};
  Homography h = estimate_square_homography(sq);
  CHECK(std::abs(h.h.norm() - 1.0) < 1e-12);

  const double canon[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector3d mapped = h.h * Eigen::Vector3d(canon[i][0], canon[i][1], 1);
    CHECK(mapped(2) != 0);
    CHECK(mapped(0) / mapped(2) == doctest::Approx(sq.corners[i].u).epsilon(1e-9));
    CHECK(mapped(1) / mapped(2) == doctest::Approx(sq.corners[i].v).epsilon(1e-9));
  }
}

TEST_CASE("collinear or repeated corners are degenerate") {
  SquareObservation line;
  line.corners = {PixelPoint{0, 0}, PixelPoint{1, 1}, PixelPoint{2, 2},
                  PixelPoint{3, 3.5}};
  CHECK_THROWS_AS(estimate_square_homography(line), Error);

  SquareObservation repeat;
  repeat.corners = {PixelPoint{0, 0}, PixelPoint{1, 0}, PixelPoint{0, 1},
                    PixelPoint{0, 0}};
  CHECK_THROWS_AS(estimate_square_homography(repeat), Error);
}

TEST_CASE("true conic annihilates the assembled constraints") {
  // omega for K with zero skew is K^-T K^-1 up to scale; every constraint row
  // dotted with its 5-vector (w11, w13, w22, w23, w33) must vanish.
  const Eigen::Matrix3d k = reference_k();
  const Eigen::Matrix3d omega = (k * k.transpose()).inverse();
  Eigen::Matrix<double, 5, 1> w;
  w << omega(0, 0), omega(0, 2), omega(1, 1), omega(1, 2), omega(2, 2);

  std::vector<Homography> hs;
  for (const auto& sq : synthetic_squares(k)) {
    SquareObservation raw = sq;
    hs.push_back(estimate_square_homography(raw));
  }
  Eigen::MatrixXd a = assemble_iac_constraints(hs);
  REQUIRE(a.rows() == static_cast<Eigen::Index>(2 * hs.size()));
  REQUIRE(a.cols() == 5);
  // Rows are built from unit-norm homographies; compare against the row scale.
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    CHECK(std::abs(a.row(r).dot(w)) < 1e-9 * a.row(r).norm() * w.norm());
}

TEST_CASE("noiseless calibration recovers the camera exactly") {
  const Eigen::Matrix3d k = reference_k();
  CalibrationReport report = calibrate(synthetic_squares(k));
  CHECK(max_relative_error(report.intrinsics, k) < 1e-6);
  CHECK(report.corner_residual_px < 1e-6);
  CHECK(report.intrinsics.matrix()(0, 1) == 0.0);
  CHECK(report.warnings.empty());
}

TEST_CASE("calibration without conditioning still recovers the camera") {
  const Eigen::Matrix3d k = reference_k();
  CalibrationOptions options;
  options.normalize = false;
  CalibrationReport report = calibrate(synthetic_squares(k), options);
  CHECK(max_relative_error(report.intrinsics, k) < 1e-5);
}

TEST_CASE("noisy calibration stays near the truth") {
  const Eigen::Matrix3d k = reference_k();
  auto squares = synthetic_squares(k);
  std::vector<double> errors;
  for (unsigned trial = 0; trial < 20; ++trial) {
    CalibrationReport report = calibrate(with_noise(squares, 0.2, 1000 + trial));
    errors.push_back(max_relative_error(report.intrinsics, k));
  }
  std::nth_element(errors.begin(), errors.begin() + errors.size() / 2,
                   errors.end());
  CHECK(errors[errors.size() / 2] < 0.01);
}

TEST_CASE("a single plane cannot fix the conic") {
  const Eigen::Matrix3d k = reference_k();
  const Eigen::Matrix3d rot = pose_rotation(0.2, 0.3, 0.0);
  const Eigen::Vector3d trans(0.0, 0.0, 2.5);
  std::vector<SquareObservation> squares;
  for (int i = 0; i < 6; ++i)
    squares.push_back(
        project_square(k, rot, trans, -0.5 + 0.22 * i, -0.2 + 0.08 * i, 0.18, 0));
  try {
    calibrate(squares);
    FAIL("expected an ambiguity failure");
  } catch (const Error& e) {
    CHECK(e.code() == errc::ambiguous_solution);
    CHECK(e.cls() == error_class::numeric);
  }
}

TEST_CASE("calibration needs at least three squares") {
  const Eigen::Matrix3d k = reference_k();
  auto squares = synthetic_squares(k);
  squares.resize(2);
  CHECK_THROWS_AS(calibrate(squares), Error);
}

TEST_CASE("an indefinite conic cannot be factored") {
  AbsoluteConicImage conic;
  conic.omega << 1, 0, 0, 0, -1, 0, 0, 0, 1;
  try {
    recover_intrinsics(conic);
    FAIL("expected a factorization failure");
  } catch (const Error& e) {
    CHECK(e.code() == errc::not_positive_definite);
  }
}

TEST_CASE("recovered matrix is upper triangular with unit corner") {
  const Eigen::Matrix3d k = reference_k();
  // Feed the exact conic of a known camera and expect that camera back.
  AbsoluteConicImage conic;
  conic.omega = (k * k.transpose()).inverse();
  conic.omega /= conic.omega(2, 2);
  Eigen::Matrix3d recovered = recover_intrinsics(conic);
  CHECK((recovered - k).cwiseAbs().maxCoeff() < 1e-6 * k(0, 0));
  CHECK(recovered(1, 0) == 0.0);
  CHECK(recovered(2, 0) == 0.0);
  CHECK(recovered(2, 1) == 0.0);
  CHECK(recovered(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("denormalization undoes the conditioning transform") {
  NormalizationTransform t;
  t.alpha = 0.01;
  t.t_u = -5.0;
  t.t_v = -3.5;
  const Eigen::Matrix3d k = reference_k();
  Eigen::Matrix3d k_norm = t.matrix() * k;
  k_norm /= k_norm(2, 2);
  CameraIntrinsics intr = denormalize_intrinsics(k_norm, t);
  CHECK(intr.f_x == doctest::Approx(1200.0).epsilon(1e-12));
  CHECK(intr.f_y == doctest::Approx(1150.0).epsilon(1e-12));
  CHECK(intr.c_x == doctest::Approx(640.0).epsilon(1e-12));
  CHECK(intr.c_y == doctest::Approx(360.0).epsilon(1e-12));
}

TEST_CASE("resolution target bar widths") {
  CHECK(usaf_line_width_um(7, 1) == doctest::Approx(3.90625).epsilon(1e-12));
  CHECK(usaf_line_width_um(0, 1) == doctest::Approx(500.0).epsilon(1e-12));
  CHECK(usaf_line_width_um(2, 3) ==
        doctest::Approx(99.21256574801247).epsilon(1e-12));

  // Halves every group, shrinks by 2^(1/6) every element.
  for (int g = -1; g < 8; ++g) {
    CHECK(usaf_line_width_um(g + 1, 1) ==
          doctest::Approx(usaf_line_width_um(g, 1) / 2).epsilon(1e-12));
    for (int e = 1; e < 6; ++e)
      CHECK(usaf_line_width_um(g, e + 1) <
            usaf_line_width_um(g, e));
  }

  CHECK_THROWS_AS(usaf_line_width_um(3, 0), Error);
  CHECK_THROWS_AS(usaf_line_width_um(3, 7), Error);
  try {
    usaf_line_width_um(3, 9);
  } catch (const Error& e) {
    CHECK(e.code() == errc::invalid_element);
    CHECK(e.cls() == error_class::config);
  }
}

TEST_CASE("magnification from two target measurements") {
  TargetMeasurement bare{1.0, 20.0, 500.0};
  TargetMeasurement lens{0.1, 80.0, 25.0};
  MagnificationEstimate m = estimate_magnification(bare, lens);
  CHECK(m.bare_extent_rad_per_px ==
        doctest::Approx(9.999986666698666e-05).epsilon(1e-12));
  CHECK(m.lens_extent_rad_per_px ==
        doctest::Approx(4.9999733335893306e-05).epsilon(1e-12));
  CHECK(m.magnification == doctest::Approx(2.000007999946667).epsilon(1e-12));

  // Exactly half the angular extent means exactly double magnification.
  TargetMeasurement half = bare;
  half.feature_width_px = 40.0;
  CHECK(estimate_magnification(bare, half).magnification ==
        doctest::Approx(2.0).epsilon(1e-12));

  TargetMeasurement bad = bare;
  bad.distance_mm = 0;
  CHECK_THROWS_AS(estimate_magnification(bad, lens), Error);
  bad = lens;
  bad.feature_width_px = -1;
  CHECK_THROWS_AS(estimate_magnification(bare, bad), Error);
}

TEST_CASE("effective geometry scales focal length and derives pitch") {
  CameraIntrinsics intr;
  intr.f_x = 1000.0;
  intr.f_y = 1005.0;
  intr.c_x = 640.0;
  intr.c_y = 360.0;
  MagnificationEstimate m;
  m.magnification = 6.5;
  EffectiveGeometry g = derive_effective_geometry(intr, m, 2.0, 50.0);
  CHECK(g.f_eff_px == doctest::Approx(6500.0));
  CHECK(g.pixel_pitch_mm == doctest::Approx(0.002));
  CHECK(g.c_x == doctest::Approx(640.0));
  CHECK(g.c_y == doctest::Approx(360.0));
  CHECK(g.axis_distance_mm == doctest::Approx(50.0));

  CHECK_THROWS_AS(derive_effective_geometry(intr, m, 0.0, 50.0), Error);
  CHECK_THROWS_AS(derive_effective_geometry(intr, m, 2.0, 0.0), Error);
}
