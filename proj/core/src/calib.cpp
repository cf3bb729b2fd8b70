#include "opttomo/calib.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <set>
#include <sstream>

#include "opttomo/errors.hpp"

namespace opttomo {

namespace {

// Canonical unit square matching the corner ordering of SquareObservation.
constexpr std::array<std::array<double, 2>, 4> kCanonical{
    {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}};

double cross2(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c) {
  return (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
}

// Coefficient row of h_i^T w h_j in the unknowns (w11, w13, w22, w23, w33),
// with w12 fixed to zero by the model.
Eigen::Matrix<double, 1, 5> constraint_row(const Eigen::Vector3d& hi,
                                           const Eigen::Vector3d& hj) {
  Eigen::Matrix<double, 1, 5> row;
  row << hi(0) * hj(0),
         hi(0) * hj(2) + hi(2) * hj(0),
         hi(1) * hj(1),
         hi(1) * hj(2) + hi(2) * hj(1),
         hi(2) * hj(2);
  return row;
}

}  // namespace

Eigen::Matrix3d NormalizationTransform::matrix() const {
  Eigen::Matrix3d m;
  m << alpha, 0, -alpha * t_u,
       0, alpha, -alpha * t_v,
       0, 0, 1;
  return m;
}

Eigen::Matrix3d NormalizationTransform::inverse_matrix() const {
  Eigen::Matrix3d m;
  m << 1.0 / alpha, 0, t_u,
       0, 1.0 / alpha, t_v,
       0, 0, 1;
  return m;
}

PixelPoint NormalizationTransform::apply(const PixelPoint& p) const {
  return {alpha * (p.u - t_u), alpha * (p.v - t_v)};
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << f_x, 0, c_x,
       0, f_y, c_y,
       0, 0, 1;
  return k;
}

NormalizationTransform compute_normalization(std::span<const PixelPoint> points) {
  if (points.size() < 2)
    fail(errc::all_points_coincident, "normalization needs at least 2 points");
  double cu = 0, cv = 0;
  for (const auto& p : points) {
    cu += p.u;
    cv += p.v;
  }
  cu /= static_cast<double>(points.size());
  cv /= static_cast<double>(points.size());

  double mean_dist = 0;
  for (const auto& p : points)
    mean_dist += std::hypot(p.u - cu, p.v - cv);
  mean_dist /= static_cast<double>(points.size());
  if (mean_dist <= 0)
    fail(errc::all_points_coincident, "all points coincide; cannot normalize");

  return {std::sqrt(2.0) / mean_dist, cu, cv};
}

Homography estimate_square_homography(const SquareObservation& square) {
  const auto& c = square.corners;

  double scale = 0;
  for (const auto& p : c) scale = std::max(scale, std::hypot(p.u, p.v));
  const double area_tol = 1e-12 * std::max(1.0, scale * scale);

  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    if (std::abs(cross2(c[t[0]], c[t[1]], c[t[2]])) <= area_tol)
      fail(errc::degenerate_corners, "three corners are collinear");
  }
  // Quad cycle is corner order 0, 1, 3, 2.
  double area = cross2(c[0], c[1], c[3]) + cross2(c[0], c[3], c[2]);
  if (std::abs(area) <= area_tol)
    fail(errc::degenerate_corners, "corner quadrilateral has zero area");

  Eigen::Matrix<double, 8, 9> a = Eigen::Matrix<double, 8, 9>::Zero();
  for (int i = 0; i < 4; ++i) {
    const double x = kCanonical[i][0];
    const double y = kCanonical[i][1];
    const double u = c[i].u;
    const double v = c[i].v;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y, -v;
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) <= 1e-10 * sv(0))
    fail(errc::degenerate_corners, "corner configuration is rank-deficient");

  Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2),
       h(3), h(4), h(5),
       h(6), h(7), h(8);
  m /= m.norm();
  if (m(2, 2) < 0) m = -m;
  return {m};
}

Eigen::MatrixXd assemble_iac_constraints(std::span<const Homography> homographies) {
  if (homographies.size() < 2)
    fail(errc::insufficient_constraints,
         "need at least 2 homographies to constrain the conic");
  Eigen::MatrixXd rows(2 * homographies.size(), 5);
  for (std::size_t i = 0; i < homographies.size(); ++i) {
    const Eigen::Vector3d h1 = homographies[i].h.col(0);
    const Eigen::Vector3d h2 = homographies[i].h.col(1);
    rows.row(2 * i) = constraint_row(h1, h2);
    rows.row(2 * i + 1) = constraint_row(h1, h1) - constraint_row(h2, h2);
  }
  return rows;
}

AbsoluteConicImage solve_iac(const Eigen::MatrixXd& constraints) {
  if (constraints.cols() != 5)
    fail(errc::numeric_failure, "constraint system must have 5 columns");
  if (constraints.rows() < 4)
    fail(errc::insufficient_constraints,
         "need at least 4 constraint rows to solve for the conic");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const int n = static_cast<int>(sv.size());
  // A well-posed system has exactly one vanishing direction; a second one
  // within noise level means the planes do not pin down the conic.
  if (sv(n - 2) - sv(n - 1) <= 1e-8 * sv(0))
    fail(errc::ambiguous_solution,
         "degenerate plane configuration: conic solution is not unique");

  Eigen::Matrix<double, 5, 1> x = svd.matrixV().col(4);
  if (x(0) < 0) x = -x;

  Eigen::Matrix3d omega;
  omega << x(0), 0, x(1),
           0, x(2), x(3),
           x(1), x(3), x(4);
  return {omega};
}

Eigen::Matrix3d recover_intrinsics(const AbsoluteConicImage& conic) {
  Eigen::LLT<Eigen::Matrix3d> llt(conic.omega);
  if (llt.info() != Eigen::Success)
    fail(errc::not_positive_definite,
         "conic estimate is not positive definite; no real camera fits it");

  // omega = A^T A with A upper triangular, so K = A^{-1}.
  Eigen::Matrix3d upper = llt.matrixL().transpose();
  Eigen::Matrix3d k =
      upper.triangularView<Eigen::Upper>().solve(Eigen::Matrix3d::Identity());
  k /= k(2, 2);

  if (std::abs(k(0, 1)) > 1e-9)
    fail(errc::numeric_failure, "skew entry did not vanish");
  k(0, 1) = 0;
  k(1, 0) = k(2, 0) = k(2, 1) = 0;
  return k;
}

CameraIntrinsics denormalize_intrinsics(const Eigen::Matrix3d& k_normalized,
                                        const NormalizationTransform& transform) {
  Eigen::Matrix3d k = transform.inverse_matrix() * k_normalized;
  k /= k(2, 2);

  CameraIntrinsics out;
  out.f_x = k(0, 0);
  out.f_y = k(1, 1);
  out.c_x = k(0, 2);
  out.c_y = k(1, 2);
  out.normalized_k = k_normalized;
  out.normalization = transform;
  if (!(out.f_x > 0) || !(out.f_y > 0))
    fail(errc::numeric_failure, "recovered focal lengths are not positive");
  return out;
}

CalibrationReport calibrate(std::span<const SquareObservation> squares,
                            const CalibrationOptions& options) {
  if (squares.size() < 3)
    fail(errc::insufficient_constraints,
         "calibration needs at least 3 squares");

  std::vector<PixelPoint> points;
  points.reserve(4 * squares.size());
  std::set<int> plane_ids;
  for (const auto& s : squares) {
    plane_ids.insert(s.plane_id);
    for (const auto& p : s.corners) points.push_back(p);
  }

  NormalizationTransform t;
  if (options.normalize) t = compute_normalization(points);

  std::vector<SquareObservation> normalized(squares.begin(), squares.end());
  for (auto& s : normalized)
    for (auto& p : s.corners) p = t.apply(p);

  std::vector<Homography> hs;
  hs.reserve(normalized.size());
  for (const auto& s : normalized) hs.push_back(estimate_square_homography(s));

  Eigen::MatrixXd constraints = assemble_iac_constraints(hs);
  AbsoluteConicImage conic = solve_iac(constraints);
  Eigen::Matrix3d k_norm = recover_intrinsics(conic);

  CalibrationReport report;
  report.intrinsics = denormalize_intrinsics(k_norm, t);

  Eigen::Matrix<double, 5, 1> x;
  x << conic.omega(0, 0), conic.omega(0, 2), conic.omega(1, 1),
       conic.omega(1, 2), conic.omega(2, 2);
  report.constraint_residual =
      (constraints * x).norm() / std::sqrt(static_cast<double>(constraints.rows()));

  double sq_sum = 0;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    for (int j = 0; j < 4; ++j) {
      Eigen::Vector3d mapped =
          hs[i].h * Eigen::Vector3d(kCanonical[j][0], kCanonical[j][1], 1.0);
      double du = mapped(0) / mapped(2) - normalized[i].corners[j].u;
      double dv = mapped(1) / mapped(2) - normalized[i].corners[j].v;
      sq_sum += du * du + dv * dv;
    }
  }
  report.corner_residual_px =
      std::sqrt(sq_sum / (4.0 * static_cast<double>(normalized.size()))) / t.alpha;

  if (plane_ids.size() < 2) {
    report.warnings.push_back(
        "all squares share one plane id; solution relied on numerical "
        "conditioning only");
  }
  return report;
}

SquareObservation project_square(const Eigen::Matrix3d& k,
                                 const Eigen::Matrix3d& rotation,
                                 const Eigen::Vector3d& translation,
                                 double origin_x, double origin_y, double side,
                                 int plane_id) {
  SquareObservation out;
  out.plane_id = plane_id;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d plane_point(origin_x + side * kCanonical[i][0],
                                      origin_y + side * kCanonical[i][1], 0.0);
    const Eigen::Vector3d cam = rotation * plane_point + translation;
    if (!(cam(2) > 0))
      fail(errc::config_error, "square corner is behind the camera");
    const Eigen::Vector3d px = k * cam;
    out.corners[i] = {px(0) / px(2), px(1) / px(2)};
  }
  return out;
}

double usaf_line_width_um(int group, int element) {
  if (element < 1 || element > 6) {
    std::ostringstream os;
    os << "element " << element << " outside 1..6";
    fail(errc::invalid_element, os.str());
  }
  const double pairs_per_mm =
      std::exp2(static_cast<double>(group) +
                (static_cast<double>(element) - 1.0) / 6.0);
  return 500.0 / pairs_per_mm;
}

MagnificationEstimate estimate_magnification(const TargetMeasurement& bare,
                                             const TargetMeasurement& with_lens) {
  for (const TargetMeasurement* m : {&bare, &with_lens}) {
    if (!(m->feature_width_mm > 0) || !(m->feature_width_px > 0) ||
        !(m->distance_mm > 0))
      fail(errc::non_positive_extent,
           "target measurement fields must be positive");
  }
  MagnificationEstimate out;
  out.bare_extent_rad_per_px =
      std::atan(bare.feature_width_mm / bare.distance_mm) / bare.feature_width_px;
  out.lens_extent_rad_per_px =
      std::atan(with_lens.feature_width_mm / with_lens.distance_mm) /
      with_lens.feature_width_px;
  if (!(out.bare_extent_rad_per_px > 0) || !(out.lens_extent_rad_per_px > 0))
    fail(errc::non_positive_extent, "angular extents must be positive");
  out.magnification = out.bare_extent_rad_per_px / out.lens_extent_rad_per_px;
  return out;
}

EffectiveGeometry derive_effective_geometry(const CameraIntrinsics& intrinsics,
                                            const MagnificationEstimate& mag,
                                            double f_bare_mm,
                                            double axis_distance_mm) {
  if (!(f_bare_mm > 0))
    fail(errc::config_error, "bare focal length must be positive");
  if (!(axis_distance_mm > 0))
    fail(errc::config_error, "axis distance must be positive");
  if (!(mag.magnification > 0))
    fail(errc::numeric_failure, "magnification must be positive");
  if (!(intrinsics.f_x > 0))
    fail(errc::numeric_failure, "intrinsics carry a non-positive focal length");

  EffectiveGeometry g;
  g.f_eff_px = mag.magnification * intrinsics.f_x;
  g.pixel_pitch_mm = f_bare_mm / intrinsics.f_x;
  g.c_x = intrinsics.c_x;
  g.c_y = intrinsics.c_y;
  g.axis_distance_mm = axis_distance_mm;
  return g;
}

}  // namespace opttomo
