#include "opttomo/sinogram.hpp"

#include <cmath>
#include <numbers>

#include "opttomo/errors.hpp"

namespace opttomo {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void require_full_scan(const std::vector<double>& angles_deg) {
  if (angles_deg.size() < 2)
    fail(errc::data_error, "rebinning needs at least 2 views");
  const double step = angles_deg[1] - angles_deg[0];
  if (!(step > 0)) fail(errc::data_error, "view angles must increase");
  const double span = step * static_cast<double>(angles_deg.size());
  if (std::abs(span - 360.0) > 1e-3)
    fail(errc::data_error,
         "view angles must cover a full turn; got span of " +
             std::to_string(span) + " deg");
}

}  // namespace

FanSinogram extract_row_sinogram(const AttenuationStack& stack,
                                 std::size_t row) {
  if (row >= stack.rows)
    fail(errc::row_out_of_range,
         "row " + std::to_string(row) + " outside 0.." +
             std::to_string(stack.rows == 0 ? 0 : stack.rows - 1));
  if (!stack.geometry.has_value())
    fail(errc::geometry_missing,
         "attenuation stack carries no effective geometry");

  const EffectiveGeometry& g = *stack.geometry;
  FanSinogram fan;
  fan.n_cols = stack.cols;
  fan.n_views = stack.n_angles;
  fan.angles_deg = stack.angles_deg;
  fan.u0 = static_cast<double>(stack.crop.u0);
  fan.row = row;
  fan.geometry = g;
  fan.z_mm = (static_cast<double>(stack.crop.v0 + row) - g.c_y) *
             g.axis_distance_mm / g.f_eff_px;
  fan.values.resize(stack.n_angles * stack.cols);
  for (std::size_t a = 0; a < stack.n_angles; ++a)
    for (std::size_t c = 0; c < stack.cols; ++c)
      fan.values[a * stack.cols + c] = stack.at(a, row, c);
  return fan;
}

ParallelSinogram fan_to_parallel_rebin(const FanSinogram& fan) {
  if (fan.n_cols < 2) fail(errc::data_error, "fan sinogram needs >= 2 columns");
  if (!(fan.geometry.f_eff_px > 0) || !(fan.geometry.axis_distance_mm > 0))
    fail(errc::geometry_missing, "fan sinogram carries no valid geometry");
  require_full_scan(fan.angles_deg);

  const double f = fan.geometry.f_eff_px;
  const double d = fan.geometry.axis_distance_mm;
  const double cx = fan.geometry.c_x;

  const double gamma_first = std::atan((fan.u0 - cx) / f);
  const double gamma_last =
      std::atan((fan.u0 + static_cast<double>(fan.n_cols - 1) - cx) / f);
  const double gamma_max = std::max(std::abs(gamma_first), std::abs(gamma_last));

  ParallelSinogram par;
  par.n_s = fan.n_cols;
  par.n_views = fan.n_views;
  par.s_max_mm = d * std::sin(gamma_max);
  par.phi_deg = fan.angles_deg;
  par.row = fan.row;
  par.z_mm = fan.z_mm;
  par.geometry = fan.geometry;
  par.values.assign(par.n_views * par.n_s, 0.0);

  const double theta0 = fan.angles_deg.front();
  const double dtheta = fan.angles_deg[1] - fan.angles_deg[0];
  const double n_views_f = static_cast<double>(fan.n_views);
  const double max_col = static_cast<double>(fan.n_cols - 1);

  for (std::size_t k = 0; k < par.n_views; ++k) {
    const double phi = par.phi_deg[k];
    for (std::size_t i = 0; i < par.n_s; ++i) {
      const double s = par.s(i);
      const double gamma = std::asin(s / d);
      const double u = cx + f * std::tan(gamma);
      const double col_pos = u - fan.u0;
      if (col_pos < 0.0 || col_pos > max_col) continue;  // outside the aperture

      const double theta_src = phi - gamma * kRadToDeg;
      double view_pos = std::fmod((theta_src - theta0) / dtheta, n_views_f);
      if (view_pos < 0) view_pos += n_views_f;
      if (view_pos >= n_views_f) view_pos -= n_views_f;  // rounding at the seam

      const std::size_t v0 = static_cast<std::size_t>(view_pos);
      const std::size_t v1 = (v0 + 1) % fan.n_views;  // full turn wraps
      const double wv = view_pos - static_cast<double>(v0);

      std::size_t c0 = static_cast<std::size_t>(col_pos);
      if (c0 >= fan.n_cols - 1) c0 = fan.n_cols - 2;
      const std::size_t c1 = c0 + 1;
      const double wc = col_pos - static_cast<double>(c0);

      const double top =
          (1.0 - wc) * fan.at(v0, c0) + wc * fan.at(v0, c1);
      const double bot =
          (1.0 - wc) * fan.at(v1, c0) + wc * fan.at(v1, c1);
      par.values[k * par.n_s + i] = (1.0 - wv) * top + wv * bot;
    }
  }
  return par;
}

}  // namespace opttomo
