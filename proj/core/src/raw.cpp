#include "opttomo/raw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "opttomo/errors.hpp"
#include "opttomo/pgm.hpp"

namespace opttomo {

namespace {

// 2x2 color block per pattern, row-major; G sites marked true.
constexpr bool kGreen[4][2][2] = {
    {{false, true}, {true, false}},  // rggb
    {{false, true}, {true, false}},  // bggr
    {{true, false}, {false, true}},  // grbg
    {{true, false}, {false, true}},  // gbrg
};

BayerPattern shifted_pattern(BayerPattern p, std::size_t dr, std::size_t dc) {
  static constexpr char kBlock[4][2][2] = {
      {{'R', 'G'}, {'G', 'B'}},
      {{'B', 'G'}, {'G', 'R'}},
      {{'G', 'R'}, {'B', 'G'}},
      {{'G', 'B'}, {'R', 'G'}},
  };
  char shifted[2][2];
  const auto& src = kBlock[static_cast<int>(p)];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      shifted[r][c] = src[(r + dr) % 2][(c + dc) % 2];
  for (int q = 0; q < 4; ++q) {
    const auto& cand = kBlock[q];
    if (cand[0][0] == shifted[0][0] && cand[0][1] == shifted[0][1] &&
        cand[1][0] == shifted[1][0] && cand[1][1] == shifted[1][1])
      return static_cast<BayerPattern>(q);
  }
  fail(errc::numeric_failure, "unreachable pattern shift");
}

}  // namespace

BayerPattern bayer_pattern_from_string(const std::string& name) {
  if (name == "rggb") return BayerPattern::rggb;
  if (name == "bggr") return BayerPattern::bggr;
  if (name == "grbg") return BayerPattern::grbg;
  if (name == "gbrg") return BayerPattern::gbrg;
  fail(errc::config_error, "unknown bayer pattern '" + name + "'");
}

const char* bayer_pattern_name(BayerPattern p) {
  switch (p) {
    case BayerPattern::rggb: return "rggb";
    case BayerPattern::bggr: return "bggr";
    case BayerPattern::grbg: return "grbg";
    case BayerPattern::gbrg: return "gbrg";
  }
  return "unknown";
}

bool is_green_site(BayerPattern p, std::size_t row, std::size_t col) {
  return kGreen[static_cast<int>(p)][row % 2][col % 2];
}

BayerMosaic load_bayer(const std::filesystem::path& path, BayerPattern pattern,
                       int bit_depth, double angle_deg) {
  if (bit_depth < 10 || bit_depth > 16)
    fail(errc::config_error, "bit depth must be in 10..16");

  PgmImage img = read_pgm(path);
  if (img.width % 2 != 0 || img.height % 2 != 0) {
    std::ostringstream os;
    os << path.string() << ": mosaic dimensions must be even, got " << img.width
       << "x" << img.height;
    fail(errc::odd_dimensions, os.str());
  }

  const std::uint32_t limit = 1u << bit_depth;
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (img.samples[i] >= limit) {
      std::ostringstream os;
      os << path.string() << ": sample " << img.samples[i] << " at index " << i
         << " exceeds " << bit_depth << "-bit range";
      fail(errc::sample_out_of_range, os.str());
    }
  }

  BayerMosaic m;
  m.width = img.width;
  m.height = img.height;
  m.bit_depth = bit_depth;
  m.pattern = pattern;
  m.angle_deg = angle_deg;
  m.samples = std::move(img.samples);
  return m;
}

GreenImage demosaic_green(const BayerMosaic& mosaic) {
  GreenImage out;
  out.width = mosaic.width;
  out.height = mosaic.height;
  out.angle_deg = mosaic.angle_deg;
  out.samples.resize(mosaic.width * mosaic.height);

  const std::size_t w = mosaic.width;
  const std::size_t h = mosaic.height;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      if (is_green_site(mosaic.pattern, r, c)) {
        out.samples[i] = mosaic.samples[i];
        continue;
      }
      // All 4-connected neighbours of a non-green site are green.
      double sum = 0;
      int n = 0;
      if (r > 0) { sum += mosaic.samples[i - w]; ++n; }
      if (r + 1 < h) { sum += mosaic.samples[i + w]; ++n; }
      if (c > 0) { sum += mosaic.samples[i - 1]; ++n; }
      if (c + 1 < w) { sum += mosaic.samples[i + 1]; ++n; }
      out.samples[i] = sum / n;
    }
  }
  return out;
}

BayerMosaic crop_mosaic(const BayerMosaic& mosaic, const CropRegion& crop) {
  if (crop.width == 0 || crop.height == 0)
    fail(errc::config_error, "crop region must be non-empty");
  if (crop.u0 + crop.width > mosaic.width || crop.v0 + crop.height > mosaic.height)
    fail(errc::dimension_mismatch, "crop region exceeds frame bounds");
  if (crop.width % 2 != 0 || crop.height % 2 != 0)
    fail(errc::odd_dimensions, "mosaic crop dimensions must be even");

  BayerMosaic out;
  out.width = crop.width;
  out.height = crop.height;
  out.bit_depth = mosaic.bit_depth;
  out.pattern = shifted_pattern(mosaic.pattern, crop.v0 % 2, crop.u0 % 2);
  out.angle_deg = mosaic.angle_deg;
  out.samples.resize(crop.width * crop.height);
  for (std::size_t r = 0; r < crop.height; ++r) {
    const auto* src = &mosaic.samples[(crop.v0 + r) * mosaic.width + crop.u0];
    std::copy(src, src + crop.width, &out.samples[r * crop.width]);
  }
  return out;
}

GreenImage crop_green(const GreenImage& frame, const CropRegion& crop) {
  if (crop.width == 0 || crop.height == 0)
    fail(errc::config_error, "crop region must be non-empty");
  if (crop.u0 + crop.width > frame.width || crop.v0 + crop.height > frame.height)
    fail(errc::dimension_mismatch, "crop region exceeds frame bounds");

  GreenImage out;
  out.width = crop.width;
  out.height = crop.height;
  out.angle_deg = frame.angle_deg;
  out.samples.resize(crop.width * crop.height);
  for (std::size_t r = 0; r < crop.height; ++r) {
    const auto* src = &frame.samples[(crop.v0 + r) * frame.width + crop.u0];
    std::copy(src, src + crop.width, &out.samples[r * crop.width]);
  }
  return out;
}

ProjectionStack assemble_stack(std::vector<GreenImage> frames,
                               const CropRegion& crop, int bit_depth) {
  if (frames.size() < 2)
    fail(errc::data_error, "a projection stack needs at least 2 frames");
  if (bit_depth < 10 || bit_depth > 16)
    fail(errc::config_error, "bit depth must be in 10..16");

  const std::size_t w = frames.front().width;
  const std::size_t h = frames.front().height;
  for (const auto& f : frames) {
    if (f.width != w || f.height != h)
      fail(errc::dimension_mismatch, "frames disagree in dimensions");
  }
  if (crop.width == 0 || crop.height == 0)
    fail(errc::config_error, "crop region must be non-empty");
  if (crop.u0 + crop.width > w || crop.v0 + crop.height > h)
    fail(errc::dimension_mismatch, "crop region exceeds frame bounds");

  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frames[a].angle_deg < frames[b].angle_deg;
  });

  ProjectionStack stack;
  stack.rows = crop.height;
  stack.cols = crop.width;
  stack.n_angles = frames.size();
  stack.crop = crop;
  stack.bit_depth = bit_depth;
  stack.full_scale = std::exp2(bit_depth);
  stack.angles_deg.resize(frames.size());
  stack.data.resize(frames.size() * crop.height * crop.width);

  for (std::size_t k = 0; k < order.size(); ++k)
    stack.angles_deg[k] = frames[order[k]].angle_deg;

  for (std::size_t k = 0; k + 1 < stack.angles_deg.size(); ++k) {
    if (std::abs(stack.angles_deg[k + 1] - stack.angles_deg[k]) < 1e-9) {
      std::ostringstream os;
      os << "duplicate rotation angle " << stack.angles_deg[k] << " deg";
      fail(errc::duplicate_angle, os.str());
    }
  }
  if (stack.angles_deg.size() >= 3) {
    const double step = (stack.angles_deg.back() - stack.angles_deg.front()) /
                        static_cast<double>(stack.angles_deg.size() - 1);
    for (std::size_t k = 0; k + 1 < stack.angles_deg.size(); ++k) {
      const double d = stack.angles_deg[k + 1] - stack.angles_deg[k];
      if (std::abs(d - step) > 1e-6) {
        std::ostringstream os;
        os << "angle spacing varies: step " << d << " deg at index " << k
           << " vs mean " << step << " deg";
        fail(errc::nonuniform_spacing, os.str());
      }
    }
  }

  for (std::size_t k = 0; k < order.size(); ++k) {
    const GreenImage& f = frames[order[k]];
    for (std::size_t r = 0; r < crop.height; ++r) {
      const auto* src = &f.samples[(crop.v0 + r) * w + crop.u0];
      std::copy(src, src + crop.width, &stack.data[(k * crop.height + r) * crop.width]);
    }
  }
  return stack;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::unreadable_file, "cannot open manifest: " + path.string());

  auto strip = [](std::string s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    auto e = s.find_last_not_of(ws);
    if (b == std::string::npos) return std::string{};
    return s.substr(b, e - b + 1);
  };

  std::string line;
  if (!std::getline(in, line))
    fail(errc::data_error, "empty manifest: " + path.string());
  {
    std::string header = strip(line);
    auto comma = header.find(',');
    if (comma == std::string::npos || strip(header.substr(0, comma)) != "filename" ||
        strip(header.substr(comma + 1)) != "angle_deg")
      fail(errc::data_error,
           "manifest must start with 'filename,angle_deg': " + path.string());
  }

  std::vector<ManifestEntry> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty()) continue;
    auto comma = s.find(',');
    if (comma == std::string::npos) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": expected 'filename,angle_deg'";
      fail(errc::data_error, os.str());
    }
    ManifestEntry e;
    e.filename = strip(s.substr(0, comma));
    std::string angle_text = strip(s.substr(comma + 1));
    try {
      std::size_t used = 0;
      e.angle_deg = std::stod(angle_text, &used);
      if (used != angle_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": malformed angle '" << angle_text
         << "'";
      fail(errc::data_error, os.str());
    }
    if (e.filename.empty()) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": empty filename";
      fail(errc::data_error, os.str());
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty())
    fail(errc::data_error, "manifest lists no frames: " + path.string());
  return entries;
}

}  // namespace opttomo
