#include "opttomo/pgm.hpp"

#include <cctype>
#include <fstream>

#include "opttomo/errors.hpp"

namespace opttomo {

namespace {

// Reads the next header token, skipping whitespace and # comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      break;
    }
  }
  while ((c = in.get()) != EOF && !std::isspace(c))
    tok.push_back(static_cast<char>(c));
  return tok;
}

std::size_t parse_dim(const std::string& tok, const std::string& path) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    fail(errc::unreadable_file, "malformed header in " + path);
  return static_cast<std::size_t>(std::stoull(tok));
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::unreadable_file, "cannot open " + path.string());

  if (next_token(in) != "P5")
    fail(errc::unreadable_file, "not a binary PGM: " + path.string());
  PgmImage img;
  img.width = parse_dim(next_token(in), path.string());
  img.height = parse_dim(next_token(in), path.string());
  std::size_t maxval = parse_dim(next_token(in), path.string());
  if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535)
    fail(errc::unreadable_file, "invalid dimensions in " + path.string());
  img.maxval = static_cast<std::uint16_t>(maxval);

  const std::size_t count = img.width * img.height;
  img.samples.resize(count);
  if (maxval < 256) {
    std::vector<unsigned char> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
      fail(errc::unreadable_file, "truncated pixel data in " + path.string());
    for (std::size_t i = 0; i < count; ++i) img.samples[i] = buf[i];
  } else {
    std::vector<unsigned char> buf(2 * count);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
      fail(errc::unreadable_file, "truncated pixel data in " + path.string());
    for (std::size_t i = 0; i < count; ++i) {
      img.samples[i] = static_cast<std::uint16_t>(
          (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1]);
    }
  }
  return img;
}

void write_pgm16(const std::filesystem::path& path, std::size_t width,
                 std::size_t height, std::uint16_t maxval,
                 const std::vector<std::uint16_t>& samples) {
  if (samples.size() != width * height)
    fail(errc::dimension_mismatch, "sample count does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::unreadable_file, "cannot write " + path.string());
  out << "P5\n" << width << " " << height << "\n" << maxval << "\n";
  std::vector<unsigned char> buf(2 * samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    buf[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) fail(errc::unreadable_file, "write failed: " + path.string());
}

void write_pgm8(const std::filesystem::path& path, std::size_t width,
                std::size_t height, const std::vector<std::uint8_t>& samples) {
  if (samples.size() != width * height)
    fail(errc::dimension_mismatch, "sample count does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::unreadable_file, "cannot write " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(samples.data()),
            static_cast<std::streamsize>(samples.size()));
  if (!out) fail(errc::unreadable_file, "write failed: " + path.string());
}

}  // namespace opttomo
