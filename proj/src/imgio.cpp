#include "tumorseg/imgio.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace tumorseg::imgio {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto ch = static_cast<unsigned char>(bytes_[pos_]);
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  long read_int(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) {
        throw PgmError(PgmErrorKind::MalformedHeader,
                       std::string("PGM header field too large: ") + field);
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw PgmError(PgmErrorKind::MalformedHeader,
                     std::string("malformed PGM header: missing ") + field);
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_space() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw PgmError(PgmErrorKind::MalformedHeader,
                     "malformed PGM header: no whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void write_bytes(const std::string& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw PgmError(PgmErrorKind::Unwritable,
                   "cannot open for writing: " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw PgmError(PgmErrorKind::Unwritable,
                   "write failed: " + path.string());
  }
}

std::string header(int width, int height) {
  return "P5\n" + std::to_string(width) + " " + std::to_string(height) +
         "\n255\n";
}

}  // namespace

GrayImage decode_gray_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw PgmError(PgmErrorKind::MalformedHeader,
                   "malformed PGM header: bad magic");
  }
  if (bytes[1] != '5') {
    throw PgmError(PgmErrorKind::UnsupportedVariant,
                   std::string("unsupported PGM variant: P") + bytes[1]);
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const long width = reader.read_int("width");
  const long height = reader.read_int("height");
  const long maxval = reader.read_int("maxval");
  if (width <= 0 || height <= 0) {
    throw PgmError(PgmErrorKind::MalformedHeader,
                   "malformed PGM header: non-positive dimensions");
  }
  if (maxval != 255) {
    throw PgmError(PgmErrorKind::UnsupportedMaxval,
                   "unsupported PGM maxval " + std::to_string(maxval) +
                       " (only 255)");
  }
  reader.expect_single_space();

  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - reader.pos() < count) {
    throw PgmError(PgmErrorKind::Truncated,
                   "truncated PGM pixel data: expected " +
                       std::to_string(count) + " bytes, found " +
                       std::to_string(bytes.size() - reader.pos()));
  }
  std::vector<double> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = static_cast<unsigned char>(bytes[reader.pos() + i]);
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(pixels));
}

GrayImage load_gray_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw PgmError(PgmErrorKind::MissingFile,
                   "cannot open PGM file: " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return decode_gray_pgm(bytes);
}

std::string encode_gray_pgm(const GrayImage& image) {
  std::string out = header(image.width(), image.height());
  out.reserve(out.size() + image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = image[i];
    if (!(v >= 0.0 && v <= 255.0)) {
      std::ostringstream msg;
      msg << "intensity out of range [0,255] at pixel index " << i << ": " << v;
      throw PgmError(PgmErrorKind::OutOfRange, msg.str());
    }
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::round(v))));
  }
  return out;
}

void write_gray_pgm(const GrayImage& image, const std::filesystem::path& path) {
  write_bytes(encode_gray_pgm(image), path);
}

std::string encode_mask_pgm(const BinaryMask& mask) {
  std::string out = header(mask.width(), mask.height());
  out.reserve(out.size() + mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out.push_back(mask[i] ? static_cast<char>(0xFF) : '\0');
  }
  return out;
}

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path) {
  write_bytes(encode_mask_pgm(mask), path);
}

BinaryMask threshold_mask(const GrayImage& image, double level) {
  BinaryMask mask(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    mask.set(i, image[i] >= level);
  }
  return mask;
}

BinaryMask load_mask_pgm(const std::filesystem::path& path) {
  return threshold_mask(load_gray_pgm(path));
}

BinaryMask mask_boundary(const BinaryMask& mask) {
  BinaryMask edge(mask.width(), mask.height());
  constexpr int kDr[4] = {-1, 1, 0, 0};
  constexpr int kDc[4] = {0, 0, -1, 1};
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      for (int d = 0; d < 4; ++d) {
        const int rr = r + kDr[d];
        const int cc = c + kDc[d];
        if (!mask.contains(rr, cc) || !mask.at(rr, cc)) {
          edge.set(r, c, true);
          break;
        }
      }
    }
  }
  return edge;
}

GrayImage render_overlay(const GrayImage& image, const BinaryMask& mask,
                         const std::optional<BoundingBox>& box) {
  require_same_shape(image, mask, "render_overlay");
  GrayImage out = image;
  const BinaryMask edge = mask_boundary(mask);
  for (std::size_t i = 0; i < edge.size(); ++i) {
    if (edge[i]) out[i] = 255.0;
  }
  if (box) {
    if (!box->valid_in(image.width(), image.height())) {
      throw Error("render_overlay: box outside raster bounds");
    }
    for (int c = box->col_min; c <= box->col_max; ++c) {
      out.at(box->row_min, c) = 255.0;
      out.at(box->row_max, c) = 255.0;
    }
    for (int r = box->row_min; r <= box->row_max; ++r) {
      out.at(r, box->col_min) = 255.0;
      out.at(r, box->col_max) = 255.0;
    }
  }
  return out;
}

}  // namespace tumorseg::imgio
