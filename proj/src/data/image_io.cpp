#include "sapgan/data/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sapgan/errors.hpp"

namespace sapgan::data {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open image: " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

class PnmReader {
 public:
  PnmReader(const std::vector<std::uint8_t>& bytes, const std::string& origin) : b_(bytes), origin_(origin) {}

  RawImage read() {
    if (b_.size() < 2 || b_[0] != 'P') fail("not a PNM file");
    const char kind = static_cast<char>(b_[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') fail("unsupported PNM variant");
    pos_ = 2;
    const std::size_t w = number(), h = number(), maxval = number();
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) fail("bad PNM header");
    const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;
    RawImage img(w, h, channels);
    const std::size_t count = w * h * channels;
    if (kind == '5' || kind == '6') {
      ++pos_;  // single whitespace after maxval
      const std::size_t bytes_per = maxval > 255 ? 2 : 1;
      if (b_.size() < pos_ + count * bytes_per) fail("truncated pixel data");
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t v = bytes_per == 2 ? (b_[pos_ + 2 * i] << 8 | b_[pos_ + 2 * i + 1]) : b_[pos_ + i];
        img.pixels[i] = scale(v, maxval);
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) img.pixels[i] = scale(number(), maxval);
    }
    return img;
  }

 private:
  static std::uint8_t scale(std::size_t v, std::size_t maxval) {
    if (v > maxval) v = maxval;
    return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  }

  std::size_t number() {
    for (;;) {
      if (pos_ >= b_.size()) fail("truncated header");
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
    if (!std::isdigit(b_[pos_])) fail("expected a number");
    std::size_t v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > (1u << 30)) fail("number out of range");
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const { throw IoError(why + ": " + origin_); }

  const std::vector<std::uint8_t>& b_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

void save_pnm(const RawImage& img, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write image: " + path.string());
  os << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw IoError("failed writing image: " + path.string());
}

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

}  // namespace

RawImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw IoError(std::string("cannot decode PNG (") + image.message + "): " + origin);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  RawImage img(image.width, image.height, color ? 3 : 1);
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG (" + msg + "): " + origin);
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const RawImage& img) {
  if (!img.valid()) throw ShapeError("encode_png: invalid image buffer");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.pixels.data(), 0, nullptr))
    throw IoError(std::string("PNG encode failed: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
    throw IoError(std::string("PNG encode failed: ") + image.message);
  out.resize(size);
  return out;
}

RawImage load_image(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(bytes, path.string());
  if (bytes.size() >= 2 && bytes[0] == 'P') return PnmReader(bytes, path.string()).read();
  throw IoError("unrecognized image format: " + path.string());
}

void save_image(const RawImage& img, const std::filesystem::path& path) {
  if (!img.valid()) throw ShapeError("save_image: invalid image buffer for " + path.string());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto ext = lower_ext(path);
  if (ext == ".ppm" || ext == ".pgm") {
    if ((ext == ".ppm") != (img.channels == 3))
      throw IoError("extension " + ext + " does not match channel count: " + path.string());
    save_pnm(img, path);
    return;
  }
  auto bytes = encode_png(img);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write image: " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing image: " + path.string());
}

bool is_image_file(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

}  // namespace sapgan::data
