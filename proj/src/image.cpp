#include "fima/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fima {
namespace fs = std::filesystem;

ImageField::ImageField(std::size_t h, std::size_t w, double fill)
    : height(h), width(w), pixels(h * w, fill) {
  if (h == 0 || w == 0) throw InvalidArgument("image dimensions must be positive");
}

ImageField::ImageField(std::size_t h, std::size_t w, Vec data)
    : height(h), width(w), pixels(std::move(data)) {
  if (h == 0 || w == 0) throw InvalidArgument("image dimensions must be positive");
  if (pixels.size() != h * w) throw InvalidArgument("image data size mismatch");
}

KernelField::KernelField(std::size_t h, std::size_t w, Vec data)
    : height(h), width(w), taps(std::move(data)) {
  if (h == 0 || w == 0 || h % 2 == 0 || w % 2 == 0)
    throw InvalidArgument("kernel dimensions must be odd and positive");
  if (taps.size() != h * w) throw InvalidArgument("kernel data size mismatch");
}

KernelField KernelField::delta(std::size_t h, std::size_t w) {
  Vec t(h * w, 0.0);
  KernelField k(h, w, std::move(t));
  k.taps[(h / 2) * w + w / 2] = 1.0;
  return k;
}

KernelField KernelField::uniform(std::size_t h, std::size_t w) {
  return KernelField(h, w, Vec(h * w, 1.0 / static_cast<double>(h * w)));
}

KernelField KernelField::gaussian(std::size_t size, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian kernel: sigma must be positive");
  Vec t(size * size);
  const double c = static_cast<double>(size / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      t[i * size + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      sum += t[i * size + j];
    }
  for (double& v : t) v /= sum;
  return KernelField(size, size, std::move(t));
}

KernelField KernelField::motion_line(std::size_t size, double length, double angle) {
  Vec t(size * size, 0.0);
  const double c = static_cast<double>(size / 2);
  const int samples = std::max(2, static_cast<int>(std::ceil(length * 16)));
  for (int s = 0; s < samples; ++s) {
    const double r = (static_cast<double>(s) / (samples - 1) - 0.5) * length;
    const double y = c + r * std::sin(angle), x = c + r * std::cos(angle);
    const double y0 = std::floor(y), x0 = std::floor(x);
    const double fy = y - y0, fx = x - x0;
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const auto yi = static_cast<long>(y0) + dy, xi = static_cast<long>(x0) + dx;
        if (yi < 0 || xi < 0 || yi >= static_cast<long>(size) || xi >= static_cast<long>(size))
          continue;
        t[static_cast<std::size_t>(yi) * size + static_cast<std::size_t>(xi)] +=
            (dy ? fy : 1.0 - fy) * (dx ? fx : 1.0 - fx);
      }
  }
  double sum = 0.0;
  for (double v : t) sum += v;
  for (double& v : t) v /= sum;
  return KernelField(size, size, std::move(t));
}

bool on_simplex(const KernelField& k, double tol) {
  double s = 0.0;
  for (double v : k.taps) {
    if (!(v >= 0.0)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

// ---- PGM ---------------------------------------------------------------------

namespace {

std::string read_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

std::size_t parse_size(const std::string& tok, const fs::path& path) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw InputError(path.string() + ": malformed header field '" + tok + "'");
  }
}

}  // namespace

ImageField read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open");
  const std::string magic = read_token(in);
  if (magic != "P5" && magic != "P2") throw InputError(path.string() + ": not a PGM file");
  const std::size_t w = parse_size(read_token(in), path);
  const std::size_t h = parse_size(read_token(in), path);
  const std::size_t maxval = parse_size(read_token(in), path);
  if (maxval > 65535) throw InputError(path.string() + ": maxval out of range");
  ImageField img(h, w);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (double& p : img.pixels) {
      const std::string tok = read_token(in);
      if (tok.empty()) throw InputError(path.string() + ": truncated data");
      p = std::stod(tok) * scale;
    }
    return img;
  }
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(h * w * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size())
    throw InputError(path.string() + ": truncated data");
  for (std::size_t i = 0; i < h * w; ++i) {
    const unsigned v = bytes == 2 ? (unsigned(buf[2 * i]) << 8) | buf[2 * i + 1] : buf[i];
    img.pixels[i] = v * scale;
  }
  return img;
}

void write_pgm(const ImageField& img, const fs::path& path) {
  std::string data = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                     "\n65535\n";
  data.reserve(data.size() + 2 * img.size());
  for (double p : img.pixels) {
    const double c = std::isfinite(p) ? std::clamp(p, 0.0, 1.0) : 0.0;
    const auto v = static_cast<unsigned>(std::lround(c * 65535.0));
    data.push_back(static_cast<char>((v >> 8) & 0xff));
    data.push_back(static_cast<char>(v & 0xff));
  }
  write_file_atomically(path, data);
}

ImageField read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw InputError(path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InputError(path.string() + ": " + image.message);
  }
  ImageField img(image.height, image.width);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = buf[i] / 255.0;
  return img;
}

ImageField read_image(const fs::path& path) {
  if (!fs::exists(path)) throw InputError(path.string() + ": no such file");
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" ? read_png(path) : read_pgm(path);
}

// ---- kernel text files -----------------------------------------------------------

KernelField read_kernel(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open kernel file");
  long kh = 0, kw = 0;
  if (!(in >> kh >> kw) || kh <= 0 || kw <= 0)
    throw InputError(path.string() + ": bad kernel header");
  if (kh % 2 == 0 || kw % 2 == 0) throw InputError(path.string() + ": kernel size must be odd");
  Vec taps(static_cast<std::size_t>(kh * kw));
  for (double& t : taps)
    if (!(in >> t)) throw InputError(path.string() + ": truncated kernel data");
  return KernelField(static_cast<std::size_t>(kh), static_cast<std::size_t>(kw), std::move(taps));
}

void write_kernel(const KernelField& k, const fs::path& path) {
  std::ostringstream out;
  out << k.height << ' ' << k.width << '\n';
  char buf[64];
  for (std::size_t i = 0; i < k.height; ++i) {
    for (std::size_t j = 0; j < k.width; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", k.at(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
  write_file_atomically(path, out.str());
}

void write_file_atomically(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(tmp.string() + ": cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

// ---- resampling --------------------------------------------------------------

namespace {

double keys_weight(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

}  // namespace

ImageField resize_bicubic(const ImageField& img, std::size_t height, std::size_t width) {
  if (height == img.height && width == img.width) return img;
  ImageField out(height, width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  const auto clamp_idx = [](long v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(n) - 1));
  };
  for (std::size_t i = 0; i < height; ++i) {
    const double y = (static_cast<double>(i) + 0.5) * sy - 0.5;
    const long y0 = static_cast<long>(std::floor(y));
    for (std::size_t j = 0; j < width; ++j) {
      const double x = (static_cast<double>(j) + 0.5) * sx - 0.5;
      const long x0 = static_cast<long>(std::floor(x));
      double acc = 0.0, wsum = 0.0;
      for (long dy = -1; dy <= 2; ++dy) {
        const double wy = keys_weight(y - static_cast<double>(y0 + dy));
        for (long dx = -1; dx <= 2; ++dx) {
          const double w = wy * keys_weight(x - static_cast<double>(x0 + dx));
          acc += w * img.at(clamp_idx(y0 + dy, img.height), clamp_idx(x0 + dx, img.width));
          wsum += w;
        }
      }
      out.at(i, j) = acc / wsum;
    }
  }
  return out;
}

KernelField resize_kernel_bilinear(const KernelField& k, std::size_t height, std::size_t width) {
  if (height % 2 == 0 || width % 2 == 0) throw InvalidArgument("kernel size must be odd");
  Vec taps(height * width, 0.0);
  const double sy = static_cast<double>(k.height) / static_cast<double>(height);
  const double sx = static_cast<double>(k.width) / static_cast<double>(width);
  const double cy_in = static_cast<double>(k.height / 2), cx_in = static_cast<double>(k.width / 2);
  const double cy = static_cast<double>(height / 2), cx = static_cast<double>(width / 2);
  const auto tap = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= static_cast<long>(k.height) || j >= static_cast<long>(k.width))
      return 0.0;
    return k.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < height; ++i) {
    const double y = (static_cast<double>(i) - cy) * sy + cy_in;
    const double y0 = std::floor(y), fy = y - y0;
    for (std::size_t j = 0; j < width; ++j) {
      const double x = (static_cast<double>(j) - cx) * sx + cx_in;
      const double x0 = std::floor(x), fx = x - x0;
      const long iy = static_cast<long>(y0), ix = static_cast<long>(x0);
      double v = (1 - fy) * (1 - fx) * tap(iy, ix) + (1 - fy) * fx * tap(iy, ix + 1) +
                 fy * (1 - fx) * tap(iy + 1, ix) + fy * fx * tap(iy + 1, ix + 1);
      v = std::max(v, 0.0);
      taps[i * width + j] = v;
      sum += v;
    }
  }
  if (sum <= 0.0) return KernelField::delta(height, width);
  for (double& v : taps) v /= sum;
  return KernelField(height, width, std::move(taps));
}

}  // namespace fima
