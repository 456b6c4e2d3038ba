#include <png.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fima/image.hpp"
#include "fima/prox.hpp"
#include "test_util.hpp"

using namespace fima;
using namespace fima::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fima_test_image_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_CASE("PGM round trip is within 16-bit quantisation") {
  TempDir dir;
  ImageField img(7, 9, random_vec(1, 63, 0.0, 1.0));
  write_pgm(img, dir.path / "a.pgm");
  const ImageField back = read_image(dir.path / "a.pgm");
  CHECK(back.height == 7);
  CHECK(back.width == 9);
  CHECK(max_abs_diff(back.pixels, img.pixels) <= 0.5 / 65535.0 + 1e-15);
  CHECK(!fs::exists(dir.path / "a.pgm.tmp"));

  // out-of-range and non-finite values are clamped
  ImageField odd(1, 3, Vec{-1.0, 2.0, NAN});
  write_pgm(odd, dir.path / "b.pgm");
  CHECK(read_pgm(dir.path / "b.pgm").pixels == Vec{0.0, 1.0, 0.0});
}

TEST_CASE("8-bit binary and ASCII PGM inputs") {
  TempDir dir;
  write_text(dir.path / "p5.pgm", std::string("P5\n# comment\n2 1\n255\n") + char(0) + char(255));
  CHECK(read_pgm(dir.path / "p5.pgm").pixels == Vec{0.0, 1.0});
  write_text(dir.path / "p2.pgm", "P2\n2 2\n4\n0 1\n2 4\n");
  CHECK(read_pgm(dir.path / "p2.pgm").pixels == Vec{0.0, 0.25, 0.5, 1.0});
}

TEST_CASE("malformed images are input errors") {
  TempDir dir;
  CHECK_THROWS_AS(read_image(dir.path / "missing.pgm"), InputError);
  write_text(dir.path / "bad.pgm", "P6\n1 1\n255\nx");
  CHECK_THROWS_AS(read_pgm(dir.path / "bad.pgm"), InputError);
  write_text(dir.path / "short.pgm", "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm(dir.path / "short.pgm"), InputError);
  write_text(dir.path / "bad.png", "not a png");
  CHECK_THROWS_AS(read_image(dir.path / "bad.png"), InputError);
}

TEST_CASE("PNG input converts to luma") {
  TempDir dir;
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 3;
  image.height = 2;
  image.format = PNG_FORMAT_GRAY;
  const png_byte px[6] = {0, 51, 102, 153, 204, 255};
  const fs::path p = dir.path / "g.png";
  REQUIRE(png_image_write_to_file(&image, p.c_str(), 0, px, 0, nullptr));
  const ImageField img = read_image(p);
  CHECK(img.height == 2);
  CHECK(img.width == 3);
  CHECK(max_abs_diff(img.pixels, Vec{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) <= 1e-12);
}

TEST_CASE("kernel files round trip exactly") {
  TempDir dir;
  const KernelField k = KernelField::gaussian(5, 1.1);
  write_kernel(k, dir.path / "k.txt");
  const KernelField back = read_kernel(dir.path / "k.txt");
  CHECK(back.height == 5);
  CHECK(back.width == 5);
  CHECK(bitwise_equal(back.taps, k.taps));

  write_text(dir.path / "even.txt", "2 2\n1 0\n0 0\n");
  CHECK_THROWS_AS(read_kernel(dir.path / "even.txt"), InputError);
  write_text(dir.path / "trunc.txt", "3 3\n1 0 0\n");
  CHECK_THROWS_AS(read_kernel(dir.path / "trunc.txt"), InputError);
  CHECK_THROWS_AS(read_kernel(dir.path / "nope.txt"), InputError);
}

TEST_CASE("kernel factories live on the simplex") {
  CHECK(on_simplex(KernelField::delta(5, 5)));
  CHECK(KernelField::delta(5, 5).at(2, 2) == 1.0);
  CHECK(on_simplex(KernelField::uniform(3, 5), 1e-12));
  CHECK(on_simplex(KernelField::gaussian(9, 1.8), 1e-12));
  for (double angle : {0.0, 0.7, 1.9, 3.0})
    CHECK(on_simplex(KernelField::motion_line(11, 7.5, angle), 1e-12));
  CHECK(!on_simplex(KernelField(1, 3, Vec{0.5, 0.6, -0.1})));
  CHECK_THROWS_AS(KernelField(2, 2, Vec(4, 0.25)), InvalidArgument);
}

TEST_CASE("bicubic resize keeps constants and identity size") {
  const ImageField c(20, 16, 0.3);
  const ImageField r = resize_bicubic(c, 15, 12);
  CHECK(r.height == 15);
  CHECK(r.width == 12);
  for (double p : r.pixels) CHECK(p == doctest::Approx(0.3).epsilon(1e-12));
  const ImageField x(8, 8, random_vec(2, 64));
  CHECK(resize_bicubic(x, 8, 8).pixels == x.pixels);
}

TEST_CASE("bilinear kernel resize stays nonnegative with unit sum") {
  const KernelField k = KernelField::motion_line(11, 8.0, 0.6);
  for (std::size_t s : {3u, 5u, 7u, 11u, 15u}) {
    const KernelField r = resize_kernel_bilinear(k, s, s);
    double sum = 0.0;
    for (double t : r.taps) {
      CHECK(t >= 0.0);
      sum += t;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(on_simplex(KernelField(s, s, project_simplex(r.taps)), 1e-12));
  }
  CHECK_THROWS_AS(resize_kernel_bilinear(k, 4, 4), InvalidArgument);
}
