#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "bubble/morphology.hpp"

using namespace bubble;
using namespace bubble::morphology;

namespace {

Binary from_rows(std::initializer_list<const char*> rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(std::strlen(*rows.begin()));
  Binary b(w, h);
  int y = 0;
  for (const char* r : rows) {
    for (int x = 0; x < w; ++x) b(x, y) = r[x] == '#';
    ++y;
  }
  return b;
}

}  // namespace

TEST_CASE("largest component keeps the biggest 8-connected blob") {
  const auto m = from_rows({
      "##......",
      "##...#..",
      ".....##.",
      "......#.",
      "......##",
  });
  CHECK(count_components(m) == 2);
  const auto l = largest_component(m);
  CHECK(l(5, 1) == 1);
  CHECK(l(7, 4) == 1);
  CHECK(l(0, 0) == 0);
  CHECK(count_components(l) == 1);
}

TEST_CASE("largest component ties go to the first in row-major order") {
  const auto m = from_rows({"#..#", "....", "...."});
  const auto l = largest_component(m);
  CHECK(l(0, 0) == 1);
  CHECK(l(3, 0) == 0);
}

TEST_CASE("diagonal neighbours are connected") {
  const auto m = from_rows({"#...", ".#..", "..#.", "...#"});
  CHECK(count_components(m) == 1);
}

TEST_CASE("fill holes closes interior background only") {
  const auto m = from_rows({
      ".....",
      ".###.",
      ".#.#.",
      ".###.",
      "..#..",
  });
  const auto f = fill_holes(m);
  CHECK(f(2, 2) == 1);
  CHECK(f(0, 0) == 0);
  // A notch open to the border stays open.
  const auto notch = from_rows({"###", "#.#", "#.#"});
  CHECK(fill_holes(notch)(1, 2) == 0);
  CHECK(fill_holes(notch)(1, 1) == 0);
}

TEST_CASE("erosion treats the outside as background") {
  Binary full(7, 7, 1);
  const auto e = erode(full, 2);
  CHECK(e(3, 3) == 1);
  CHECK(e(2, 2) == 1);
  CHECK(e(1, 3) == 0);
  CHECK(std::count(e.values().begin(), e.values().end(), 1) == 9);
  CHECK(erode(full, 0) == full);
}

TEST_CASE("distance transform is exact Euclidean") {
  Binary m(9, 9, 0);
  m(4, 4) = 1;
  const auto d = distance_to_foreground(m);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) CHECK(d(x, y) == doctest::Approx(std::hypot(x - 4, y - 4)));
  const auto none = distance_to_foreground(Binary(3, 3, 0));
  CHECK(std::isinf(none(1, 1)));
}

TEST_CASE("distance transform matches brute force on random masks") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution on(0.03);
  Binary m(37, 23, 0);
  for (auto& v : m.values()) v = on(rng);
  m(0, 0) = 1;
  const auto d = distance_to_foreground(m);
  for (int y = 0; y < 23; ++y)
    for (int x = 0; x < 37; ++x) {
      double best = 1e300;
      for (int j = 0; j < 23; ++j)
        for (int i = 0; i < 37; ++i)
          if (m(i, j)) best = std::min(best, std::hypot(x - i, y - j));
      CHECK(d(x, y) == doctest::Approx(best).epsilon(1e-12));
    }
}
