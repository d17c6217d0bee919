#include "bubble/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace bubble::morphology {

namespace {

constexpr int kDx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kDy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

// Labels 8-connected components; returns the label grid (0 = background) and sizes
// indexed by label.
std::vector<std::size_t> label(const Binary& mask, Grid<int>& labels) {
  const int w = mask.width(), h = mask.height();
  labels = Grid<int>(w, h, 0);
  std::vector<std::size_t> sizes{0};
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y) || labels(x, y)) continue;
      const int id = static_cast<int>(sizes.size());
      std::size_t n = 0;
      stack.assign(1, {x, y});
      labels(x, y) = id;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++n;
        for (int k = 0; k < 8; ++k) {
          const int nx = cx + kDx8[k], ny = cy + kDy8[k];
          if (mask.contains(nx, ny) && mask(nx, ny) && !labels(nx, ny)) {
            labels(nx, ny) = id;
            stack.push_back({nx, ny});
          }
        }
      }
      sizes.push_back(n);
    }
  }
  return sizes;
}

// 1-D squared distance transform of a sampled function (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      k = 0;
      continue;
    }
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

Binary largest_component(const Binary& mask) {
  Grid<int> labels;
  const auto sizes = label(mask, labels);
  Binary out(mask.width(), mask.height(), 0);
  if (sizes.size() <= 1) return out;
  const auto best = static_cast<int>(std::max_element(sizes.begin() + 1, sizes.end()) - sizes.begin());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = labels[i] == best ? 1 : 0;
  return out;
}

Binary fill_holes(const Binary& mask) {
  const int w = mask.width(), h = mask.height();
  Binary outside(w, h, 0);
  std::deque<std::pair<int, int>> queue;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      queue.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int dx4[4] = {1, -1, 0, 0};
  constexpr int dy4[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx4[k], ny = y + dy4[k];
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }
  Binary out(w, h, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = outside[i] ? 0 : 1;
  return out;
}

Binary erode(const Binary& mask, int radius) {
  if (radius <= 0) return mask;
  const int w = mask.width(), h = mask.height();
  Binary rows(w, h, 0), out(w, h, 0);
  // Run-length of consecutive foreground pixels makes each pass O(n).
  for (int y = 0; y < h; ++y) {
    std::vector<int> run(w);
    for (int x = 0; x < w; ++x) run[x] = mask(x, y) ? (x > 0 ? run[x - 1] : 0) + 1 : 0;
    for (int x = radius; x + radius < w; ++x) rows(x, y) = run[x + radius] >= 2 * radius + 1 ? 1 : 0;
  }
  for (int x = 0; x < w; ++x) {
    std::vector<int> run(h);
    for (int y = 0; y < h; ++y) run[y] = rows(x, y) ? (y > 0 ? run[y - 1] : 0) + 1 : 0;
    for (int y = radius; y + radius < h; ++y) out(x, y) = run[y + radius] >= 2 * radius + 1 ? 1 : 0;
  }
  return out;
}

int count_components(const Binary& mask) {
  Grid<int> labels;
  return static_cast<int>(label(mask, labels).size()) - 1;
}

Grid<double> distance_to_foreground(const Binary& mask) {
  const int w = mask.width(), h = mask.height();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Grid<double> sq(w, h, inf);
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  for (int x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (int y = 0; y < h; ++y) f[y] = mask(x, y) ? 0.0 : inf;
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) sq(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (int x = 0; x < w; ++x) f[x] = sq(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) sq(x, y) = std::sqrt(d[x]);
  }
  return sq;
}

}  // namespace bubble::morphology
