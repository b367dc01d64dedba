#pragma once
// Independent reference implementations used only by the tests. None of
// these call into the library code they are compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tumorseg/image.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

// Exhaustive Otsu over all 256 thresholds, exact rational arithmetic.
// Split is {round(v) <= t} / {round(v) > t}; an empty class scores 0; the
// lowest maximiser wins.
inline int otsu(const tumorseg::GrayImage& image) {
  std::vector<long long> hist(256, 0);
  for (const double v : image.pixels()) ++hist[static_cast<std::size_t>(std::lround(v))];
  long long total = 0;
  long long sum = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    sum += static_cast<long long>(i) * hist[i];
  }
  int best_t = -1;
  Rational best = -1;
  long long n0 = 0;
  long long s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[t];
    s0 += static_cast<long long>(t) * hist[t];
    const long long n1 = total - n0;
    Rational var = 0;
    if (n0 > 0 && n1 > 0) {
      const Rational w0(n0, total);
      const Rational w1(n1, total);
      const Rational mu0(s0, n0);
      const Rational mu1(sum - s0, n1);
      var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    }
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

inline double project_shift(const std::vector<double>& v, double box, double tau) {
  double s = 0.0;
  for (const double x : v) s += std::clamp(x - tau, 0.0, box);
  return s;
}

inline std::vector<double> project_simplex_box(const std::vector<double>& v, double box) {
  // sum_i clamp(v_i - tau, 0, C) is non-increasing in tau; bisect for 1.
  double lo = *std::min_element(v.begin(), v.end()) - box - 1.0;
  double hi = *std::max_element(v.begin(), v.end()) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (project_shift(v, box, mid) > 1.0) lo = mid;
    else hi = mid;
  }
  const double tau = 0.5 * (lo + hi);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - tau, 0.0, box);
  return out;
}

inline double quadratic(const std::vector<std::vector<double>>& q, const std::vector<double>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) s += a[i] * q[i][j] * a[j];
  }
  return 0.5 * s;
}

// min 1/2 a'Qa over {sum a = 1, 0 <= a <= C} by accelerated projected
// gradient with restarts. Returns the minimiser.
inline std::vector<double> solve_qp(const std::vector<std::vector<double>>& q, double box,
                                    long max_iterations = 1'000'000) {
  const std::size_t n = q.size();
  // Q has unit diagonal and is PSD, so its largest eigenvalue is <= n.
  const double step = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> y = x;
  std::vector<double> trial(n);
  double t = 1.0;
  double f = quadratic(q, x);
  for (long it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (std::size_t j = 0; j < n; ++j) g += q[i][j] * y[j];
      trial[i] = y[i] - step * g;
    }
    std::vector<double> next = project_simplex_box(trial, box);
    const double f_next = quadratic(q, next);
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - x[i]));
    if (f_next > f) {
      // A rejected plain step means rounding noise dominates: converged.
      if (t == 1.0) break;
      // Adaptive restart keeps the iteration monotone.
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) y[i] = next[i] + (t - 1.0) / t_next * (next[i] - x[i]);
    x = std::move(next);
    f = f_next;
    t = t_next;
    if (moved < 1e-15) break;
  }
  return x;
}

// Point-in-ellipse scan in exact rational arithmetic.
inline tumorseg::BinaryMask ellipse_raster(int width, int height, double center_row,
                                           double center_col, double semi_rows,
                                           double semi_cols) {
  tumorseg::BinaryMask mask(width, height);
  const Rational cr(center_row), cc(center_col), a(semi_rows), b(semi_cols);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Rational dr = Rational(r) - cr;
      const Rational dc = Rational(c) - cc;
      if (dr * dr / (a * a) + dc * dc / (b * b) <= 1) mask.set(r, c, true);
    }
  }
  return mask;
}

// Mask pixels with a 4-neighbour outside the mask or outside the raster.
inline tumorseg::BinaryMask boundary(const tumorseg::BinaryMask& m) {
  tumorseg::BinaryMask out(m.width(), m.height());
  const int dr[] = {-1, 1, 0, 0};
  const int dc[] = {0, 0, -1, 1};
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (!m.at(r, c)) continue;
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k];
        const int cc = c + dc[k];
        if (!m.contains(rr, cc) || !m.at(rr, cc)) {
          out.set(r, c, true);
          break;
        }
      }
    }
  }
  return out;
}

// Straightforward Perona-Malik step loop with replicated borders, written
// for clarity rather than bit-exact symmetry.
inline tumorseg::GrayImage diffuse(const tumorseg::GrayImage& in, double lambda, double k,
                                   int iterations, bool rational, bool eight) {
  tumorseg::GrayImage cur = in;
  const int dr[] = {-1, 1, 0, 0, -1, -1, 1, 1};
  const int dc[] = {0, 0, -1, 1, -1, 1, -1, 1};
  const int n = eight ? 8 : 4;
  for (int it = 0; it < iterations; ++it) {
    tumorseg::GrayImage next = cur;
    for (int r = 0; r < cur.height(); ++r) {
      for (int c = 0; c < cur.width(); ++c) {
        double acc = 0.0;
        for (int d = 0; d < n; ++d) {
          const int rr = r + dr[d];
          const int cc = c + dc[d];
          if (!cur.contains(rr, cc)) continue;
          const double g = cur.at(rr, cc) - cur.at(r, c);
          const double x = std::abs(g) / k;
          const double cond = rational ? 1.0 / (1.0 + x * x) : std::exp(-x * x);
          acc += cond * g;
        }
        next.at(r, c) = cur.at(r, c) + lambda * acc;
      }
    }
    cur = next;
  }
  return cur;
}

inline tumorseg::GrayImage random_image(std::mt19937_64& rng, int width, int height,
                                        bool integer = true) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> px(static_cast<std::size_t>(width) * height);
  for (auto& v : px) v = integer ? std::floor(u(rng) + 0.5) : u(rng);
  return tumorseg::GrayImage(width, height, std::move(px));
}

}  // namespace oracle
