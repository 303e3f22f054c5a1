#include "tunnelkit/eikonal.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

namespace tunnelkit {

namespace {

enum class State : unsigned char { Far, Trial, Known };

}  // namespace

std::vector<double> solve_eikonal(const GridSpec& grid, const std::vector<double>& slowness,
                                  const std::vector<double>& initial) {
  const double inf = std::numeric_limits<double>::infinity();
  const int n1 = grid.n1, n2 = grid.n2;
  const double dx = grid.spacing.x(), dy = grid.spacing.y();
  std::vector<double> d(grid.size(), inf);
  std::vector<State> state(grid.size(), State::Far);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!std::isnan(initial[k])) {
      d[k] = initial[k];
      state[k] = State::Known;
    }

  auto tentative = [&](int i, int j) {
    const std::size_t k = grid.index(i, j);
    const double f = slowness[k];
    // Smallest known neighbour along each axis, with its slowness.
    double a = inf, fa = 0.0, b = inf, fb = 0.0;
    for (int di : {-1, 1}) {
      const int ii = i + di;
      if (ii < 0 || ii >= n1) continue;
      const std::size_t kk = grid.index(ii, j);
      if (state[kk] == State::Known && d[kk] < a) {
        a = d[kk];
        fa = slowness[kk];
      }
    }
    for (int dj : {-1, 1}) {
      const int jj = j + dj;
      if (jj < 0 || jj >= n2) continue;
      const std::size_t kk = grid.index(i, jj);
      if (state[kk] == State::Known && d[kk] < b) {
        b = d[kk];
        fb = slowness[kk];
      }
    }
    double best = inf;
    if (a < inf) best = std::min(best, a + dx * 0.5 * (f + fa));
    if (b < inf) best = std::min(best, b + dy * 0.5 * (f + fb));
    if (a < inf && b < inf) {
      const double fbar = 0.5 * (f + 0.5 * (fa + fb));
      // ((t-a)/dx)^2 + ((t-b)/dy)^2 = fbar^2
      const double A = 1.0 / (dx * dx) + 1.0 / (dy * dy);
      const double B = -2.0 * (a / (dx * dx) + b / (dy * dy));
      const double C = a * a / (dx * dx) + b * b / (dy * dy) - fbar * fbar;
      const double disc = B * B - 4.0 * A * C;
      if (disc >= 0.0) {
        const double t = (-B + std::sqrt(disc)) / (2.0 * A);
        if (t >= std::max(a, b)) best = std::min(best, t);
      }
    }
    return best;
  };

  auto push_neighbours = [&](int i, int j) {
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& p : nb) {
      if (p[0] < 0 || p[0] >= n1 || p[1] < 0 || p[1] >= n2) continue;
      const std::size_t kk = grid.index(p[0], p[1]);
      if (state[kk] == State::Known) continue;
      const double t = tentative(p[0], p[1]);
      if (t < d[kk]) {
        d[kk] = t;
        state[kk] = State::Trial;
        heap.push({t, kk});
      }
    }
  };

  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      if (state[grid.index(i, j)] == State::Known) push_neighbours(i, j);

  while (!heap.empty()) {
    const auto [t, k] = heap.top();
    heap.pop();
    if (state[k] == State::Known || t > d[k]) continue;  // stale entry
    state[k] = State::Known;
    push_neighbours(static_cast<int>(k % n1), static_cast<int>(k / n1));
  }
  return d;
}

}  // namespace tunnelkit
