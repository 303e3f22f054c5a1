#pragma once

#include "tunnelkit/potential.hpp"

#include <cstdint>
#include <vector>

namespace tunnelkit {

/// Regular node-centred grid: node (i, j) sits at origin + (i dx1, j dx2).
struct GridSpec {
  Vec2 origin = Vec2::Zero();
  Vec2 spacing = Vec2::Ones();
  int n1 = 16;
  int n2 = 16;

  /// n1 x n2 nodes spanning [lo, hi] inclusive.
  static GridSpec covering(const Vec2& lo, const Vec2& hi, int n1, int n2);

  Vec2 node(int i, int j) const {
    return {origin.x() + i * spacing.x(), origin.y() + j * spacing.y()};
  }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n1 + i; }
  std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
  Vec2 upper() const { return node(n1 - 1, n2 - 1); }
  bool contains(const Vec2& x) const;
  double min_spacing() const { return std::min(spacing.x(), spacing.y()); }
  double max_spacing() const { return std::max(spacing.x(), spacing.y()); }
};

enum class NodeTag : std::uint8_t { Inside, Outside, Source };

struct ScalarField2D {
  GridSpec grid;
  std::vector<double> values;
  std::vector<NodeTag> mask;

  ScalarField2D() = default;
  explicit ScalarField2D(const GridSpec& g, double fill = 0.0)
      : grid(g), values(g.size(), fill), mask(g.size(), NodeTag::Outside) {}

  double& at(int i, int j) { return values[grid.index(i, j)]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }
  NodeTag tag(int i, int j) const { return mask[grid.index(i, j)]; }

  /// Bilinear interpolation; points outside the grid are clamped to it.
  double interpolate(const Vec2& x) const;
  /// Bound on the bilinear interpolation error in the cell containing x, from
  /// the second differences of the node values: (dx1^2 |d11| + dx2^2 |d22|) / 8.
  double interpolation_error(const Vec2& x) const;
};

}  // namespace tunnelkit
