#pragma once

#include <span>
#include <vector>

#include "boxlevelset/grid.hpp"

namespace boxlevelset {

/// Additive smoothing of the dice ratio.
inline constexpr double kDiceSmoothing = 1e-6;

/// Box (foreground) and outside-box (background) indicators over a region.
/// foreground + background == 1 at every pixel.
struct BinaryRegionMasks {
  BinaryMask foreground;
  BinaryMask background;

  static BinaryRegionMasks from_box(const BoxAnnotation& box, const EnlargedRegion& region);
  static BinaryRegionMasks from_foreground(BinaryMask foreground);
};

/// 1 - (2 sum(p t) + s) / (sum(p^2) + sum(t^2) + s). Both-empty inputs give 0.
double dice_loss(std::span<const double> pred, std::span<const double> target);

/// d(dice_loss)/d(pred).
std::vector<double> dice_loss_gradient(std::span<const double> pred,
                                       std::span<const double> target);

/// Column-wise maxima (x-axis projection, one value per column).
std::vector<double> project_x(const Grid<double>& m);
/// Row-wise maxima (y-axis projection, one value per row).
std::vector<double> project_y(const Grid<double>& m);

/// Dice of the x projections plus dice of the y projections.
double box_projection_constraint(const Grid<double>& m, const BinaryMask& foreground);

/// Dice of the predicted background 1 - m against the outside-box indicator.
double background_constraint(const Grid<double>& m, const BinaryMask& background);

/// Projection term plus background term; lies in [0, 3].
double constraint_loss(const Grid<double>& m, const BinaryRegionMasks& masks);

/// d(constraint_loss)/dm. The max projections route their gradient to the
/// arg-max pixel of each column / row, taking the first index on ties.
Grid<double> constraint_gradient(const Grid<double>& m, const BinaryRegionMasks& masks);

}  // namespace boxlevelset
