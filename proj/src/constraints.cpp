#include "boxlevelset/constraints.hpp"

#include <stdexcept>

namespace boxlevelset {
namespace {

std::vector<double> to_double(const BinaryMask& mask) {
  return {mask.values().begin(), mask.values().end()};
}

void require_same(const Grid<double>& m, const BinaryMask& b) {
  if (!m.same_shape(b)) throw std::invalid_argument("constraints: shape mismatch");
}

struct Projection {
  std::vector<double> values;
  std::vector<int> argmax;
};

Projection max_over_rows(const Grid<double>& m) {
  Projection p{std::vector<double>(m.cols()), std::vector<int>(m.cols(), 0)};
  for (int c = 0; c < m.cols(); ++c) {
    double best = m.rows() > 0 ? m(0, c) : 0.0;
    int arg = 0;
    for (int r = 1; r < m.rows(); ++r) {
      if (m(r, c) > best) {
        best = m(r, c);
        arg = r;
      }
    }
    p.values[c] = best;
    p.argmax[c] = arg;
  }
  return p;
}

Projection max_over_cols(const Grid<double>& m) {
  Projection p{std::vector<double>(m.rows()), std::vector<int>(m.rows(), 0)};
  for (int r = 0; r < m.rows(); ++r) {
    double best = m.cols() > 0 ? m(r, 0) : 0.0;
    int arg = 0;
    for (int c = 1; c < m.cols(); ++c) {
      if (m(r, c) > best) {
        best = m(r, c);
        arg = c;
      }
    }
    p.values[r] = best;
    p.argmax[r] = arg;
  }
  return p;
}

std::vector<double> binary_projection(const BinaryMask& b, bool along_rows) {
  Grid<double> as_double(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.size(); ++i) as_double.values()[i] = b.values()[i];
  return along_rows ? max_over_rows(as_double).values : max_over_cols(as_double).values;
}

}  // namespace

BinaryRegionMasks BinaryRegionMasks::from_box(const BoxAnnotation& box,
                                              const EnlargedRegion& region) {
  return from_foreground(box_indicator(box, region));
}

BinaryRegionMasks BinaryRegionMasks::from_foreground(BinaryMask foreground) {
  BinaryMask background(foreground.rows(), foreground.cols());
  for (std::size_t i = 0; i < foreground.size(); ++i)
    background.values()[i] = foreground.values()[i] ? 0 : 1;
  return {std::move(foreground), std::move(background)};
}

double dice_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("dice_loss: shape mismatch");
  double inter = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * target[i];
    pp += pred[i] * pred[i];
    tt += target[i] * target[i];
  }
  if (pp + tt == 0.0) return 0.0;
  return 1.0 - (2.0 * inter + kDiceSmoothing) / (pp + tt + kDiceSmoothing);
}

std::vector<double> dice_loss_gradient(std::span<const double> pred,
                                       std::span<const double> target) {
  if (pred.size() != target.size())
    throw std::invalid_argument("dice_loss_gradient: shape mismatch");
  double inter = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * target[i];
    pp += pred[i] * pred[i];
    tt += target[i] * target[i];
  }
  std::vector<double> grad(pred.size(), 0.0);
  if (pp + tt == 0.0) return grad;
  const double num = 2.0 * inter + kDiceSmoothing;
  const double den = pp + tt + kDiceSmoothing;
  for (std::size_t i = 0; i < pred.size(); ++i)
    grad[i] = -(2.0 * target[i] * den - num * 2.0 * pred[i]) / (den * den);
  return grad;
}

std::vector<double> project_x(const Grid<double>& m) { return max_over_rows(m).values; }
std::vector<double> project_y(const Grid<double>& m) { return max_over_cols(m).values; }

double box_projection_constraint(const Grid<double>& m, const BinaryMask& foreground) {
  require_same(m, foreground);
  return dice_loss(project_x(m), binary_projection(foreground, true)) +
         dice_loss(project_y(m), binary_projection(foreground, false));
}

double background_constraint(const Grid<double>& m, const BinaryMask& background) {
  require_same(m, background);
  std::vector<double> pred_bg(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) pred_bg[i] = 1.0 - m.values()[i];
  return dice_loss(pred_bg, to_double(background));
}

double constraint_loss(const Grid<double>& m, const BinaryRegionMasks& masks) {
  return box_projection_constraint(m, masks.foreground) +
         background_constraint(m, masks.background);
}

Grid<double> constraint_gradient(const Grid<double>& m, const BinaryRegionMasks& masks) {
  require_same(m, masks.foreground);
  require_same(m, masks.background);
  Grid<double> grad(m.rows(), m.cols(), 0.0);

  const Projection px = max_over_rows(m);
  const auto gx = dice_loss_gradient(px.values, binary_projection(masks.foreground, true));
  for (int c = 0; c < m.cols(); ++c) grad(px.argmax[c], c) += gx[c];

  const Projection py = max_over_cols(m);
  const auto gy = dice_loss_gradient(py.values, binary_projection(masks.foreground, false));
  for (int r = 0; r < m.rows(); ++r) grad(r, py.argmax[r]) += gy[r];

  std::vector<double> pred_bg(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) pred_bg[i] = 1.0 - m.values()[i];
  const auto gb = dice_loss_gradient(pred_bg, to_double(masks.background));
  for (std::size_t i = 0; i < m.size(); ++i) grad.values()[i] -= gb[i];
  return grad;
}

}  // namespace boxlevelset
