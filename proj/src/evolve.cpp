#include "boxlevelset/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boxlevelset {

void EvolveConfig::validate() const {
  if (!(step_size > 0)) throw ValidationError("step_size must be > 0");
  if (max_iters < 0) throw ValidationError("max_iters must be >= 0");
  if (!(tol >= 0)) throw ValidationError("tol must be >= 0");
  if (!(backtrack_factor > 0 && backtrack_factor < 1))
    throw ValidationError("backtrack_factor must lie in (0, 1)");
  if (snapshot_every < 0) throw ValidationError("snapshot_every must be >= 0");
  if (max_halvings < 0) throw ValidationError("max_halvings must be >= 0");
}

LevelSetField initialize_phi(const EnlargedRegion& region, const BoxAnnotation& box,
                             double clamp) {
  LevelSetField phi(region.height(), region.width());
  for (int r = 0; r < phi.rows(); ++r) {
    const double y = region.y_min + r;
    for (int c = 0; c < phi.cols(); ++c) {
      const double x = region.x_min + c;
      double d;
      if (x >= box.x_min && x <= box.x_max && y >= box.y_min && y <= box.y_max) {
        d = std::min({x - box.x_min, box.x_max - x, y - box.y_min, box.y_max - y});
      } else {
        const double dx = std::max({box.x_min - x, 0.0, x - box.x_max});
        const double dy = std::max({box.y_min - y, 0.0, y - box.y_max});
        d = -std::hypot(dx, dy);
      }
      phi(r, c) = std::clamp(d, -clamp, clamp);
    }
  }
  return phi;
}

BinaryMask threshold_mask(const LevelSetField& phi, const EnergyParams& params) {
  BinaryMask mask(phi.rows(), phi.cols(), 0);
  for (std::size_t i = 0; i < phi.size(); ++i)
    mask.values()[i] = sigmoid(params.sigmoid_slope * phi.values()[i]) > 0.5 ? 1 : 0;
  return mask;
}

SegmentationLoss segmentation_loss(const NormalizedImage& u, const LevelSetField& phi,
                                   int class_id, const BinaryRegionMasks& masks,
                                   const EnergyParams& params, const EvolveConfig& cfg) {
  SegmentationLoss loss;
  if (cfg.use_levelset) loss.levelset = levelset_energy(u, phi, class_id, params).total;
  if (cfg.use_constraints)
    loss.constraints =
        constraint_loss(foreground_probability(phi, params.sigmoid_slope), masks);
  return loss;
}

LevelSetField segmentation_gradient(const NormalizedImage& u, const LevelSetField& phi,
                                    int class_id, const BinaryRegionMasks& masks,
                                    const EnergyParams& params, const EvolveConfig& cfg) {
  LevelSetField grad(phi.rows(), phi.cols(), 0.0);
  if (cfg.use_levelset) grad = levelset_gradient(u, phi, class_id, params);
  if (cfg.use_constraints) {
    const double k = params.sigmoid_slope;
    const Grid<double> m = foreground_probability(phi, k);
    const Grid<double> dm = constraint_gradient(m, masks);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double dsig = m.values()[i] * sigmoid(-k * phi.values()[i]);
      grad.values()[i] += dm.values()[i] * k * dsig;
    }
  }
  return grad;
}

EvolveResult evolve_instance(const NormalizedImage& u, const BoxAnnotation& box,
                             const EnlargedRegion& region, const EnergyParams& params,
                             const EvolveConfig& cfg, const SnapshotSink& sink) {
  params.validate();
  cfg.validate();
  if (u.width() != region.width() || u.height() != region.height())
    throw std::invalid_argument("evolve_instance: image crop does not match region");

  const int class_id = box.class_id;
  params.rho(class_id);  // surface a missing class before any work
  const BinaryRegionMasks masks = BinaryRegionMasks::from_box(box, region);
  const bool snapshots = sink && cfg.snapshot_every > 0;

  EvolveResult result;
  result.phi = initialize_phi(region, box);
  double energy = segmentation_loss(u, result.phi, class_id, masks, params, cfg).total();
  result.energy_trace.push_back(energy);
  if (snapshots) sink(0, result.phi);

  double eta = -1.0;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const LevelSetField grad = segmentation_gradient(u, result.phi, class_id, masks, params, cfg);
    double gmax = 0.0;
    for (double g : grad.values()) gmax = std::max(gmax, std::abs(g));
    if (gmax == 0.0) {
      result.converged = true;
      break;
    }
    if (eta < 0.0) eta = cfg.step_size / gmax;

    LevelSetField candidate(result.phi.rows(), result.phi.cols());
    double candidate_energy = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt) {
      for (std::size_t i = 0; i < candidate.size(); ++i)
        candidate.values()[i] = result.phi.values()[i] - eta * grad.values()[i];
      candidate_energy =
          segmentation_loss(u, candidate, class_id, masks, params, cfg).total();
      if (candidate_energy <= energy) {
        accepted = true;
        break;
      }
      eta *= cfg.backtrack_factor;
    }
    if (!accepted) {
      result.converged = false;
      break;
    }

    const double change = (energy - candidate_energy) /
                          std::max(std::abs(energy), std::numeric_limits<double>::min());
    result.phi = std::move(candidate);
    energy = candidate_energy;
    result.energy_trace.push_back(energy);
    result.iterations_used = iter;
    if (snapshots && iter % cfg.snapshot_every == 0) sink(iter, result.phi);
    eta /= cfg.backtrack_factor;
    if (change < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.mask = threshold_mask(result.phi, params);
  return result;
}

}  // namespace boxlevelset
