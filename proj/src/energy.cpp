#include "boxlevelset/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace boxlevelset {
namespace {

void require_shape(const NormalizedImage& u, const LevelSetField& phi) {
  if (u.height() != phi.rows() || u.width() != phi.cols())
    throw std::invalid_argument("energy: image and level-set shapes differ");
}

// Sum over channels and pixels of the squared deviation from the region means,
// weighted by the inside / outside memberships.
std::pair<double, double> data_terms(const NormalizedImage& u, const Grid<double>& inside,
                                     const Grid<double>& outside,
                                     const RegionAverages& avg) {
  double in = 0.0, out = 0.0;
  for (int ch = 0; ch < u.channels(); ++ch) {
    const double a1 = avg.inside[ch];
    const double a2 = avg.outside[ch];
    for (int r = 0; r < inside.rows(); ++r) {
      for (int c = 0; c < inside.cols(); ++c) {
        const double v = u(ch, r, c);
        in += (v - a1) * (v - a1) * inside(r, c);
        out += (v - a2) * (v - a2) * outside(r, c);
      }
    }
  }
  return {in, out};
}

double total_length(const Grid<double>& s) {
  double length = 0.0;
  for (int r = 0; r < s.rows(); ++r)
    for (int c = 0; c < s.cols(); ++c) length += std::hypot(d_x(s, r, c), d_y(s, r, c));
  return length;
}

Grid<double> complement_probability(const LevelSetField& phi, double slope) {
  Grid<double> out(phi.rows(), phi.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = sigmoid(-slope * phi.values()[i]);
  return out;
}

EnergyBreakdown compose(const EnergyParams& p, double rho, double in, double out,
                        LengthArea la) {
  EnergyBreakdown e;
  e.data_inside = in;
  e.data_outside = out;
  e.length = la.length;
  e.area = la.area;
  e.total = p.alpha1 * rho * in + p.alpha2 * rho * out + p.lambda * la.length + p.mu * la.area;
  return e;
}

}  // namespace

double EnergyParams::rho(int class_id) const {
  if (auto it = rho_per_class.find(class_id); it != rho_per_class.end()) return it->second;
  if (rho_default) return *rho_default;
  throw ConfigError("no rho_cls configured for class " + std::to_string(class_id));
}

void EnergyParams::validate() const {
  if (!(alpha1 >= 0 && alpha2 >= 0 && lambda >= 0 && mu >= 0))
    throw ValidationError("energy weights alpha1, alpha2, lambda, mu must be >= 0");
  for (const auto& [cls, value] : rho_per_class)
    if (!(value > 0)) throw ValidationError("rho_cls for class " + std::to_string(cls) + " must be > 0");
  if (rho_default && !(*rho_default > 0)) throw ValidationError("rho_cls default must be > 0");
  if (!(sigmoid_slope > 0)) throw ValidationError("sigmoid_slope must be > 0");
  if (!(eps_grad > 0) || !(eps_denom > 0)) throw ValidationError("eps_grad and eps_denom must be > 0");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Grid<double> foreground_probability(const LevelSetField& phi, double slope) {
  Grid<double> out(phi.rows(), phi.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = sigmoid(slope * phi.values()[i]);
  return out;
}

double d_x(const Grid<double>& f, int r, int c) {
  const int n = f.cols();
  if (n < 2) return 0.0;
  if (c == 0) return f(r, 1) - f(r, 0);
  if (c == n - 1) return f(r, n - 1) - f(r, n - 2);
  return 0.5 * (f(r, c + 1) - f(r, c - 1));
}

double d_y(const Grid<double>& f, int r, int c) {
  const int n = f.rows();
  if (n < 2) return 0.0;
  if (r == 0) return f(1, c) - f(0, c);
  if (r == n - 1) return f(n - 1, c) - f(n - 2, c);
  return 0.5 * (f(r + 1, c) - f(r - 1, c));
}

void add_gradient_adjoint(const Grid<double>& vx, const Grid<double>& vy, Grid<double>& out) {
  const int rows = out.rows();
  const int cols = out.cols();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (cols >= 2) {
        const double w = vx(r, c);
        if (c == 0) {
          out(r, 1) += w;
          out(r, 0) -= w;
        } else if (c == cols - 1) {
          out(r, cols - 1) += w;
          out(r, cols - 2) -= w;
        } else {
          out(r, c + 1) += 0.5 * w;
          out(r, c - 1) -= 0.5 * w;
        }
      }
      if (rows >= 2) {
        const double w = vy(r, c);
        if (r == 0) {
          out(1, c) += w;
          out(0, c) -= w;
        } else if (r == rows - 1) {
          out(rows - 1, c) += w;
          out(rows - 2, c) -= w;
        } else {
          out(r + 1, c) += 0.5 * w;
          out(r - 1, c) -= 0.5 * w;
        }
      }
    }
  }
}

RegionAverages region_averages(const NormalizedImage& u, const LevelSetField& phi,
                               const EnergyParams& params) {
  require_shape(u, phi);
  const Grid<double> in = foreground_probability(phi, params.sigmoid_slope);
  const Grid<double> out = complement_probability(phi, params.sigmoid_slope);
  double w_in = 0.0, w_out = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    w_in += in.values()[i];
    w_out += out.values()[i];
  }
  RegionAverages avg;
  for (int ch = 0; ch < u.channels(); ++ch) {
    double s_in = 0.0, s_out = 0.0;
    for (int r = 0; r < phi.rows(); ++r) {
      for (int c = 0; c < phi.cols(); ++c) {
        s_in += u(ch, r, c) * in(r, c);
        s_out += u(ch, r, c) * out(r, c);
      }
    }
    avg.inside.push_back(s_in / std::max(w_in, params.eps_denom));
    avg.outside.push_back(s_out / std::max(w_out, params.eps_denom));
  }
  return avg;
}

LengthArea length_area(const LevelSetField& phi, const EnergyParams& params) {
  const Grid<double> s = foreground_probability(phi, params.sigmoid_slope);
  LengthArea la;
  la.length = total_length(s);
  for (double v : s.values()) la.area += v;
  return la;
}

EnergyBreakdown levelset_energy(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params) {
  return levelset_energy(u, phi, class_id, params, region_averages(u, phi, params));
}

EnergyBreakdown levelset_energy(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params,
                                const RegionAverages& averages) {
  require_shape(u, phi);
  const double rho = params.rho(class_id);
  const Grid<double> in = foreground_probability(phi, params.sigmoid_slope);
  const Grid<double> out = complement_probability(phi, params.sigmoid_slope);
  const auto [d_in, d_out] = data_terms(u, in, out, averages);
  LengthArea la;
  la.length = total_length(in);
  for (double v : in.values()) la.area += v;
  return compose(params, rho, d_in, d_out, la);
}

LevelSetField levelset_gradient(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params) {
  return levelset_gradient(u, phi, class_id, params, region_averages(u, phi, params));
}

LevelSetField levelset_gradient(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params,
                                const RegionAverages& averages) {
  require_shape(u, phi);
  const double rho = params.rho(class_id);
  const double k = params.sigmoid_slope;
  const int rows = phi.rows();
  const int cols = phi.cols();
  const Grid<double> s = foreground_probability(phi, k);

  // Length contribution: transpose of the stencil applied to the normalized
  // gradient of s, i.e. minus its discrete divergence.
  Grid<double> length_term(rows, cols, 0.0);
  if (params.lambda != 0.0) {
    Grid<double> nx(rows, cols), ny(rows, cols);
    const double eps2 = params.eps_grad * params.eps_grad;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double gx = d_x(s, r, c);
        const double gy = d_y(s, r, c);
        const double norm = std::sqrt(gx * gx + gy * gy + eps2);
        nx(r, c) = gx / norm;
        ny(r, c) = gy / norm;
      }
    }
    add_gradient_adjoint(nx, ny, length_term);
  }

  LevelSetField grad(rows, cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double data = 0.0;
      for (int ch = 0; ch < u.channels(); ++ch) {
        const double v = u(ch, r, c);
        const double din = v - averages.inside[ch];
        const double dout = v - averages.outside[ch];
        data += params.alpha1 * rho * din * din - params.alpha2 * rho * dout * dout;
      }
      const double si = s(r, c);
      const double dsig = si * sigmoid(-k * phi(r, c));
      grad(r, c) = k * dsig * (data + params.lambda * length_term(r, c) + params.mu);
    }
  }
  return grad;
}

double heaviside(double phi, double eps_h) {
  return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(phi / eps_h));
}

double dirac(double phi, double eps_h) {
  return eps_h / (std::numbers::pi * (eps_h * eps_h + phi * phi));
}

EnergyBreakdown classical_energy(const NormalizedImage& u, const LevelSetField& phi,
                                 double eps_h, int class_id, const EnergyParams& params) {
  require_shape(u, phi);
  if (!(eps_h > 0)) throw std::invalid_argument("classical_energy: eps_h must be > 0");
  const double rho = params.rho(class_id);

  Grid<double> h(phi.rows(), phi.cols());
  Grid<double> h_out(phi.rows(), phi.cols());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h.values()[i] = heaviside(phi.values()[i], eps_h);
    h_out.values()[i] = 1.0 - h.values()[i];
  }

  // Hard means over {phi >= 0} and {phi < 0}.
  RegionAverages avg;
  for (int ch = 0; ch < u.channels(); ++ch) {
    double s_in = 0.0, s_out = 0.0;
    int n_in = 0, n_out = 0;
    for (int r = 0; r < phi.rows(); ++r) {
      for (int c = 0; c < phi.cols(); ++c) {
        if (phi(r, c) >= 0) {
          s_in += u(ch, r, c);
          ++n_in;
        } else {
          s_out += u(ch, r, c);
          ++n_out;
        }
      }
    }
    avg.inside.push_back(n_in ? s_in / n_in : 0.0);
    avg.outside.push_back(n_out ? s_out / n_out : 0.0);
  }

  const auto [d_in, d_out] = data_terms(u, h, h_out, avg);
  LengthArea la;
  la.length = total_length(h);
  for (double v : h.values()) la.area += v;
  return compose(params, rho, d_in, d_out, la);
}

}  // namespace boxlevelset
