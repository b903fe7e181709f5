#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tactile/error.hpp"
#include "tactile/optics.hpp"

namespace tactile::optics {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Moments masked_moments(const TaxelImage& img, const Mask& mask) {
  if (mask.size() != static_cast<std::size_t>(img.width) * img.height)
    throw Error(Errc::kShapeMismatch, "mask size does not match image");
  Moments m;
  m.min = std::numeric_limits<double>::infinity();
  m.max = -m.min;
  double sum = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * img.width + x]) continue;
      const double v = img.intensity(x, y);
      sum += v;
      m.min = std::min(m.min, v);
      m.max = std::max(m.max, v);
      ++m.n;
    }
  }
  if (m.n == 0) return m;
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * img.width + x]) continue;
      const double d = img.intensity(x, y) - m.mean;
      ss += d * d;
    }
  }
  m.std = std::sqrt(ss / static_cast<double>(m.n));
  return m;
}

}  // namespace

Mask dome_mask(const DomeGeometry& g, int image_size, double max_polar_deg) {
  Mask m(static_cast<std::size_t>(image_size) * image_size, 0);
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      auto ray = pixel_to_dome(g, image_size, x + 0.5, y + 0.5);
      if (ray && ray->polar_deg < max_polar_deg)
        m[static_cast<std::size_t>(y) * image_size + x] = 1;
    }
  }
  return m;
}

Mask contact_ring_mask(const DomeGeometry& g, int image_size, const Contact& c,
                       double inner_mm, double outer_mm) {
  const Vec3 center = dome_point(g, c.polar_deg, c.azimuth_deg).normalized();
  Mask m(static_cast<std::size_t>(image_size) * image_size, 0);
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      auto ray = pixel_to_dome(g, image_size, x + 0.5, y + 0.5);
      if (!ray) continue;
      const double cosg = std::clamp(ray->point.normalized().dot(center), -1.0, 1.0);
      const double s = g.radius_mm * std::acos(cosg);
      if (s >= inner_mm && s < outer_mm) m[static_cast<std::size_t>(y) * image_size + x] = 1;
    }
  }
  return m;
}

Uniformity uniformity_metrics(const TaxelImage& img, const Mask& mask) {
  const Moments m = masked_moments(img, mask);
  if (m.n < 100) throw Error(Errc::kEmptyMask, "uniformity mask selects fewer than 100 taxels");
  if (!(m.mean > 0.0)) throw Error(Errc::kZeroMean, "background mean is zero");
  return {m.std / m.mean, (m.max - m.min) / m.mean};
}

double cnr(const TaxelImage& img, const Mask& roi_indentation, const Mask& roi_background) {
  if (roi_indentation.size() != roi_background.size())
    throw Error(Errc::kShapeMismatch, "ROI masks differ in size");
  for (std::size_t i = 0; i < roi_indentation.size(); ++i) {
    if (roi_indentation[i] && roi_background[i])
      throw Error(Errc::kOverlappingRois, "indentation and background ROIs overlap");
  }
  const Moments ind = masked_moments(img, roi_indentation);
  const Moments bg = masked_moments(img, roi_background);
  if (ind.n < 25 || bg.n < 25) throw Error(Errc::kEmptyMask, "CNR ROIs need >= 25 taxels each");
  const double scale = std::max(std::abs(ind.mean), std::abs(bg.mean));
  if (!(bg.std > 1e-9 * scale)) throw Error(Errc::kZeroNoise, "background ROI has no measurable variance");
  return std::abs(ind.mean - bg.mean) / bg.std;
}

SweepConfig default_sweep_config() {
  SweepConfig cfg;
  cfg.render.photons = 1'000'000;
  cfg.render.seed = 7;
  cfg.rois = {
      Contact{0.0, 0.0, 2.0, 0.3},    // on-axis
      Contact{35.0, 22.5, 2.0, 0.3},  // mid
      Contact{60.0, 202.5, 2.0, 0.3}, // side
  };
  return cfg;
}

SweepWeights default_sweep_weights() { return {1.0, 1.0, 10.0}; }

std::vector<ScatterSurface> default_sweep_surfaces() {
  std::vector<ScatterSurface> s;
  for (double a : {1.0, 5.0, 10.0, 15.0, 20.0, 25.0}) s.push_back(ScatterSurface::gaussian(a));
  s.push_back(ScatterSurface::lambertian());
  return s;
}

double cnr_score(std::span<const double> cnr_per_roi, double cap) {
  if (cnr_per_roi.empty()) return 0.0;
  double acc = 0.0;
  for (double c : cnr_per_roi) acc += std::min(c, cap) / cap;
  return acc / static_cast<double>(cnr_per_roi.size());
}

double nonuniformity_score(const Uniformity& u) {
  return std::log10(1.0 + 0.5 * (u.std_over_mean + u.range_over_mean));
}

void score_sweep(SweepResult& result, const SweepWeights& weights, double band_tolerance) {
  auto& pts = result.points;
  if (pts.empty()) return;
  for (auto& p : pts) {
    p.objective = weights.cnr * cnr_score(p.cnr_per_roi, weights.cnr_cap) -
                  weights.uniformity * nonuniformity_score(p.uniformity);
  }
  result.best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].objective > pts[result.best].objective) result.best = i;
  }
  const double best = pts[result.best].objective;
  result.band.clear();
  result.band_lo_deg = std::numeric_limits<double>::infinity();
  result.band_hi_deg = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].objective < best - band_tolerance) continue;
    result.band.push_back(i);
    const auto& s = pts[i].surface;
    const double a = s.mode == ScatterMode::kGaussian ? s.alpha_hwhm_deg
                     : s.mode == ScatterMode::kLambertian
                         ? std::numeric_limits<double>::infinity()
                         : 0.0;
    result.band_lo_deg = std::min(result.band_lo_deg, a);
    result.band_hi_deg = std::max(result.band_hi_deg, a);
  }
}

SweepResult scatter_sweep(std::span<const ScatterSurface> surfaces, const SweepWeights& weights,
                          const SweepConfig& config) {
  if (surfaces.empty()) throw Error(Errc::kInvalidArgument, "empty scatter sweep");
  const auto& g = config.render.geometry;
  const int size = g.image_size;
  const LedRing leds = LedRing::uniform();
  const Mask bg_mask = dome_mask(g, size, config.uniformity_max_polar_deg);

  std::vector<Mask> ind_masks, ring_masks;
  for (const auto& c : config.rois) {
    ind_masks.push_back(contact_ring_mask(g, size, c, 0.0, c.radius_mm));
    ring_masks.push_back(contact_ring_mask(g, size, c, 1.25 * c.radius_mm, 2.5 * c.radius_mm));
  }

  SweepResult result;
  for (const auto& s : surfaces) {
    SweepPoint pt;
    pt.surface = s;
    const TaxelImage background = render(s, leds, {}, config.render);
    pt.uniformity = uniformity_metrics(background, bg_mask);
    if (!config.rois.empty()) {
      const TaxelImage pressed = render(s, leds, config.rois, config.render);
      double sum = 0.0;
      for (std::size_t r = 0; r < config.rois.size(); ++r) {
        double v = 0.0;
        try {
          v = cnr(pressed, ind_masks[r], ring_masks[r]);
        } catch (const Error& e) {
          if (e.code() != Errc::kZeroNoise) throw;
        }
        pt.cnr_per_roi.push_back(v);
        sum += v;
      }
      pt.cnr_mean = sum / static_cast<double>(config.rois.size());
    }
    result.points.push_back(std::move(pt));
  }
  score_sweep(result, weights, config.band_tolerance);
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "alpha,std_over_mean,range_over_mean";
  const std::size_t rois = result.points.empty() ? 0 : result.points.front().cnr_per_roi.size();
  for (std::size_t r = 0; r < rois; ++r) os << ",cnr_roi" << (r + 1);
  os << ",cnr_mean,objective,recommended\n";
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    const bool in_band =
        std::find(result.band.begin(), result.band.end(), i) != result.band.end();
    os << p.surface.label() << ',' << p.uniformity.std_over_mean << ','
       << p.uniformity.range_over_mean;
    for (double c : p.cnr_per_roi) os << ',' << c;
    os << ',' << p.cnr_mean << ',' << p.objective << ',' << (in_band ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace tactile::optics
