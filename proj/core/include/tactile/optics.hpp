#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tactile/rng.hpp"

namespace tactile::optics {

using Vec3 = Eigen::Vector3d;

enum class ScatterMode { kGaussian, kLambertian, kSpecular };

// Surface scatter model of the reflective inner coating. Gaussian lobes are
// parameterized by their half-width-half-max angle around the mirror direction.
struct ScatterSurface {
  ScatterMode mode = ScatterMode::kLambertian;
  double alpha_hwhm_deg = 0.0;

  static ScatterSurface gaussian(double alpha_hwhm_deg);
  static ScatterSurface lambertian() { return {ScatterMode::kLambertian, 0.0}; }
  static ScatterSurface specular() { return {ScatterMode::kSpecular, 0.0}; }

  // Lobe standard deviation in radians: alpha / sqrt(2 ln 2).
  double sigma_rad() const;
  std::string label() const;
};

inline constexpr double kMinAlphaDeg = 1.0;
inline constexpr double kMaxAlphaDeg = 25.0;

Vec3 mirror(const Vec3& incident, const Vec3& normal);

// Draws an outgoing direction for light arriving along `incident` (pointing
// toward the surface) at a surface with unit `normal` facing the incoming light.
Vec3 sample_bsdf(const ScatterSurface& surface, const Vec3& incident, const Vec3& normal,
                 Rng& rng);
// Convenience for a surface facing +z.
Vec3 sample_bsdf(const ScatterSurface& surface, const Vec3& incident, Rng& rng);

// Outgoing density per steradian. Specular surfaces are evaluated through a
// finite acceptance cone of half-angle `specular_acceptance_rad`.
double bsdf_density(const ScatterSurface& surface, const Vec3& incident, const Vec3& normal,
                    const Vec3& outgoing, double specular_acceptance_rad);

struct LedRing {
  int count = 8;
  double radius_mm = 9.0;
  std::vector<std::array<double, 3>> rgb;  // per-LED intensity in [0,1]^3

  static LedRing uniform(std::array<double, 3> rgb = {1.0, 1.0, 1.0}, int count = 8,
                         double radius_mm = 9.0);
  Vec3 position(int i) const;
};

// Indentation on the dome, given in surface coordinates (polar angle from the
// apex and azimuth).
struct Contact {
  double polar_deg = 0.0;
  double azimuth_deg = 0.0;
  double radius_mm = 1.0;
  double depth_mm = 0.2;
};

struct DomeGeometry {
  double radius_mm = 12.0;
  double camera_depth_mm = 4.0;  // pinhole below the base plane, on axis
  double albedo = 0.9;
  int max_bounces = 8;
  int image_size = 96;
  double specular_acceptance_deg = 1.0;
};

struct TaxelImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  int region = 1;  // 1 = apex, 2 = mid, 3 = side
  std::vector<double> data;  // row-major, interleaved channels

  static TaxelImage zeros(int width, int height, int channels, int region = 1);
  double& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  // Channel mean at a pixel.
  double intensity(int x, int y) const;
  double total() const;
};

struct RenderConfig {
  std::uint64_t photons = 1'000'000;
  std::uint64_t seed = 1;
  int shards = 8;
  int threads = 1;
  DomeGeometry geometry;
};

inline constexpr std::uint64_t kMinPhotonBudget = 100'000;

TaxelImage render(const ScatterSurface& surface, const LedRing& leds,
                  std::span<const Contact> contacts, const RenderConfig& config);

// Camera model helpers. The pinhole sits on the axis below the base plane and
// maps view angle linearly to image radius so the dome rim fills the frame.
struct PixelRay {
  Vec3 point;    // dome surface point seen by the pixel
  double polar_deg = 0.0;
  double azimuth_deg = 0.0;
};
std::optional<PixelRay> pixel_to_dome(const DomeGeometry& g, int image_size, double px,
                                      double py);
std::optional<std::array<double, 2>> dome_to_pixel(const DomeGeometry& g, int image_size,
                                                   const Vec3& point);
Vec3 dome_point(const DomeGeometry& g, double polar_deg, double azimuth_deg);

// Masks are row-major byte images, non-zero = selected.
using Mask = std::vector<std::uint8_t>;
// Pixels whose dome polar angle is below `max_polar_deg`.
Mask dome_mask(const DomeGeometry& g, int image_size, double max_polar_deg);
// Pixels whose surface point lies within [inner_mm, outer_mm) geodesic distance
// of the contact center.
Mask contact_ring_mask(const DomeGeometry& g, int image_size, const Contact& c,
                       double inner_mm, double outer_mm);

struct Uniformity {
  double std_over_mean = 0.0;
  double range_over_mean = 0.0;
};

Uniformity uniformity_metrics(const TaxelImage& img, const Mask& mask);
double cnr(const TaxelImage& img, const Mask& roi_indentation, const Mask& roi_background);

struct SweepPoint {
  ScatterSurface surface;
  Uniformity uniformity;
  std::vector<double> cnr_per_roi;
  double cnr_mean = 0.0;
  double objective = 0.0;
};

// Objective = cnr * mean_roi(min(CNR, cnr_cap) / cnr_cap)
//           - uniformity * log10(1 + (std/mean + range/mean) / 2)
// The cap models detectability saturation: contrast far above the noise does
// not make an indentation easier to find.
struct SweepWeights {
  double cnr = 1.0;
  double uniformity = 1.0;
  double cnr_cap = 10.0;
};

double cnr_score(std::span<const double> cnr_per_roi, double cap);
double nonuniformity_score(const Uniformity& u);

struct SweepConfig {
  RenderConfig render;
  std::vector<Contact> rois;  // one indentation per region of interest
  double uniformity_max_polar_deg = 60.0;
  double band_tolerance = 0.02;  // absolute objective slack defining the band
};

SweepConfig default_sweep_config();
SweepWeights default_sweep_weights();
std::vector<ScatterSurface> default_sweep_surfaces();

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t best = 0;
  std::vector<std::size_t> band;  // indices of points in the recommended band
  double band_lo_deg = 0.0;       // Gaussian alpha range of the band (NaN if Lambertian)
  double band_hi_deg = 0.0;
};

SweepResult scatter_sweep(std::span<const ScatterSurface> surfaces, const SweepWeights& weights,
                          const SweepConfig& config);
// Re-scores an existing table under different weights.
void score_sweep(SweepResult& result, const SweepWeights& weights, double band_tolerance);

std::string sweep_csv(const SweepResult& result);

// --- spatial resolution ---

struct LineProfile {
  double step_um = 0.1;
  std::vector<double> values;
};

// Two point-like prongs separated by `spacing_um`, blurred by a Gaussian PSF.
LineProfile two_prong_profile(double spacing_um, double psf_sigma_um, double step_um = 0.05);

struct MtfResult {
  double mtf = 0.0;
  bool resolvable = false;
};

inline constexpr double kResolvableMtf = 0.5;

MtfResult mtf_resolvable(const LineProfile& profile, double spacing_um, double psf_sigma_um);

// PSF sigma for which a prong pair at `spacing_um` sits exactly at MTF 0.5.
double calibrate_psf_sigma(double spacing_um, double target_mtf = kResolvableMtf);

struct RegionResolution {
  int region = 1;
  double limit_um = 0.0;  // spacing at which MTF reaches 0.5
  double psf_sigma_um = 0.0;
};
// Simulated per-region limits: 6, 8 and 22 um from apex to side.
std::array<RegionResolution, 3> default_region_resolution();

}  // namespace tactile::optics
