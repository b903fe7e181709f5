#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "optics_internal.hpp"
#include "tactile/error.hpp"

namespace tactile::optics {

using std::numbers::pi;

namespace {
constexpr double kDeg = pi / 180.0;

struct Camera {
  Vec3 center;
  double half_size = 0.0;
  double psi_max = 0.0;
  double k = 0.0;  // pixels per radian of view angle

  Camera(const DomeGeometry& g, int image_size)
      : center(0.0, 0.0, -g.camera_depth_mm),
        half_size(image_size / 2.0),
        psi_max(std::atan2(g.radius_mm, g.camera_depth_mm)),
        k(half_size / psi_max) {}

  // Solid angle seen by one pixel at view angle psi (equidistant mapping).
  double pixel_solid_angle(double psi) const {
    return psi > 1e-9 ? std::sin(psi) / (k * k * psi) : 1.0 / (k * k);
  }
};

struct ContactFrame {
  Vec3 center_dir;
  double radius_mm;
  double cap_radius_mm;
};

Vec3 cosine_hemisphere(const Vec3& n, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Vec3 u, v;
  detail::orthonormal_basis(n, u, v);
  const double r1 = u01(rng);
  const double r2 = u01(rng);
  const double s = std::sqrt(r1);
  const double phi = 2.0 * pi * r2;
  return (s * std::cos(phi) * u + s * std::sin(phi) * v + std::sqrt(1.0 - r1) * n).normalized();
}

// Inward normal at dome point p, tilted by any spherical-cap indentation.
Vec3 surface_normal(const Vec3& p_unit, std::span<const ContactFrame> contacts, double radius) {
  Vec3 n = -p_unit;
  for (const auto& c : contacts) {
    const double cosg = std::clamp(p_unit.dot(c.center_dir), -1.0, 1.0);
    const double s = radius * std::acos(cosg);
    if (s >= c.radius_mm) continue;
    Vec3 away = p_unit * cosg - c.center_dir;  // tangent, pointing away from the center
    const double len = away.norm();
    if (len < 1e-12) continue;
    away /= len;
    const double sin_b = std::min(s / c.cap_radius_mm, 1.0);
    const double cos_b = std::sqrt(1.0 - sin_b * sin_b);
    n = (cos_b * n + sin_b * away).normalized();
  }
  return n;
}

void trace_shard(const ScatterSurface& surface, const LedRing& leds,
                 std::span<const ContactFrame> contacts, const RenderConfig& cfg,
                 std::uint64_t first, std::uint64_t last, Rng rng, std::vector<double>& acc) {
  const DomeGeometry& g = cfg.geometry;
  const int size = g.image_size;
  const Camera cam(g, size);
  const detail::BsdfEval eval(surface, g.specular_acceptance_deg * kDeg);
  const double radius = g.radius_mm;
  const double per_photon = static_cast<double>(leds.count) / static_cast<double>(cfg.photons);

  for (std::uint64_t i = first; i < last; ++i) {
    const int led = static_cast<int>(i % static_cast<std::uint64_t>(leds.count));
    const auto& rgb = leds.rgb[static_cast<std::size_t>(led)];
    Vec3 origin = leds.position(led);
    Vec3 dir = cosine_hemisphere(Vec3::UnitZ(), rng);
    double w = per_photon;

    for (int bounce = 0; bounce < g.max_bounces; ++bounce) {
      const double od = origin.dot(dir);
      const double t_sphere = -od + std::sqrt(std::max(0.0, od * od - origin.squaredNorm() + radius * radius));
      if (dir.z() < 0.0) {
        const double t_base = -origin.z() / dir.z();
        if (t_base < t_sphere) break;  // absorbed by the base plane
      }
      const Vec3 p_unit = (origin + t_sphere * dir).normalized();
      const Vec3 p = p_unit * radius;
      const Vec3 n0 = -p_unit;
      Vec3 n = n0;
      if (!contacts.empty()) {
        n = surface_normal(p_unit, contacts, radius);
        const double cos_new = -dir.dot(n);
        if (cos_new <= 0.0) break;
        const double cos_old = std::max(-dir.dot(n0), 1e-6);
        w *= std::min(cos_new / cos_old, 4.0);
      }

      const Vec3 to_cam_v = cam.center - p;
      const double dist = to_cam_v.norm();
      const Vec3 to_cam = to_cam_v / dist;
      const double density = eval(dir, n, to_cam);
      if (density > 0.0) {
        const Vec3 view = -to_cam;
        const double psi = std::acos(std::clamp(view.z(), -1.0, 1.0));
        const double phi = std::atan2(view.y(), view.x());
        const double r = cam.k * psi;
        const int px = static_cast<int>(std::floor(cam.half_size + r * std::cos(phi)));
        const int py = static_cast<int>(std::floor(cam.half_size + r * std::sin(phi)));
        if (px >= 0 && py >= 0 && px < size && py < size) {
          const double radiance =
              g.albedo * w * density / (dist * dist * cam.pixel_solid_angle(psi));
          double* dst = acc.data() + (static_cast<std::size_t>(py) * size + px) * 3;
          dst[0] += radiance * rgb[0];
          dst[1] += radiance * rgb[1];
          dst[2] += radiance * rgb[2];
        }
      }

      w *= g.albedo;
      dir = sample_bsdf(surface, dir, n, rng);
      origin = p * (1.0 - 1e-9);
    }
  }
}

}  // namespace

LedRing LedRing::uniform(std::array<double, 3> rgb, int count, double radius_mm) {
  LedRing ring;
  ring.count = count;
  ring.radius_mm = radius_mm;
  ring.rgb.assign(static_cast<std::size_t>(count), rgb);
  return ring;
}

Vec3 LedRing::position(int i) const {
  const double phi = 2.0 * pi * i / count;
  return {radius_mm * std::cos(phi), radius_mm * std::sin(phi), 1e-9};
}

TaxelImage TaxelImage::zeros(int width, int height, int channels, int region) {
  TaxelImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.region = region;
  img.data.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
  return img;
}

double TaxelImage::intensity(int x, int y) const {
  double s = 0.0;
  for (int c = 0; c < channels; ++c) s += at(x, y, c);
  return s / channels;
}

double TaxelImage::total() const {
  double s = 0.0;
  for (double v : data) s += v;
  return s;
}

Vec3 dome_point(const DomeGeometry& g, double polar_deg, double azimuth_deg) {
  const double t = polar_deg * kDeg, p = azimuth_deg * kDeg;
  return g.radius_mm * Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
}

std::optional<PixelRay> pixel_to_dome(const DomeGeometry& g, int image_size, double px,
                                      double py) {
  const Camera cam(g, image_size);
  const double dx = px - cam.half_size, dy = py - cam.half_size;
  const double psi = std::hypot(dx, dy) / cam.k;
  if (psi > cam.psi_max) return std::nullopt;
  const double phi = std::atan2(dy, dx);
  const Vec3 v(std::sin(psi) * std::cos(phi), std::sin(psi) * std::sin(phi), std::cos(psi));
  const double cv = cam.center.dot(v);
  const double t = -cv + std::sqrt(cv * cv - cam.center.squaredNorm() + g.radius_mm * g.radius_mm);
  PixelRay ray;
  ray.point = cam.center + t * v;
  ray.polar_deg = std::acos(std::clamp(ray.point.z() / g.radius_mm, -1.0, 1.0)) / kDeg;
  ray.azimuth_deg = std::atan2(ray.point.y(), ray.point.x()) / kDeg;
  return ray;
}

std::optional<std::array<double, 2>> dome_to_pixel(const DomeGeometry& g, int image_size,
                                                   const Vec3& point) {
  const Camera cam(g, image_size);
  const Vec3 view = (point - cam.center).normalized();
  const double psi = std::acos(std::clamp(view.z(), -1.0, 1.0));
  if (psi > cam.psi_max + 1e-9) return std::nullopt;
  const double phi = std::atan2(view.y(), view.x());
  return std::array<double, 2>{cam.half_size + cam.k * psi * std::cos(phi),
                               cam.half_size + cam.k * psi * std::sin(phi)};
}

TaxelImage render(const ScatterSurface& surface, const LedRing& leds,
                  std::span<const Contact> contacts, const RenderConfig& config) {
  if (config.photons < kMinPhotonBudget)
    throw Error(Errc::kBudgetTooSmall, "photon budget below 1e5");
  if (leds.count <= 0 || leds.rgb.size() != static_cast<std::size_t>(leds.count))
    throw Error(Errc::kInvalidArgument, "LED ring needs one RGB triple per LED");
  const DomeGeometry& g = config.geometry;
  if (g.image_size <= 0 || !(g.radius_mm > 0.0) || !(g.camera_depth_mm > 0.0))
    throw Error(Errc::kInvalidArgument, "invalid dome geometry");

  std::vector<ContactFrame> frames;
  for (const auto& c : contacts) {
    if (!(c.radius_mm > 0.0) || !(c.depth_mm > 0.0))
      throw Error(Errc::kInvalidArgument, "contact radius and depth must be positive");
    if (c.polar_deg < 0.0 || c.polar_deg > 90.0)
      throw Error(Errc::kContactOutsideSurface, "contact center off the dome");
    frames.push_back({dome_point(g, c.polar_deg, c.azimuth_deg).normalized(), c.radius_mm,
                      (c.radius_mm * c.radius_mm + c.depth_mm * c.depth_mm) / (2.0 * c.depth_mm)});
  }

  const int size = g.image_size;
  const std::size_t n = static_cast<std::size_t>(size) * size * 3;
  const int shards = std::max(1, config.shards);
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(shards),
                                           std::vector<double>(n, 0.0));
  auto run_shard = [&](int s) {
    const std::uint64_t first = config.photons * static_cast<std::uint64_t>(s) / shards;
    const std::uint64_t last = config.photons * static_cast<std::uint64_t>(s + 1) / shards;
    trace_shard(surface, leds, frames, config, first, last,
                make_rng(config.seed, static_cast<std::uint64_t>(s)),
                partial[static_cast<std::size_t>(s)]);
  };

  const int threads = std::clamp(config.threads, 1, shards);
  if (threads == 1) {
    for (int s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int s = t; s < shards; s += threads) run_shard(s);
      });
    }
    for (auto& th : pool) th.join();
  }

  TaxelImage img = TaxelImage::zeros(size, size, 3, 1);
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < n; ++i) img.data[i] += part[i];
  }
  return img;
}

}  // namespace tactile::optics
