#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "optics_internal.hpp"
#include "tactile/error.hpp"

namespace tactile::optics {

using std::numbers::pi;

namespace {
constexpr double kDeg = pi / 180.0;

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Normalization of exp(-theta^2 / 2 sigma^2) over the sphere of directions.
double gaussian_lobe_norm(double sigma) {
  const int steps = 4000;
  const double h = pi / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * h;
    const double f = std::exp(-t * t / (2.0 * sigma * sigma)) * std::sin(t);
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f;
  }
  return 2.0 * pi * acc * h / 3.0;
}
}  // namespace

ScatterSurface ScatterSurface::gaussian(double alpha_hwhm_deg) {
  if (!(alpha_hwhm_deg >= kMinAlphaDeg && alpha_hwhm_deg <= kMaxAlphaDeg)) {
    throw Error(Errc::kInvalidArgument, "Gaussian HWHM must lie in [1, 25] degrees");
  }
  return {ScatterMode::kGaussian, alpha_hwhm_deg};
}

double ScatterSurface::sigma_rad() const {
  return alpha_hwhm_deg * kDeg / std::sqrt(2.0 * std::log(2.0));
}

std::string ScatterSurface::label() const {
  switch (mode) {
    case ScatterMode::kLambertian: return "lambertian";
    case ScatterMode::kSpecular: return "specular";
    case ScatterMode::kGaussian: {
      std::ostringstream os;
      os << "gaussian:" << alpha_hwhm_deg;
      return os.str();
    }
  }
  return "?";
}

Vec3 mirror(const Vec3& incident, const Vec3& normal) {
  return incident - 2.0 * incident.dot(normal) * normal;
}

namespace detail {

void orthonormal_basis(const Vec3& n, Vec3& u, Vec3& v) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  u = n.cross(helper).normalized();
  v = n.cross(u);
}

BsdfEval::BsdfEval(const ScatterSurface& surface, double specular_acceptance_rad)
    : surface_(surface) {
  if (surface.mode == ScatterMode::kGaussian) {
    const double s = surface.sigma_rad();
    two_sigma_sq_ = 2.0 * s * s;
    gauss_norm_ = 1.0 / gaussian_lobe_norm(s);
  }
  cos_accept_ = std::cos(specular_acceptance_rad);
  accept_density_ = 1.0 / (2.0 * pi * (1.0 - cos_accept_));
}

double BsdfEval::operator()(const Vec3& incident, const Vec3& normal,
                            const Vec3& outgoing) const {
  const double cos_out = outgoing.dot(normal);
  if (cos_out <= 0.0) return 0.0;
  switch (surface_.mode) {
    case ScatterMode::kLambertian:
      return cos_out / pi;
    case ScatterMode::kSpecular:
      return mirror(incident, normal).dot(outgoing) >= cos_accept_ ? accept_density_ : 0.0;
    case ScatterMode::kGaussian: {
      const double c = std::clamp(mirror(incident, normal).dot(outgoing), -1.0, 1.0);
      const double theta = std::acos(c);
      return gauss_norm_ * std::exp(-theta * theta / two_sigma_sq_);
    }
  }
  return 0.0;
}

}  // namespace detail

Vec3 sample_bsdf(const ScatterSurface& surface, const Vec3& incident, const Vec3& normal,
                 Rng& rng) {
  const Vec3 r = mirror(incident, normal);
  switch (surface.mode) {
    case ScatterMode::kSpecular:
      return r;
    case ScatterMode::kLambertian: {
      Vec3 u, v;
      detail::orthonormal_basis(normal, u, v);
      const double r1 = uniform01(rng);
      const double r2 = uniform01(rng);
      const double sin_t = std::sqrt(r1);
      const double cos_t = std::sqrt(1.0 - r1);
      const double phi = 2.0 * pi * r2;
      return (sin_t * std::cos(phi) * u + sin_t * std::sin(phi) * v + cos_t * normal)
          .normalized();
    }
    case ScatterMode::kGaussian: {
      Vec3 u, v;
      detail::orthonormal_basis(r, u, v);
      const double sigma = surface.sigma_rad();
      for (int attempt = 0; attempt < 64; ++attempt) {
        // Rayleigh proposal thinned by sin(t)/t gives a lobe that is Gaussian
        // per unit solid angle.
        const double theta = sigma * std::sqrt(-2.0 * std::log(1.0 - uniform01(rng)));
        const double accept = uniform01(rng);
        const double phi = 2.0 * pi * uniform01(rng);
        if (theta >= pi) continue;
        if (theta > 0.0 && accept > std::sin(theta) / theta) continue;
        const Vec3 out = (std::cos(theta) * r +
                          std::sin(theta) * (std::cos(phi) * u + std::sin(phi) * v))
                             .normalized();
        if (out.dot(normal) > 0.0) return out;
      }
      return r;
    }
  }
  return r;
}

Vec3 sample_bsdf(const ScatterSurface& surface, const Vec3& incident, Rng& rng) {
  return sample_bsdf(surface, incident, Vec3::UnitZ(), rng);
}

double bsdf_density(const ScatterSurface& surface, const Vec3& incident, const Vec3& normal,
                    const Vec3& outgoing, double specular_acceptance_rad) {
  return detail::BsdfEval(surface, specular_acceptance_rad)(incident, normal, outgoing);
}

}  // namespace tactile::optics
