#include <algorithm>
#include <cmath>

#include "tactile/error.hpp"
#include "tactile/optics.hpp"

namespace tactile::optics {

LineProfile two_prong_profile(double spacing_um, double psf_sigma_um, double step_um) {
  if (!(psf_sigma_um > 0.0) || !(step_um > 0.0) || spacing_um < 0.0)
    throw Error(Errc::kInvalidArgument, "profile needs sigma > 0, step > 0, spacing >= 0");
  const double half = spacing_um / 2.0 + 5.0 * psf_sigma_um;
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / step_um)) + 1;
  LineProfile p;
  p.step_um = step_um;
  p.values.resize(n);
  const double inv = 1.0 / (2.0 * psf_sigma_um * psf_sigma_um);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -half + static_cast<double>(i) * step_um;
    const double a = x - spacing_um / 2.0, b = x + spacing_um / 2.0;
    p.values[i] = std::exp(-a * a * inv) + std::exp(-b * b * inv);
  }
  return p;
}

MtfResult mtf_resolvable(const LineProfile& profile, double spacing_um, double psf_sigma_um) {
  if (spacing_um < 0.0 || !(psf_sigma_um > 0.0))
    throw Error(Errc::kInvalidArgument, "spacing must be >= 0 and sigma > 0");
  const auto& v = profile.values;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) peaks.push_back(i);
  }
  if (peaks.empty()) throw Error(Errc::kNoPeaksFound, "profile has no local maximum");
  if (peaks.size() < 2) return {0.0, false};

  std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return v[a] > v[b]; });
  const std::size_t lo = std::min(peaks[0], peaks[1]);
  const std::size_t hi = std::max(peaks[0], peaks[1]);
  const double peak = v[peaks[0]];
  const double valley = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo),
                                          v.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  const double mtf = (peak + valley) > 0.0 ? (peak - valley) / (peak + valley) : 0.0;
  return {mtf, mtf >= kResolvableMtf};
}

double calibrate_psf_sigma(double spacing_um, double target_mtf) {
  if (!(spacing_um > 0.0) || !(target_mtf > 0.0 && target_mtf < 1.0))
    throw Error(Errc::kInvalidArgument, "calibration needs spacing > 0 and 0 < mtf < 1");
  auto mtf_at = [&](double sigma) {
    const auto prof = two_prong_profile(spacing_um, sigma, sigma / 400.0);
    return mtf_resolvable(prof, spacing_um, sigma).mtf;
  };
  // MTF falls monotonically as the PSF widens.
  double lo = spacing_um * 1e-3, hi = spacing_um;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mtf_at(mid) > target_mtf) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::array<RegionResolution, 3> default_region_resolution() {
  std::array<RegionResolution, 3> out{};
  const double limits[3] = {6.0, 8.0, 22.0};
  for (int r = 0; r < 3; ++r) {
    out[static_cast<std::size_t>(r)] = {r + 1, limits[r], calibrate_psf_sigma(limits[r])};
  }
  return out;
}

}  // namespace tactile::optics
