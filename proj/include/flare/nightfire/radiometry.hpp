#pragma once

// Planck radiance, gray-body fitting, source area and radiant heat.

#include <span>

namespace flare::nightfire {

inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kLightSpeed = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kStefanBoltzmann = 5.670374419e-8;

// Spectral radiance in W m^-2 sr^-1 m^-1. Zero at T = 0; throws DomainError
// for a non-positive wavelength or negative temperature.
double planck_radiance(double wavelength_m, double temperature_k);

struct GraybodyOptions {
    double t_min = 600.0;
    double t_max = 3000.0;
    double t_step = 10.0;
    double tolerance_k = 1e-6;
};

struct GraybodyFit {
    double temperature_k = 0.0;
    double epsilon = 0.0;        // clamped to (0, 1]
    double epsilon_raw = 0.0;    // least-squares value before clamping
    double residual = 0.0;       // sum (r - eps B)^2 / sum r^2
};

// Least-squares gray body through per-band radiances. The emission factor has
// a closed form at each temperature, so only T is searched: a coarse grid,
// then golden section around the best grid point.
// Throws ValidationError for fewer than two bands, mismatched lengths, all-zero
// radiances or a fit with no positive emission factor.
GraybodyFit fit_graybody(std::span<const double> radiances, std::span<const double> wavelengths_m,
                         const GraybodyOptions& options = {});

// S = eps * A in m^2.
double source_area(double epsilon, double pixel_area_m2);

// sigma T^4 S in megawatts.
double radiant_heat(double temperature_k, double source_area_m2);

}  // namespace flare::nightfire
