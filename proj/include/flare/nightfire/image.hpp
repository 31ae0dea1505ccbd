#pragma once

// Single-band radiance images, their file format and a synthetic scene generator.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flare/geo/geo.hpp"

namespace flare::nightfire {

struct Pixel {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    auto operator<=>(const Pixel&) const = default;
};

// Row-major radiance grid in W m^-2 sr^-1 m^-1.
//
// The geotransform maps pixel coordinates to degrees as
//   lon = a + col * b + row * c
//   lat = d + col * e + row * f
// and pixel_location() evaluates it at the pixel center.
struct BandImage {
    std::string band;
    double wavelength_m = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    double pixel_area_m2 = 0.0;
    std::array<double, 6> geotransform{0.0, 1.0, 0.0, 0.0, 0.0, -1.0};

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
    geo::GeoPoint pixel_location(Pixel p) const;

    // Throws ValidationError on bad wavelength, area or grid size.
    void validate() const;
};

// Images are a data file plus a JSON sidecar at "<path>.json" holding band,
// wavelength_m, pixel_area_m2 and geotransform. A ".csv" data file is a comma
// separated grid, one image row per line; anything else is raw little-endian
// float64 and needs rows and cols in the sidecar.
BandImage read_band_image(const std::filesystem::path& path);
void write_band_image(const BandImage& img, const std::filesystem::path& path);

// -- synthetic scenes ---------------------------------------------------------------

struct Emitter {
    Pixel pixel;
    double temperature_k = 1800.0;
    double epsilon = 1e-3;
};

struct SceneOptions {
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::vector<double> wavelengths_m{1.24e-6, 1.61e-6, 2.25e-6, 3.7e-6};
    double background = 0.0;
    double noise_sd = 1e6;
    double pixel_area_m2 = 375.0 * 375.0;
    std::array<double, 6> geotransform{-103.5, 0.005, 0.0, 48.5, 0.0, -0.00337};
    std::uint64_t seed = 1;
};

// One image per wavelength: background plus Gaussian noise, with each emitter
// adding epsilon * B(lambda, T) to its pixel.
std::vector<BandImage> synthetic_scene(const SceneOptions& options, const std::vector<Emitter>& emitters);

}  // namespace flare::nightfire
