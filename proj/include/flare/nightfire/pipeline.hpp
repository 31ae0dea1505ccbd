#pragma once

// Hot-pixel detection, cross-band noise filtering and per-pixel source fits.

#include <span>
#include <string>
#include <vector>

#include "flare/geo/geo.hpp"
#include "flare/nightfire/image.hpp"
#include "flare/nightfire/radiometry.hpp"

namespace flare::nightfire {

struct DetectOptions {
    double threshold_sd = 4.0;
    // Median and 1.4826 * MAD in place of mean and standard deviation.
    bool robust = false;
};

// Pixels above center + threshold_sd * spread, in row-major order. Moments are
// taken over the whole band. A zero spread gives an empty set.
std::vector<Pixel> detect_hot_pixels(const BandImage& img, const DetectOptions& options = {});

// Pixels present in at least two of the per-band sets, sorted. Throws
// ValidationError for exactly one band; no bands gives an empty result.
std::vector<Pixel> coincidence_filter(std::span<const std::vector<Pixel>> per_band);

struct HotSource {
    geo::GeoPoint location;
    double temperature_k = 0.0;
    double epsilon = 0.0;
    double source_area_m2 = 0.0;
    double radiant_heat_mw = 0.0;
};

struct NightfireOptions {
    DetectOptions detect;
    GraybodyOptions fit;
    // Per-band radiance multipliers for atmospheric loss; empty means none.
    std::vector<double> atmospheric;
    bool parallel = true;
};

// Full chain over co-registered bands. Each hot pixel's radiance is taken
// relative to the band background (mean, or median when robust, of the pixels
// not flagged in that band). Pixels whose fit has no positive emission factor
// are dropped. Output is in row-major pixel order.
std::vector<HotSource> process_scene(std::span<const BandImage> bands, const NightfireOptions& options = {});

// lat,lon,T_k,epsilon,S_m2,RH_mw
std::string detections_csv(std::span<const HotSource> sources);

}  // namespace flare::nightfire
