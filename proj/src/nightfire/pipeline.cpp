#include "flare/nightfire/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

#include "flare/error.hpp"
#include "flare/simd/kernels.hpp"

namespace flare::nightfire {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

void check_stack(std::span<const BandImage> bands) {
    if (bands.size() < 2) throw ValidationError("at least two bands are required");
    for (const auto& b : bands) {
        b.validate();
        const auto& f = bands.front();
        if (b.rows != f.rows || b.cols != f.cols) throw ValidationError("band grids differ in shape");
        if (b.geotransform != f.geotransform) throw ValidationError("band geotransforms differ");
        if (b.pixel_area_m2 != f.pixel_area_m2) throw ValidationError("band pixel areas differ");
    }
}

}  // namespace

std::vector<Pixel> detect_hot_pixels(const BandImage& img, const DetectOptions& options) {
    if (img.values.empty()) throw ValidationError("image grid is empty");
    if (img.values.size() != img.rows * img.cols) throw ValidationError("image value count does not match rows x cols");
    const auto& k = simd::kernels();
    const std::size_t n = img.values.size();
    double center = 0.0;
    double spread = 0.0;
    if (options.robust) {
        center = median_of(img.values);
        std::vector<double> dev(n);
        for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(img.values[i] - center);
        spread = 1.4826 * median_of(std::move(dev));
    } else {
        center = k.sum(img.values.data(), n) / static_cast<double>(n);
        spread = std::sqrt(k.sum_sq_dev(img.values.data(), n, center) / static_cast<double>(n));
    }
    if (!(spread > 0.0)) return {};
    std::vector<std::uint32_t> idx(n);
    const std::size_t m = k.select_above(img.values.data(), n, center + options.threshold_sd * spread, idx.data());
    std::vector<Pixel> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.push_back({static_cast<std::uint32_t>(idx[i] / img.cols), static_cast<std::uint32_t>(idx[i] % img.cols)});
    }
    return out;
}

std::vector<Pixel> coincidence_filter(std::span<const std::vector<Pixel>> per_band) {
    if (per_band.empty()) return {};
    if (per_band.size() == 1) throw ValidationError("coincidence filter needs at least two bands");
    std::vector<Pixel> all;
    for (const auto& band : per_band) {
        std::vector<Pixel> unique(band);
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        all.insert(all.end(), unique.begin(), unique.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<Pixel> out;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        if (j - i >= 2) out.push_back(all[i]);
        i = j;
    }
    return out;
}

std::vector<HotSource> process_scene(std::span<const BandImage> bands, const NightfireOptions& options) {
    check_stack(bands);
    if (!options.atmospheric.empty()) {
        if (options.atmospheric.size() != bands.size()) throw ValidationError("one atmospheric multiplier per band");
        for (double m : options.atmospheric) {
            if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("atmospheric multipliers must be positive");
        }
    }
    const std::size_t nb = bands.size();

    // Per-band detection and background level.
    struct BandResult {
        std::vector<Pixel> hot;
        double background = 0.0;
    };
    auto analyse = [&options](const BandImage& img) {
        BandResult r;
        r.hot = detect_hot_pixels(img, options.detect);
        std::vector<char> flagged(img.values.size(), 0);
        for (const auto& p : r.hot) flagged[p.row * img.cols + p.col] = 1;
        std::vector<double> quiet;
        quiet.reserve(img.values.size());
        for (std::size_t i = 0; i < img.values.size(); ++i) {
            if (!flagged[i]) quiet.push_back(img.values[i]);
        }
        if (options.detect.robust) {
            r.background = median_of(std::move(quiet));
        } else {
            r.background = simd::sum(quiet) / static_cast<double>(quiet.size());
        }
        return r;
    };
    std::vector<BandResult> results(nb);
    if (options.parallel) {
        std::vector<std::future<BandResult>> jobs;
        for (const auto& b : bands) jobs.push_back(std::async(std::launch::async, analyse, std::cref(b)));
        for (std::size_t i = 0; i < nb; ++i) results[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < nb; ++i) results[i] = analyse(bands[i]);
    }

    std::vector<std::vector<Pixel>> hot(nb);
    for (std::size_t i = 0; i < nb; ++i) hot[i] = results[i].hot;
    const auto pixels = coincidence_filter(hot);

    std::vector<double> lambda(nb);
    for (std::size_t i = 0; i < nb; ++i) lambda[i] = bands[i].wavelength_m;
    std::vector<HotSource> out;
    std::vector<double> r(nb);
    const double area = bands.front().pixel_area_m2;
    for (const auto& p : pixels) {
        for (std::size_t i = 0; i < nb; ++i) {
            r[i] = bands[i].at(p.row, p.col) - results[i].background;
            if (!options.atmospheric.empty()) r[i] *= options.atmospheric[i];
        }
        GraybodyFit fit;
        try {
            fit = fit_graybody(r, lambda, options.fit);
        } catch (const ValidationError&) {
            continue;
        }
        HotSource s;
        s.location = bands.front().pixel_location(p);
        s.temperature_k = fit.temperature_k;
        s.epsilon = fit.epsilon;
        s.source_area_m2 = source_area(fit.epsilon, area);
        s.radiant_heat_mw = radiant_heat(fit.temperature_k, s.source_area_m2);
        out.push_back(s);
    }
    return out;
}

std::string detections_csv(std::span<const HotSource> sources) {
    std::string out = "lat,lon,T_k,epsilon,S_m2,RH_mw\n";
    char buf[192];
    for (const auto& s : sources) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.3f,%.9g,%.9g,%.9g\n", s.location.lat(), s.location.lon(),
                      s.temperature_k, s.epsilon, s.source_area_m2, s.radiant_heat_mw);
        out += buf;
    }
    return out;
}

}  // namespace flare::nightfire
