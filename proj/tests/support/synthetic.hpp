#pragma once

// Seeded synthetic datasets shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "flare/dist/distributions.hpp"
#include "flare/models/gp_series.hpp"
#include "flare/models/regression.hpp"

namespace flare::synthetic {

inline std::vector<models::StateMonthly> state_months(std::uint64_t seed, std::size_t months, double alpha,
                                                      double beta, double sigma) {
    dist::Rng rng(seed);
    std::vector<models::StateMonthly> out;
    for (std::size_t i = 0; i < months; ++i) {
        const double v = rng.uniform(0.05, 0.6);
        out.push_back({static_cast<int>(i), v, alpha + beta * v + sigma * rng.normal()});
    }
    return out;
}

struct CountySet {
    std::vector<models::CountyMonthly> rows;
    std::vector<double> alpha;
    std::vector<double> beta;
};

struct CountySpec {
    std::size_t counties = 12;
    std::size_t months = 12;
    std::size_t small_counties = 2;  // the last ones, with 3 months each
    double mu_alpha = 0.02;
    double mu_beta = 0.5;
    double sigma_alpha = 0.01;
    double sigma_beta = 0.08;
    double noise = 0.02;
    double rho = -0.6;
    // When set, the standard normal pairs are whitened so their sample
    // correlation is exactly rho.
    bool exact_correlation = false;
    // Slope offsets of the small counties from mu_beta, in units of sigma_beta.
    double small_offset = 0.0;
};

inline CountySet county_months(std::uint64_t seed, const CountySpec& spec) {
    dist::Rng rng(seed);
    const std::size_t j_total = spec.counties;
    std::vector<double> z0(j_total);
    std::vector<double> z1(j_total);
    for (std::size_t j = 0; j < j_total; ++j) {
        z0[j] = rng.normal();
        z1[j] = rng.normal();
    }
    if (spec.exact_correlation) {
        auto centre = [](std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double ss = 0.0;
            for (double& x : v) {
                x -= m;
                ss += x * x;
            }
            const double s = std::sqrt(ss / static_cast<double>(v.size() - 1));
            for (double& x : v) x /= s;
        };
        centre(z0);
        double proj = 0.0;
        double norm = 0.0;
        for (std::size_t j = 0; j < j_total; ++j) {
            proj += z0[j] * z1[j];
            norm += z0[j] * z0[j];
        }
        for (std::size_t j = 0; j < j_total; ++j) z1[j] -= proj / norm * z0[j];
        centre(z1);
    }
    CountySet s;
    for (std::size_t j = 0; j < j_total; ++j) {
        const bool small = j >= j_total - spec.small_counties;
        s.alpha.push_back(spec.mu_alpha + spec.sigma_alpha * z0[j]);
        double b = spec.mu_beta + spec.sigma_beta * (spec.rho * z0[j] + std::sqrt(1 - spec.rho * spec.rho) * z1[j]);
        if (small && spec.small_offset != 0.0) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            b = spec.mu_beta + sign * spec.small_offset * spec.sigma_beta;
        }
        s.beta.push_back(b);
        const std::size_t n = small ? 3 : spec.months;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = rng.uniform(0.02, 0.3);
            s.rows.push_back({j, static_cast<int>(i), v, s.alpha[j] + s.beta[j] * v + spec.noise * rng.normal()});
        }
    }
    return s;
}

// Binomial well counts with a constant flaring probability.
inline models::EntitySeries constant_well_proportion(std::uint64_t seed, std::size_t months, long wells, double p) {
    dist::Rng rng(seed);
    models::EntitySeries s;
    for (std::size_t i = 0; i < months; ++i) {
        s.months.push_back(static_cast<double>(i));
        s.wells.push_back(wells);
        s.flaring_wells.push_back(dist::draw_binomial(rng, wells, p));
    }
    return s;
}

inline std::vector<long> negbin_counts(std::uint64_t seed, std::size_t n, double mu, double phi) {
    dist::Rng rng(seed);
    std::vector<long> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(dist::draw_neg_binomial(rng, mu, phi));
    return out;
}

// Two well separated Gaussian clusters of log volume, alternating labels.
inline std::vector<double> two_clusters(std::uint64_t seed, std::size_t n, double m1 = -6.0, double m2 = -3.0,
                                        double sd = 0.3) {
    dist::Rng rng(seed);
    std::vector<double> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back((i % 2 == 0 ? m1 : m2) + sd * rng.normal());
    return x;
}

// -- pipeline inputs ----------------------------------------------------------------

struct PipelineInputs {
    std::string viirs_csv;
    std::string ndic_csv;
    std::string counties_geojson;
    std::string oilfields_geojson;
};

inline std::string box_feature(const std::string& id, const std::string& kind, double lon0, double lat0, double lon1,
                               double lat1) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  R"({"type":"Feature","id":"%s","properties":{"kind":"%s"},"geometry":{"type":"Polygon",)"
                  R"("coordinates":[[[%.4f,%.4f],[%.4f,%.4f],[%.4f,%.4f],[%.4f,%.4f],[%.4f,%.4f]]]}})",
                  id.c_str(), kind.c_str(), lon0, lat0, lon1, lat0, lon1, lat1, lon0, lat1, lon0, lat0);
    return buf;
}

// Three counties side by side, two oilfields, up to 40 active wells and about
// a dozen detections a month. The monthly NDIC to VIIRS ratio is a smooth
// seasonal curve with a slow drift, plus 0.01 bcm of noise.
inline PipelineInputs pipeline_inputs(std::uint64_t seed, std::size_t months = 36) {
    const double kBcmPerMcf = 28.316846592e-9;
    dist::Rng rng(seed);
    PipelineInputs in;
    in.counties_geojson = "{\"type\":\"FeatureCollection\",\"features\":[" +
                          box_feature("WIL", "county", -104.0, 47.5, -103.4, 48.5) + "," +
                          box_feature("MCK", "county", -103.4, 47.5, -102.8, 48.5) + "," +
                          box_feature("MTL", "county", -102.8, 47.5, -102.2, 48.5) + "]}\n";
    in.oilfields_geojson = "{\"type\":\"FeatureCollection\",\"features\":[" +
                           box_feature("BAKER", "oilfield", -103.9, 47.7, -103.1, 48.3) + "," +
                           box_feature("SANISH", "oilfield", -102.7, 47.7, -102.3, 48.3) + "]}\n";
    struct Site {
        double lat, lon;
        std::string county, field;
    };
    const char* operators[] = {"Acme Energy", "Basin Oil, LLC", "Prairie Resources"};
    std::vector<Site> wells;
    for (int i = 0; i < 40; ++i) {
        Site w;
        w.lat = rng.uniform(47.55, 48.45);
        w.lon = rng.uniform(-103.95, -102.25);
        w.county = w.lon < -103.4 ? "WIL" : (w.lon < -102.8 ? "MCK" : "MTL");
        if (w.lat > 47.7 && w.lat < 48.3 && w.lon > -103.9 && w.lon < -103.1) {
            w.field = "BAKER";
        } else if (w.lat > 47.7 && w.lat < 48.3 && w.lon > -102.7 && w.lon < -102.3) {
            w.field = "SANISH";
        } else {
            w.field = "OTHER";
        }
        wells.push_back(w);
    }
    in.viirs_csv = "month,lat,lon,volume_bcm\n";
    in.ndic_csv = "month,well_id,operator,oilfield,county,lat,lon,oil_bbl,gas_mcf,flared_mcf\n";
    char buf[256];
    for (std::size_t t = 0; t < months; ++t) {
        char month[16];
        std::snprintf(month, sizeof month, "%04d-%02d", 2018 + static_cast<int>(t / 12), static_cast<int>(t % 12) + 1);
        const double viirs_total = rng.uniform(0.05, 0.6);
        const double ratio = 0.9 * std::exp(0.15 * std::sin(2.0 * 3.141592653589793 * static_cast<double>(t) / 12.0) +
                                            0.2 * static_cast<double>(t) / static_cast<double>(months));
        const double ndic_total = std::max(viirs_total * ratio + 0.01 * rng.normal(), 1e-3);
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < wells.size(); ++i) {
            if (rng.uniform() < 0.85) active.push_back(i);
        }
        const int n_det = 8 + static_cast<int>(rng.uniform() * 8.0);
        for (int d = 0; d < n_det; ++d) {
            const Site& w = wells[static_cast<std::size_t>(rng.uniform() * 40.0) % 40];
            std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.9g\n", month, w.lat + 0.001 * rng.normal(),
                          w.lon + 0.0015 * rng.normal(), viirs_total / n_det);
            in.viirs_csv += buf;
        }
        for (std::size_t i : active) {
            const double flared = ndic_total / kBcmPerMcf / static_cast<double>(active.size());
            const double gas = flared * rng.uniform(4.0, 8.0);
            const double oil = gas / rng.uniform(1.0, 2.0);
            std::snprintf(buf, sizeof buf, "%s,W%04zu,\"%s\",%s,%s,%.6f,%.6f,%.3f,%.3f,%.3f\n", month, i + 1,
                          operators[i % 3], wells[i].field.c_str(), wells[i].county.c_str(), wells[i].lat,
                          wells[i].lon, oil, gas, flared);
            in.ndic_csv += buf;
        }
    }
    return in;
}

}  // namespace flare::synthetic
