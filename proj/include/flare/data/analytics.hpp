#pragma once

// Rank correlation, differencing, log magnitudes and kernel density.

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flare/data/records.hpp"
#include "flare/data/series.hpp"

namespace flare::data {

// Pearson correlation of mid-ranks. Throws ValidationError for unequal or
// short (< 3) inputs and non-finite values, DomainError for a constant series.
double spearman(std::span<const double> x, std::span<const double> y);

// y'_t = y_t - y_{t-1}; needs at least two values.
std::vector<double> first_difference(std::span<const double> s);

struct MonthlySeries {
    std::string name;
    std::vector<MonthStamp> months;
    std::vector<double> values;
};

enum class CorrelationMode { levels, lag1 };
CorrelationMode parse_correlation_mode(std::string_view s);

struct CorrelationEntry {
    std::string row;
    std::string col;
    double rho = 0.0;
};

// Strict lower triangle (row after col in input order). Every series must
// cover the same months; lag1 also needs them contiguous. Errors list the
// missing stamps.
std::vector<CorrelationEntry> correlation_matrix(std::span<const MonthlySeries> series, CorrelationMode mode);

// row,col,rho
std::string correlation_csv(std::span<const CorrelationEntry> entries);

// The monthly variables of one entity: VIIRS flared vol, NDIC flared vol,
// NDIC oil prod, NDIC gas prod, VIIRS flare count, NDIC flaring well count
// and NDIC GOR (months without oil are left out of that one).
std::vector<MonthlySeries> correlation_variables(std::span<const SeriesRow> entity);

// Natural log; throws DomainError for a non-positive volume.
std::vector<double> log_magnitude(std::span<const double> volumes_bcm);

struct KdeCurve {
    double bandwidth = 0.0;
    std::vector<double> x;
    std::vector<double> density;
};

// sd * n^(-1/5) with the sample standard deviation.
double scott_bandwidth(std::span<const double> values);

// Gaussian kernel estimate on `points` evenly spaced values from min - 3h to
// max + 3h. A non-positive bandwidth selects Scott's rule. Throws
// ValidationError for fewer than two values or zero variance.
KdeCurve kde(std::span<const double> values, double bandwidth = 0.0, std::size_t points = 512);

// x,density
std::string kde_csv(const KdeCurve& curve);

}  // namespace flare::data
