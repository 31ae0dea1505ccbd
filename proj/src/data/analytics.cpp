#include "flare/data/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "flare/data/csv.hpp"
#include "flare/error.hpp"

namespace flare::data {

namespace {

std::vector<double> mid_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && x[order[j]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
        for (std::size_t k = i; k < j; ++k) rank[order[k]] = r;
        i = j;
    }
    return rank;
}

std::string list_months(const std::vector<MonthStamp>& months) {
    std::string out;
    for (std::size_t i = 0; i < months.size(); ++i) {
        if (i) out += ", ";
        out += months[i].str();
    }
    return out;
}

// Values sorted by month.
MonthlySeries sorted(const MonthlySeries& s) {
    if (s.months.size() != s.values.size()) throw ValidationError("series '" + s.name + "' has unequal months and values");
    std::vector<std::size_t> order(s.months.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.months[a] < s.months[b]; });
    MonthlySeries out{s.name, {}, {}};
    for (std::size_t i : order) {
        if (!out.months.empty() && out.months.back() == s.months[i]) {
            throw ValidationError("series '" + s.name + "' repeats month " + s.months[i].str());
        }
        out.months.push_back(s.months[i]);
        out.values.push_back(s.values[i]);
    }
    return out;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("spearman needs series of equal length");
    if (x.size() < 3) throw ValidationError("spearman needs at least 3 observations");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValidationError("spearman needs finite values");
    }
    const auto rx = mid_ranks(x);
    const auto ry = mid_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) throw DomainError("spearman correlation is undefined for a constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> first_difference(std::span<const double> s) {
    if (s.size() < 2) throw ValidationError("first difference needs at least two values");
    std::vector<double> out(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i) out[i - 1] = s[i] - s[i - 1];
    return out;
}

CorrelationMode parse_correlation_mode(std::string_view s) {
    if (s == "levels") return CorrelationMode::levels;
    if (s == "lag1") return CorrelationMode::lag1;
    throw ValidationError("unknown correlation mode '" + std::string(s) + "' (levels or lag1)");
}

std::vector<CorrelationEntry> correlation_matrix(std::span<const MonthlySeries> series, CorrelationMode mode) {
    if (series.size() < 2) throw ValidationError("correlation matrix needs at least two series");
    std::vector<MonthlySeries> s;
    for (const auto& x : series) s.push_back(sorted(x));
    std::vector<MonthStamp> all;
    for (const auto& x : s) all.insert(all.end(), x.months.begin(), x.months.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::string problems;
    for (const auto& x : s) {
        std::vector<MonthStamp> missing;
        std::set_difference(all.begin(), all.end(), x.months.begin(), x.months.end(), std::back_inserter(missing));
        if (!missing.empty()) problems += "; '" + x.name + "' lacks " + list_months(missing);
    }
    if (!problems.empty()) throw ValidationError("series months are misaligned" + problems);
    if (mode == CorrelationMode::lag1) {
        const auto gaps = missing_months(all);
        if (!gaps.empty()) throw ValidationError("lag-1 differences need contiguous months; missing " + list_months(gaps));
        for (auto& x : s) x.values = first_difference(x.values);
    }
    std::vector<CorrelationEntry> out;
    for (std::size_t i = 1; i < s.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) out.push_back({s[i].name, s[j].name, spearman(s[i].values, s[j].values)});
    }
    return out;
}

std::string correlation_csv(std::span<const CorrelationEntry> entries) {
    std::string out = "row,col,rho\n";
    char buf[32];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.6f", e.rho);
        out += csv_escape(e.row) + ',' + csv_escape(e.col) + ',' + buf + '\n';
    }
    return out;
}

std::vector<MonthlySeries> correlation_variables(std::span<const SeriesRow> entity) {
    std::vector<MonthlySeries> out{{"VIIRS flared vol", {}, {}},  {"NDIC flared vol", {}, {}},
                                   {"NDIC oil prod", {}, {}},     {"NDIC gas prod", {}, {}},
                                   {"VIIRS flare count", {}, {}}, {"NDIC flaring well count", {}, {}},
                                   {"NDIC GOR", {}, {}}};
    for (const auto& r : entity) {
        const double v[] = {r.viirs_bcm, r.ndic_bcm, r.oil_bbl, r.gas_mcf, static_cast<double>(r.detections),
                            static_cast<double>(r.flaring_wells)};
        for (std::size_t k = 0; k < 6; ++k) {
            out[k].months.push_back(r.month);
            out[k].values.push_back(v[k]);
        }
        if (const auto g = r.gor()) {
            out[6].months.push_back(r.month);
            out[6].values.push_back(*g);
        }
    }
    return out;
}

std::vector<double> log_magnitude(std::span<const double> volumes_bcm) {
    std::vector<double> out;
    out.reserve(volumes_bcm.size());
    for (double v : volumes_bcm) {
        if (!(v > 0.0)) throw DomainError("log magnitude needs positive volumes");
        out.push_back(std::log(v));
    }
    return out;
}

double scott_bandwidth(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw ValidationError("bandwidth needs at least two values");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw ValidationError("density estimate needs values with nonzero variance");
    return sd * std::pow(static_cast<double>(n), -0.2);
}

KdeCurve kde(std::span<const double> values, double bandwidth, std::size_t points) {
    if (values.size() < 2) throw ValidationError("density estimate needs at least two values");
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("density estimate needs finite values");
    }
    if (points < 2) throw ValidationError("density grid needs at least two points");
    const double scott = scott_bandwidth(values);
    KdeCurve out;
    out.bandwidth = bandwidth > 0.0 ? bandwidth : scott;
    const double h = out.bandwidth;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it - 3.0 * h;
    const double hi = *hi_it + 3.0 * h;
    const double step = (hi - lo) / static_cast<double>(points - 1);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    out.x.resize(points);
    out.density.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + step * static_cast<double>(i);
        double s = 0.0;
        for (double v : values) {
            const double z = (x - v) / h;
            s += std::exp(-0.5 * z * z);
        }
        out.x[i] = x;
        out.density[i] = s * norm;
    }
    return out;
}

std::string kde_csv(const KdeCurve& curve) {
    std::string out = "x,density\n";
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        out += format_double(curve.x[i]) + ',' + format_double(curve.density[i]) + '\n';
    }
    return out;
}

}  // namespace flare::data
