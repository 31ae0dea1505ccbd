#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "flare/data/analytics.hpp"
#include "flare/data/csv.hpp"
#include "flare/data/records.hpp"
#include "flare/data/series.hpp"
#include "flare/dist/rng.hpp"
#include "flare/error.hpp"

using namespace flare;
using namespace flare::data;

namespace {

const std::filesystem::path kFixtures = FLARE_FIXTURE_DIR;

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

MonthlySeries monthly(std::string name, MonthStamp start, std::vector<double> values) {
    MonthlySeries s{std::move(name), {}, std::move(values)};
    for (std::size_t i = 0; i < s.values.size(); ++i) s.months.push_back(start.plus(static_cast<int>(i)));
    return s;
}

}  // namespace

TEST_CASE("month stamps") {
    const auto m = MonthStamp::parse("2015-05");
    CHECK(m.year() == 2015);
    CHECK(m.month() == 5);
    CHECK(m.str() == "2015-05");
    CHECK(m.plus(8).str() == "2016-01");
    CHECK(m.plus(-5).str() == "2014-12");
    CHECK(MonthStamp::parse("2018-12").index_since(m) == 43);
    CHECK(MonthStamp(2016, 1) < MonthStamp(2016, 2));
    CHECK(MonthStamp(2015, 12) < MonthStamp(2016, 1));
    for (const char* bad : {"2015-13", "2015-00", "2015-5", "15-05", "2015/05", "abcd-ef", ""}) {
        CHECK_THROWS_AS(MonthStamp::parse(bad), ValidationError);
    }
    const std::vector<MonthStamp> months{MonthStamp(2016, 1), MonthStamp(2016, 4), MonthStamp(2016, 2)};
    const auto gaps = missing_months(months);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0] == MonthStamp(2016, 3));
}

TEST_CASE("CSV reader") {
    const auto t = parse_csv("a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\n\n2,,\"multi\nline\"\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.records.size() == 2);
    CHECK(t.records[0].line == 2);
    CHECK(t.records[0].fields == std::vector<std::string>{"1", "x, y", "say \"hi\""});
    CHECK(t.records[1].line == 4);
    CHECK(t.records[1].fields == std::vector<std::string>{"2", "", "multi\nline"});
    CHECK_THROWS_AS(parse_csv("a\n\"open"), ValidationError);
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("q\"") == "\"q\"\"\"");
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("VIIRS and NDIC golden files") {
    const auto v = parse_viirs_csv(kFixtures / "viirs_golden.csv");
    REQUIRE(v.size() == 3);
    CHECK(v[0].line == 2);
    CHECK(v[0].month == MonthStamp(2016, 3));
    CHECK(v[0].lat == 47.81234);
    CHECK(v[0].lon == -103.2541);
    CHECK(v[0].volume_bcm == 0.000412);
    CHECK(v[1].volume_bcm == 0.0125);
    CHECK(v[2].month == MonthStamp(2016, 4));
    CHECK(v[2].volume_bcm == 0.0);

    const auto n = parse_ndic_csv(kFixtures / "ndic_golden.csv");
    REQUIRE(n.size() == 3);
    CHECK(n[0].well_id == "33-053-04512");
    CHECK(n[0].operator_name == "Continental Resources");
    CHECK(n[0].oilfield == "BAKER");
    CHECK(n[0].county == "MCK");
    CHECK(n[0].lat == 47.8125);
    CHECK(n[0].lon == -103.25);
    CHECK(n[0].oil_bbl == 12034.0);
    CHECK(n[0].gas_mcf == 20110.5);
    CHECK(n[0].flared_mcf == 1503.0);
    CHECK(n[1].operator_name == "Whiting Oil and Gas, Corp");
    CHECK(n[1].county == "MTL");
    CHECK(n[2].operator_name == "Quote \"Q\" Energy");
    CHECK(n[2].oilfield == "BLUE BUTTES");
    CHECK(n[2].oil_bbl == 850.25);
    CHECK(n[2].flared_mcf == 0.5);
    CHECK(n[2].line == 4);

    // Serialize and parse again.
    const std::string vt = viirs_csv(v);
    CHECK(vt.rfind(std::string(kViirsHeader) + "\n", 0) == 0);
    const auto v2 = parse_viirs(vt);
    REQUIRE(v2.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v2[i].month == v[i].month);
        CHECK(v2[i].lat == v[i].lat);
        CHECK(v2[i].lon == v[i].lon);
        CHECK(v2[i].volume_bcm == v[i].volume_bcm);
    }
    CHECK(viirs_csv(v2) == vt);
    const std::string nt = ndic_csv(n);
    const auto n2 = parse_ndic(nt, models::CountyRegistry::north_dakota());
    REQUIRE(n2.size() == n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        CHECK(n2[i].well_id == n[i].well_id);
        CHECK(n2[i].operator_name == n[i].operator_name);
        CHECK(n2[i].oilfield == n[i].oilfield);
        CHECK(n2[i].gas_mcf == n[i].gas_mcf);
        CHECK(n2[i].lat == n[i].lat);
    }
    CHECK(ndic_csv(n2) == nt);
}

TEST_CASE("record validation") {
    const auto reg = models::CountyRegistry::north_dakota();
    CHECK(parse_viirs("month,lat,lon,volume_bcm\n").empty());
    CHECK(parse_ndic(std::string(kNdicHeader) + "\n", reg).empty());

    std::string e = error_of([] { parse_viirs("month,lat,lon,volume_bcm\n2016-01,47,-103,0.1\n2016-01,47,-103,-0.5\n"); });
    CHECK(e.find("line 3") != std::string::npos);
    CHECK(e.find("volume_bcm") != std::string::npos);
    e = error_of([] { parse_viirs("month,lat,lon,volume_bcm\n2016-01,91,-103,0.1\n"); });
    CHECK(e.find("'lat'") != std::string::npos);
    e = error_of([] { parse_viirs("month,lat,lon,volume_bcm\n2016-01,47,-181,0.1\n"); });
    CHECK(e.find("'lon'") != std::string::npos);
    e = error_of([] { parse_viirs("month,lat,lon,volume_bcm\n2016-01,47,x,0.1\n"); });
    CHECK(e.find("'lon'") != std::string::npos);
    e = error_of([] { parse_viirs("month,lat,lon,volume_bcm\n16-01,47,-103,0.1\n"); });
    CHECK(e.find("'month'") != std::string::npos);
    e = error_of([] { parse_viirs("month,lat,lon,volume_bcm\n2016-01,47,-103\n"); });
    CHECK(e.find("line 2") != std::string::npos);
    e = error_of([] { parse_viirs("month,lat,volume_bcm\n"); });
    CHECK(e.find("'lon'") != std::string::npos);
    CHECK_THROWS_AS(parse_viirs(""), ValidationError);

    const std::string h = std::string(kNdicHeader) + "\n";
    e = error_of([&] { parse_ndic(h + "2016-01,w1,op,F,XYZ,47,-103,1,1,1\n", reg); });
    CHECK(e.find("'county'") != std::string::npos);
    e = error_of([&] { parse_ndic(h + "2016-01,w1,op,F,MCK,47,-103,1,1,-1\n", reg); });
    CHECK(e.find("'flared_mcf'") != std::string::npos);
    e = error_of([&] { parse_ndic(h + "2016-01,,op,F,MCK,47,-103,1,1,1\n", reg); });
    CHECK(e.find("'well_id'") != std::string::npos);
}

TEST_CASE("rollups") {
    const auto v = parse_viirs_csv(kFixtures / "viirs_golden.csv");
    const auto n = parse_ndic_csv(kFixtures / "ndic_golden.csv");
    std::vector<GeocodedDetection> g;
    for (const auto& d : v) g.push_back({d, "", "", ""});
    g[0].county = "MCK";
    g[0].oilfield = "BAKER";
    g[1].county = "MTL";

    const auto state = rollup(Level::state, g, n);
    REQUIRE(state.rows.size() == 2);
    CHECK(state.rows[0].entity == "ND");
    CHECK(state.rows[0].month == MonthStamp(2016, 3));
    CHECK(state.rows[0].viirs_bcm == doctest::Approx(0.012912));
    CHECK(state.rows[0].detections == 2);
    CHECK(state.rows[0].wells == 2);
    CHECK(state.rows[0].flaring_wells == 1);
    CHECK(state.rows[0].flared_mcf == 1503.0);
    CHECK(state.rows[0].ndic_bcm == doctest::Approx(1503.0 * 28.316846592 / 1e9));
    CHECK(state.rows[1].detections == 1);
    CHECK(*state.rows[1].gor() == doctest::Approx(1200.0 / 850.25));

    const auto county = rollup(Level::county, g, n);
    CHECK(county.unassigned_detections == 1);
    CHECK(entities(county.rows) == std::vector<std::string>{"MCK", "MTL", "WIL"});
    CHECK(county.rows.size() == 6);
    const auto mtl = entity_rows(county.rows, "MTL");
    CHECK(mtl[0].detections == 1);
    CHECK(mtl[0].wells == 1);
    CHECK(mtl[0].flaring_wells == 0);
    CHECK(!mtl[0].gor());
    CHECK(mtl[1].wells == 0);

    const auto field = rollup(Level::oilfield, g, n);
    CHECK(field.unassigned_detections == 2);
    CHECK(entities(field.rows) == std::vector<std::string>{"BAKER", "BLUE BUTTES", "SANISH"});

    const std::string csv = series_csv(county.rows);
    CHECK(series_csv(parse_series(csv)) == csv);

    const auto cd = county_monthly(county.rows, models::CountyRegistry::north_dakota());
    CHECK(cd.registry.size() == 3);
    CHECK(cd.registry.code(0) == "MCK");
    CHECK(cd.registry.code(1) == "WIL");
    CHECK(cd.registry.code(2) == "MTL");
    CHECK(cd.rows.size() == 6);

    const auto sm = state_monthly(entity_rows(state.rows, "ND"));
    CHECK(sm[1].month == 1);
    const auto es = entity_series(entity_rows(state.rows, "ND"), models::GpKind::scale_factor);
    CHECK(es.flared[0] == state.rows[0].ndic_bcm);
    CHECK(entity_series(entity_rows(state.rows, "ND"), models::GpKind::gas_proportion).flared[0] == 1503.0);

    auto gappy = state.rows;
    gappy[1].month = MonthStamp(2016, 6);
    const std::string e = error_of([&] { entity_rows(gappy, "ND"); });
    CHECK(e.find("2016-04, 2016-05") != std::string::npos);
    CHECK_THROWS_AS(entity_rows(state.rows, "XX"), ValidationError);
}

TEST_CASE("Spearman rank correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y;
    for (double v : x) y.push_back(std::exp(v));
    CHECK(spearman(x, y) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    CHECK(spearman(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) == doctest::Approx(0.8));
    // Tied values (reference values from an independent implementation).
    CHECK(spearman(std::vector<double>{1, 2, 2, 3, 5}, std::vector<double>{2, 1, 4, 4, 3}) ==
          doctest::Approx(0.3947368421052632).epsilon(1e-12));
    CHECK(spearman(std::vector<double>{3.1, -1, 7, 7, 7, 0.5, 2}, std::vector<double>{1, 1, 2, 3, 4, 5, 6}) ==
          doctest::Approx(0.018698939800169144).epsilon(1e-12));
    CHECK(spearman(std::vector<double>{10, 20, 20, 40, 30, 30}, std::vector<double>{1, 3, 2, 2, 6, 5}) ==
          doctest::Approx(0.492592183071889).epsilon(1e-12));
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), DomainError);
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ValidationError);
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ValidationError);
    dist::Rng rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(12), b(12);
        for (auto& v : a) v = std::round(rng.normal() * 2);
        for (auto& v : b) v = std::round(rng.normal() * 2);
        if (std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; })) continue;
        if (std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; })) continue;
        const double r = spearman(a, b);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
        CHECK(r == doctest::Approx(spearman(b, a)).epsilon(1e-14));
    }
}

TEST_CASE("first differences") {
    CHECK(first_difference(std::vector<double>{1, 3, 6}) == std::vector<double>{2, 3});
    CHECK(first_difference(std::vector<double>{4, 4, 4, 4}) == std::vector<double>{0, 0, 0});
    const std::vector<double> s{2.5, -1, 7, 3, 3.25};
    const auto d = first_difference(s);
    double total = 0.0;
    for (double v : d) total += v;
    CHECK(d.size() == s.size() - 1);
    CHECK(total == doctest::Approx(s.back() - s.front()));
    CHECK_THROWS_AS(first_difference(std::vector<double>{1}), ValidationError);
}

TEST_CASE("correlation matrix") {
    const MonthStamp start(2015, 5);
    dist::Rng rng(3);
    std::vector<double> a(1000), b(1000), c(1000);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    for (auto& v : c) v = rng.normal();
    const std::vector<MonthlySeries> s{monthly("a", start, a), monthly("a copy", start, a), monthly("b", start, b),
                                       monthly("c", start, c)};
    const auto m = correlation_matrix(s, CorrelationMode::levels);
    REQUIRE(m.size() == 6);
    CHECK(m[0].row == "a copy");
    CHECK(m[0].col == "a");
    CHECK(m[0].rho == doctest::Approx(1.0));
    for (std::size_t k = 1; k < m.size(); ++k) CHECK(std::abs(m[k].rho) < 0.1);

    // Shared linear trend: strong in levels, gone after differencing.
    std::vector<double> t1(1000), t2(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        t1[i] = 0.05 * static_cast<double>(i) + rng.normal();
        t2[i] = -3.0 + 0.08 * static_cast<double>(i) + rng.normal();
    }
    const std::vector<MonthlySeries> trends{monthly("t1", start, t1), monthly("t2", start, t2)};
    CHECK(correlation_matrix(trends, CorrelationMode::levels)[0].rho > 0.9);
    CHECK(std::abs(correlation_matrix(trends, CorrelationMode::lag1)[0].rho) < 0.1);

    auto shifted = trends;
    shifted[1].months.erase(shifted[1].months.begin() + 3);
    shifted[1].values.erase(shifted[1].values.begin() + 3);
    const std::string e = error_of([&] { correlation_matrix(shifted, CorrelationMode::levels); });
    CHECK(e.find("'t2' lacks 2015-08") != std::string::npos);
    shifted[0].months.erase(shifted[0].months.begin() + 3);
    shifted[0].values.erase(shifted[0].values.begin() + 3);
    CHECK_NOTHROW(correlation_matrix(shifted, CorrelationMode::levels));
    CHECK(error_of([&] { correlation_matrix(shifted, CorrelationMode::lag1); }).find("2015-08") != std::string::npos);
    CHECK_THROWS_AS(correlation_matrix(std::span<const MonthlySeries>(s.data(), 1), CorrelationMode::levels),
                    ValidationError);
    CHECK(parse_correlation_mode("lag1") == CorrelationMode::lag1);
    CHECK_THROWS_AS(parse_correlation_mode("lag2"), ValidationError);
    const std::string csv = correlation_csv(m);
    CHECK(csv.rfind("row,col,rho\na copy,a,1.000000\n", 0) == 0);
}

TEST_CASE("log magnitudes") {
    CHECK(log_magnitude(std::vector<double>{1.0})[0] == 0.0);
    CHECK(log_magnitude(std::vector<double>{std::exp(-3.0)})[0] == doctest::Approx(-3.0));
    const std::vector<double> v{1e-5, 3e-4, 0.01, 0.2};
    const auto l = log_magnitude(v);
    CHECK(std::is_sorted(l.begin(), l.end()));
    CHECK_THROWS_AS(log_magnitude(std::vector<double>{0.1, 0.0}), DomainError);
    CHECK_THROWS_AS(log_magnitude(std::vector<double>{-1.0}), DomainError);
}

TEST_CASE("kernel density estimate") {
    dist::Rng rng(11);
    std::vector<double> x(1000);
    for (auto& v : x) v = rng.normal();
    const auto k = kde(x);
    CHECK(k.x.size() == 512);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= 1000.0;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    CHECK(k.bandwidth == doctest::Approx(std::sqrt(ss / 999.0) * std::pow(1000.0, -0.2)));
    CHECK(k.x.front() == doctest::Approx(*std::min_element(x.begin(), x.end()) - 3 * k.bandwidth));
    CHECK(k.x.back() == doctest::Approx(*std::max_element(x.begin(), x.end()) + 3 * k.bandwidth));
    double worst = 0.0;
    double area = 0.0;
    for (std::size_t i = 0; i < k.x.size(); ++i) {
        const double phi = std::exp(-0.5 * k.x[i] * k.x[i]) / std::sqrt(2 * std::numbers::pi);
        worst = std::max(worst, std::abs(k.density[i] - phi));
        CHECK(k.density[i] >= 0.0);
        if (i) area += 0.5 * (k.density[i] + k.density[i - 1]) * (k.x[i] - k.x[i - 1]);
    }
    CHECK(worst < 0.05);
    CHECK(std::abs(area - 1.0) < 1e-3);

    const auto two = kde(std::vector<double>{-5.0, 5.0}, 0.5);
    std::size_t peaks = 0;
    for (std::size_t i = 1; i + 1 < two.density.size(); ++i) {
        peaks += two.density[i] > two.density[i - 1] && two.density[i] > two.density[i + 1];
    }
    CHECK(peaks == 2);
    CHECK(*std::min_element(two.density.begin(), two.density.end()) >= 0.0);

    CHECK_THROWS_AS(kde(std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(kde(std::vector<double>{2.0, 2.0, 2.0}), ValidationError);
    CHECK(kde_csv(two).rfind("x,density\n", 0) == 0);
}
