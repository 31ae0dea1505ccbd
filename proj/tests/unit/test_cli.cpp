#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "flare/cli/app.hpp"
#include "flare/data/csv.hpp"
#include "flare/dist/rng.hpp"
#include "flare/geo/geo.hpp"
#include "flare/nightfire/image.hpp"
#include "flare/sampler/diagnostics.hpp"
#include "flare/sampler/trace_json.hpp"
#include "support/synthetic.hpp"

using namespace flare;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FLARE_FIXTURE_DIR;

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result flarectl(std::vector<std::string> args) {
    args.insert(args.begin(), "flarectl");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("flarectl_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) { return data::read_text_file(p); }

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

// Synthetic inputs written next to the outputs.
fs::path write_inputs(const fs::path& dir, std::size_t months = 12) {
    const auto in = synthetic::pipeline_inputs(5, months);
    data::write_text_file(dir / "viirs_in.csv", in.viirs_csv);
    data::write_text_file(dir / "ndic_in.csv", in.ndic_csv);
    data::write_text_file(dir / "counties.geojson", in.counties_geojson);
    data::write_text_file(dir / "oilfields.geojson", in.oilfields_geojson);
    return dir;
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

}  // namespace

TEST_CASE("usage and exit codes") {
    const auto help = flarectl({"--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("Usage: flarectl") != std::string::npos);
    CHECK(help.err.empty());

    const auto unknown = flarectl({"frobnicate"});
    CHECK(unknown.code == cli::kExitInvalid);
    CHECK(unknown.out.empty());
    CHECK(unknown.err.find("Usage: flarectl") != std::string::npos);

    const auto none = flarectl({});
    CHECK(none.code == cli::kExitInvalid);
    CHECK(none.err.find("Usage") != std::string::npos);

    CHECK(flarectl({"ingest", "--viirs", "x.csv"}).code == cli::kExitInvalid);
    CHECK(flarectl({"correlate", "--data", "x.csv", "--mode", "lag2"}).code == cli::kExitInvalid);

    const auto missing = flarectl({"ingest", "--viirs", "/nonexistent/v.csv", "--ndic", "/nonexistent/n.csv"});
    CHECK(missing.code == cli::kExitInvalid);
    CHECK(missing.err.find("error:") != std::string::npos);

    const fs::path dir = scratch("exit");
    CHECK(flarectl({"--chains", "1", "--out", dir.string(), "summarize", "--trace", "t.json"}).code ==
          cli::kExitInvalid);
    CHECK(flarectl({"--out", dir.string(), "fit", "banana", "--data", "x.csv"}).code == cli::kExitInvalid);
}

TEST_CASE("ingest golden files") {
    const fs::path dir = scratch("ingest");
    const auto r = flarectl({"--out", dir.string(), "ingest", "--viirs", (kFixtures / "viirs_golden.csv").string(),
                             "--ndic", (kFixtures / "ndic_golden.csv").string()});
    REQUIRE(r.code == cli::kExitOk);
    for (const char* f : {"viirs.csv", "ndic.csv", "state_series.csv", "ingest_report.txt"}) {
        CHECK(fs::exists(dir / f));
    }
    CHECK(lines(slurp(dir / "viirs.csv")).front() == "month,lat,lon,volume_bcm");
    CHECK(lines(slurp(dir / "viirs.csv")).size() == 4);
    CHECK(slurp(dir / "ingest_report.txt").find("ndic_rows: 3") != std::string::npos);

    // A bad value names the file, line and column.
    data::write_text_file(dir / "bad.csv", "month,lat,lon,volume_bcm\n2020-01,48.0,-103.0,-1\n");
    const auto bad = flarectl({"--out", dir.string(), "ingest", "--viirs", (dir / "bad.csv").string(), "--ndic",
                               (kFixtures / "ndic_golden.csv").string()});
    CHECK(bad.code == cli::kExitInvalid);
    CHECK(bad.err.find("line 2") != std::string::npos);
    CHECK(bad.err.find("volume_bcm") != std::string::npos);
}

TEST_CASE("config file supplies global options") {
    const fs::path dir = scratch("config");
    data::write_text_file(dir / "run.conf", "out=" + (dir / "from_config").string() + "\n");
    const auto r = flarectl({"--config", (dir / "run.conf").string(), "ingest", "--viirs",
                             (kFixtures / "viirs_golden.csv").string(), "--ndic",
                             (kFixtures / "ndic_golden.csv").string()});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(fs::exists(dir / "from_config" / "state_series.csv"));
}

TEST_CASE("fit state is deterministic in the seed") {
    const fs::path dir = write_inputs(scratch("determinism"));
    REQUIRE(flarectl({"--out", dir.string(), "ingest", "--viirs", (dir / "viirs_in.csv").string(), "--ndic",
                      (dir / "ndic_in.csv").string()})
                .code == cli::kExitOk);
    const std::string data = (dir / "state_series.csv").string();
    auto fit = [&](const std::string& seed, const std::string& out) {
        return flarectl(with({"--seed", seed, "--out", (dir / out).string()}, {"fit", "state", "--data", data}));
    };
    REQUIRE(fit("42", "a").code == cli::kExitOk);
    REQUIRE(fit("42", "b").code == cli::kExitOk);
    REQUIRE(fit("43", "c").code == cli::kExitOk);
    const std::string a = slurp(dir / "a" / "trace_state.json");
    CHECK(a == slurp(dir / "b" / "trace_state.json"));
    CHECK(a != slurp(dir / "c" / "trace_state.json"));
    CHECK(slurp(dir / "a" / "summary_state.csv") == slurp(dir / "b" / "summary_state.csv"));

    const auto trace = sampler::from_json(a);
    CHECK(trace.chains == 4);
    CHECK(trace.draws == 1000);
    CHECK(trace.layout.contains("alpha"));
    CHECK(a.find("\"model\":\"state\"") != std::string::npos);
}

TEST_CASE("summarize reports equal-tailed intervals") {
    const fs::path dir = write_inputs(scratch("summarize"));
    REQUIRE(flarectl({"--out", dir.string(), "ingest", "--viirs", (dir / "viirs_in.csv").string(), "--ndic",
                      (dir / "ndic_in.csv").string()})
                .code == cli::kExitOk);
    REQUIRE(flarectl(with({"--out", dir.string()}, {"fit", "state", "--data", (dir / "state_series.csv").string()}))
                .code == cli::kExitOk);
    const auto r = flarectl({"--out", dir.string(), "summarize", "--trace", (dir / "trace_state.json").string(),
                             "--prob", "0.90"});
    REQUIRE(r.code == cli::kExitOk);
    const auto table = data::parse_csv(r.out);
    REQUIRE(table.column("ci_lo") != std::string_view::npos);
    const auto trace = sampler::from_json(slurp(dir / "trace_state.json"));
    for (const auto& rec : table.records) {
        auto draws = trace.pooled(rec.fields[0]);
        std::sort(draws.begin(), draws.end());
        const double lo = std::stod(rec.fields[table.column("ci_lo")]);
        const double hi = std::stod(rec.fields[table.column("ci_hi")]);
        const double scale = std::max(1e-12, draws.back() - draws.front());
        CHECK(std::abs(lo - sampler::quantile_sorted(draws, 0.05)) <= 1e-5 * scale + 1e-9);
        CHECK(std::abs(hi - sampler::quantile_sorted(draws, 0.95)) <= 1e-5 * scale + 1e-9);
    }
    CHECK(flarectl({"summarize", "--trace", (dir / "trace_state.json").string(), "--prob", "1.5"}).code ==
          cli::kExitInvalid);
}

TEST_CASE("unconverged traces exit with code 2") {
    const fs::path dir = scratch("rhat");
    sampler::Trace t;
    t.layout = ppl::ParamLayout({ppl::scalar_param("good"), ppl::scalar_param("bad")});
    t.chains = 4;
    t.draws = 200;
    dist::Rng rng(3);
    for (std::size_t c = 0; c < t.chains; ++c) {
        for (std::size_t d = 0; d < t.draws; ++d) {
            t.values.push_back(rng.normal());
            t.values.push_back(rng.normal() + 5.0 * static_cast<double>(c));
        }
    }
    t.stats.resize(t.chains * t.draws);
    data::write_text_file(dir / "offset.json", sampler::to_json(t));
    const auto r = flarectl({"--out", dir.string(), "summarize", "--trace", (dir / "offset.json").string()});
    CHECK(r.code == cli::kExitNumerical);
    CHECK(r.err.find("bad") != std::string::npos);
    CHECK(r.err.find("good") == std::string::npos);
    CHECK(fs::exists(dir / "summary_trace.csv"));
}

TEST_CASE("attribute applies 300 m and 800 m by default") {
    const fs::path dir = scratch("attribute");
    // Wells on one meridian; detections 100 m, 500 m and 1000 m north of them.
    const double m_per_deg = geo::kEarthRadiusM * std::numbers::pi / 180.0;
    std::string ndic = "month,well_id,operator,oilfield,county,lat,lon,oil_bbl,gas_mcf,flared_mcf\n";
    std::string viirs = "month,lat,lon,volume_bcm\n";
    const double offsets[] = {100.0, 500.0, 1000.0};
    char buf[256];
    for (int i = 0; i < 3; ++i) {
        const double lat = 47.0 + 0.5 * i;
        std::snprintf(buf, sizeof buf, "2020-01,W%d,Op%d,F,MCK,%.8f,-103,1,1,1\n", i, i, lat);
        ndic += buf;
        std::snprintf(buf, sizeof buf, "2020-01,%.8f,-103,0.001\n", lat + offsets[i] / m_per_deg);
        viirs += buf;
    }
    data::write_text_file(dir / "ndic.csv", ndic);
    data::write_text_file(dir / "viirs.csv", viirs);
    const std::vector<std::string> base = {"--out", dir.string(), "attribute", "--viirs", (dir / "viirs.csv").string(),
                                           "--ndic", (dir / "ndic.csv").string()};
    REQUIRE(flarectl(base).code == cli::kExitOk);
    auto rows = lines(slurp(dir / "owners.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "detection_id,operator,distance_m,decision");
    CHECK(rows[1].rfind("viirs-2,Op0,", 0) == 0);
    CHECK(rows[1].find("kept_secure") != std::string::npos);
    CHECK(rows[2].find("dropped_section_mismatch") != std::string::npos);
    CHECK(rows[3].find("dropped_far") != std::string::npos);
    const std::string report = slurp(dir / "attribute_report.txt");
    CHECK(report.find("d_secure_m: 300") != std::string::npos);
    CHECK(report.find("d_cutoff_m: 800") != std::string::npos);

    REQUIRE(flarectl(with(base, {"--d-secure", "600", "--d-cutoff", "1200"})).code == cli::kExitOk);
    rows = lines(slurp(dir / "owners.csv"));
    CHECK(rows[2].find("kept_secure") != std::string::npos);
    CHECK(rows[3].find("dropped_section_mismatch") != std::string::npos);

    CHECK(flarectl(with(base, {"--d-secure", "900"})).code == cli::kExitInvalid);
}

TEST_CASE("geocode, correlate and county series") {
    const fs::path dir = write_inputs(scratch("geocode"), 24);
    const auto r = flarectl({"--out", dir.string(), "geocode", "--viirs", (dir / "viirs_in.csv").string(), "--ndic",
                             (dir / "ndic_in.csv").string(), "--counties", (dir / "counties.geojson").string(),
                             "--oilfields", (dir / "oilfields.geojson").string()});
    REQUIRE(r.code == cli::kExitOk);
    const auto geocoded = data::parse_csv(slurp(dir / "viirs_geocoded.csv"));
    const std::size_t county = geocoded.column("county");
    REQUIRE(county != std::string_view::npos);
    for (const auto& rec : geocoded.records) {
        const double lon = std::stod(rec.fields[geocoded.column("lon")]);
        const std::string expect = lon < -103.4 ? "WIL" : (lon < -102.8 ? "MCK" : "MTL");
        CHECK(rec.fields[county] == expect);
    }
    const auto counties = data::parse_csv(slurp(dir / "county_series.csv"));
    CHECK(counties.records.size() == 3 * 24);

    REQUIRE(flarectl({"--out", dir.string(), "ingest", "--viirs", (dir / "viirs_in.csv").string(), "--ndic",
                      (dir / "ndic_in.csv").string()})
                .code == cli::kExitOk);
    for (const std::string mode : {"levels", "lag1"}) {
        REQUIRE(flarectl({"--out", dir.string(), "correlate", "--data", (dir / "state_series.csv").string(),
                          "--mode", mode})
                    .code == cli::kExitOk);
        const auto m = data::parse_csv(slurp(dir / ("correlation_" + mode + ".csv")));
        CHECK(m.records.size() == 7 * 6 / 2);
    }
    // Several entities need --entity.
    CHECK(flarectl({"--out", dir.string(), "correlate", "--data", (dir / "county_series.csv").string()}).code ==
          cli::kExitInvalid);
    CHECK(flarectl({"--out", dir.string(), "correlate", "--data", (dir / "county_series.csv").string(), "--entity",
                    "MCK"})
              .code == cli::kExitOk);
}

TEST_CASE("gp fit, predict and ppc") {
    const fs::path dir = write_inputs(scratch("gp"), 18);
    REQUIRE(flarectl({"--out", dir.string(), "ingest", "--viirs", (dir / "viirs_in.csv").string(), "--ndic",
                      (dir / "ndic_in.csv").string()})
                .code == cli::kExitOk);
    const std::string data = (dir / "state_series.csv").string();
    const auto fit = flarectl(with({"--out", dir.string(), "--seed", "7"}, {"fit", "gp:scale_factor", "--data", data}));
    REQUIRE(fit.code == cli::kExitOk);
    REQUIRE(fs::exists(dir / "trace_gp_scale_factor.json"));
    const auto trace = (dir / "trace_gp_scale_factor.json").string();

    REQUIRE(flarectl({"--out", dir.string(), "predict", "--trace", trace, "--data", data, "--horizon", "6"}).code ==
            cli::kExitOk);
    const auto pred = lines(slurp(dir / "predict_gp_scale_factor.csv"));
    REQUIRE(pred.size() == 7);
    CHECK(pred[0] == "month,beta_mean,ci_lo,ci_hi");
    CHECK(pred[1].rfind("2019-07,", 0) == 0);
    CHECK(pred[6].rfind("2019-12,", 0) == 0);
    CHECK(fs::exists(dir / "predict_gp_scale_factor_bands.csv"));

    REQUIRE(flarectl({"--out", dir.string(), "ppc", "--trace", trace, "--data", data, "--datasets", "50"}).code ==
            cli::kExitOk);
    CHECK(lines(slurp(dir / "ppc_gp_scale_factor.csv")).size() == 19);

    // predict is for GP traces only.
    REQUIRE(flarectl(with({"--out", dir.string()}, {"fit", "state", "--data", data})).code == cli::kExitOk);
    CHECK(flarectl({"--out", dir.string(), "predict", "--trace", (dir / "trace_state.json").string(), "--data", data})
              .code == cli::kExitInvalid);
    REQUIRE(flarectl({"--out", dir.string(), "ppc", "--trace", (dir / "trace_state.json").string(), "--data", data,
                      "--datasets", "20"})
                .code == cli::kExitOk);
}

TEST_CASE("count and mixture fits") {
    const fs::path dir = scratch("counts");
    std::string counts = "count\n";
    for (long c : synthetic::negbin_counts(4, 200, 1.005, 0.168)) counts += std::to_string(c) + "\n";
    data::write_text_file(dir / "counts.csv", counts);
    const auto nb = flarectl(with({"--out", dir.string()}, {"fit", "negbin", "--data", (dir / "counts.csv").string()}));
    REQUIRE(nb.code == cli::kExitOk);
    REQUIRE(flarectl({"--out", dir.string(), "ppc", "--trace", (dir / "trace_negbin.json").string(), "--data",
                      (dir / "counts.csv").string(), "--datasets", "40"})
                .code == cli::kExitOk);
    CHECK(fs::exists(dir / "ppc_negbin_counts.csv"));

    std::string vols = "volume_bcm\n0\n0\n";
    for (double x : synthetic::two_clusters(8, 160)) vols += std::to_string(std::exp(x)) + "\n";
    data::write_text_file(dir / "volumes.csv", vols);
    const auto gmm = flarectl(with({"--out", dir.string(), "--seed", "3"},
                                   {"fit", "gmm", "--data", (dir / "volumes.csv").string(), "--k", "3", "--compare"}));
    CHECK(gmm.code == cli::kExitOk);
    const auto waic = lines(slurp(dir / "waic_gmm.csv"));
    REQUIRE(waic.size() == 4);
    CHECK(waic[1].rfind("1,k=2,", 0) == 0);
    CHECK(slurp(dir / "fit_gmm_report.txt").find("excluded_zero_volume: 2") != std::string::npos);
}

TEST_CASE("nightfire command") {
    const fs::path dir = scratch("nightfire");
    nightfire::SceneOptions opt;
    opt.seed = 4;
    const std::vector<nightfire::Emitter> emitters = {{{10, 10}, 1800.0, 1e-2}, {{11, 10}, 1800.0, 1e-2},
                                                      {{40, 50}, 1700.0, 8e-3}};
    std::vector<std::string> args = {"--out", dir.string(), "nightfire", "--min-pts", "2", "--eps", "500", "--images"};
    for (const auto& band : nightfire::synthetic_scene(opt, emitters)) {
        const fs::path p = dir / (band.band + ".bin");
        nightfire::write_band_image(band, p.string());
        args.push_back(p.string());
    }
    REQUIRE(flarectl(args).code == cli::kExitOk);
    const auto det = lines(slurp(dir / "nightfire_detections.csv"));
    CHECK(det.size() == 4);
    CHECK(det[0] == "lat,lon,T_k,epsilon,S_m2,RH_mw");
    CHECK(slurp(dir / "nightfire_report.txt").find("clusters: 1") != std::string::npos);

    CHECK(flarectl({"--out", dir.string(), "nightfire", "--images", (dir / "B1.bin").string()}).code ==
          cli::kExitInvalid);
}
