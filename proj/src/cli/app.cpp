#include "flare/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "flare/data/analytics.hpp"
#include "flare/data/csv.hpp"
#include "flare/data/records.hpp"
#include "flare/data/series.hpp"
#include "flare/error.hpp"
#include "flare/geo/geo.hpp"
#include "flare/geo/owners.hpp"
#include "flare/models/evaluation.hpp"
#include "flare/models/gp_series.hpp"
#include "flare/models/mixture.hpp"
#include "flare/models/regression.hpp"
#include "flare/nightfire/cluster.hpp"
#include "flare/nightfire/image.hpp"
#include "flare/nightfire/pipeline.hpp"
#include "flare/sampler/diagnostics.hpp"
#include "flare/sampler/trace_json.hpp"

namespace flare::cli {

namespace {

namespace fs = std::filesystem;
using data::SeriesRow;

struct Globals {
    std::uint64_t seed = 0;
    std::size_t chains = 4;
    std::size_t warmup = 1000;
    std::size_t draws = 1000;
    double target_accept = 0.8;
    std::string out = ".";
};

class Context {
  public:
    Context(const Globals& g, std::ostream& out, std::ostream& err) : g(g), out(out), err(err) {}

    void write(const std::string& name, std::string_view text) const {
        const fs::path p = fs::path(g.out) / name;
        data::write_text_file(p, text);
        err << "wrote " << p.string() << '\n';
    }

    sampler::SamplerConfig sampler() const {
        sampler::SamplerConfig cfg;
        cfg.seed = g.seed;
        cfg.chains = g.chains;
        cfg.warmup_iters = g.warmup;
        cfg.draw_iters = g.draws;
        cfg.target_accept = g.target_accept;
        return cfg;
    }

    const Globals& g;
    std::ostream& out;
    std::ostream& err;
};

// Plain "key: value" lines, written as <command>_report.txt.
class Report {
  public:
    template <class T>
    void add(const std::string& key, const T& value) {
        std::ostringstream os;
        os << value;
        text_ += key + ": " + os.str() + '\n';
    }
    const std::string& str() const { return text_; }

  private:
    std::string text_;
};

// -- models --------------------------------------------------------------------------

enum class Family { state, county, gp, negbin, gmm };

struct ModelSpec {
    Family family = Family::state;
    models::GpKind kind = models::GpKind::scale_factor;

    std::string label() const {
        switch (family) {
            case Family::state: return "state";
            case Family::county: return "county";
            case Family::gp: return "gp:" + models::to_string(kind);
            case Family::negbin: return "negbin";
            case Family::gmm: return "gmm";
        }
        return "state";
    }
    // Used in file names.
    std::string stem(std::size_t k = 0) const {
        std::string s = label();
        std::replace(s.begin(), s.end(), ':', '_');
        if (family == Family::gmm && k) s += "_k" + std::to_string(k);
        return s;
    }
};

ModelSpec parse_model(const std::string& s) {
    ModelSpec m;
    if (s == "state") {
        m.family = Family::state;
    } else if (s == "county") {
        m.family = Family::county;
    } else if (s == "negbin") {
        m.family = Family::negbin;
    } else if (s == "gmm") {
        m.family = Family::gmm;
    } else if (s.rfind("gp:", 0) == 0) {
        m.family = Family::gp;
        m.kind = models::parse_gp_kind(s.substr(3));
    } else {
        throw ValidationError("unknown model '" + s + "' (state, county, gp:<kind>, negbin or gmm)");
    }
    return m;
}

struct TraceMeta {
    std::string model;
    std::string entity;
    std::string month;
    std::string months;
    std::string likelihood;
    std::size_t k = 0;
};

std::string trace_document(const sampler::Trace& trace, const TraceMeta& meta) {
    auto doc = nlohmann::json::parse(sampler::to_json(trace));
    doc["model"] = meta.model;
    if (!meta.entity.empty()) doc["entity"] = meta.entity;
    if (!meta.month.empty()) doc["month"] = meta.month;
    if (!meta.months.empty()) doc["months"] = meta.months;
    if (!meta.likelihood.empty()) doc["likelihood"] = meta.likelihood;
    if (meta.k) doc["k"] = meta.k;
    return doc.dump() + '\n';
}

std::pair<sampler::Trace, TraceMeta> read_trace(const std::string& path) {
    const std::string text = data::read_text_file(path);
    TraceMeta meta;
    try {
        const auto doc = nlohmann::json::parse(text);
        meta.model = doc.value("model", "");
        meta.entity = doc.value("entity", "");
        meta.month = doc.value("month", "");
        meta.months = doc.value("months", "");
        meta.likelihood = doc.value("likelihood", "");
        meta.k = doc.value("k", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return {sampler::from_json(text), meta};
}

// Parameters whose R-hat reaches the limit (or is not finite).
std::vector<std::string> unconverged(const std::vector<sampler::SummaryRow>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (!(r.rhat < kRhatLimit)) out.push_back(r.param);
    }
    return out;
}

int convergence_exit(const Context& ctx, const std::vector<sampler::SummaryRow>& rows, const std::string& what) {
    const auto bad = unconverged(rows);
    if (bad.empty()) return kExitOk;
    ctx.err << "error: " << what << " did not converge; R-hat >= " << kRhatLimit << " for:";
    for (const auto& p : bad) ctx.err << ' ' << p;
    ctx.err << '\n';
    return kExitNumerical;
}

// -- data helpers --------------------------------------------------------------------

std::vector<SeriesRow> read_series(const std::string& path) {
    return data::parse_series(data::read_text_file(path), path);
}

std::vector<SeriesRow> pick_entity(const std::vector<SeriesRow>& rows, const std::string& entity) {
    if (!entity.empty()) return data::entity_rows(rows, entity);
    const auto names = data::entities(rows);
    if (names.size() != 1) {
        throw ValidationError("data holds " + std::to_string(names.size()) + " entities; choose one with --entity");
    }
    return data::entity_rows(rows, names.front());
}

bool has_column(const std::string& text, std::string_view name) {
    const auto t = data::parse_csv(text.substr(0, text.find('\n')));
    return t.column(name) != std::string_view::npos;
}

struct MonthRange {
    std::optional<data::MonthStamp> from;
    std::optional<data::MonthStamp> to;
    bool contains(const data::MonthStamp& m) const { return (!from || *from <= m) && (!to || m <= *to); }
};

// "YYYY-MM:YYYY-MM", either side may be empty.
MonthRange parse_range(const std::string& s) {
    MonthRange r;
    if (s.empty()) return r;
    const auto colon = s.find(':');
    const std::string a = s.substr(0, colon);
    const std::string b = colon == std::string::npos ? a : s.substr(colon + 1);
    if (!a.empty()) r.from = data::MonthStamp::parse(a);
    if (!b.empty()) r.to = data::MonthStamp::parse(b);
    if (r.from && r.to && *r.to < *r.from) throw ValidationError("month range '" + s + "' is reversed");
    return r;
}

// Detection counts: a "count" column, or one month of a series file.
std::vector<long> load_counts(const std::string& path, const std::string& month) {
    const std::string text = data::read_text_file(path);
    std::vector<long> out;
    if (has_column(text, "count")) {
        for (double v : data::parse_numeric_column(text, "count", path)) {
            if (v != std::floor(v)) throw ValidationError(path + ": counts must be whole numbers");
            out.push_back(static_cast<long>(v));
        }
        return out;
    }
    const auto rows = data::parse_series(text, path);
    std::vector<data::MonthStamp> months;
    for (const auto& r : rows) months.push_back(r.month);
    std::sort(months.begin(), months.end());
    months.erase(std::unique(months.begin(), months.end()), months.end());
    data::MonthStamp pick;
    if (!month.empty()) {
        pick = data::MonthStamp::parse(month);
    } else if (months.size() == 1) {
        pick = months.front();
    } else {
        throw ValidationError("series covers several months; choose one with --month");
    }
    for (const auto& r : rows) {
        if (r.month == pick) out.push_back(r.detections);
    }
    if (out.empty()) throw ValidationError("no rows for month " + pick.str());
    return out;
}

struct Volumes {
    std::vector<double> positive;
    std::size_t zeros = 0;
};

// Per-entity VIIRS volume over a month range, or a "volume_bcm" column.
Volumes load_volumes(const std::string& path, const std::string& months) {
    const std::string text = data::read_text_file(path);
    std::vector<double> all;
    if (!has_column(text, "entity")) {
        all = data::parse_numeric_column(text, "volume_bcm", path);
    } else {
        const MonthRange range = parse_range(months);
        const auto rows = data::parse_series(text, path);
        std::map<std::string, double> total;
        for (const auto& name : data::entities(rows)) total[name] = 0.0;
        for (const auto& r : rows) {
            if (range.contains(r.month)) total[r.entity] += r.viirs_bcm;
        }
        for (const auto& name : data::entities(rows)) all.push_back(total[name]);
    }
    Volumes v;
    for (double x : all) {
        if (x > 0.0) {
            v.positive.push_back(x);
        } else {
            ++v.zeros;
        }
    }
    return v;
}

std::vector<geo::GeoPolygon> read_layer(const std::string& path, geo::PolygonKind kind) {
    auto polys = geo::read_geojson(path, kind);
    for (auto& p : polys) {
        if (p.datum != geo::Datum::wgs84) p = geo::to_wgs84(p);
    }
    return polys;
}

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// -- commands ------------------------------------------------------------------------

struct IngestArgs {
    std::string viirs;
    std::string ndic;
    std::string state = "ND";
};

int cmd_ingest(const Context& ctx, const IngestArgs& a) {
    const auto viirs = data::parse_viirs_csv(a.viirs);
    const auto ndic = data::parse_ndic_csv(a.ndic);
    std::vector<data::GeocodedDetection> det;
    for (const auto& d : viirs) det.push_back({d, "", "", ""});
    const auto state = data::rollup(data::Level::state, det, ndic, a.state);
    ctx.write("viirs.csv", data::viirs_csv(viirs));
    ctx.write("ndic.csv", data::ndic_csv(ndic));
    ctx.write("state_series.csv", data::series_csv(state.rows));
    Report r;
    r.add("viirs_rows", viirs.size());
    r.add("ndic_rows", ndic.size());
    r.add("months", state.rows.size());
    if (!state.rows.empty()) {
        r.add("first_month", state.rows.front().month.str());
        r.add("last_month", state.rows.back().month.str());
    }
    ctx.write("ingest_report.txt", r.str());
    return kExitOk;
}

struct GeocodeArgs {
    std::string viirs;
    std::string ndic;
    std::string counties;
    std::string oilfields;
    std::string sections;
};

int cmd_geocode(const Context& ctx, const GeocodeArgs& a) {
    if (a.counties.empty() && a.oilfields.empty() && a.sections.empty()) {
        throw ValidationError("geocode needs at least one of --counties, --oilfields, --sections");
    }
    std::vector<geo::GeoPolygon> layers;
    if (!a.counties.empty()) {
        auto l = read_layer(a.counties, geo::PolygonKind::county);
        layers.insert(layers.end(), l.begin(), l.end());
    }
    if (!a.oilfields.empty()) {
        auto l = read_layer(a.oilfields, geo::PolygonKind::oilfield);
        layers.insert(layers.end(), l.begin(), l.end());
    }
    if (!a.sections.empty()) {
        auto l = read_layer(a.sections, geo::PolygonKind::trs_section);
        layers.insert(layers.end(), l.begin(), l.end());
    }
    const auto viirs = data::parse_viirs_csv(a.viirs);
    std::vector<geo::GeoPoint> points;
    for (const auto& d : viirs) points.emplace_back(d.lat, d.lon);
    const auto labels = geo::reverse_geocode(points, layers);
    std::vector<data::GeocodedDetection> det;
    std::size_t no_county = 0;
    std::size_t no_field = 0;
    for (std::size_t i = 0; i < viirs.size(); ++i) {
        det.push_back({viirs[i], labels[i].county.value_or(""), labels[i].oilfield.value_or(""),
                       labels[i].section.value_or("")});
        no_county += !labels[i].county;
        no_field += !labels[i].oilfield;
    }
    ctx.write("viirs_geocoded.csv", data::geocoded_csv(det));
    Report r;
    r.add("detections", viirs.size());
    r.add("polygons", layers.size());
    r.add("without_county", no_county);
    r.add("without_oilfield", no_field);
    if (!a.ndic.empty()) {
        const auto ndic = data::parse_ndic_csv(a.ndic);
        const auto county = data::rollup(data::Level::county, det, ndic);
        const auto field = data::rollup(data::Level::oilfield, det, ndic);
        ctx.write("county_series.csv", data::series_csv(county.rows));
        ctx.write("oilfield_series.csv", data::series_csv(field.rows));
        r.add("county_entities", data::entities(county.rows).size());
        r.add("oilfield_entities", data::entities(field.rows).size());
        r.add("wells_without_oilfield", field.unassigned_wells);
    }
    ctx.write("geocode_report.txt", r.str());
    return kExitOk;
}

struct CorrelateArgs {
    std::string data;
    std::string entity;
    std::string mode = "levels";
    std::string extra;
};

int cmd_correlate(const Context& ctx, const CorrelateArgs& a) {
    const auto mode = data::parse_correlation_mode(a.mode);
    auto vars = data::correlation_variables(pick_entity(read_series(a.data), a.entity));
    if (!a.extra.empty()) {
        const auto table = data::parse_csv(data::read_text_file(a.extra));
        const std::size_t mc = table.column("month");
        if (mc == std::string_view::npos) throw ValidationError(a.extra + ": header is missing column 'month'");
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == mc) continue;
            data::MonthlySeries s{table.header[c], {}, {}};
            for (const auto& rec : table.records) {
                if (rec.fields.size() != table.header.size()) {
                    throw ValidationError(a.extra + ": line " + std::to_string(rec.line) + ": wrong field count");
                }
                const std::string& f = rec.fields[c];
                if (f.empty()) continue;
                char* end = nullptr;
                const double v = std::strtod(f.c_str(), &end);
                if (*end != '\0' || !std::isfinite(v)) {
                    throw ValidationError(a.extra + ": line " + std::to_string(rec.line) + ", column '" +
                                          table.header[c] + "': '" + f + "' is not a number");
                }
                s.months.push_back(data::MonthStamp::parse(rec.fields[mc]));
                s.values.push_back(v);
            }
            vars.push_back(std::move(s));
        }
    }
    // Rank correlation is undefined against a constant series.
    Report r;
    std::vector<data::MonthlySeries> kept;
    for (auto& v : vars) {
        const auto used = mode == data::CorrelationMode::lag1 && v.values.size() >= 2
                              ? data::first_difference(v.values)
                              : v.values;
        if (std::adjacent_find(used.begin(), used.end(), std::not_equal_to<>()) == used.end()) {
            ctx.err << "note: '" << v.name << "' is constant and was left out\n";
            r.add("constant_series", v.name);
            continue;
        }
        kept.push_back(std::move(v));
    }
    const auto m = data::correlation_matrix(kept, mode);
    ctx.write("correlation_" + a.mode + ".csv", data::correlation_csv(m));
    r.add("series", kept.size());
    r.add("pairs", m.size());
    ctx.write("correlate_report.txt", r.str());
    return kExitOk;
}

struct FitArgs {
    std::string model;
    std::string data;
    std::string entity;
    std::size_t k = 2;
    bool compare = false;
    std::string parameterization = "noncentered";
    std::string likelihood = "poisson";
    std::string month;
    std::string months;
};

models::CountLikelihood parse_likelihood(const std::string& s) {
    if (s == "poisson") return models::CountLikelihood::poisson;
    if (s == "negbin") return models::CountLikelihood::neg_binomial;
    throw ValidationError("unknown count likelihood '" + s + "' (poisson or negbin)");
}

int finish_fit(const Context& ctx, const ModelSpec& spec, const sampler::Trace& trace, TraceMeta meta,
               Report& report, std::size_t k = 0) {
    meta.model = spec.label();
    meta.k = k;
    const std::string stem = spec.stem(k);
    ctx.write("trace_" + stem + ".json", trace_document(trace, meta));
    const auto rows = sampler::summarize(trace, 0.90);
    ctx.write("summary_" + stem + ".csv", sampler::summary_csv(rows));
    report.add("model", spec.label() + (k ? " k=" + std::to_string(k) : std::string()));
    report.add("chains", trace.chains);
    report.add("draws", trace.draws);
    report.add("divergences", trace.divergences());
    for (const auto& w : trace.warnings) report.add("warning", w);
    return convergence_exit(ctx, rows, spec.label());
}

int cmd_fit(const Context& ctx, const FitArgs& a) {
    const ModelSpec spec = parse_model(a.model);
    const auto cfg = ctx.sampler();
    Report report;
    TraceMeta meta;
    int code = kExitOk;
    switch (spec.family) {
        case Family::state: {
            const auto rows = pick_entity(read_series(a.data), a.entity);
            meta.entity = rows.front().entity;
            const auto trace = models::fit_state_linear(data::state_monthly(rows), cfg);
            report.add("months", rows.size());
            code = finish_fit(ctx, spec, trace, meta, report);
            break;
        }
        case Family::county: {
            const auto cd = data::county_monthly(read_series(a.data), models::CountyRegistry::north_dakota());
            models::CountyOptions opt;
            if (a.parameterization == "centered") {
                opt.parameterization = models::Parameterization::centered;
            } else if (a.parameterization != "noncentered") {
                throw ValidationError("unknown parameterization '" + a.parameterization + "'");
            }
            const auto trace = models::fit_county_hierarchical(cd.rows, cd.registry.size(), opt, cfg);
            report.add("counties", cd.registry.size());
            report.add("rows", cd.rows.size());
            for (std::size_t j = 0; j < cd.registry.size(); ++j) {
                report.add("county[" + std::to_string(j) + "]", cd.registry.code(j));
            }
            code = finish_fit(ctx, spec, trace, meta, report);
            break;
        }
        case Family::gp: {
            const auto rows = pick_entity(read_series(a.data), a.entity);
            meta.entity = rows.front().entity;
            models::GpSeriesOptions opt;
            if (spec.kind == models::GpKind::detection_count) {
                opt.count_likelihood = parse_likelihood(a.likelihood);
                meta.likelihood = a.likelihood;
            }
            const auto trace = models::fit_gp_series(data::entity_series(rows, spec.kind), spec.kind, cfg, opt);
            report.add("months", rows.size());
            code = finish_fit(ctx, spec, trace, meta, report);
            break;
        }
        case Family::negbin: {
            const auto counts = load_counts(a.data, a.month);
            meta.month = a.month;
            const auto trace = models::fit_negbin_counts(counts, cfg);
            report.add("observations", counts.size());
            code = finish_fit(ctx, spec, trace, meta, report);
            break;
        }
        case Family::gmm: {
            const auto vol = load_volumes(a.data, a.months);
            meta.months = a.months;
            report.add("excluded_zero_volume", vol.zeros);
            report.add("observations", vol.positive.size());
            const auto mags = data::log_magnitude(vol.positive);
            if (a.k < 1) throw ValidationError("--k must be at least 1");
            if (!a.compare) {
                const auto fit = models::fit_gmm(mags, a.k, cfg);
                code = finish_fit(ctx, spec, fit.trace, meta, report, a.k);
                break;
            }
            std::vector<models::MixtureFit> fits;
            std::vector<int> codes;
            for (std::size_t k = 1; k <= a.k; ++k) {
                fits.push_back(models::fit_gmm(mags, k, cfg));
                Report quiet;
                meta.k = k;
                const auto rows = sampler::summarize(fits.back().trace, 0.90);
                ctx.write("trace_" + spec.stem(k) + ".json", trace_document(fits.back().trace, [&] {
                              TraceMeta m = meta;
                              m.model = spec.label();
                              return m;
                          }()));
                ctx.write("summary_" + spec.stem(k) + ".csv", sampler::summary_csv(rows));
                codes.push_back(unconverged(rows).empty() ? kExitOk : kExitNumerical);
            }
            std::vector<std::pair<std::string, const sampler::Trace*>> entries;
            for (const auto& f : fits) entries.emplace_back("k=" + std::to_string(f.k), &f.trace);
            const auto ranked = models::compare_models(entries);
            std::string csv = "rank,model,waic,se,p_waic,d_waic,d_se\n";
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                const auto& m = ranked[i];
                csv += std::to_string(i + 1) + ',' + m.name + ',' + fixed(m.score.waic, 4) + ',' +
                       fixed(m.score.se, 4) + ',' + fixed(m.score.p_waic, 4) + ',' + fixed(m.d_waic, 4) + ',' +
                       fixed(m.d_se, 4) + '\n';
            }
            ctx.write("waic_gmm.csv", csv);
            report.add("best", ranked.front().name);
            // Only the preferred model has to converge; surplus components
            // in larger K wander by design.
            const std::size_t best = ranked.front().index;
            if (codes[best] != kExitOk) {
                code = convergence_exit(ctx, sampler::summarize(fits[best].trace, 0.90), spec.label());
            }
            break;
        }
    }
    ctx.write("fit_" + spec.stem(spec.family == Family::gmm && !a.compare ? a.k : 0) + "_report.txt", report.str());
    return code;
}

struct PredictArgs {
    std::string trace;
    std::string data;
    std::string entity;
    std::string model;
    int horizon = 6;
    double prob = 0.90;
};

int cmd_predict(const Context& ctx, const PredictArgs& a) {
    if (a.horizon < 1) throw ValidationError("--horizon must be at least 1");
    const auto [trace, meta] = read_trace(a.trace);
    const ModelSpec spec = parse_model(a.model.empty() ? meta.model : a.model);
    if (spec.family != Family::gp) throw ValidationError("predict needs a gp:<kind> trace, got " + spec.label());
    const auto rows = pick_entity(read_series(a.data), a.entity.empty() ? meta.entity : a.entity);
    const auto series = data::entity_series(rows, spec.kind);
    const auto draws = models::forecast_latent(trace, spec.kind, series.months, a.horizon, ctx.g.seed);
    const auto per_point = models::by_point(draws);
    std::string csv = "month," + models::latent_name(spec.kind) + "_mean,ci_lo,ci_hi\n";
    std::vector<double> grid;
    for (int h = 0; h < a.horizon; ++h) {
        const auto& v = per_point[static_cast<std::size_t>(h)];
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        const auto ci = sampler::central_interval(v, a.prob);
        csv += rows.back().month.plus(h + 1).str() + ',' + fixed(mean) + ',' + fixed(ci.lo) + ',' + fixed(ci.hi) + '\n';
        grid.push_back(series.months.back() + h + 1);
    }
    ctx.write("predict_" + spec.stem() + ".csv", csv);
    if (draws.size() >= 100) {
        ctx.write("predict_" + spec.stem() + "_bands.csv", models::bands_csv(models::percentile_bands(grid, per_point)));
    } else {
        ctx.err << "note: fewer than 100 draws, percentile bands skipped\n";
    }
    return kExitOk;
}

struct PpcArgs {
    std::string trace;
    std::string data;
    std::string entity;
    std::string model;
    std::size_t datasets = 100;
};

int cmd_ppc(const Context& ctx, const PpcArgs& a) {
    if (a.datasets < 1) throw ValidationError("--datasets must be at least 1");
    const auto [trace, meta] = read_trace(a.trace);
    const ModelSpec spec = parse_model(a.model.empty() ? meta.model : a.model);
    const std::string entity = a.entity.empty() ? meta.entity : a.entity;
    std::vector<double> observed;
    std::vector<std::vector<double>> sims;
    std::vector<long> counts;
    const std::uint64_t seed = ctx.g.seed;
    switch (spec.family) {
        case Family::state: {
            const auto rows = pick_entity(read_series(a.data), entity);
            std::vector<double> viirs;
            for (const auto& r : rows) {
                viirs.push_back(r.viirs_bcm);
                observed.push_back(r.ndic_bcm);
            }
            sims = models::posterior_predictive_state(trace, viirs, a.datasets, seed);
            break;
        }
        case Family::county: {
            const auto cd = data::county_monthly(read_series(a.data), models::CountyRegistry::north_dakota());
            for (const auto& r : cd.rows) observed.push_back(r.ndic_bcm);
            sims = models::posterior_predictive_county(trace, cd.rows, a.datasets, seed);
            break;
        }
        case Family::gp: {
            const auto rows = pick_entity(read_series(a.data), entity);
            const auto series = data::entity_series(rows, spec.kind);
            for (std::size_t i = 0; i < series.months.size(); ++i) {
                switch (spec.kind) {
                    case models::GpKind::well_proportion:
                        observed.push_back(static_cast<double>(series.flaring_wells[i]));
                        break;
                    case models::GpKind::detection_count:
                        observed.push_back(static_cast<double>(series.detections[i]));
                        counts.push_back(series.detections[i]);
                        break;
                    default: observed.push_back(series.flared[i]);
                }
            }
            sims = models::posterior_predictive_gp(trace, series, spec.kind, a.datasets, seed);
            break;
        }
        case Family::negbin: {
            counts = load_counts(a.data, meta.month);
            for (long c : counts) observed.push_back(static_cast<double>(c));
            sims = models::posterior_predictive_negbin(trace, counts.size(), a.datasets, seed);
            break;
        }
        case Family::gmm: {
            observed = data::log_magnitude(load_volumes(a.data, meta.months).positive);
            sims = models::posterior_predictive_gmm(trace, observed.size(), a.datasets, seed);
            break;
        }
    }
    const std::string stem = spec.stem(meta.k);
    std::string csv = "observation,observed,sim_mean,sim_lo,sim_hi\n";
    const auto per_obs = models::by_point(sims);
    for (std::size_t i = 0; i < per_obs.size(); ++i) {
        double mean = 0.0;
        for (double v : per_obs[i]) mean += v;
        mean /= static_cast<double>(per_obs[i].size());
        const auto ci = sampler::central_interval(per_obs[i], 0.90);
        csv += std::to_string(i) + ',' + data::format_double(observed.at(i)) + ',' + fixed(mean) + ',' + fixed(ci.lo) +
               ',' + fixed(ci.hi) + '\n';
    }
    ctx.write("ppc_" + stem + ".csv", csv);
    if (!counts.empty()) {
        const long top = *std::max_element(counts.begin(), counts.end());
        ctx.write("ppc_" + stem + "_counts.csv", models::count_histogram_csv(counts, sims, std::max(top * 2, 10L)));
    }
    return kExitOk;
}

struct AttributeArgs {
    std::string viirs;
    std::string ndic;
    std::string sections;
    double d_secure = 300.0;
    double d_cutoff = 800.0;
    std::string level = "section";
};

int cmd_attribute(const Context& ctx, const AttributeArgs& a) {
    geo::OwnerOptions opt;
    opt.d_secure_m = a.d_secure;
    opt.d_cutoff_m = a.d_cutoff;
    opt.level = geo::parse_trs_level(a.level);
    const std::string vtext = data::read_text_file(a.viirs);
    std::vector<data::FlareDetection> viirs;
    if (has_column(vtext, "county")) {
        for (const auto& g : data::parse_geocoded(vtext, a.viirs)) viirs.push_back(g.detection);
    } else {
        viirs = data::parse_viirs(vtext, a.viirs);
    }
    const auto ndic = data::parse_ndic_csv(a.ndic);
    std::vector<geo::Detection> det;
    for (const auto& d : viirs) {
        det.push_back({"viirs-" + std::to_string(d.line), d.month.serial(), geo::GeoPoint(d.lat, d.lon)});
    }
    std::vector<geo::Well> wells;
    for (const auto& w : ndic) wells.push_back({w.well_id, w.operator_name, w.month.serial(), geo::GeoPoint(w.lat, w.lon)});
    std::vector<geo::GeoPolygon> sections;
    if (!a.sections.empty()) sections = read_layer(a.sections, geo::PolygonKind::trs_section);
    const auto owners = geo::assign_flare_owners_by_month(det, wells, sections, opt);
    ctx.write("owners.csv", geo::owners_csv(owners));
    std::map<std::string, std::size_t> tally;
    for (const auto& o : owners) ++tally[std::string(geo::to_string(o.decision))];
    Report r;
    r.add("d_secure_m", a.d_secure);
    r.add("d_cutoff_m", a.d_cutoff);
    r.add("level", a.level);
    r.add("detections", owners.size());
    for (const auto& [k, v] : tally) r.add(k, v);
    ctx.write("attribute_report.txt", r.str());
    return kExitOk;
}

struct NightfireArgs {
    std::vector<std::string> images;
    double threshold = 4.0;
    bool robust = false;
    std::vector<double> atmospheric;
    double eps_m = 200.0;
    std::size_t min_pts = 5;
};

int cmd_nightfire(const Context& ctx, const NightfireArgs& a) {
    std::vector<nightfire::BandImage> bands;
    for (const auto& p : a.images) bands.push_back(nightfire::read_band_image(p));
    nightfire::NightfireOptions opt;
    opt.detect.threshold_sd = a.threshold;
    opt.detect.robust = a.robust;
    opt.atmospheric = a.atmospheric;
    const auto sources = nightfire::process_scene(bands, opt);
    ctx.write("nightfire_detections.csv", nightfire::detections_csv(sources));
    std::vector<geo::GeoPoint> pts;
    for (const auto& s : sources) pts.push_back(s.location);
    const auto clusters = nightfire::cluster_detections(pts, a.eps_m, a.min_pts);
    ctx.write("nightfire_clusters.csv", nightfire::size_histogram_csv(clusters));
    Report r;
    r.add("bands", bands.size());
    r.add("hot_sources", sources.size());
    r.add("clusters", clusters.clusters);
    r.add("noise_points", clusters.noise);
    ctx.write("nightfire_report.txt", r.str());
    return kExitOk;
}

struct SummarizeArgs {
    std::string trace;
    double prob = 0.90;
};

int cmd_summarize(const Context& ctx, const SummarizeArgs& a) {
    if (!(a.prob > 0.0 && a.prob < 1.0)) throw ValidationError("--prob must lie in (0, 1)");
    const auto [trace, meta] = read_trace(a.trace);
    const auto rows = sampler::summarize(trace, a.prob);
    const std::string csv = sampler::summary_csv(rows);
    const std::string stem = meta.model.empty() ? "trace" : parse_model(meta.model).stem(meta.k);
    ctx.write("summary_" + stem + ".csv", csv);
    ctx.out << csv;
    return convergence_exit(ctx, rows, meta.model.empty() ? "trace" : meta.model);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flaring analytics: ingestion, geocoding, Bayesian fits and nightfire detection", "flarectl"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; keys are long option names");
    Globals g;
    app.add_option("--seed", g.seed, "Random seed for every stochastic step")->capture_default_str();
    app.add_option("--chains", g.chains, "Sampler chains")->capture_default_str();
    app.add_option("--warmup", g.warmup, "Warmup iterations per chain")->capture_default_str();
    app.add_option("--draws", g.draws, "Kept draws per chain")->capture_default_str();
    app.add_option("--target-accept", g.target_accept, "Step-size adaptation target")->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse VIIRS and NDIC CSVs and build the state series");
    c_ingest->add_option("--viirs", ingest.viirs, "VIIRS detections CSV")->required();
    c_ingest->add_option("--ndic", ingest.ndic, "NDIC well report CSV")->required();
    c_ingest->add_option("--state-name", ingest.state, "Entity name for the state series")->capture_default_str();

    GeocodeArgs geocode;
    auto* c_geocode = app.add_subcommand("geocode", "Label detections with county, oilfield and section");
    c_geocode->add_option("--viirs", geocode.viirs, "VIIRS detections CSV")->required();
    c_geocode->add_option("--ndic", geocode.ndic, "NDIC CSV; adds county and oilfield series");
    c_geocode->add_option("--counties", geocode.counties, "County GeoJSON layer");
    c_geocode->add_option("--oilfields", geocode.oilfields, "Oilfield GeoJSON layer");
    c_geocode->add_option("--sections", geocode.sections, "TRS section GeoJSON layer");

    CorrelateArgs correlate;
    auto* c_correlate = app.add_subcommand("correlate", "Pairwise Spearman correlations of monthly variables");
    c_correlate->add_option("--data", correlate.data, "Series CSV")->required();
    c_correlate->add_option("--entity", correlate.entity, "Entity within the series");
    c_correlate->add_option("--mode", correlate.mode, "levels or lag1")
        ->check(CLI::IsMember({"levels", "lag1"}))
        ->capture_default_str();
    c_correlate->add_option("--extra", correlate.extra, "CSV of further monthly series (month column plus values)");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit a model: state, county, gp:<kind>, negbin, gmm");
    c_fit->add_option("model", fit.model, "Model name")->required();
    c_fit->add_option("--data", fit.data, "Input CSV")->required();
    c_fit->add_option("--entity", fit.entity, "Entity within the series");
    c_fit->add_option("--k", fit.k, "Mixture components")->capture_default_str();
    c_fit->add_flag("--compare", fit.compare, "Fit K = 1..k and rank by WAIC");
    c_fit->add_option("--parameterization", fit.parameterization, "centered or noncentered")->capture_default_str();
    c_fit->add_option("--likelihood", fit.likelihood, "poisson or negbin for detection counts")
        ->capture_default_str();
    c_fit->add_option("--month", fit.month, "Month (YYYY-MM) of the counts for negbin");
    c_fit->add_option("--months", fit.months, "Month range FROM:TO for mixture volumes");

    PredictArgs predict;
    auto* c_predict = app.add_subcommand("predict", "Forecast a GP model beyond the data");
    c_predict->add_option("--trace", predict.trace, "Trace JSON from fit")->required();
    c_predict->add_option("--data", predict.data, "Series CSV used for the fit")->required();
    c_predict->add_option("--entity", predict.entity, "Entity (defaults to the fitted one)");
    c_predict->add_option("--model", predict.model, "Model (defaults to the trace's)");
    c_predict->add_option("--horizon", predict.horizon, "Months ahead")->capture_default_str();
    c_predict->add_option("--prob", predict.prob, "Interval probability")->capture_default_str();

    PpcArgs ppc;
    auto* c_ppc = app.add_subcommand("ppc", "Posterior predictive datasets");
    c_ppc->add_option("--trace", ppc.trace, "Trace JSON from fit")->required();
    c_ppc->add_option("--data", ppc.data, "Input CSV used for the fit")->required();
    c_ppc->add_option("--entity", ppc.entity, "Entity (defaults to the fitted one)");
    c_ppc->add_option("--model", ppc.model, "Model (defaults to the trace's)");
    c_ppc->add_option("--datasets", ppc.datasets, "Simulated datasets")->capture_default_str();

    AttributeArgs attribute;
    auto* c_attr = app.add_subcommand("attribute", "Assign detections to the operator of the nearest well");
    c_attr->add_option("--viirs", attribute.viirs, "VIIRS CSV (plain or geocoded)")->required();
    c_attr->add_option("--ndic", attribute.ndic, "NDIC CSV")->required();
    c_attr->add_option("--sections", attribute.sections, "TRS section GeoJSON layer");
    c_attr->add_option("--d-secure", attribute.d_secure, "Always keep below this distance (m)")->capture_default_str();
    c_attr->add_option("--d-cutoff", attribute.d_cutoff, "Always drop above this distance (m)")->capture_default_str();
    c_attr->add_option("--level", attribute.level, "section, range or township")->capture_default_str();

    NightfireArgs nf;
    auto* c_nf = app.add_subcommand("nightfire", "Detect and characterize hot sources in band images");
    c_nf->add_option("--images", nf.images, "Band images (each with a .json sidecar)")->required()->expected(2, -1);
    c_nf->add_option("--threshold", nf.threshold, "Standard deviations above the mean")->capture_default_str();
    c_nf->add_flag("--robust", nf.robust, "Median and MAD in place of mean and sd");
    c_nf->add_option("--atmospheric", nf.atmospheric, "Per-band radiance multipliers")->delimiter(',');
    c_nf->add_option("--eps", nf.eps_m, "Cluster radius (m)")->capture_default_str();
    c_nf->add_option("--min-pts", nf.min_pts, "Cluster core size")->capture_default_str();

    SummarizeArgs summarize;
    auto* c_sum = app.add_subcommand("summarize", "Posterior summary table of a trace");
    c_sum->add_option("--trace", summarize.trace, "Trace JSON")->required();
    c_sum->add_option("--prob", summarize.prob, "Interval probability")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("flarectl");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitInvalid;
    }

    const Context ctx(g, out, err);
    try {
        if (g.chains < 2) throw ValidationError("--chains must be at least 2");
        if (*c_ingest) return cmd_ingest(ctx, ingest);
        if (*c_geocode) return cmd_geocode(ctx, geocode);
        if (*c_correlate) return cmd_correlate(ctx, correlate);
        if (*c_fit) return cmd_fit(ctx, fit);
        if (*c_predict) return cmd_predict(ctx, predict);
        if (*c_ppc) return cmd_ppc(ctx, ppc);
        if (*c_attr) return cmd_attribute(ctx, attribute);
        if (*c_nf) return cmd_nightfire(ctx, nf);
        if (*c_sum) return cmd_summarize(ctx, summarize);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    err << app.help();
    return kExitInvalid;
}

}  // namespace flare::cli
