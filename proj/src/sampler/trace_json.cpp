#include "flare/sampler/trace_json.hpp"

#include <json.hpp>

#include "flare/error.hpp"

namespace flare::sampler {

using nlohmann::json;

std::string to_json(const Trace& trace) {
    json doc;
    json params = json::array();
    for (const auto& spec : trace.layout.specs()) {
        params.push_back({{"name", spec.name}, {"shape", spec.shape}, {"constraint", ppl::to_string(spec.constraint)}});
    }
    doc["params"] = params;
    doc["chains"] = trace.chains;
    doc["draws"] = trace.draws;

    json samples = json::object();
    for (std::size_t p = 0; p < trace.layout.count(); ++p) {
        const auto& spec = trace.layout.spec(p);
        const std::size_t off = trace.layout.offset(p);
        json per_chain = json::array();
        for (std::size_t c = 0; c < trace.chains; ++c) {
            json per_draw = json::array();
            for (std::size_t d = 0; d < trace.draws; ++d) {
                const double* row = trace.draw_ptr(c, d) + off;
                if (spec.shape.empty()) {
                    per_draw.push_back(row[0]);
                } else {
                    per_draw.push_back(std::vector<double>(row, row + spec.size()));
                }
            }
            per_chain.push_back(std::move(per_draw));
        }
        samples[spec.name] = std::move(per_chain);
    }
    doc["samples"] = std::move(samples);

    if (trace.n_obs > 0) {
        json ll = json::array();
        for (std::size_t c = 0; c < trace.chains; ++c) {
            json per_draw = json::array();
            for (std::size_t d = 0; d < trace.draws; ++d) {
                const double* row = trace.log_lik_ptr(c, d);
                per_draw.push_back(std::vector<double>(row, row + trace.n_obs));
            }
            ll.push_back(std::move(per_draw));
        }
        doc["log_lik"] = std::move(ll);
    } else {
        doc["log_lik"] = nullptr;
    }

    json div = json::array();
    json step = json::array();
    json depth = json::array();
    for (std::size_t c = 0; c < trace.chains; ++c) {
        std::vector<bool> dv;
        std::vector<double> st;
        std::vector<int> td;
        for (std::size_t d = 0; d < trace.draws; ++d) {
            const DrawStats& s = trace.stats[c * trace.draws + d];
            dv.push_back(s.divergent);
            st.push_back(s.step_size);
            td.push_back(s.tree_depth);
        }
        div.push_back(dv);
        step.push_back(st);
        depth.push_back(td);
    }
    doc["stats"] = {{"divergences", div}, {"step_size", step}, {"tree_depth", depth}};
    if (!trace.warnings.empty()) doc["warnings"] = trace.warnings;
    return doc.dump();
}

Trace from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("trace JSON does not parse: ") + e.what());
    }
    try {
        std::vector<ppl::ParamSpec> specs;
        for (const auto& p : doc.at("params")) {
            ppl::ParamSpec spec;
            spec.name = p.at("name").get<std::string>();
            spec.shape = p.at("shape").get<std::vector<std::size_t>>();
            spec.constraint = ppl::parse_constraint(p.at("constraint").get<std::string>());
            specs.push_back(std::move(spec));
        }
        Trace trace;
        trace.layout = ppl::ParamLayout(std::move(specs));
        trace.chains = doc.at("chains").get<std::size_t>();
        trace.draws = doc.at("draws").get<std::size_t>();
        const std::size_t dim = trace.dim();
        trace.values.assign(trace.chains * trace.draws * dim, 0.0);
        const json& samples = doc.at("samples");
        for (std::size_t p = 0; p < trace.layout.count(); ++p) {
            const auto& spec = trace.layout.spec(p);
            const json& arr = samples.at(spec.name);
            if (arr.size() != trace.chains) throw ValidationError("samples of '" + spec.name + "' have wrong chain count");
            for (std::size_t c = 0; c < trace.chains; ++c) {
                if (arr[c].size() != trace.draws) {
                    throw ValidationError("samples of '" + spec.name + "' have wrong draw count");
                }
                for (std::size_t d = 0; d < trace.draws; ++d) {
                    double* row = trace.values.data() + (c * trace.draws + d) * dim + trace.layout.offset(p);
                    if (spec.shape.empty()) {
                        row[0] = arr[c][d].get<double>();
                    } else {
                        const auto v = arr[c][d].get<std::vector<double>>();
                        if (v.size() != spec.size()) throw ValidationError("draw of '" + spec.name + "' has wrong size");
                        std::copy(v.begin(), v.end(), row);
                    }
                }
            }
        }
        if (doc.contains("log_lik") && !doc.at("log_lik").is_null()) {
            const json& ll = doc.at("log_lik");
            trace.n_obs = ll.at(0).at(0).size();
            trace.log_lik.assign(trace.chains * trace.draws * trace.n_obs, 0.0);
            for (std::size_t c = 0; c < trace.chains; ++c) {
                for (std::size_t d = 0; d < trace.draws; ++d) {
                    const auto v = ll.at(c).at(d).get<std::vector<double>>();
                    if (v.size() != trace.n_obs) throw ValidationError("log_lik rows have unequal length");
                    std::copy(v.begin(), v.end(), trace.log_lik.begin() +
                                                      static_cast<std::ptrdiff_t>((c * trace.draws + d) * trace.n_obs));
                }
            }
        }
        trace.stats.assign(trace.chains * trace.draws, DrawStats{});
        const json& stats = doc.at("stats");
        for (std::size_t c = 0; c < trace.chains; ++c) {
            for (std::size_t d = 0; d < trace.draws; ++d) {
                DrawStats& s = trace.stats[c * trace.draws + d];
                s.divergent = stats.at("divergences").at(c).at(d).get<bool>();
                s.step_size = stats.at("step_size").at(c).at(d).get<double>();
                s.tree_depth = stats.at("tree_depth").at(c).at(d).get<int>();
            }
        }
        if (doc.contains("warnings")) trace.warnings = doc.at("warnings").get<std::vector<std::string>>();
        return trace;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed trace JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("malformed trace JSON: ") + e.what());
    }
}

}  // namespace flare::sampler
