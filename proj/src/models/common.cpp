#include "flare/models/common.hpp"

#include <algorithm>

#include "flare/error.hpp"

namespace flare::models {

Trace run_nuts(std::shared_ptr<const ppl::Model> model, const SamplerConfig& cfg) {
    const ppl::LogDensityProgram program(std::move(model));
    return sampler::nuts_sample(program, cfg);
}

void append_derived(Trace& trace, const std::vector<ppl::ParamSpec>& specs, const DerivedFn& fn) {
    std::vector<ppl::ParamSpec> all = trace.layout.specs();
    for (const auto& s : specs) {
        if (trace.layout.contains(s.name)) throw ValidationError("duplicate trace parameter '" + s.name + "'");
        all.push_back(s);
    }
    ppl::ParamLayout layout(std::move(all));
    const std::size_t old_dim = trace.dim();
    const std::size_t new_dim = layout.total_size();
    const std::size_t n = trace.total_draws();
    std::vector<double> values(n * new_dim);
    for (std::size_t d = 0; d < n; ++d) {
        const double* src = trace.values.data() + d * old_dim;
        double* dst = values.data() + d * new_dim;
        std::copy(src, src + old_dim, dst);
        fn(std::span<const double>(src, old_dim), std::span<double>(dst + old_dim, new_dim - old_dim));
    }
    trace.layout = std::move(layout);
    trace.values = std::move(values);
}

double posterior_mean(const Trace& trace, std::string_view component) {
    const std::vector<double> v = trace.pooled(component);
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<double> block_at(const Trace& trace, std::string_view param, std::size_t flat_draw) {
    const std::size_t p = trace.layout.index_of(param);
    const std::size_t off = trace.layout.offset(p);
    const std::size_t size = trace.layout.spec(p).size();
    const double* row = trace.values.data() + flat_draw * trace.dim();
    return {row + off, row + off + size};
}

std::vector<std::size_t> spread_draws(const Trace& trace, std::size_t count) {
    const std::size_t total = trace.total_draws();
    if (total == 0) throw ValidationError("trace has no draws");
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = (i * total) / std::max<std::size_t>(count, 1) % total;
    return out;
}

}  // namespace flare::models
