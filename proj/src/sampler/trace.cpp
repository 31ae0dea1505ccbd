#include "flare/sampler/trace.hpp"

#include <algorithm>

#include "flare/error.hpp"

namespace flare::sampler {

std::size_t Trace::component_index(std::string_view name) const {
    const std::vector<std::string> names = layout.component_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ValidationError("unknown parameter '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names.begin());
}

std::vector<std::vector<double>> Trace::chains_of(std::size_t component) const {
    std::vector<std::vector<double>> out(chains, std::vector<double>(draws));
    for (std::size_t c = 0; c < chains; ++c) {
        for (std::size_t d = 0; d < draws; ++d) out[c][d] = at(c, d, component);
    }
    return out;
}

std::vector<std::vector<double>> Trace::chains_of(std::string_view name) const {
    return chains_of(component_index(name));
}

std::vector<double> Trace::pooled(std::size_t component) const {
    std::vector<double> out;
    out.reserve(total_draws());
    for (std::size_t c = 0; c < chains; ++c) {
        for (std::size_t d = 0; d < draws; ++d) out.push_back(at(c, d, component));
    }
    return out;
}

std::vector<double> Trace::pooled(std::string_view name) const { return pooled(component_index(name)); }

std::size_t Trace::divergences() const {
    return static_cast<std::size_t>(
        std::count_if(stats.begin(), stats.end(), [](const DrawStats& s) { return s.divergent; }));
}

}  // namespace flare::sampler
