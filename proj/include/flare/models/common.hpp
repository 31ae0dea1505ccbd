#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "flare/ppl/program.hpp"
#include "flare/sampler/nuts.hpp"
#include "flare/sampler/trace.hpp"

namespace flare::models {

using sampler::SamplerConfig;
using sampler::Trace;

Trace run_nuts(std::shared_ptr<const ppl::Model> model, const SamplerConfig& cfg);

// Appends deterministic functions of each draw as extra trace components.
using DerivedFn = std::function<void(std::span<const double> theta, std::span<double> out)>;
void append_derived(Trace& trace, const std::vector<ppl::ParamSpec>& specs, const DerivedFn& fn);

// Posterior mean of one scalar component.
double posterior_mean(const Trace& trace, std::string_view component);

// Values of a named parameter block (all its components) at one flat draw index.
std::vector<double> block_at(const Trace& trace, std::string_view param, std::size_t flat_draw);

// Evenly spaced flat draw indices used by the simulation helpers.
std::vector<std::size_t> spread_draws(const Trace& trace, std::size_t count);

}  // namespace flare::models
