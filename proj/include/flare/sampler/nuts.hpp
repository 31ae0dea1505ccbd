#pragma once

#include <cstdint>
#include <string>

#include "flare/error.hpp"
#include "flare/ppl/program.hpp"
#include "flare/sampler/trace.hpp"

namespace flare::sampler {

struct SamplerConfig {
    std::size_t chains = 4;
    std::size_t warmup_iters = 1000;
    std::size_t draw_iters = 1000;
    double target_accept = 0.8;
    int max_tree_depth = 10;
    std::uint64_t seed = 0;
    double init_jitter = 2.0;
    std::size_t init_retries = 100;
    // Run chains on separate threads; results do not depend on this.
    bool parallel = true;
};

// Throws ParameterError for chains < 2, target_accept outside (0, 1), etc.
void validate(const SamplerConfig& cfg);

// Every initial point tried for a chain gave a non-finite density.
class InitError : public NumericalError {
  public:
    InitError(std::string param, const std::string& what)
        : NumericalError(what), param_(std::move(param)) {}
    const std::string& param() const { return param_; }

  private:
    std::string param_;
};

// Multinomial NUTS with a diagonal metric. Warmup adapts the step size by dual
// averaging and the metric over doubling windows (75 / 25.. / 50 split).
// Chain c draws from Rng(cfg.seed, c).
Trace nuts_sample(const ppl::LogDensityProgram& program, const SamplerConfig& cfg);

}  // namespace flare::sampler
