#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "flare/ppl/param.hpp"

namespace flare::sampler {

struct DrawStats {
    double step_size = 0.0;
    int tree_depth = 0;
    bool divergent = false;
    double energy = 0.0;
    double accept_stat = 0.0;
};

// Posterior draws in the constrained space, chain-major:
// values[(chain * draws + draw) * dim + component].
struct Trace {
    ppl::ParamLayout layout;
    std::size_t chains = 0;
    std::size_t draws = 0;
    std::vector<double> values;

    // Optional per-observation log-likelihood, same ordering with n_obs columns.
    std::size_t n_obs = 0;
    std::vector<double> log_lik;

    std::vector<DrawStats> stats;
    std::vector<std::string> warnings;

    std::size_t dim() const { return layout.total_size(); }
    std::size_t total_draws() const { return chains * draws; }

    double at(std::size_t chain, std::size_t draw, std::size_t component) const {
        return values[(chain * draws + draw) * dim() + component];
    }
    const double* draw_ptr(std::size_t chain, std::size_t draw) const {
        return values.data() + (chain * draws + draw) * dim();
    }
    const double* log_lik_ptr(std::size_t chain, std::size_t draw) const {
        return log_lik.data() + (chain * draws + draw) * n_obs;
    }

    // Flat component index for "alpha", "w[1]" or "L_corr[1,0]". Throws
    // ValidationError for unknown names.
    std::size_t component_index(std::string_view name) const;

    // [chain][draw] values of one scalar component.
    std::vector<std::vector<double>> chains_of(std::size_t component) const;
    std::vector<std::vector<double>> chains_of(std::string_view name) const;

    // All draws of one component pooled across chains.
    std::vector<double> pooled(std::size_t component) const;
    std::vector<double> pooled(std::string_view name) const;

    std::size_t divergences() const;
};

}  // namespace flare::sampler
