#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flare/error.hpp"
#include "flare/ppl/param.hpp"
#include "flare/ppl/tape.hpp"

namespace flare::ppl {

// A joint log density p(D | theta) p(theta) over named constrained parameters,
// up to an additive constant.
class Model {
  public:
    virtual ~Model() = default;

    virtual const ParamLayout& layout() const = 0;

    // Log prior plus log likelihood at constrained values (flat, layout order).
    virtual Var log_density(Tape& tape, std::span<const Var> theta) const = 0;

    // Per-observation log-likelihood at constrained values; empty when the
    // model has no observations.
    virtual std::vector<double> pointwise_log_lik(std::span<const double> theta) const {
        return {};
    }

    virtual std::size_t observation_count() const { return 0; }

    // Constrained point that chain initialization jitters around; empty
    // means the origin of the unconstrained space.
    virtual std::vector<double> initial_point() const { return {}; }
};

// Raised by the checked evaluation when the density or its gradient turns
// non-finite; param() names the parameter block that triggered it.
class EvalError : public DomainError {
  public:
    EvalError(std::string param, const std::string& what)
        : DomainError(what), param_(std::move(param)) {}
    const std::string& param() const { return param_; }

  private:
    std::string param_;
};

// Differentiable log posterior over the unconstrained parameter vector,
// including every constraint log-Jacobian. Immutable and shareable; each
// evaluation runs on a thread-local tape.
class LogDensityProgram {
  public:
    explicit LogDensityProgram(std::shared_ptr<const Model> model);

    const Model& model() const { return *model_; }
    const ParamLayout& layout() const { return model_->layout(); }
    std::size_t dimension() const { return model_->layout().total_free(); }

    struct Evaluation {
        double value = 0.0;
        std::vector<double> gradient;
    };

    // Checked evaluation: throws EvalError on non-finite value or gradient.
    Evaluation evaluate(std::span<const double> u) const;

    // Sampler path: writes the gradient and returns the value; a non-finite
    // result becomes -inf with a zero gradient.
    double log_density_gradient(std::span<const double> u, std::span<double> gradient) const;

    // Value only (still records a tape, but skips the backward sweep).
    double log_density(std::span<const double> u) const;

    std::vector<double> constrain(std::span<const double> u) const;
    // Throws DomainError when a value violates its constraint.
    std::vector<double> unconstrain(std::span<const double> theta) const;

    std::vector<double> pointwise_log_lik(std::span<const double> u) const;

    // Unconstrained image of the model's initial point (zeros by default).
    std::vector<double> initial_center() const;

  private:
    Var record(Tape& tape, std::span<const double> u, std::vector<Var>& inputs,
               std::vector<Var>& theta) const;

    std::shared_ptr<const Model> model_;
};

}  // namespace flare::ppl
