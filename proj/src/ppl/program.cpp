#include "flare/ppl/program.hpp"

#include <cmath>
#include <limits>

#include "flare/ppl/transforms.hpp"

namespace flare::ppl {

namespace {

Tape& thread_tape() {
    thread_local Tape tape;
    return tape;
}

}  // namespace

LogDensityProgram::LogDensityProgram(std::shared_ptr<const Model> model) : model_(std::move(model)) {
    if (!model_) throw std::invalid_argument("LogDensityProgram needs a model");
}

Var LogDensityProgram::record(Tape& tape, std::span<const double> u, std::vector<Var>& inputs,
                              std::vector<Var>& theta) const {
    const ParamLayout& lay = layout();
    if (u.size() != lay.total_free()) {
        throw std::invalid_argument("unconstrained vector has length " + std::to_string(u.size()) +
                                    ", expected " + std::to_string(lay.total_free()));
    }
    tape.clear();
    inputs.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) inputs[i] = tape.leaf(u[i]);
    theta.resize(lay.total_size());
    std::vector<Var> jac;
    for (std::size_t p = 0; p < lay.count(); ++p) {
        const ParamSpec& spec = lay.spec(p);
        std::span<const Var> in(inputs.data() + lay.free_offset(p), spec.free_dim());
        std::span<Var> out(theta.data() + lay.offset(p), spec.size());
        ppl::constrain<Var>(spec, in, out, jac, &tape);
    }
    Var lp = model_->log_density(tape, theta);
    if (!jac.empty()) lp = lp + sum(jac);
    return lp;
}

LogDensityProgram::Evaluation LogDensityProgram::evaluate(std::span<const double> u) const {
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i])) {
            throw std::invalid_argument("unconstrained input " + std::to_string(i) + " is not finite");
        }
    }
    Tape& tape = thread_tape();
    std::vector<Var> inputs;
    std::vector<Var> theta;
    const Var lp = record(tape, u, inputs, theta);
    tape.backward(lp);
    Evaluation ev;
    ev.value = lp.value();
    ev.gradient.resize(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) ev.gradient[i] = tape.adjoint(inputs[i].id);

    bool finite = std::isfinite(ev.value);
    for (double g : ev.gradient) finite = finite && std::isfinite(g);
    if (finite) return ev;

    const ParamLayout& lay = layout();
    std::string culprit;
    for (std::size_t p = 0; p < lay.count() && culprit.empty(); ++p) {
        for (std::size_t j = 0; j < lay.spec(p).size(); ++j) {
            if (!std::isfinite(theta[lay.offset(p) + j].value())) {
                culprit = lay.spec(p).name;
                break;
            }
        }
    }
    for (std::size_t p = 0; p < lay.count() && culprit.empty(); ++p) {
        for (std::size_t j = 0; j < lay.spec(p).free_dim(); ++j) {
            if (!std::isfinite(ev.gradient[lay.free_offset(p) + j])) {
                culprit = lay.spec(p).name;
                break;
            }
        }
    }
    if (culprit.empty() && lay.count() > 0) culprit = lay.spec(0).name;
    throw EvalError(culprit, "log density is not finite (value " + std::to_string(ev.value) +
                                 "); first offending parameter: '" + culprit + "'");
}

double LogDensityProgram::log_density_gradient(std::span<const double> u,
                                               std::span<double> gradient) const {
    Tape& tape = thread_tape();
    std::vector<Var> inputs;
    std::vector<Var> theta;
    const Var lp = record(tape, u, inputs, theta);
    const double value = lp.value();
    if (!std::isfinite(value)) {
        std::fill(gradient.begin(), gradient.end(), 0.0);
        return -std::numeric_limits<double>::infinity();
    }
    tape.backward(lp);
    bool finite = true;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        gradient[i] = tape.adjoint(inputs[i].id);
        finite = finite && std::isfinite(gradient[i]);
    }
    if (!finite) {
        std::fill(gradient.begin(), gradient.end(), 0.0);
        return -std::numeric_limits<double>::infinity();
    }
    return value;
}

double LogDensityProgram::log_density(std::span<const double> u) const {
    Tape& tape = thread_tape();
    std::vector<Var> inputs;
    std::vector<Var> theta;
    const double value = record(tape, u, inputs, theta).value();
    return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
}

std::vector<double> LogDensityProgram::initial_center() const {
    const std::vector<double> theta = model_->initial_point();
    if (theta.empty()) return std::vector<double>(dimension(), 0.0);
    if (theta.size() != layout().total_size()) {
        throw std::invalid_argument("initial point has length " + std::to_string(theta.size()) + ", expected " +
                                    std::to_string(layout().total_size()));
    }
    return unconstrain(theta);
}

std::vector<double> LogDensityProgram::constrain(std::span<const double> u) const {
    const ParamLayout& lay = layout();
    std::vector<double> theta(lay.total_size());
    std::vector<double> jac;
    for (std::size_t p = 0; p < lay.count(); ++p) {
        const ParamSpec& spec = lay.spec(p);
        ppl::constrain<double>(spec, u.subspan(lay.free_offset(p), spec.free_dim()),
                               std::span<double>(theta.data() + lay.offset(p), spec.size()), jac);
    }
    return theta;
}

std::vector<double> LogDensityProgram::unconstrain(std::span<const double> theta) const {
    const ParamLayout& lay = layout();
    std::vector<double> u(lay.total_free());
    for (std::size_t p = 0; p < lay.count(); ++p) {
        const ParamSpec& spec = lay.spec(p);
        const Unconstrained r = to_unconstrained(spec, theta.subspan(lay.offset(p), spec.size()));
        std::copy(r.u.begin(), r.u.end(), u.begin() + static_cast<std::ptrdiff_t>(lay.free_offset(p)));
    }
    return u;
}

std::vector<double> LogDensityProgram::pointwise_log_lik(std::span<const double> u) const {
    return model_->pointwise_log_lik(constrain(u));
}

}  // namespace flare::ppl
