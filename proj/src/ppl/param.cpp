#include "flare/ppl/param.hpp"

#include <charconv>
#include <set>

#include "flare/error.hpp"

namespace flare::ppl {

std::string to_string(const Constraint& c) {
    switch (c.kind) {
        case ConstraintKind::real: return "real";
        case ConstraintKind::positive: return "positive";
        case ConstraintKind::unit_interval: return "unit_interval";
        case ConstraintKind::simplex: return "simplex(" + std::to_string(c.k) + ")";
        case ConstraintKind::cholesky_corr: return "cholesky_corr(" + std::to_string(c.k) + ")";
    }
    return "real";
}

namespace {

std::size_t parse_order(std::string_view text, std::string_view prefix) {
    std::string_view inner = text.substr(prefix.size());
    if (inner.size() < 2 || inner.front() != '(' || inner.back() != ')') {
        throw ValidationError("malformed constraint '" + std::string(text) + "'");
    }
    inner = inner.substr(1, inner.size() - 2);
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), k);
    if (ec != std::errc{} || ptr != inner.data() + inner.size() || k == 0) {
        throw ValidationError("malformed constraint order in '" + std::string(text) + "'");
    }
    return k;
}

}  // namespace

Constraint parse_constraint(std::string_view text) {
    if (text == "real") return Constraint::real();
    if (text == "positive") return Constraint::positive();
    if (text == "unit_interval") return Constraint::unit_interval();
    if (text.starts_with("simplex")) return Constraint::simplex(parse_order(text, "simplex"));
    if (text.starts_with("cholesky_corr")) {
        return Constraint::cholesky_corr(parse_order(text, "cholesky_corr"));
    }
    throw ValidationError("unknown constraint '" + std::string(text) + "'");
}

std::size_t ParamSpec::size() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::size_t ParamSpec::free_dim() const {
    switch (constraint.kind) {
        case ConstraintKind::simplex: return constraint.k - 1;
        case ConstraintKind::cholesky_corr: return constraint.k * (constraint.k - 1) / 2;
        default: return size();
    }
}

ParamSpec scalar_param(std::string name, Constraint c) { return {std::move(name), {}, c}; }

ParamSpec vector_param(std::string name, std::size_t n, Constraint c) {
    return {std::move(name), {n}, c};
}

ParamSpec simplex_param(std::string name, std::size_t k) {
    return {std::move(name), {k}, Constraint::simplex(k)};
}

ParamSpec cholesky_corr_param(std::string name, std::size_t k) {
    return {std::move(name), {k, k}, Constraint::cholesky_corr(k)};
}

ParamLayout::ParamLayout(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
    std::set<std::string> seen;
    for (const ParamSpec& s : specs_) {
        if (!seen.insert(s.name).second) {
            throw ValidationError("duplicate parameter name '" + s.name + "'");
        }
        const auto kind = s.constraint.kind;
        if (kind == ConstraintKind::simplex &&
            (s.shape.size() != 1 || s.shape[0] != s.constraint.k)) {
            throw ValidationError("simplex parameter '" + s.name + "' must have shape {K}");
        }
        if (kind == ConstraintKind::cholesky_corr &&
            (s.shape.size() != 2 || s.shape[0] != s.constraint.k ||
             s.shape[1] != s.constraint.k)) {
            throw ValidationError("cholesky_corr parameter '" + s.name + "' must have shape {K,K}");
        }
        offsets_.push_back(total_size_);
        free_offsets_.push_back(total_free_);
        total_size_ += s.size();
        total_free_ += s.free_dim();
    }
}

std::size_t ParamLayout::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (specs_[i].name == name) return i;
    }
    throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

bool ParamLayout::contains(std::string_view name) const {
    for (const ParamSpec& s : specs_) {
        if (s.name == name) return true;
    }
    return false;
}

std::vector<std::string> ParamLayout::component_names() const {
    std::vector<std::string> names;
    names.reserve(total_size_);
    for (const ParamSpec& s : specs_) {
        if (s.shape.empty()) {
            names.push_back(s.name);
        } else if (s.shape.size() == 1) {
            for (std::size_t i = 0; i < s.shape[0]; ++i) {
                names.push_back(s.name + "[" + std::to_string(i) + "]");
            }
        } else {
            const std::size_t cols = s.size() / s.shape[0];
            for (std::size_t i = 0; i < s.shape[0]; ++i) {
                for (std::size_t j = 0; j < cols; ++j) {
                    names.push_back(s.name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
                }
            }
        }
    }
    return names;
}

}  // namespace flare::ppl
