#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace flare::ppl {

enum class ConstraintKind { real, positive, unit_interval, simplex, cholesky_corr };

struct Constraint {
    ConstraintKind kind = ConstraintKind::real;
    std::size_t k = 0;  // simplex / cholesky_corr order

    static Constraint real() { return {ConstraintKind::real, 0}; }
    static Constraint positive() { return {ConstraintKind::positive, 0}; }
    static Constraint unit_interval() { return {ConstraintKind::unit_interval, 0}; }
    static Constraint simplex(std::size_t k) { return {ConstraintKind::simplex, k}; }
    static Constraint cholesky_corr(std::size_t k) { return {ConstraintKind::cholesky_corr, k}; }

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

// "real", "positive", "unit_interval", "simplex(K)", "cholesky_corr(K)"
std::string to_string(const Constraint& c);
Constraint parse_constraint(std::string_view text);

struct ParamSpec {
    std::string name;
    std::vector<std::size_t> shape;  // empty for scalars
    Constraint constraint;

    // Number of constrained values (product of the shape).
    std::size_t size() const;
    // Number of free values in the unconstrained space.
    std::size_t free_dim() const;
};

ParamSpec scalar_param(std::string name, Constraint c = Constraint::real());
ParamSpec vector_param(std::string name, std::size_t n, Constraint c = Constraint::real());
ParamSpec simplex_param(std::string name, std::size_t k);
ParamSpec cholesky_corr_param(std::string name, std::size_t k);

// Flat layout of a parameter list in both spaces.
class ParamLayout {
  public:
    ParamLayout() = default;
    explicit ParamLayout(std::vector<ParamSpec> specs);

    const std::vector<ParamSpec>& specs() const { return specs_; }
    std::size_t count() const { return specs_.size(); }
    const ParamSpec& spec(std::size_t i) const { return specs_[i]; }

    std::size_t offset(std::size_t i) const { return offsets_[i]; }
    std::size_t free_offset(std::size_t i) const { return free_offsets_[i]; }
    std::size_t total_size() const { return total_size_; }
    std::size_t total_free() const { return total_free_; }

    // Throws ValidationError for unknown names.
    std::size_t index_of(std::string_view name) const;
    bool contains(std::string_view name) const;

    // Scalar component names: "alpha", "w[0]", "L_corr[1,0]" ...
    std::vector<std::string> component_names() const;

  private:
    std::vector<ParamSpec> specs_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> free_offsets_;
    std::size_t total_size_ = 0;
    std::size_t total_free_ = 0;
};

}  // namespace flare::ppl
