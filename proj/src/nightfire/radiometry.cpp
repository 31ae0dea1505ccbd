#include "flare/nightfire/radiometry.hpp"

#include <cmath>
#include <vector>

#include "flare/error.hpp"

namespace flare::nightfire {

namespace {

struct Objective {
    std::span<const double> r;
    std::span<const double> lambda;
    mutable std::vector<double> b;

    // Returns the residual sum of squares at T and writes the matching epsilon.
    double operator()(double t, double& eps) const {
        double rb = 0.0;
        double bb = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            b[i] = planck_radiance(lambda[i], t);
            rb += r[i] * b[i];
            bb += b[i] * b[i];
        }
        eps = bb > 0.0 ? rb / bb : 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double e = r[i] - eps * b[i];
            ss += e * e;
        }
        return ss;
    }
};

}  // namespace

double planck_radiance(double wavelength_m, double temperature_k) {
    if (!(wavelength_m > 0.0)) throw DomainError("wavelength must be positive");
    if (!(temperature_k >= 0.0)) throw DomainError("temperature must be non-negative");
    const double c1 = 2.0 * kPlanck * kLightSpeed * kLightSpeed;
    const double x = kPlanck * kLightSpeed / (wavelength_m * kBoltzmann * temperature_k);
    const double l5 = std::pow(wavelength_m, 5);
    return c1 / l5 / std::expm1(x);
}

GraybodyFit fit_graybody(std::span<const double> radiances, std::span<const double> wavelengths_m,
                         const GraybodyOptions& options) {
    if (radiances.size() != wavelengths_m.size()) throw ValidationError("one wavelength per radiance is required");
    if (radiances.size() < 2) throw ValidationError("gray-body fit needs at least two bands");
    if (!(options.t_min > 0.0 && options.t_max > options.t_min && options.t_step > 0.0 && options.tolerance_k > 0.0)) {
        throw ValidationError("bad temperature search options");
    }
    double rr = 0.0;
    for (std::size_t i = 0; i < radiances.size(); ++i) {
        if (!std::isfinite(radiances[i])) throw ValidationError("radiances must be finite");
        if (!(wavelengths_m[i] > 0.0)) throw ValidationError("wavelengths must be positive");
        rr += radiances[i] * radiances[i];
    }
    if (rr == 0.0) throw ValidationError("all radiances are zero; no emitter to fit");

    const Objective f{radiances, wavelengths_m, std::vector<double>(radiances.size())};
    const auto steps = static_cast<std::size_t>(std::floor((options.t_max - options.t_min) / options.t_step + 1e-9));
    double best_t = options.t_min;
    double best_eps = 0.0;
    double best = f(best_t, best_eps);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = options.t_min + static_cast<double>(k) * options.t_step;
        double eps = 0.0;
        const double v = f(t, eps);
        if (v < best) {
            best = v;
            best_t = t;
            best_eps = eps;
        }
    }

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(options.t_min, best_t - options.t_step);
    double b = std::min(options.t_max, best_t + options.t_step);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double ec = 0.0;
    double ed = 0.0;
    double fc = f(c, ec);
    double fd = f(d, ed);
    while (b - a > options.tolerance_k) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c, ec);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d, ed);
        }
    }
    double eps = 0.0;
    const double t = 0.5 * (a + b);
    double ss = f(t, eps);
    GraybodyFit out;
    if (ss <= best) {
        out.temperature_k = t;
    } else {
        out.temperature_k = best_t;
        eps = best_eps;
        ss = best;
    }
    if (!(eps > 0.0)) throw ValidationError("gray-body fit has no positive emission factor");
    out.epsilon_raw = eps;
    out.epsilon = std::min(eps, 1.0);
    out.residual = ss / rr;
    return out;
}

double source_area(double epsilon, double pixel_area_m2) { return epsilon * pixel_area_m2; }

double radiant_heat(double temperature_k, double source_area_m2) {
    const double t2 = temperature_k * temperature_k;
    return kStefanBoltzmann * t2 * t2 * source_area_m2 * 1e-6;
}

}  // namespace flare::nightfire
