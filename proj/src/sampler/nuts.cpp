#include "flare/sampler/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "flare/dist/rng.hpp"
#include "flare/simd/kernels.hpp"

namespace flare::sampler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxDeltaH = 1000.0;

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct Point {
    std::vector<double> q;
    std::vector<double> p;
    std::vector<double> grad;
    double logp = 0.0;
};

using Vec = std::vector<double>;

class DualAveraging {
  public:
    void restart(double mu) {
        mu_ = mu;
        counter_ = 0;
        s_bar_ = 0.0;
        x_bar_ = 0.0;
    }
    void set_delta(double d) { delta_ = d; }

    double learn(double accept_stat) {
        ++counter_;
        accept_stat = std::min(1.0, accept_stat);
        const double n = static_cast<double>(counter_);
        const double eta = 1.0 / (n + kT0);
        s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
        const double x = mu_ - s_bar_ * std::sqrt(n) / kGamma;
        const double x_eta = std::pow(n, -kKappa);
        x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
        return std::exp(x);
    }

    double final_step() const { return std::exp(x_bar_); }

  private:
    static constexpr double kGamma = 0.22;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;
    double mu_ = 0.0;
    double delta_ = 0.8;
    long counter_ = 0;
    double s_bar_ = 0.0;
    double x_bar_ = 0.0;
};

// Expanding-window variance estimation for the diagonal metric.
class WindowedVariance {
  public:
    WindowedVariance(std::size_t warmup, std::size_t dim) : warmup_(warmup), mean_(dim), m2_(dim) {
        if (warmup < 20) {
            init_buffer_ = warmup;
            term_buffer_ = 0;
            base_window_ = 0;
            active_ = false;
        } else if (init_buffer_ + base_window_ + term_buffer_ > warmup) {
            init_buffer_ = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
            term_buffer_ = static_cast<std::size_t>(0.1 * static_cast<double>(warmup));
            base_window_ = warmup - (init_buffer_ + term_buffer_);
        }
        window_size_ = base_window_;
        next_window_ = init_buffer_ + base_window_ - 1;
    }

    // Returns true when a window closed and inv_metric was updated.
    bool learn(Vec& inv_metric, const Vec& q) {
        if (!active_) return false;
        if (in_window()) add(q);
        if (end_of_window()) {
            next();
            const double n = static_cast<double>(count_);
            for (std::size_t i = 0; i < inv_metric.size(); ++i) {
                const double var = m2_[i] / (n - 1.0);
                inv_metric[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
            }
            count_ = 0;
            std::fill(mean_.begin(), mean_.end(), 0.0);
            std::fill(m2_.begin(), m2_.end(), 0.0);
            ++counter_;
            return true;
        }
        ++counter_;
        return false;
    }

  private:
    bool in_window() const {
        return counter_ >= init_buffer_ && counter_ < warmup_ - term_buffer_ && counter_ != warmup_;
    }
    bool end_of_window() const { return counter_ == next_window_ && counter_ != warmup_; }

    void next() {
        if (next_window_ == warmup_ - term_buffer_ - 1) return;
        window_size_ *= 2;
        next_window_ = counter_ + window_size_;
        if (next_window_ != warmup_ - term_buffer_ - 1) {
            const std::size_t boundary = next_window_ + 2 * window_size_;
            if (boundary >= warmup_ - term_buffer_) next_window_ = warmup_ - term_buffer_ - 1;
        }
    }

    void add(const Vec& q) {
        ++count_;
        const double n = static_cast<double>(count_);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double d = q[i] - mean_[i];
            mean_[i] += d / n;
            m2_[i] += d * (q[i] - mean_[i]);
        }
    }

    std::size_t warmup_;
    std::size_t init_buffer_ = 75;
    std::size_t term_buffer_ = 50;
    std::size_t base_window_ = 25;
    std::size_t window_size_ = 0;
    std::size_t next_window_ = 0;
    std::size_t counter_ = 0;
    bool active_ = true;
    std::size_t count_ = 0;
    Vec mean_;
    Vec m2_;
};

class Chain {
  public:
    Chain(const ppl::LogDensityProgram& program, const SamplerConfig& cfg, std::size_t index)
        : program_(program),
          cfg_(cfg),
          rng_(cfg.seed, index),
          dim_(program.dimension()),
          inv_metric_(dim_, 1.0),
          kernels_(simd::kernels()) {}

    void initialize() {
        const std::vector<double> center = program_.initial_center();
        z_.q.assign(dim_, 0.0);
        z_.p.assign(dim_, 0.0);
        z_.grad.assign(dim_, 0.0);
        for (std::size_t attempt = 0; attempt < cfg_.init_retries; ++attempt) {
            for (std::size_t i = 0; i < dim_; ++i) z_.q[i] = center[i] + rng_.uniform(-cfg_.init_jitter, cfg_.init_jitter);
            z_.logp = program_.log_density_gradient(z_.q, z_.grad);
            if (std::isfinite(z_.logp)) return;
        }
        std::string param;
        try {
            program_.evaluate(z_.q);
        } catch (const ppl::EvalError& e) {
            param = e.param();
        } catch (const std::exception&) {
        }
        throw InitError(param, "could not find a finite initial point after " +
                                   std::to_string(cfg_.init_retries) + " attempts (parameter '" +
                                   param + "')");
    }

    void run(Trace& trace, std::size_t chain) {
        initialize();
        epsilon_ = 1.0;
        init_step_size();
        DualAveraging da;
        da.set_delta(cfg_.target_accept);
        da.restart(std::log(10.0 * epsilon_));
        WindowedVariance wv(cfg_.warmup_iters, dim_);

        for (std::size_t it = 0; it < cfg_.warmup_iters; ++it) {
            const DrawStats s = transition();
            epsilon_ = da.learn(s.accept_stat);
            if (wv.learn(inv_metric_, z_.q)) {
                init_step_size();
                da.restart(std::log(10.0 * epsilon_));
            }
        }
        if (cfg_.warmup_iters > 0) epsilon_ = da.final_step();

        const std::size_t total = program_.layout().total_size();
        const std::size_t n_obs = trace.n_obs;
        for (std::size_t d = 0; d < cfg_.draw_iters; ++d) {
            const DrawStats s = transition();
            const std::size_t row = chain * cfg_.draw_iters + d;
            trace.stats[row] = s;
            const std::vector<double> theta = program_.constrain(z_.q);
            std::copy(theta.begin(), theta.end(), trace.values.begin() + static_cast<std::ptrdiff_t>(row * total));
            if (n_obs > 0) {
                const std::vector<double> ll = program_.model().pointwise_log_lik(theta);
                std::copy(ll.begin(), ll.end(), trace.log_lik.begin() + static_cast<std::ptrdiff_t>(row * n_obs));
            }
        }
    }

  private:
    double dot(const Vec& a, const Vec& b) const { return kernels_.dot(a.data(), b.data(), a.size()); }

    double kinetic(const Vec& p) const {
        double k = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) k += p[i] * p[i] * inv_metric_[i];
        return 0.5 * k;
    }

    double hamiltonian(const Point& z) const { return -z.logp + kinetic(z.p); }

    Vec p_sharp(const Vec& p) const {
        Vec out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = inv_metric_[i] * p[i];
        return out;
    }

    void sample_momentum(Point& z) {
        for (std::size_t i = 0; i < dim_; ++i) z.p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
    }

    void leapfrog(Point& z, double eps) {
        kernels_.axpy(0.5 * eps, z.grad.data(), z.p.data(), dim_);
        for (std::size_t i = 0; i < dim_; ++i) z.q[i] += eps * inv_metric_[i] * z.p[i];
        z.logp = program_.log_density_gradient(z.q, z.grad);
        kernels_.axpy(0.5 * eps, z.grad.data(), z.p.data(), dim_);
    }

    void init_step_size() {
        const Point start = z_;
        sample_momentum(z_);
        double h0 = hamiltonian(z_);
        leapfrog(z_, epsilon_);
        double h = hamiltonian(z_);
        if (std::isnan(h)) h = kInf;
        double delta_h = h0 - h;
        const int direction = delta_h > std::log(0.8) ? 1 : -1;
        for (int guard = 0; guard < 200; ++guard) {
            z_ = start;
            sample_momentum(z_);
            h0 = hamiltonian(z_);
            leapfrog(z_, epsilon_);
            h = hamiltonian(z_);
            if (std::isnan(h)) h = kInf;
            delta_h = h0 - h;
            if (direction == 1 && !(delta_h > std::log(0.8))) break;
            if (direction == -1 && !(delta_h < std::log(0.8))) break;
            epsilon_ = direction == 1 ? 2.0 * epsilon_ : 0.5 * epsilon_;
            if (epsilon_ > 1e7) throw NumericalError("step size diverged; posterior may be improper");
            if (epsilon_ < 1e-300) throw NumericalError("step size collapsed to zero");
        }
        z_ = start;
    }

    bool criterion(const Vec& p_sharp_minus, const Vec& p_sharp_plus, const Vec& rho) const {
        return dot(p_sharp_plus, rho) > 0.0 && dot(p_sharp_minus, rho) > 0.0;
    }

    struct TreeState {
        double h0 = 0.0;
        double sign = 1.0;
        long n_leapfrog = 0;
        double sum_metro_prob = 0.0;
        bool divergent = false;
    };

    bool build_tree(int depth, Point& z_propose, Vec& p_sharp_beg, Vec& p_sharp_end, Vec& rho,
                    Vec& p_beg, Vec& p_end, double& log_sum_weight, TreeState& ts) {
        if (depth == 0) {
            leapfrog(z_, ts.sign * epsilon_);
            ++ts.n_leapfrog;
            double h = hamiltonian(z_);
            if (std::isnan(h)) h = kInf;
            if (h - ts.h0 > kMaxDeltaH) ts.divergent = true;
            log_sum_weight = log_add(log_sum_weight, ts.h0 - h);
            ts.sum_metro_prob += ts.h0 - h > 0.0 ? 1.0 : std::exp(ts.h0 - h);
            z_propose = z_;
            p_sharp_beg = p_sharp(z_.p);
            p_sharp_end = p_sharp_beg;
            for (std::size_t i = 0; i < dim_; ++i) rho[i] += z_.p[i];
            p_beg = z_.p;
            p_end = p_beg;
            return !ts.divergent;
        }

        double lsw_init = -kInf;
        Vec p_init_end(dim_);
        Vec p_sharp_init_end(dim_);
        Vec rho_init(dim_, 0.0);
        if (!build_tree(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end,
                        lsw_init, ts)) {
            return false;
        }

        Point z_propose_final = z_;
        double lsw_final = -kInf;
        Vec p_final_beg(dim_);
        Vec p_sharp_final_beg(dim_);
        Vec rho_final(dim_, 0.0);
        if (!build_tree(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg,
                        p_end, lsw_final, ts)) {
            return false;
        }

        const double lsw_subtree = log_add(lsw_init, lsw_final);
        log_sum_weight = log_add(log_sum_weight, lsw_subtree);
        if (lsw_final > lsw_subtree) {
            z_propose = z_propose_final;
        } else if (rng_.uniform() < std::exp(lsw_final - lsw_subtree)) {
            z_propose = z_propose_final;
        }

        Vec rho_subtree(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            rho_subtree[i] = rho_init[i] + rho_final[i];
            rho[i] += rho_subtree[i];
        }
        bool persist = criterion(p_sharp_beg, p_sharp_end, rho_subtree);
        Vec rho_ext(dim_);
        for (std::size_t i = 0; i < dim_; ++i) rho_ext[i] = rho_init[i] + p_final_beg[i];
        persist = persist && criterion(p_sharp_beg, p_sharp_final_beg, rho_ext);
        for (std::size_t i = 0; i < dim_; ++i) rho_ext[i] = rho_final[i] + p_init_end[i];
        persist = persist && criterion(p_sharp_init_end, p_sharp_end, rho_ext);
        return persist;
    }

    DrawStats transition() {
        sample_momentum(z_);
        Point z_fwd = z_;
        Point z_bwd = z_;
        Point z_sample = z_;
        Point z_propose = z_;

        Vec p_fwd_fwd = z_.p;
        Vec p_sharp_fwd_fwd = p_sharp(z_.p);
        Vec p_fwd_bwd = z_.p;
        Vec p_sharp_fwd_bwd = p_sharp_fwd_fwd;
        Vec p_bwd_fwd = z_.p;
        Vec p_sharp_bwd_fwd = p_sharp_fwd_fwd;
        Vec p_bwd_bwd = z_.p;
        Vec p_sharp_bwd_bwd = p_sharp_fwd_fwd;
        Vec rho = z_.p;

        double log_sum_weight = 0.0;
        TreeState ts;
        ts.h0 = hamiltonian(z_);
        int depth = 0;

        while (depth < cfg_.max_tree_depth) {
            Vec rho_fwd(dim_, 0.0);
            Vec rho_bwd(dim_, 0.0);
            bool valid = false;
            double lsw_subtree = -kInf;
            if (rng_.uniform() > 0.5) {
                z_ = z_fwd;
                rho_bwd = rho;
                p_bwd_fwd = p_fwd_bwd;
                p_sharp_bwd_fwd = p_sharp_fwd_bwd;
                ts.sign = 1.0;
                valid = build_tree(depth, z_propose, p_sharp_fwd_bwd, p_sharp_fwd_fwd, rho_fwd, p_fwd_bwd,
                                   p_fwd_fwd, lsw_subtree, ts);
                z_fwd = z_;
            } else {
                z_ = z_bwd;
                rho_fwd = rho;
                p_fwd_bwd = p_bwd_fwd;
                p_sharp_fwd_bwd = p_sharp_bwd_fwd;
                ts.sign = -1.0;
                valid = build_tree(depth, z_propose, p_sharp_bwd_fwd, p_sharp_bwd_bwd, rho_bwd, p_bwd_fwd,
                                   p_bwd_bwd, lsw_subtree, ts);
                z_bwd = z_;
            }
            if (!valid) break;
            ++depth;

            if (lsw_subtree > log_sum_weight) {
                z_sample = z_propose;
            } else if (rng_.uniform() < std::exp(lsw_subtree - log_sum_weight)) {
                z_sample = z_propose;
            }
            log_sum_weight = log_add(log_sum_weight, lsw_subtree);

            for (std::size_t i = 0; i < dim_; ++i) rho[i] = rho_bwd[i] + rho_fwd[i];
            bool persist = criterion(p_sharp_bwd_bwd, p_sharp_fwd_fwd, rho);
            Vec rho_ext(dim_);
            for (std::size_t i = 0; i < dim_; ++i) rho_ext[i] = rho_bwd[i] + p_fwd_bwd[i];
            persist = persist && criterion(p_sharp_bwd_bwd, p_sharp_fwd_bwd, rho_ext);
            for (std::size_t i = 0; i < dim_; ++i) rho_ext[i] = rho_fwd[i] + p_bwd_fwd[i];
            persist = persist && criterion(p_sharp_bwd_fwd, p_sharp_fwd_fwd, rho_ext);
            if (!persist) break;
        }

        z_ = z_sample;
        DrawStats s;
        s.step_size = epsilon_;
        s.tree_depth = depth;
        s.divergent = ts.divergent;
        s.energy = hamiltonian(z_);
        s.accept_stat = ts.n_leapfrog > 0 ? ts.sum_metro_prob / static_cast<double>(ts.n_leapfrog) : 0.0;
        return s;
    }

    const ppl::LogDensityProgram& program_;
    const SamplerConfig& cfg_;
    dist::Rng rng_;
    std::size_t dim_;
    Vec inv_metric_;
    const simd::KernelTable& kernels_;
    Point z_;
    double epsilon_ = 1.0;
};

}  // namespace

void validate(const SamplerConfig& cfg) {
    if (cfg.chains < 2) throw ParameterError("at least 2 chains are required for R-hat");
    if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0)) {
        throw ParameterError("target_accept must lie in (0, 1)");
    }
    if (cfg.draw_iters < 1) throw ParameterError("draw_iters must be >= 1");
    if (cfg.max_tree_depth < 1) throw ParameterError("max_tree_depth must be >= 1");
    if (!(cfg.init_jitter > 0.0)) throw ParameterError("init_jitter must be > 0");
}

Trace nuts_sample(const ppl::LogDensityProgram& program, const SamplerConfig& cfg) {
    validate(cfg);
    if (program.dimension() < 1) throw ParameterError("program has no free parameters");

    Trace trace;
    trace.layout = program.layout();
    trace.chains = cfg.chains;
    trace.draws = cfg.draw_iters;
    trace.values.assign(cfg.chains * cfg.draw_iters * trace.dim(), 0.0);
    trace.n_obs = program.model().observation_count();
    trace.log_lik.assign(cfg.chains * cfg.draw_iters * trace.n_obs, 0.0);
    trace.stats.assign(cfg.chains * cfg.draw_iters, DrawStats{});

    std::vector<std::exception_ptr> errors(cfg.chains);
    auto work = [&](std::size_t c) {
        try {
            Chain chain(program, cfg, c);
            chain.run(trace, c);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    if (cfg.parallel && cfg.chains > 1) {
        std::vector<std::thread> threads;
        threads.reserve(cfg.chains);
        for (std::size_t c = 0; c < cfg.chains; ++c) threads.emplace_back(work, c);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t c = 0; c < cfg.chains; ++c) work(c);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return trace;
}

}  // namespace flare::sampler
