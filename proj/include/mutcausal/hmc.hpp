#pragma once

// Fixed-length Hamiltonian Monte Carlo with a jittered integration time,
// dual-averaging step-size adaptation and windowed (dense or diagonal) metric
// adaptation during warmup.
//
// A target is any callable `double(const VectorXd& x, VectorXd& grad)`
// returning the log density and writing its gradient, with a `dimension()`.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mutcausal/errors.hpp"

namespace mutcausal {

template <typename T>
concept LogDensityTarget = requires(T& t, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    { t.dimension() } -> std::convertible_to<Eigen::Index>;
    { t(x, g) } -> std::convertible_to<double>;
};

struct HmcSettings {
    int warmup = 1000;
    int samples = 1000;
    double target_accept = 0.8;
    double integration_time = 3.0; // in metric-whitened units
    double jitter = 0.4;           // integration time ~ U[(1 - jitter) T, (1 + jitter) T]
    int max_steps = 1024;
    bool dense_metric = true;
    std::optional<double> fixed_step_size; // disables step-size adaptation
    bool curvature_init = true; // start from a diagonal metric fitted to the local curvature
    double init_sd = 0.1;
    int max_init_attempts = 100;
    double divergence_threshold = 1000; // energy error marking a divergent transition
    int max_consecutive_divergences = 100;
};

// Euclidean metric: momentum p ~ N(0, M), velocity = M^{-1} p where M^{-1}
// is the (estimated) posterior covariance.
class Metric {
public:
    explicit Metric(Eigen::Index dim) : inverse_(Eigen::MatrixXd::Identity(dim, dim)) { factor(); }

    explicit Metric(Eigen::MatrixXd inverse_mass) : inverse_(std::move(inverse_mass)) { factor(); }

    Eigen::Index dimension() const { return inverse_.rows(); }
    const Eigen::MatrixXd& inverse_mass() const { return inverse_; }

    Eigen::VectorXd velocity(const Eigen::VectorXd& p) const { return inverse_ * p; }
    double kinetic(const Eigen::VectorXd& p) const { return 0.5 * p.dot(velocity(p)); }

    // p = L^{-T} z with inverse mass = L L^T, so Cov(p) = M.
    template <typename Rng>
    Eigen::VectorXd sample_momentum(Rng& rng) const {
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(dimension());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
        return llt_.matrixU().solve(z);
    }

private:
    void factor() {
        llt_.compute(inverse_);
        if (llt_.info() != Eigen::Success) throw SamplerError("metric is not positive definite");
    }

    Eigen::MatrixXd inverse_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct PhasePoint {
    Eigen::VectorXd x;
    Eigen::VectorXd p;
    Eigen::VectorXd grad;
    double log_density = 0;

    double hamiltonian(const Metric& metric) const { return -log_density + metric.kinetic(p); }
};

// `steps` leapfrog steps of size `eps`, in place.
template <LogDensityTarget Target>
void leapfrog(Target& target, const Metric& metric, PhasePoint& z, double eps, int steps) {
    for (int s = 0; s < steps; ++s) {
        z.p += 0.5 * eps * z.grad;
        z.x += eps * metric.velocity(z.p);
        z.log_density = target(z.x, z.grad);
        z.p += 0.5 * eps * z.grad;
        if (!std::isfinite(z.log_density)) return;
    }
}

// Nesterov dual averaging of log step size (Hoffman & Gelman).
class StepSizeAdapter {
public:
    explicit StepSizeAdapter(double target_accept) : delta_(target_accept) {}

    void restart(double eps) {
        mu_ = std::log(10 * eps);
        counter_ = 0;
        s_bar_ = 0;
        x_bar_ = 0;
    }

    double learn(double accept_stat) {
        ++counter_;
        const double eta = 1.0 / (counter_ + kT0);
        s_bar_ = (1 - eta) * s_bar_ + eta * (delta_ - accept_stat);
        const double x = mu_ - s_bar_ * std::sqrt(counter_) / kGamma;
        const double x_eta = std::pow(counter_, -kKappa);
        x_bar_ = x_eta * x + (1 - x_eta) * x_bar_;
        return std::exp(x);
    }

    double final_step_size() const { return std::exp(x_bar_); }

private:
    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10;
    static constexpr double kKappa = 0.75;
    double delta_;
    double mu_ = 0;
    double counter_ = 0;
    double s_bar_ = 0;
    double x_bar_ = 0;
};

// Welford accumulation of the draws in one metric-adaptation window.
class CovarianceEstimator {
public:
    explicit CovarianceEstimator(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

    void add(const Eigen::VectorXd& x) {
        ++n_;
        const Eigen::VectorXd delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_.noalias() += (x - mean_) * delta.transpose();
    }

    long count() const { return n_; }

    void reset() {
        n_ = 0;
        mean_.setZero();
        m2_.setZero();
    }

    // Shrinks toward a small multiple of the identity as in Stan.
    Eigen::MatrixXd regularized(bool dense) const {
        const double n = static_cast<double>(n_);
        Eigen::MatrixXd cov = m2_ / (n - 1);
        if (!dense) cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
        cov *= n / (n + 5);
        cov.diagonal().array() += 1e-3 * 5 / (n + 5);
        return cov;
    }

private:
    long n_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd m2_;
};

// Warmup schedule: an initial fast interval, doubling slow windows where the
// metric is estimated, and a terminal fast interval.
struct WarmupSchedule {
    int init_buffer = 0;
    int term_buffer = 0;
    std::vector<int> window_ends; // iteration index (exclusive) closing each slow window

    static WarmupSchedule make(int warmup) {
        WarmupSchedule s;
        if (warmup < 20) return s;
        int init = 75, term = 50, base = 25;
        if (init + term + base > warmup) {
            init = static_cast<int>(0.15 * warmup);
            term = static_cast<int>(0.1 * warmup);
            base = warmup - init - term;
        }
        s.init_buffer = init;
        s.term_buffer = term;
        const int slow_end = warmup - term;
        int start = init;
        int size = base;
        while (start < slow_end) {
            int end = start + size;
            // merge a too-short final window into the current one
            if (end + 2 * size > slow_end) end = slow_end;
            s.window_ends.push_back(end);
            start = end;
            size *= 2;
        }
        return s;
    }
};

struct ChainOutput {
    Eigen::MatrixXd draws; // samples x dim, unconstrained
    double step_size = 0;
    double mean_accept = 0;
    double mean_steps = 0;
    int divergences = 0;
    Eigen::MatrixXd inverse_mass;
};

namespace detail {

template <LogDensityTarget Target, typename Rng>
PhasePoint initialize(Target& target, const HmcSettings& settings, Rng& rng) {
    std::normal_distribution<double> normal(0.0, settings.init_sd);
    PhasePoint z;
    z.x.resize(target.dimension());
    z.grad.resize(target.dimension());
    for (int attempt = 0; attempt < settings.max_init_attempts; ++attempt) {
        for (Eigen::Index i = 0; i < z.x.size(); ++i) z.x(i) = normal(rng);
        z.log_density = target(z.x, z.grad);
        if (std::isfinite(z.log_density) && z.grad.allFinite()) return z;
    }
    throw NonFiniteGradient("no finite log density and gradient found at initialization");
}

// Diagonal inverse metric 1 / (-d2 log p / dx_i^2) at the start point, by
// central differences of the gradient. Directions with non-positive or
// non-finite curvature keep unit scale.
template <LogDensityTarget Target>
Metric curvature_metric(Target& target, const PhasePoint& start) {
    const Eigen::Index dim = start.x.size();
    Eigen::VectorXd inverse = Eigen::VectorXd::Ones(dim);
    Eigen::VectorXd x = start.x, g_plus(dim), g_minus(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double h = 1e-4 * std::max(1.0, std::abs(start.x(i)));
        x(i) = start.x(i) + h;
        const double lp_plus = target(x, g_plus);
        x(i) = start.x(i) - h;
        const double lp_minus = target(x, g_minus);
        x(i) = start.x(i);
        if (!std::isfinite(lp_plus) || !std::isfinite(lp_minus)) continue;
        const double precision = -(g_plus(i) - g_minus(i)) / (2 * h);
        if (precision > 0 && std::isfinite(precision)) inverse(i) = std::clamp(1.0 / precision, 1e-10, 1e4);
    }
    return Metric(Eigen::MatrixXd(inverse.asDiagonal()));
}

// Doubles or halves eps until a single step's acceptance crosses 0.8.
template <LogDensityTarget Target, typename Rng>
double initial_step_size(Target& target, const Metric& metric, const PhasePoint& start, double eps, Rng& rng) {
    int direction = 0;
    for (int iter = 0; iter < 100; ++iter) {
        PhasePoint z = start;
        z.p = metric.sample_momentum(rng);
        const double h0 = z.hamiltonian(metric);
        leapfrog(target, metric, z, eps, 1);
        const double h1 = z.hamiltonian(metric);
        const double delta = std::isfinite(h1) ? h0 - h1 : -std::numeric_limits<double>::infinity();
        const int want = delta > std::log(0.8) ? 1 : -1;
        if (direction == 0) direction = want;
        if (want != direction) break;
        eps = direction > 0 ? eps * 2 : eps / 2;
        if (eps > 1e7 || eps < 1e-12) break;
    }
    return eps;
}

} // namespace detail

// Runs one chain; `rng` is owned by the caller.
template <LogDensityTarget Target, typename Rng>
ChainOutput sample_chain(Target& target, const HmcSettings& settings, Rng& rng) {
    const Eigen::Index dim = target.dimension();
    PhasePoint z = detail::initialize(target, settings, rng);
    Metric metric = settings.curvature_init ? detail::curvature_metric(target, z) : Metric(dim);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    double eps = settings.fixed_step_size.value_or(1.0);
    const bool adapt = !settings.fixed_step_size.has_value();
    StepSizeAdapter adapter(settings.target_accept);
    if (adapt) {
        eps = detail::initial_step_size(target, metric, z, eps, rng);
        adapter.restart(eps);
    }
    const auto schedule = WarmupSchedule::make(settings.warmup);
    std::size_t next_window = 0;
    CovarianceEstimator covariance(dim);

    ChainOutput out;
    out.draws.resize(settings.samples, dim);
    double accept_sum = 0;
    double steps_sum = 0;
    int consecutive_divergent = 0;

    const int total = settings.warmup + settings.samples;
    for (int iter = 0; iter < total; ++iter) {
        const bool warming = iter < settings.warmup;

        PhasePoint proposal = z;
        proposal.p = metric.sample_momentum(rng);
        const double h0 = proposal.hamiltonian(metric);
        const double time = settings.integration_time * (1 - settings.jitter + 2 * settings.jitter * uniform(rng));
        const int steps = std::clamp(static_cast<int>(std::ceil(time / eps)), 1, settings.max_steps);
        leapfrog(target, metric, proposal, eps, steps);
        const double h1 = proposal.hamiltonian(metric);

        const bool finite = std::isfinite(h1) && proposal.grad.allFinite();
        const bool divergent = !finite || h1 - h0 > settings.divergence_threshold;
        const double accept_stat = finite ? std::min(1.0, std::exp(h0 - h1)) : 0.0;
        if (finite && uniform(rng) < accept_stat) z = std::move(proposal);

        if (warming) {
            if (adapt) eps = adapter.learn(accept_stat);
            const bool in_slow_window = iter >= schedule.init_buffer && next_window < schedule.window_ends.size();
            if (in_slow_window) {
                covariance.add(z.x);
                if (iter + 1 == schedule.window_ends[next_window]) {
                    metric = Metric(covariance.regularized(settings.dense_metric));
                    covariance.reset();
                    ++next_window;
                    if (adapt) {
                        eps = detail::initial_step_size(target, metric, z, eps, rng);
                        adapter.restart(eps);
                    }
                }
            }
            if (iter + 1 == settings.warmup && adapt) eps = adapter.final_step_size();
            continue;
        }

        const int row = iter - settings.warmup;
        out.draws.row(row) = z.x.transpose();
        accept_sum += accept_stat;
        steps_sum += steps;
        if (divergent) {
            ++out.divergences;
            if (++consecutive_divergent >= settings.max_consecutive_divergences) {
                throw DivergenceExplosion("sampler diverged on every transition after adaptation");
            }
        } else {
            consecutive_divergent = 0;
        }
    }
    out.step_size = eps;
    out.mean_accept = settings.samples > 0 ? accept_sum / settings.samples : 0;
    out.mean_steps = settings.samples > 0 ? steps_sum / settings.samples : 0;
    out.inverse_mass = metric.inverse_mass();
    return out;
}

} // namespace mutcausal
