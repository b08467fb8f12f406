#include "resetinv/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resetinv {

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

std::string to_string(DemandFamily family) {
    switch (family) {
    case DemandFamily::truncated_normal: return "truncated_normal";
    case DemandFamily::exponential: return "exponential";
    }
    return "unknown";
}

DemandModel::DemandModel(DemandFamily family, double mu, double sigma, double rate)
    : family_(family), mu_(mu), sigma_(sigma), rate_(rate) {
    if (family_ == DemandFamily::exponential) {
        mean_ = 1.0 / rate_;
    } else {
        normalizer_ = std_normal_upper_tail(-mu_ / sigma_);
        if (!(normalizer_ > 0.0))
            throw std::invalid_argument("truncated normal: mu/sigma too negative, no mass on [0, inf)");
        mean_ = mu_ + sigma_ * std_normal_pdf(mu_ / sigma_) / normalizer_;
    }
}

DemandModel DemandModel::truncated_normal(double mu, double sigma) {
    if (!std::isfinite(mu)) throw std::invalid_argument("truncated normal: mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("truncated normal: sigma must be positive");
    return DemandModel(DemandFamily::truncated_normal, mu, sigma, 1.0);
}

DemandModel DemandModel::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("exponential: rate must be positive");
    return DemandModel(DemandFamily::exponential, 0.0, 1.0, rate);
}

double DemandModel::density(double w) const {
    if (w < 0.0) return 0.0;
    if (family_ == DemandFamily::exponential) return rate_ * std::exp(-rate_ * w);
    return std_normal_pdf((w - mu_) / sigma_) / (sigma_ * normalizer_);
}

double DemandModel::survival(double z) const {
    if (z <= 0.0) return 1.0;
    if (family_ == DemandFamily::exponential) return std::exp(-rate_ * z);
    return std::min(1.0, std_normal_upper_tail((z - mu_) / sigma_) / normalizer_);
}

double DemandModel::cdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (family_ == DemandFamily::exponential) return -std::expm1(-rate_ * z);
    return 1.0 - survival(z);
}

double DemandModel::loss(double z) const {
    if (z <= 0.0) return mean_ - z;
    if (family_ == DemandFamily::exponential) return std::exp(-rate_ * z) / rate_;
    const double a = (z - mu_) / sigma_;
    const double value = (sigma_ * std_normal_pdf(a) - sigma_ * a * std_normal_upper_tail(a)) / normalizer_;
    return std::max(0.0, value);
}

double DemandModel::partial_mean(double z) const {
    if (z <= 0.0) return 0.0;
    if (family_ == DemandFamily::exponential) {
        // (1 - e^{-lz}(1 + lz)) / l, expm1 form keeps small z accurate
        const double lz = rate_ * z;
        return (-std::expm1(-lz) - lz * std::exp(-lz)) / rate_;
    }
    const double a = (z - mu_) / sigma_;
    const double a0 = -mu_ / sigma_;
    // integral of (mu + sigma u) phi(u) over [a0, a], divided by the retained mass
    const double mass = std_normal_upper_tail(a0) - std_normal_upper_tail(a);
    const double value = (mu_ * mass + sigma_ * (std_normal_pdf(a0) - std_normal_pdf(a))) / normalizer_;
    return std::clamp(value, 0.0, mean_);
}

DensityBounds DemandModel::density_bounds() const {
    if (family_ == DemandFamily::exponential) return {rate_, rate_ * rate_};
    const double peak = std::max(0.0, mu_);
    const double sup = density(peak);
    // |f'(w)| = |w - mu| f(w) / sigma^2 peaks at mu +- sigma on the parent normal;
    // on [0, inf) the sup sits at one of those points or at the boundary.
    double lip = 0.0;
    for (double w : {0.0, mu_ - sigma_, mu_ + sigma_}) {
        if (w < 0.0) continue;
        lip = std::max(lip, std::abs(w - mu_) * density(w) / (sigma_ * sigma_));
    }
    return {sup, lip};
}

double DemandModel::upper_support(double tail_mass) const {
    if (!(tail_mass > 0.0 && tail_mass < 1.0))
        throw std::invalid_argument("upper_support: tail mass must lie in (0, 1)");
    if (family_ == DemandFamily::exponential) return -std::log(tail_mass) / rate_;
    double lo = 0.0;
    double hi = std::max(mu_, 0.0) + sigma_;
    while (survival(hi) > tail_mass) hi += 2.0 * sigma_;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (survival(mid) > tail_mass ? lo : hi) = mid;
    }
    return hi;
}

double DemandModel::sample(Rng& rng) const {
    if (family_ == DemandFamily::exponential) return std::exponential_distribution<double>(rate_)(rng);

    const double alpha = -mu_ / sigma_;  // standardized truncation point
    if (alpha < 0.5) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (;;) {
            const double u = normal(rng);
            if (u >= alpha) return std::max(0.0, mu_ + sigma_ * u);
        }
    }
    // deep truncation: exponential proposal with the optimal rate
    const double rate = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
    std::exponential_distribution<double> proposal(rate);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (;;) {
        const double u = alpha + proposal(rng);
        const double accept = std::exp(-0.5 * (u - rate) * (u - rate));
        if (uniform(rng) <= accept) return std::max(0.0, mu_ + sigma_ * u);
    }
}

}  // namespace resetinv
