#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace resetinv {

/// Per-epoch demand law with support on [0, inf). Both families have a
/// bounded, Lipschitz density, which is what the threshold theory needs.
enum class DemandFamily { truncated_normal, exponential };

std::string to_string(DemandFamily family);

struct DensityBounds {
    double sup;        ///< P: sup of the density on [0, inf)
    double lipschitz;  ///< L: Lipschitz constant of the density on [0, inf)
};

using Rng = std::mt19937_64;

class DemandModel {
public:
    /// Normal(mu, sigma^2) conditioned on w >= 0.
    static DemandModel truncated_normal(double mu, double sigma);
    static DemandModel exponential(double rate);

    DemandFamily family() const { return family_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double rate() const { return rate_; }

    double density(double w) const;
    double cdf(double z) const;
    /// 1 - cdf(z), computed without cancellation in the upper tail.
    double survival(double z) const;
    /// E[(w - z)^+], the expected unmet demand at stock level z >= 0.
    double loss(double z) const;
    /// E[w 1{w <= z}].
    double partial_mean(double z) const;
    double mean() const { return mean_; }

    DensityBounds density_bounds() const;

    /// Smallest w with cdf(w) >= 1 - tail_mass.
    double upper_support(double tail_mass = 1e-10) const;

    double sample(Rng& rng) const;

private:
    DemandModel(DemandFamily family, double mu, double sigma, double rate);

    DemandFamily family_;
    double mu_ = 0.0;
    double sigma_ = 1.0;
    double rate_ = 1.0;
    // truncated normal: Phi(mu / sigma), the retained mass of the parent normal
    double normalizer_ = 1.0;
    double mean_ = 0.0;
};

/// Standard normal density and upper tail, shared with tests.
double std_normal_pdf(double x);
double std_normal_upper_tail(double x);

}  // namespace resetinv
