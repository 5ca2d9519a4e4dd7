#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "umdp/geometry.hpp"

namespace umdp {

// N x d disturbance samples, row-major.
struct SampleMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const { return {data.data() + i * d, d}; }
};

// expected_dim = 0 accepts whatever width the first row has.
SampleMatrix load_samples(const std::string& path, std::size_t expected_dim = 0);
void save_samples(const std::string& path, const SampleMatrix& s);

struct Cluster {
    Vec center;
    double diameter = 0.0; // twice the largest distance from the center to a member
    std::size_t count = 0;
};

// Grid bucketing of the sample bounding box at the coarsest uniform resolution
// whose nonempty-bucket count reaches target (capped by the number of
// distinct samples). The resolution is located by doubling then bisection.
// The procedure has no random choices; seed is kept for interface stability.
std::vector<Cluster> cluster_samples(const SampleMatrix& samples, std::size_t target, std::uint64_t seed = 0);

struct SupportEstimate {
    double radius = 0.0;         // max_i |w_i - center|
    std::size_t required_n = 0;  // ceil(ln(1/beta_c) / ln(1/(1 - eps_c)))
    bool satisfied = false;
};

std::size_t support_required_n(double eps_c, double beta_c);
// Smallest eps_c whose support sample requirement is met by n samples.
double tightest_eps_c(std::size_t n, double beta_c);
SupportEstimate learn_support(const SampleMatrix& samples, double eps_c, double beta_c,
                              std::span<const double> center = {});

struct NoiseModel {
    SampleMatrix samples;
    std::vector<Cluster> clusters;
    Vec support_center;
    double support_radius = 0.0;
    double eps_c = 0.0;
    double beta_c = 0.0;

    std::size_t dim() const { return samples.d; }
};

NoiseModel make_noise_model(SampleMatrix samples, std::size_t target_clusters, double eps_c, double beta_c,
                            Vec support_center = {}, std::uint64_t seed = 0);

// Ground-truth disturbance law used to synthesize samples and drive closed-loop
// simulation: independent Gaussian components, optionally truncated to a box
// or to a Euclidean ball around the mean (by rejection).
struct NoiseDistribution {
    enum class Truncation { None, Box, Ball };

    Vec mean;
    Vec stddev;
    Truncation truncation = Truncation::None;
    Vec box_lower;
    Vec box_upper;
    double ball_radius = 0.0;

    std::size_t dim() const { return mean.size(); }
    void sample(std::mt19937_64& rng, std::span<double> out) const;
    SampleMatrix draw(std::size_t n, std::uint64_t seed) const;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace umdp
