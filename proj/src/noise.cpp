#include "umdp/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "umdp/error.hpp"

namespace umdp {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

SampleMatrix load_samples(const std::string& path, std::size_t expected_dim) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open sample file '" + path + "'");
    SampleMatrix out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            std::string cell = trim(line.substr(pos, comma - pos));
            double v = 0.0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            row.push_back(v);
            pos = comma + 1;
        }
        if (out.d == 0) {
            out.d = row.size();
            if (expected_dim != 0 && out.d != expected_dim)
                throw Error(ErrorKind::DimensionMismatch, path + ":" + std::to_string(lineno) + ": expected " +
                                                              std::to_string(expected_dim) + " columns, got " +
                                                              std::to_string(out.d));
        } else if (row.size() != out.d) {
            throw Error(ErrorKind::DimensionMismatch, path + ":" + std::to_string(lineno) + ": expected " +
                                                          std::to_string(out.d) + " columns, got " +
                                                          std::to_string(row.size()));
        }
        out.data.insert(out.data.end(), row.begin(), row.end());
        ++out.n;
    }
    if (out.n == 0) throw Error(ErrorKind::ParseError, "sample file '" + path + "' has no rows");
    return out;
}

void save_samples(const std::string& path, const SampleMatrix& s) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < s.n; ++i) {
        for (std::size_t k = 0; k < s.d; ++k) out << (k ? "," : "") << s.data[i * s.d + k];
        out << '\n';
    }
}

namespace {

struct Bucketing {
    Vec lo;
    Vec width;
    std::size_t d;

    std::uint64_t key(std::span<const double> x, std::uint64_t k) const {
        std::uint64_t key = 0;
        for (std::size_t i = d; i-- > 0;) {
            std::uint64_t b = 0;
            if (width[i] > 0) {
                double t = (x[i] - lo[i]) / width[i] * static_cast<double>(k);
                b = t <= 0 ? 0 : std::min<std::uint64_t>(k - 1, static_cast<std::uint64_t>(t));
            }
            key = key * k + b;
        }
        return key;
    }
};

std::size_t count_nonempty(const SampleMatrix& s, const Bucketing& bk, std::uint64_t k, std::vector<std::uint64_t>& keys) {
    keys.resize(s.n);
    for (std::size_t i = 0; i < s.n; ++i) keys[i] = bk.key(s.row(i), k);
    std::sort(keys.begin(), keys.end());
    return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

std::size_t count_distinct(const SampleMatrix& s) {
    std::vector<std::size_t> idx(s.n);
    for (std::size_t i = 0; i < s.n; ++i) idx[i] = i;
    auto less = [&](std::size_t a, std::size_t b) {
        auto ra = s.row(a), rb = s.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(idx.begin(), idx.end(), less);
    std::size_t distinct = s.n ? 1 : 0;
    for (std::size_t i = 1; i < s.n; ++i)
        if (less(idx[i - 1], idx[i])) ++distinct;
    return distinct;
}

} // namespace

std::vector<Cluster> cluster_samples(const SampleMatrix& s, std::size_t target, std::uint64_t) {
    if (s.n == 0) return {};
    if (target < 1 || target > s.n) throw Error(ErrorKind::InvalidArgument, "cluster target must lie in [1, N]");
    const std::size_t d = s.d;
    Bucketing bk{Vec(d, std::numeric_limits<double>::infinity()), Vec(d, 0.0), d};
    Vec hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            bk.lo[k] = std::min(bk.lo[k], s.data[i * d + k]);
            hi[k] = std::max(hi[k], s.data[i * d + k]);
        }
    for (std::size_t k = 0; k < d; ++k) bk.width[k] = hi[k] - bk.lo[k];

    const std::size_t goal = std::min(target, count_distinct(s));
    // Largest per-dimension resolution whose key space fits in 62 bits.
    const std::uint64_t kmax = static_cast<std::uint64_t>(std::floor(std::pow(2.0, 62.0 / static_cast<double>(d))));
    std::vector<std::uint64_t> keys;
    std::uint64_t k = 1;
    if (count_nonempty(s, bk, k, keys) < goal) {
        std::uint64_t lo = 1, hi_k = 2;
        while (hi_k < kmax && count_nonempty(s, bk, hi_k, keys) < goal) {
            lo = hi_k;
            hi_k = std::min(kmax, hi_k * 2);
        }
        // count(lo) < goal <= count(hi_k), or hi_k hit the key-space cap.
        while (hi_k - lo > 1) {
            std::uint64_t mid = lo + (hi_k - lo) / 2;
            if (count_nonempty(s, bk, mid, keys) >= goal) hi_k = mid;
            else lo = mid;
        }
        k = hi_k;
    }

    std::vector<std::pair<std::uint64_t, std::size_t>> order(s.n);
    for (std::size_t i = 0; i < s.n; ++i) order[i] = {bk.key(s.row(i), k), i};
    std::sort(order.begin(), order.end());

    std::vector<Cluster> out;
    for (std::size_t b = 0; b < order.size();) {
        std::size_t e = b;
        while (e < order.size() && order[e].first == order[b].first) ++e;
        Cluster c;
        c.center.assign(d, 0.0);
        c.count = e - b;
        for (std::size_t m = b; m < e; ++m) {
            auto r = s.row(order[m].second);
            for (std::size_t q = 0; q < d; ++q) c.center[q] += r[q];
        }
        for (double& v : c.center) v /= static_cast<double>(c.count);
        double rmax = 0.0;
        for (std::size_t m = b; m < e; ++m) {
            auto r = s.row(order[m].second);
            double dist2 = 0.0;
            for (std::size_t q = 0; q < d; ++q) dist2 += (r[q] - c.center[q]) * (r[q] - c.center[q]);
            rmax = std::max(rmax, std::sqrt(dist2));
        }
        c.diameter = 2.0 * rmax;
        out.push_back(std::move(c));
        b = e;
    }
    return out;
}

std::size_t support_required_n(double eps_c, double beta_c) {
    if (!(eps_c > 0 && eps_c < 1 && beta_c > 0 && beta_c < 1))
        throw Error(ErrorKind::InvalidArgument, "eps_c and beta_c must lie in (0, 1)");
    double x = std::log(1.0 / beta_c) / -std::log1p(-eps_c);
    return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

double tightest_eps_c(std::size_t n, double beta_c) {
    double eps = -std::expm1(std::log(beta_c) / static_cast<double>(n));
    while (support_required_n(eps, beta_c) > n) eps = std::nextafter(eps, 1.0) * (1 + 1e-12);
    return eps;
}

SupportEstimate learn_support(const SampleMatrix& s, double eps_c, double beta_c, std::span<const double> center) {
    if (!center.empty() && center.size() != s.d)
        throw Error(ErrorKind::DimensionMismatch, "support center dimension");
    SupportEstimate out;
    for (std::size_t i = 0; i < s.n; ++i) {
        auto r = s.row(i);
        double n2 = 0.0;
        for (std::size_t k = 0; k < s.d; ++k) {
            double v = r[k] - (center.empty() ? 0.0 : center[k]);
            n2 += v * v;
        }
        out.radius = std::max(out.radius, std::sqrt(n2));
    }
    out.required_n = support_required_n(eps_c, beta_c);
    out.satisfied = s.n >= out.required_n;
    return out;
}

NoiseModel make_noise_model(SampleMatrix samples, std::size_t target_clusters, double eps_c, double beta_c,
                            Vec support_center, std::uint64_t seed) {
    NoiseModel m;
    if (support_center.empty()) support_center.assign(samples.d, 0.0);
    m.clusters = cluster_samples(samples, std::min(target_clusters, samples.n), seed);
    m.support_center = std::move(support_center);
    m.support_radius = learn_support(samples, eps_c, beta_c, m.support_center).radius;
    m.eps_c = eps_c;
    m.beta_c = beta_c;
    m.samples = std::move(samples);
    return m;
}

void NoiseDistribution::sample(std::mt19937_64& rng, std::span<double> out) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0;; ++attempt) {
        for (std::size_t i = 0; i < dim(); ++i) out[i] = mean[i] + stddev[i] * normal(rng);
        bool ok = true;
        if (truncation == Truncation::Box) {
            for (std::size_t i = 0; i < dim(); ++i) ok = ok && out[i] >= box_lower[i] && out[i] <= box_upper[i];
        } else if (truncation == Truncation::Ball) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < dim(); ++i) r2 += (out[i] - mean[i]) * (out[i] - mean[i]);
            ok = r2 <= ball_radius * ball_radius;
        }
        if (ok) return;
        if (attempt > 1000000) throw Error(ErrorKind::InvalidArgument, "truncation region has negligible mass");
    }
}

SampleMatrix NoiseDistribution::draw(std::size_t n, std::uint64_t seed) const {
    SampleMatrix s;
    s.n = n;
    s.d = dim();
    s.data.resize(n * s.d);
    std::mt19937_64 rng(mix_seed(seed, 0x5eed));
    for (std::size_t i = 0; i < n; ++i) sample(rng, {s.data.data() + i * s.d, s.d});
    return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words.
    std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + stream + 0x632be59bd9b4e019ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace umdp
