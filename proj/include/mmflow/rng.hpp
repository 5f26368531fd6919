#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace mmflow {

// Deterministic random source. All randomized code paths take an explicit
// seed and draw through this wrapper only, so identical seeds give identical
// results across platforms and worker counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform in {0, ..., n-1}. Modulo bias is below 2^-50 for any n used here.
    long long uniform_index(long long n) {
        if (n <= 0) throw std::invalid_argument("uniform_index: n must be positive");
        return static_cast<long long>(eng_() % static_cast<std::uint64_t>(n));
    }

    // Inverse-CDF draw from a finite distribution given cumulative weights
    // (nondecreasing, last entry treated as total mass).
    int sample_cdf(const std::vector<double>& cum) {
        if (cum.empty()) throw std::invalid_argument("sample_cdf: empty distribution");
        const double u = uniform01() * cum.back();
        int lo = 0, hi = static_cast<int>(cum.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (cum[mid] > u) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (long long i = static_cast<long long>(v.size()) - 1; i > 0; --i) {
            long long j = uniform_index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// splitmix64 finalizer over (seed, k): independent per-item seeds so a batch
// of draws does not depend on how items are split across workers.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Cumulative sums of w, for sample_cdf.
inline std::vector<double> cumulative(const std::vector<double>& w) {
    std::vector<double> cum(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cum[i] = acc;
    }
    return cum;
}

}  // namespace mmflow
