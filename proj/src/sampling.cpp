#include "mmflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmflow/rng.hpp"

namespace mmflow {

namespace {

constexpr int kMaxOrder = 8;
constexpr long long kMaxPooled = 1024;  // pooled pairwise matrix cap per side
constexpr int kResamples = 200;
constexpr double kAlpha = 0.01;

// seed streams: samples of the two spaces and the permutation draws must not
// collide even for equal master seeds
constexpr std::uint64_t kStream0 = 0x73616d706c652030ULL;
constexpr std::uint64_t kStream1 = 0x73616d706c652031ULL;
constexpr std::uint64_t kStreamPerm = 0x7065726d75746174ULL;

MatrixSample draw_one(const FiniteSpace& X, int order, const std::vector<double>& cum, std::uint64_t sample_seed) {
    MatrixSample s;
    s.order = order;
    s.seed = sample_seed;
    Rng rng(sample_seed);
    int idx[kMaxOrder];
    for (int k = 0; k < order; ++k) idx[k] = rng.sample_cdf(cum);
    s.entries.reserve(static_cast<std::size_t>(order) * (order - 1) / 2);
    for (int i = 0; i < order; ++i)
        for (int j = i + 1; j < order; ++j) s.entries.push_back(X.g(idx[i], idx[j]));
    return s;
}

// quotient distance between two sample matrices:
// min over relabelings of sqrt((2/n^2) sum_{i<j} (a_ij - b_{s(i)s(j)})^2)
double sample_distance(const MatrixSample& a, const MatrixSample& b) {
    const int n = a.order;
    int perm[kMaxOrder];
    std::iota(perm, perm + n, 0);
    auto at = [n](const std::vector<double>& e, int i, int j) {
        if (i > j) std::swap(i, j);
        return e[static_cast<std::size_t>(i) * n - i * (i + 1) / 2 + (j - i - 1)];
    };
    double best = std::numeric_limits<double>::infinity();
    do {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double d = a.entries[static_cast<std::size_t>(i) * n - i * (i + 1) / 2 + (j - i - 1)] -
                                 at(b.entries, perm[i], perm[j]);
                acc += d * d;
            }
        best = std::min(best, acc);
    } while (std::next_permutation(perm, perm + n));
    return std::sqrt(2.0 * best / (static_cast<double>(n) * n));
}

// signed-atom L1 distance between the exact order-2 laws
double exact_nu2_gap(const FiniteSpace& X0, const FiniteSpace& X1) {
    std::vector<std::pair<double, double>> atoms;  // (value, signed mass)
    for (int i = 0; i < X0.n; ++i)
        for (int j = 0; j < X0.n; ++j)
            if (X0.w(i) > 0.0 && X0.w(j) > 0.0) atoms.emplace_back(X0.g(i, j), X0.w(i) * X0.w(j));
    for (int i = 0; i < X1.n; ++i)
        for (int j = 0; j < X1.n; ++j)
            if (X1.w(i) > 0.0 && X1.w(j) > 0.0) atoms.emplace_back(X1.g(i, j), -X1.w(i) * X1.w(j));
    std::sort(atoms.begin(), atoms.end());
    double gap = 0.0, cluster = 0.0, cluster_start = 0.0;
    bool open = false;
    for (const auto& [v, m] : atoms) {
        if (open && v - cluster_start > 1e-12) {
            gap += std::abs(cluster);
            cluster = 0.0;
            open = false;
        }
        if (!open) {
            cluster_start = v;
            open = true;
        }
        cluster += m;
    }
    if (open) gap += std::abs(cluster);
    return gap;
}

// 2*mean(cross) - mean(within A) - mean(within B) over a pooled cached
// distance matrix; `in_a` marks the A side of the split.
double energy_statistic(const std::vector<double>& pooled, long long N, const std::vector<char>& in_a) {
    double sAB = 0.0, sAA = 0.0, sBB = 0.0;
    long long cA = 0;
    for (long long i = 0; i < N; ++i) cA += in_a[static_cast<std::size_t>(i)] ? 1 : 0;
    const long long cB = N - cA;
    auto at = [N](long long i, long long j) { return static_cast<std::size_t>(i) * N + j; };
    for (long long i = 0; i < N; ++i)
        for (long long j = i + 1; j < N; ++j) {
            const double d = pooled[at(i, j)];
            const bool ai = in_a[static_cast<std::size_t>(i)], aj = in_a[static_cast<std::size_t>(j)];
            if (ai && aj) sAA += d;
            else if (!ai && !aj) sBB += d;
            else sAB += d;
        }
    const double mAB = sAB / (static_cast<double>(cA) * cB);
    const double mAA = cA > 1 ? 2.0 * sAA / (static_cast<double>(cA) * (cA - 1)) : 0.0;
    const double mBB = cB > 1 ? 2.0 * sBB / (static_cast<double>(cB) * (cB - 1)) : 0.0;
    return 2.0 * mAB - mAA - mBB;
}

}  // namespace

std::vector<MatrixSample> sample_matrix_distribution(const FiniteSpace& X, int order, long long count,
                                                     std::uint64_t seed, Backend backend) {
    if (order < 2 || order > kMaxOrder) throw InputError("sample_matrix_distribution: order must be in [2,8]");
    if (count < 0) throw InputError("sample_matrix_distribution: negative count");
    const std::vector<double> cum = cumulative(X.weights);
    std::vector<MatrixSample> out(static_cast<std::size_t>(count));
    parallel_for(count, backend, [&](long long s) {
        out[static_cast<std::size_t>(s)] = draw_one(X, order, cum, mix_seed(seed, static_cast<std::uint64_t>(s)));
    });
    return out;
}

HomomorphismReport empirical_homomorphism_test(const FiniteSpace& X0, const FiniteSpace& X1, int order,
                                               long long count, std::uint64_t seed, Backend backend) {
    if (order < 2 || order > 4) throw InputError("empirical_homomorphism_test: order must be in [2,4]");
    HomomorphismReport rep;
    rep.count = count;

    const double n0 = static_cast<double>(X0.n), n1 = static_cast<double>(X1.n);
    if (order == 2 && n0 * n0 <= 1e4 && n1 * n1 <= 1e4) {
        rep.exact = true;
        rep.method = "exact-nu2";
        rep.statistic = exact_nu2_gap(X0, X1);
        rep.reject = rep.statistic > 1e-9;
        return rep;
    }

    if (count < 8) throw InputError("empirical_homomorphism_test: need at least 8 samples per side");
    if (count > kMaxPooled)
        throw PreconditionError("empirical_homomorphism_test: pooled permutation test caps count at 1024 per side");

    const auto A = sample_matrix_distribution(X0, order, count, mix_seed(seed, kStream0), backend);
    const auto B = sample_matrix_distribution(X1, order, count, mix_seed(seed, kStream1), backend);
    const long long N = 2 * count;
    std::vector<const MatrixSample*> pool(static_cast<std::size_t>(N));
    for (long long i = 0; i < count; ++i) {
        pool[static_cast<std::size_t>(i)] = &A[static_cast<std::size_t>(i)];
        pool[static_cast<std::size_t>(count + i)] = &B[static_cast<std::size_t>(i)];
    }

    std::vector<double> dmat(static_cast<std::size_t>(N) * N, 0.0);
    std::vector<std::pair<long long, long long>> idx;
    idx.reserve(static_cast<std::size_t>(N) * (N - 1) / 2);
    for (long long i = 0; i < N; ++i)
        for (long long j = i + 1; j < N; ++j) idx.emplace_back(i, j);
    parallel_for(static_cast<long long>(idx.size()), backend, [&](long long k) {
        auto [i, j] = idx[static_cast<std::size_t>(k)];
        const double d = sample_distance(*pool[static_cast<std::size_t>(i)], *pool[static_cast<std::size_t>(j)]);
        dmat[static_cast<std::size_t>(i) * N + j] = d;
        dmat[static_cast<std::size_t>(j) * N + i] = d;
    });

    std::vector<char> observed(static_cast<std::size_t>(N), 0);
    for (long long i = 0; i < count; ++i) observed[static_cast<std::size_t>(i)] = 1;
    const double e_obs = energy_statistic(dmat, N, observed);

    std::vector<double> resampled(kResamples, 0.0);
    parallel_for(kResamples, backend, [&](long long r) {
        Rng rng(mix_seed(mix_seed(seed, kStreamPerm), static_cast<std::uint64_t>(r)));
        std::vector<long long> order_idx(static_cast<std::size_t>(N));
        std::iota(order_idx.begin(), order_idx.end(), 0);
        rng.shuffle(order_idx);
        std::vector<char> split(static_cast<std::size_t>(N), 0);
        for (long long i = 0; i < count; ++i) split[static_cast<std::size_t>(order_idx[static_cast<std::size_t>(i)])] = 1;
        resampled[static_cast<std::size_t>(r)] = energy_statistic(dmat, N, split);
    });

    long long ge = 0;
    for (double e : resampled)
        if (e >= e_obs) ++ge;
    const double p = static_cast<double>(1 + ge) / static_cast<double>(1 + kResamples);

    rep.exact = false;
    rep.method = "energy-permutation";
    rep.statistic = e_obs;
    rep.p_value = p;
    rep.reject = p < kAlpha;
    return rep;
}

}  // namespace mmflow
