#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "fso/adapt.hpp"

namespace fso::mc {

using adapt::AdaptiveSolution;
using adapt::BerPolicy;
using adapt::ConstellationSet;
using adapt::SnrSpec;
using channel::ChannelModel;

struct McConfig {
    std::size_t n_samples = 40000;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n = 0;
};

/// Running first and second moments; merged in a fixed order.
struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    McEstimate estimate() const;
};

/// Splits `n` draws over `workers` streams derived from `seed`, runs
/// body(stream, count) -> Acc on each, and merges the partial results in
/// worker-index order. Output is bit-stable for fixed (seed, workers, n).
template <typename Acc, typename Body>
Acc parallel_accumulate(std::size_t n, std::uint64_t seed, unsigned workers, Body body) {
    workers = std::max(1u, workers);
    std::vector<Acc> parts(workers);
    auto run = [&](unsigned w) {
        const std::size_t count = n / workers + (w < n % workers ? 1 : 0);
        RandomStream rng = make_stream(seed, w);
        parts[w] = body(rng, count);
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    Acc total{};
    for (const Acc& p : parts) total.merge(p);
    return total;
}

/// Mean of (ln(I / cutoff))^+ / ln 2 over sampled irradiance.
McEstimate estimate_ase_mc(double cutoff, const ChannelModel& m, const McConfig& cfg);

/// Solves the continuous cutoff first, then samples.
McEstimate estimate_ase_mc(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m,
                           const McConfig& cfg);

struct DiscreteMcEstimate {
    McEstimate rate;                 // bits/s/Hz
    McEstimate power;                // P(I) / sigma^2, compare with SNR
    std::vector<double> occupancy;   // empirical probability of each region
};

DiscreteMcEstimate estimate_discrete_ase_mc(double cutoff_star, const BerPolicy& policy,
                                            const ChannelModel& m, const ConstellationSet& set,
                                            const McConfig& cfg);

DiscreteMcEstimate estimate_discrete_ase_mc(const SnrSpec& snr, const BerPolicy& policy,
                                            const ChannelModel& m, const ConstellationSet& set,
                                            const McConfig& cfg);

struct QamSimConfig {
    int m = 4;
    double inst_snr_db = 10.0;  // Es / N0 per symbol
    std::size_t n_symbols = 1000000;

    void validate() const;
};

struct QamBerResult {
    double ber = 0.0;
    double std_err = 0.0;
    double ser = 0.0;
    std::size_t bit_errors = 0;
    std::size_t symbol_errors = 0;
    std::size_t bits = 0;
    std::size_t symbols = 0;

    void merge(const QamBerResult& o);
    void finalize();
};

/// Gray-mapped square M-QAM over complex AWGN with minimum-distance
/// detection, unit average symbol energy.
QamBerResult simulate_qam_ber(const QamSimConfig& cfg, RandomStream& rng);

/// Same, split over worker streams.
QamBerResult simulate_qam_ber(const QamSimConfig& cfg, std::uint64_t seed, unsigned workers);

/// Es/N0 (dB) at which the simulated BER crosses `target`, located by
/// bisection on a common-random-number simulation.
double simulated_ber_crossing_db(int m, double target, std::size_t n_symbols, std::uint64_t seed,
                                 unsigned workers);

/// Es/N0 (dB) at which ber_bound equals `target`.
double bound_ber_crossing_db(int m, double target);

enum class Scheme { Continuous, Discrete };

struct PowerAudit {
    double empirical_power = 0.0;  // mean P(I) / sigma^2
    double target_power = 0.0;     // SNR (linear)
    double std_err = 0.0;
    double z_score = 0.0;
    bool pass = false;
};

/// Empirical check that the solved policy spends exactly the average
/// power budget; passes when |z| <= 5.
PowerAudit audit_power_constraint(const SnrSpec& snr, const BerPolicy& policy,
                                  const ChannelModel& m, const AdaptiveSolution& solution,
                                  Scheme scheme, const ConstellationSet& set, const McConfig& cfg);

}  // namespace fso::mc
