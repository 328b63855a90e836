#include "fso/mc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fso/errors.hpp"

namespace fso::mc {
namespace {

struct DiscreteAcc {
    Moments rate;
    Moments power;
    std::vector<std::size_t> counts;

    void merge(const DiscreteAcc& o) {
        rate.merge(o.rate);
        power.merge(o.power);
        if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
        for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
    }
};

bool is_power_of_four(int m) {
    if (m < 4) return false;
    while (m % 4 == 0) m /= 4;
    return m == 1;
}

}  // namespace

void McConfig::validate() const {
    if (n_samples == 0) throw DomainError("McConfig: n_samples must be > 0");
    if (workers == 0) throw DomainError("McConfig: workers must be > 0");
}

McEstimate Moments::estimate() const {
    McEstimate e;
    e.n = n;
    if (n == 0) return e;
    e.mean = sum / static_cast<double>(n);
    if (n > 1) {
        const double var =
            std::max(0.0, (sum_sq - static_cast<double>(n) * e.mean * e.mean) / (n - 1.0));
        e.std_err = std::sqrt(var / static_cast<double>(n));
    }
    return e;
}

McEstimate estimate_ase_mc(double cutoff, const ChannelModel& m, const McConfig& cfg) {
    cfg.validate();
    if (!(cutoff > 0.0)) throw DomainError("estimate_ase_mc: cutoff must be > 0");
    const Moments acc = parallel_accumulate<Moments>(
        cfg.n_samples, cfg.seed, cfg.workers, [&](RandomStream& rng, std::size_t count) {
            channel::IrradianceSampler draw(m);
            Moments local;
            for (std::size_t i = 0; i < count; ++i) {
                const double irr = draw(rng);
                local.add(irr > cutoff ? std::log2(irr / cutoff) : 0.0);
            }
            return local;
        });
    return acc.estimate();
}

McEstimate estimate_ase_mc(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m,
                           const McConfig& cfg) {
    const auto sol = adapt::solve_cutoff_continuous(snr, policy, m);
    return estimate_ase_mc(sol.cutoff, m, cfg);
}

DiscreteMcEstimate estimate_discrete_ase_mc(double cutoff_star, const BerPolicy& policy,
                                            const ChannelModel& m, const ConstellationSet& set,
                                            const McConfig& cfg) {
    cfg.validate();
    const auto regions = adapt::discrete_regions(set, cutoff_star);
    const DiscreteAcc acc = parallel_accumulate<DiscreteAcc>(
        cfg.n_samples, cfg.seed, cfg.workers, [&](RandomStream& rng, std::size_t count) {
            channel::IrradianceSampler draw(m);
            DiscreteAcc local;
            local.counts.assign(regions.size(), 0);
            for (std::size_t i = 0; i < count; ++i) {
                const double irr = draw(rng);
                const std::size_t r = adapt::region_index(regions, irr);
                const int size = regions[r].m;
                ++local.counts[r];
                local.rate.add(size > 1 ? std::log2(static_cast<double>(size)) : 0.0);
                local.power.add(adapt::discrete_power(irr, size, policy));
            }
            return local;
        });
    DiscreteMcEstimate out;
    out.rate = acc.rate.estimate();
    out.power = acc.power.estimate();
    for (std::size_t c : acc.counts) {
        out.occupancy.push_back(static_cast<double>(c) / static_cast<double>(cfg.n_samples));
    }
    return out;
}

DiscreteMcEstimate estimate_discrete_ase_mc(const SnrSpec& snr, const BerPolicy& policy,
                                            const ChannelModel& m, const ConstellationSet& set,
                                            const McConfig& cfg) {
    const auto sol = adapt::solve_cutoff_discrete(snr, policy, m, set);
    return estimate_discrete_ase_mc(sol.cutoff, policy, m, set, cfg);
}

void QamSimConfig::validate() const {
    if (!is_power_of_four(m)) {
        throw DomainError("QamSimConfig: m=" + std::to_string(m) + " is not a power of 4");
    }
    if (n_symbols == 0) throw DomainError("QamSimConfig: n_symbols must be > 0");
    if (!std::isfinite(inst_snr_db)) throw DomainError("QamSimConfig: SNR must be finite");
}

void QamBerResult::merge(const QamBerResult& o) {
    bit_errors += o.bit_errors;
    symbol_errors += o.symbol_errors;
    bits += o.bits;
    symbols += o.symbols;
    finalize();
}

void QamBerResult::finalize() {
    if (bits == 0) return;
    ber = static_cast<double>(bit_errors) / static_cast<double>(bits);
    ser = static_cast<double>(symbol_errors) / static_cast<double>(symbols);
    std_err = std::sqrt(ber * (1.0 - ber) / static_cast<double>(bits));
}

QamBerResult simulate_qam_ber(const QamSimConfig& cfg, RandomStream& rng) {
    cfg.validate();
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.m))));
    const unsigned mask = static_cast<unsigned>(side - 1);
    const int bits_per_axis = std::countr_zero(static_cast<unsigned>(side));
    // Unit symbol energy: Es = 2 d^2 (M - 1) / 3.
    const double d = std::sqrt(1.5 / (cfg.m - 1.0));
    const double snr = std::pow(10.0, cfg.inst_snr_db / 10.0);
    std::normal_distribution<double> noise(0.0, std::sqrt(0.5 / snr));
    const double top = side - 1.0;

    auto detect = [&](double y) {
        const double j = std::nearbyint((y / d + top) * 0.5);
        return static_cast<unsigned>(std::clamp(j, 0.0, top));
    };
    auto gray = [](unsigned j) { return j ^ (j >> 1); };

    QamBerResult out;
    for (std::size_t s = 0; s < cfg.n_symbols; ++s) {
        const std::uint64_t r = rng();
        const unsigned ji = static_cast<unsigned>(r) & mask;
        const unsigned jq = static_cast<unsigned>(r >> 32) & mask;
        const double yi = (2.0 * ji - top) * d + noise(rng);
        const double yq = (2.0 * jq - top) * d + noise(rng);
        const unsigned hi = detect(yi);
        const unsigned hq = detect(yq);
        const int errs = std::popcount(gray(ji) ^ gray(hi)) + std::popcount(gray(jq) ^ gray(hq));
        out.bit_errors += static_cast<std::size_t>(errs);
        out.symbol_errors += (hi != ji || hq != jq) ? 1 : 0;
    }
    out.symbols = cfg.n_symbols;
    out.bits = cfg.n_symbols * 2 * static_cast<std::size_t>(bits_per_axis);
    out.finalize();
    return out;
}

QamBerResult simulate_qam_ber(const QamSimConfig& cfg, std::uint64_t seed, unsigned workers) {
    cfg.validate();
    return parallel_accumulate<QamBerResult>(
        cfg.n_symbols, seed, workers, [&](RandomStream& rng, std::size_t count) {
            if (count == 0) return QamBerResult{};
            QamSimConfig part = cfg;
            part.n_symbols = count;
            return simulate_qam_ber(part, rng);
        });
}

double bound_ber_crossing_db(int m, double target) {
    if (m < 2 || !(target > 0.0 && target < 0.2)) {
        throw DomainError("bound_ber_crossing_db: need m >= 2 and target in (0, 0.2)");
    }
    return 10.0 * std::log10((m - 1.0) * std::log(0.2 / target) / 1.5);
}

double simulated_ber_crossing_db(int m, double target, std::size_t n_symbols, std::uint64_t seed,
                                 unsigned workers) {
    auto ber_at = [&](double db) {
        return simulate_qam_ber({m, db, n_symbols}, seed, workers).ber;
    };
    const double anchor = bound_ber_crossing_db(m, target);
    double lo = anchor - 6.0, hi = anchor + 3.0;
    if (!(ber_at(lo) > target) || !(ber_at(hi) < target)) {
        throw BracketError("simulated_ber_crossing_db: crossing not bracketed around the bound");
    }
    for (int i = 0; i < 14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ber_at(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

PowerAudit audit_power_constraint(const SnrSpec& snr, const BerPolicy& policy,
                                  const ChannelModel& m, const AdaptiveSolution& solution,
                                  Scheme scheme, const ConstellationSet& set, const McConfig& cfg) {
    PowerAudit audit;
    audit.target_power = snr.snr_linear;
    McEstimate power;
    if (scheme == Scheme::Discrete) {
        power = estimate_discrete_ase_mc(solution.cutoff, policy, m, set, cfg).power;
    } else {
        cfg.validate();
        const double c = solution.cutoff;
        power = parallel_accumulate<Moments>(
                    cfg.n_samples, cfg.seed, cfg.workers,
                    [&](RandomStream& rng, std::size_t count) {
                        channel::IrradianceSampler draw(m);
                        Moments local;
                        for (std::size_t i = 0; i < count; ++i) {
                            local.add(adapt::optimal_power(draw(rng), c, policy));
                        }
                        return local;
                    })
                    .estimate();
    }
    audit.empirical_power = power.mean;
    audit.std_err = power.std_err;
    audit.z_score = power.std_err > 0.0 ? (power.mean - audit.target_power) / power.std_err
                                        : (power.mean == audit.target_power ? 0.0 : INFINITY);
    audit.pass = std::abs(audit.z_score) <= 5.0;
    return audit;
}

}  // namespace fso::mc
