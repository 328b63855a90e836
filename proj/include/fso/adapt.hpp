#pragma once

#include <vector>

#include "fso/channel.hpp"

namespace fso::adapt {

using channel::ChannelModel;
using specfun::SeriesConfig;

/// Target BER and the SNR back-off K = -1.5 / ln(5 P_B) it implies.
struct BerPolicy {
    double target_ber = 1e-3;
    double k_margin = 0.0;

    static BerPolicy from_target(double target_ber);
};

struct SnrSpec {
    double snr_db = 0.0;
    double snr_linear = 1.0;

    static SnrSpec from_db(double db);
    static SnrSpec from_linear(double linear);
};

enum class AseMethod { Series, Quadrature };

struct AdaptiveSolution {
    double cutoff = 0.0;               // I_th, or I_th* for the discrete scheme
    double ase_bits = 0.0;             // R/B in bits/s/Hz
    double constraint_residual = 0.0;  // power constraint minus K * SNR at the cutoff
    int iterations = 0;
    AseMethod method = AseMethod::Series;
    int series_terms = 0;
};

/// Ordered admissible constellation sizes; sizes[0] = 0 means "no transmission".
struct ConstellationSet {
    std::vector<int> sizes{0, 4, 16, 64, 256, 1024};

    void validate() const;
    static ConstellationSet table1() { return {}; }
};

struct DiscreteRegion {
    double i_low;
    double i_high;  // +inf for the last region
    int m;
};

/// 0.2 exp(-1.5 snr / (m - 1)), the exponential BER bound of square MQAM.
double ber_bound(int m, double inst_snr);

/// M(I) = 1 + K * I * P(I) / sigma^2.
double constellation_size_law(double i, double tx_power_norm, const BerPolicy& policy);

/// P(I) / sigma^2 = (1/cutoff - 1/I)^+ / K.
double optimal_power(double i, double cutoff, const BerPolicy& policy);

/// E[(1/cutoff - 1/I)^+]; strictly decreasing in the cutoff.
double continuous_constraint(double cutoff, const ChannelModel& m,
                             const SeriesConfig& cfg = {});

/// Solves E[(1/c - 1/I)^+] = K * SNR for the channel cutoff c.
AdaptiveSolution solve_cutoff_continuous(const SnrSpec& snr, const BerPolicy& policy,
                                         const ChannelModel& m, const SeriesConfig& cfg = {});

/// E[(ln(I / cutoff))^+] / ln 2 by quadrature; independent of the series route.
double ase_quadrature(double cutoff, const ChannelModel& m, const SeriesConfig& cfg = {});

/// Closed-form ASE at a given cutoff: the log-moment terms plus the
/// truncated power series in cutoff / A0.
channel::SeriesValue ase_series(double cutoff, const ChannelModel& m, const SeriesConfig& cfg);

/// Maximum ASE of continuous-rate adaptive MQAM. Uses the series; falls
/// back to quadrature (method = Quadrature) when the series has not
/// converged within cfg.max_terms.
AdaptiveSolution ase_limit(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m,
                           const SeriesConfig& cfg = {});

/// Logarithmic high-SNR approximation of ase_limit.
double high_snr_ase(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m);

/// High-SNR ASE loss caused by pointing error, (1/xi^2 - ln A0) / ln 2.
double pointing_penalty(const ChannelModel& m);

std::vector<DiscreteRegion> discrete_regions(const ConstellationSet& set, double cutoff_star);

/// Index of the region containing i (closed-low, open-high intervals).
std::size_t region_index(const std::vector<DiscreteRegion>& regions, double i);

/// (M - 1) / (K i) for M >= 2, else 0.
double discrete_power(double i, int region_m, const BerPolicy& policy);

/// sum_i (M_i - 1) E[I^-1 ; M_i c <= I < M_{i+1} c].
double discrete_constraint(double cutoff_star, const ChannelModel& m, const ConstellationSet& set,
                           const SeriesConfig& cfg = {});

AdaptiveSolution solve_cutoff_discrete(const SnrSpec& snr, const BerPolicy& policy,
                                       const ChannelModel& m, const ConstellationSet& set,
                                       const SeriesConfig& cfg = {});

AdaptiveSolution discrete_ase(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m,
                              const ConstellationSet& set, const SeriesConfig& cfg = {});

/// E_I[0.2 exp(-1.5 I SNR / (M - 1))] for a fixed constellation at constant power.
double fixed_average_ber(const SnrSpec& snr, double m_size, const ChannelModel& m,
                         const SeriesConfig& cfg = {});

/// SNR at which fixed M = 2^target_rb meets target_ber on average.
SnrSpec fixed_required_snr(double target_rb, double target_ber, const ChannelModel& m,
                           const SeriesConfig& cfg = {});

/// SNR at which ase_limit reaches target_rb.
SnrSpec adaptive_required_snr(double target_rb, const BerPolicy& policy, const ChannelModel& m,
                              const SeriesConfig& cfg = {});

}  // namespace fso::adapt
