// SPDX-License-Identifier: MIT
/**
 * @file mcsim.hpp
 * @brief Monte Carlo estimate of the two-sided exit law on an Euler skeleton.
 *
 * Each path draws its increments from its own generator, seeded by (seed, path
 * index), and writes its outcome to its own slot; reductions then run in path
 * order. Reports are therefore bit-identical for any number of workers.
 *
 * Steps shrink near the boundaries, by halving up to 24 times, with the length
 * chosen from the current position before the increment is drawn. Every level
 * of a bias study reuses the same per-path seeds (common random numbers).
 */
#pragma once

#include "stable_exit/exitlaw.hpp"
#include "stable_exit/stabledist.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace stable_exit {

struct McConfig {
    std::uint64_t paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    int refine_levels = 2;
    double t_max = 0.0;  ///< 0 selects 50 (b + c)^alpha
    int workers = 0;     ///< 0 selects hardware concurrency; STABLE_EXIT_THREADS overrides either

    /// Throws DomainError unless paths >= 1, dt > 0, refine_levels >= 2 and t_max >= 0.
    void validate() const;
};

enum class ExitSide { lower, upper, censored };

struct ExitRecord {
    std::uint64_t path = 0;
    ExitSide side = ExitSide::censored;
    double time = 0.0;        ///< interpolated crossing time for lower exits, step end for upper exits
    double undershoot = 0.0;  ///< skeleton value before the exit step (upper exits)
    double jump = 0.0;        ///< the exit step's increment (upper exits)
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct McReport {
    double alpha = 0.0;
    IntervalSpec spec;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t paths = 0;
    std::uint64_t n_lower = 0, n_upper = 0, n_censored = 0;
    std::vector<ExitRecord> records;  ///< one per path, in path order
    std::vector<ExitRecord> half_step_records;  ///< the same paths at dt / 2

    Estimate p_lower_hat;
    Estimate mean_scaled_lower_time;  ///< mean of (b+c)^{-alpha} tau over lower exits
    /// Estimate at dt / 2 minus estimate at dt, same paths.
    double bias_p_lower = 0.0;
    double bias_mean_scaled_lower_time = 0.0;
    bool censoring_warning = false;   ///< more than 1% of paths reached t_max

    [[nodiscard]] std::vector<double> lower_times() const;
    [[nodiscard]] std::vector<double> upper_times() const;
    [[nodiscard]] std::vector<double> undershoots() const;
    [[nodiscard]] std::vector<double> jumps() const;
};

/// Skeleton at cfg.dt; a second run at dt / 2 with the same seeds fills the bias fields.
McReport simulate_exit(const AlphaParams& p, const IntervalSpec& spec, const McConfig& cfg);

struct BiasLevel {
    double dt = 0.0;
    std::uint64_t n_lower = 0, n_upper = 0, n_censored = 0;
    Estimate p_lower;
    Estimate mean_scaled_lower_time;
    double drift_p_lower = 0.0;  ///< change from the previous (coarser) level; 0 on the first
    double drift_mean = 0.0;
    bool p_lower_resolved = false;  ///< |drift| < 2 SE
    bool mean_resolved = false;
};

/// Levels dt, dt/2, ..., dt/2^{refine_levels-1}, all with the same seeds.
std::vector<BiasLevel> bias_study(const AlphaParams& p, const IntervalSpec& spec, const McConfig& cfg);

/// Worker count after applying STABLE_EXIT_THREADS.
int resolve_workers(int requested);

/// JSON summary; samples are included on request.
std::string report_json(const McReport& report, bool include_samples = false);
std::string bias_json(const std::vector<BiasLevel>& levels);

/// Columns path_id, side, time, undershoot, jump; censored paths are omitted.
void write_samples_csv(const McReport& report, std::ostream& out);

// ---------------------------------------------------------------------------
// Statistics used to check simulated samples against the exact laws.

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - cdf|; cdf must be non-decreasing.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// One-sample KS critical value c(level) / sqrt(n), asymptotic form.
double ks_critical_value(std::size_t n, double level = 0.01);

/// Two-sample KS critical value c(level) sqrt((n + m) / (n m)), asymptotic form.
double ks_critical_value(std::size_t n, std::size_t m, double level = 0.01);

struct UndershootBin {
    double lo = 0.0, hi = 0.0;
    std::size_t count = 0;
    Estimate survival_at_two;  ///< fraction with jump > 2 (c - undershoot)
    /// Spearman correlation of exit time with jump / (c - undershoot). Given the undershoot that
    /// ratio is Pareto whatever the undershoot, so it is uncorrelated with the time across the bin too.
    Estimate rank_correlation;
};

/// Upper exits grouped by undershoot into `bins` equal-width bins on (-b, c).
std::vector<UndershootBin> undershoot_bins(const McReport& report, int bins);

/// Upper tail probability of a chi-square statistic with `dof` degrees of freedom.
double chi_square_p_value(double statistic, int dof);

}  // namespace stable_exit
