// SPDX-License-Identifier: MIT
#include "stable_exit/mcsim.hpp"

#include "stable_exit/errors.hpp"
#include "stable_exit/format.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <thread>
#include <utility>

namespace stable_exit {
namespace {

constexpr std::uint64_t kBlock = 256;

constexpr int kMaxRefinement = 24;
// a step may move the path by about its scale; keep that below distance / kClearance
constexpr double kClearance = 40.0;

/**
 * One path on the skeleton with base step dt. Near either boundary the step is halved
 * (up to kMaxRefinement times) until its scale is below distance / kClearance. The
 * length is fixed before the increment is drawn, so the path law stays exact, and an
 * upward crossing from close to c is then a genuine jump rather than creeping.
 */
ExitRecord simulate_path(const AlphaParams& p, const IntervalSpec& spec, double dt, double t_max,
                         std::uint64_t seed, std::uint64_t path) {
    RngState rng = path_rng(seed, path);
    std::uniform_real_distribution<double> uni(-0.5 * M_PI, 0.5 * M_PI);
    std::exponential_distribution<double> ex(1.0);
    const double a = p.alpha;
    const double base_scale = p.scale * std::pow(dt, 1.0 / a);
    double refined_scale[kMaxRefinement + 1];
    for (int k = 0; k <= kMaxRefinement; ++k) refined_scale[k] = base_scale * std::pow(2.0, -k / a);
    ExitRecord r{path, ExitSide::censored, 0.0, 0.0, 0.0};
    double x = 0.0, t = 0.0;
    while (t < t_max) {
        const double dist = std::min(x + spec.b, spec.c - x);
        int k = 0;
        while (k < kMaxRefinement && kClearance * refined_scale[k] > dist) ++k;
        const double h = std::ldexp(dt, -k);
        double angle = uni(rng);
        while (angle == -0.5 * M_PI) angle = uni(rng);
        const double next = x + refined_scale[k] * standard_stable_from(p, angle, ex(rng));
        if (next <= -spec.b) {
            r.side = ExitSide::lower;
            // linear interpolation inside the bracketing step
            r.time = t + h * (x + spec.b) / (x - next);
            return r;
        }
        if (next >= spec.c) {
            r.side = ExitSide::upper;
            r.time = t + h;
            r.undershoot = x;
            r.jump = next - x;
            return r;
        }
        x = next;
        t += h;
    }
    return r;
}

/// One record per path, in path order.
std::vector<ExitRecord> simulate_level(const AlphaParams& p, const IntervalSpec& spec, const McConfig& cfg,
                                       double dt) {
    const double t_max = cfg.t_max > 0.0 ? cfg.t_max : 50.0 * std::pow(spec.width(), p.alpha);
    std::vector<ExitRecord> out(cfg.paths);
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::uint64_t begin = next.fetch_add(kBlock);
            if (begin >= cfg.paths) return;
            const std::uint64_t end = std::min(cfg.paths, begin + kBlock);
            for (std::uint64_t i = begin; i < end; ++i) out[i] = simulate_path(p, spec, dt, t_max, cfg.seed, i);
        }
    };
    const int workers = resolve_workers(cfg.workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return out;
}

struct LevelSummary {
    std::uint64_t n_lower = 0, n_upper = 0, n_censored = 0;
    Estimate p_lower;
    Estimate mean_scaled;
};

LevelSummary summarize(const std::vector<ExitRecord>& records, double time_unit) {
    LevelSummary s;
    double sum = 0.0, sum_sq = 0.0;
    for (const ExitRecord& r : records) {
        switch (r.side) {
            case ExitSide::lower: {
                ++s.n_lower;
                const double v = r.time / time_unit;
                sum += v;
                sum_sq += v * v;
                break;
            }
            case ExitSide::upper: ++s.n_upper; break;
            case ExitSide::censored: ++s.n_censored; break;
        }
    }
    const auto n = static_cast<double>(records.size());
    const double ph = static_cast<double>(s.n_lower) / n;
    s.p_lower = {ph, std::sqrt(ph * (1.0 - ph) / n)};
    if (s.n_lower > 1) {
        const auto m = static_cast<double>(s.n_lower);
        const double mean = sum / m;
        const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
        s.mean_scaled = {mean, std::sqrt(var / m)};
    }
    return s;
}

std::vector<double> collect(const McReport& r, ExitSide side, double ExitRecord::*field) {
    std::vector<double> out;
    for (const auto& rec : r.records)
        if (rec.side == side) out.push_back(rec.*field);
    return out;
}

/// Average ranks, so that tied exit times (all on the skeleton grid) do not bias the correlation.
std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

const char* side_name(ExitSide s) {
    switch (s) {
        case ExitSide::lower: return "lower";
        case ExitSide::upper: return "upper";
        case ExitSide::censored: return "censored";
    }
    return "censored";
}

}  // namespace

void McConfig::validate() const {
    require(paths >= 1, "McConfig: paths must be at least 1");
    require(std::isfinite(dt) && dt > 0.0, "McConfig: dt must be positive");
    require(refine_levels >= 2 && refine_levels <= 20, "McConfig: refine_levels must lie in [2, 20]");
    require(std::isfinite(t_max) && t_max >= 0.0, "McConfig: t_max must be non-negative");
    require(workers >= 0, "McConfig: workers must be non-negative");
}

int resolve_workers(int requested) {
    if (const char* env = std::getenv("STABLE_EXIT_THREADS")) {
        const int n = std::atoi(env);
        require(n >= 1, "STABLE_EXIT_THREADS must be a positive integer");
        return n;
    }
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> McReport::lower_times() const { return collect(*this, ExitSide::lower, &ExitRecord::time); }
std::vector<double> McReport::upper_times() const { return collect(*this, ExitSide::upper, &ExitRecord::time); }
std::vector<double> McReport::undershoots() const { return collect(*this, ExitSide::upper, &ExitRecord::undershoot); }
std::vector<double> McReport::jumps() const { return collect(*this, ExitSide::upper, &ExitRecord::jump); }

McReport simulate_exit(const AlphaParams& p, const IntervalSpec& spec, const McConfig& cfg) {
    cfg.validate();
    spec.validate();
    require(p.alpha < 2.0, "simulate_exit: the Brownian case is not simulated");
    const double unit = std::pow(spec.width(), p.alpha);
    std::vector<ExitRecord> records = simulate_level(p, spec, cfg, cfg.dt);
    const LevelSummary coarse = summarize(records, unit);
    std::vector<ExitRecord> half = simulate_level(p, spec, cfg, 0.5 * cfg.dt);
    const LevelSummary fine = summarize(half, unit);
    McReport r;
    r.alpha = p.alpha;
    r.spec = spec;
    r.dt = cfg.dt;
    r.seed = cfg.seed;
    r.paths = cfg.paths;
    r.n_lower = coarse.n_lower;
    r.n_upper = coarse.n_upper;
    r.n_censored = coarse.n_censored;
    r.records = std::move(records);
    r.half_step_records = std::move(half);
    r.p_lower_hat = coarse.p_lower;
    r.mean_scaled_lower_time = coarse.mean_scaled;
    r.bias_p_lower = fine.p_lower.value - coarse.p_lower.value;
    r.bias_mean_scaled_lower_time = fine.mean_scaled.value - coarse.mean_scaled.value;
    r.censoring_warning = static_cast<double>(r.n_censored) > 0.01 * static_cast<double>(r.paths);
    return r;
}

std::vector<BiasLevel> bias_study(const AlphaParams& p, const IntervalSpec& spec, const McConfig& cfg) {
    cfg.validate();
    spec.validate();
    require(p.alpha < 2.0, "bias_study: the Brownian case is not simulated");
    const double unit = std::pow(spec.width(), p.alpha);
    std::vector<BiasLevel> out;
    for (int j = 0; j < cfg.refine_levels; ++j) {
        BiasLevel lv;
        lv.dt = std::ldexp(cfg.dt, -j);
        const LevelSummary s = summarize(simulate_level(p, spec, cfg, lv.dt), unit);
        lv.n_lower = s.n_lower;
        lv.n_upper = s.n_upper;
        lv.n_censored = s.n_censored;
        lv.p_lower = s.p_lower;
        lv.mean_scaled_lower_time = s.mean_scaled;
        if (!out.empty()) {
            const BiasLevel& prev = out.back();
            lv.drift_p_lower = lv.p_lower.value - prev.p_lower.value;
            lv.drift_mean = lv.mean_scaled_lower_time.value - prev.mean_scaled_lower_time.value;
            lv.p_lower_resolved = std::abs(lv.drift_p_lower) < 2.0 * lv.p_lower.std_error;
            lv.mean_resolved = std::abs(lv.drift_mean) < 2.0 * lv.mean_scaled_lower_time.std_error;
        }
        out.push_back(lv);
    }
    return out;
}

std::string report_json(const McReport& r, bool include_samples) {
    nlohmann::ordered_json j;
    j["alpha"] = r.alpha;
    j["b"] = r.spec.b;
    j["c"] = r.spec.c;
    j["dt"] = r.dt;
    j["seed"] = r.seed;
    j["paths"] = r.paths;
    j["n_lower"] = r.n_lower;
    j["n_upper"] = r.n_upper;
    j["n_censored"] = r.n_censored;
    j["p_lower_hat"] = {{"value", r.p_lower_hat.value}, {"std_error", r.p_lower_hat.std_error}};
    j["mean_scaled_lower_time"] = {{"value", r.mean_scaled_lower_time.value},
                                   {"std_error", r.mean_scaled_lower_time.std_error}};
    j["bias_delta"] = {{"p_lower_hat", r.bias_p_lower}, {"mean_scaled_lower_time", r.bias_mean_scaled_lower_time}};
    j["censoring_warning"] = r.censoring_warning;
    if (include_samples) {
        j["lower_times"] = r.lower_times();
        j["upper_times"] = r.upper_times();
        j["undershoots"] = r.undershoots();
        j["jumps"] = r.jumps();
    }
    return dump_json(j);
}

std::string bias_json(const std::vector<BiasLevel>& levels) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& lv : levels) {
        arr.push_back({{"dt", lv.dt},
                       {"n_lower", lv.n_lower},
                       {"n_upper", lv.n_upper},
                       {"n_censored", lv.n_censored},
                       {"p_lower_hat", {{"value", lv.p_lower.value}, {"std_error", lv.p_lower.std_error}}},
                       {"mean_scaled_lower_time",
                        {{"value", lv.mean_scaled_lower_time.value},
                         {"std_error", lv.mean_scaled_lower_time.std_error}}},
                       {"drift_p_lower", lv.drift_p_lower},
                       {"drift_mean", lv.drift_mean},
                       {"p_lower_resolved", lv.p_lower_resolved},
                       {"mean_resolved", lv.mean_resolved}});
    }
    return dump_json(arr);
}

void write_samples_csv(const McReport& r, std::ostream& out) {
    out << "path_id,side,time,undershoot,jump\n";
    for (const auto& rec : r.records) {
        if (rec.side == ExitSide::censored) continue;
        out << rec.path << ',' << side_name(rec.side) << ',' << format_real(rec.time) << ',';
        if (rec.side == ExitSide::upper) out << format_real(rec.undershoot) << ',' << format_real(rec.jump);
        else out << ',';
        out << '\n';
    }
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    require(!a.empty() && !b.empty(), "ks_statistic: both samples must be non-empty");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    require(!sample.empty(), "ks_statistic: sample must be non-empty");
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(std::size_t n, double level) {
    require(n > 0 && level > 0.0 && level < 1.0, "ks_critical_value: bad arguments");
    return std::sqrt(-0.5 * std::log(0.5 * level) / static_cast<double>(n));
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
    require(n > 0 && m > 0 && level > 0.0 && level < 1.0, "ks_critical_value: bad arguments");
    const double c = std::sqrt(-0.5 * std::log(0.5 * level));
    const auto dn = static_cast<double>(n), dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

std::vector<UndershootBin> undershoot_bins(const McReport& r, int bins) {
    require(bins >= 1, "undershoot_bins: need at least one bin");
    const double b = r.spec.b, c = r.spec.c, width = r.spec.width();
    std::vector<std::vector<const ExitRecord*>> members(static_cast<std::size_t>(bins));
    for (const auto& rec : r.records) {
        if (rec.side != ExitSide::upper) continue;
        const int k = std::clamp(static_cast<int>((rec.undershoot + b) / width * bins), 0, bins - 1);
        members[static_cast<std::size_t>(k)].push_back(&rec);
    }
    std::vector<UndershootBin> out;
    for (int k = 0; k < bins; ++k) {
        const auto& m = members[static_cast<std::size_t>(k)];
        UndershootBin bin;
        bin.lo = -b + width * k / bins;
        bin.hi = -b + width * (k + 1) / bins;
        bin.count = m.size();
        if (m.size() >= 2) {
            std::size_t above = 0;
            std::vector<double> times, jumps;
            for (const ExitRecord* rec : m) {
                if (rec->jump > 2.0 * (c - rec->undershoot)) ++above;
                times.push_back(rec->time);
                jumps.push_back(rec->jump / (c - rec->undershoot));
            }
            const auto n = static_cast<double>(m.size());
            const double ph = static_cast<double>(above) / n;
            bin.survival_at_two = {ph, std::sqrt(ph * (1.0 - ph) / n)};
            bin.rank_correlation = {pearson(ranks(times), ranks(jumps)), 1.0 / std::sqrt(n - 1.0)};
        }
        out.push_back(bin);
    }
    return out;
}

double chi_square_p_value(double statistic, int dof) {
    require(dof >= 1 && statistic >= 0.0, "chi_square_p_value: bad arguments");
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

}  // namespace stable_exit
