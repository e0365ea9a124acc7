// SPDX-License-Identifier: MIT
#include "stable_exit/cli.hpp"

#include "stable_exit/acceptance.hpp"
#include "stable_exit/errors.hpp"
#include "stable_exit/exitlaw.hpp"
#include "stable_exit/format.hpp"
#include "stable_exit/mcsim.hpp"
#include "stable_exit/mlf.hpp"
#include "stable_exit/roots.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <variant>

namespace stable_exit {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitDomain = 2;
constexpr int kExitNumerical = 3;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_number(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v))
        throw DomainError("grid: '" + std::string(text) + "' is not a finite number");
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t next = text.find(sep, pos);
        parts.push_back(text.substr(pos, next - pos));
        if (next == std::string_view::npos) return parts;
        pos = next + 1;
    }
}

/// Columns plus rows; the same table is written as CSV or JSON.
struct Table {
    using Cell = std::variant<double, long long, std::string, bool>;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

void write_csv(const Table& t, std::ostream& out) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) out << format_real(v);
                    else if constexpr (std::is_same_v<V, bool>) out << (v ? "true" : "false");
                    else out << v;
                },
                row[i]);
        }
        out << '\n';
    }
}

Json table_json(const Table& t) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json r = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i) std::visit([&](const auto& v) { r[t.columns[i]] = v; }, row[i]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Writes to cfg.out, or to `fallback` when no path was given.
void emit(const RunConfig& cfg, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (cfg.out.empty()) {
        body(fallback);
        return;
    }
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) throw IoError("cannot open '" + cfg.out + "' for writing");
    body(file);
    if (!file) throw IoError("write to '" + cfg.out + "' failed");
}

void emit_table(const RunConfig& cfg, std::ostream& out, const Table& t, Json meta, const char* rows_key = "rows") {
    emit(cfg, out, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::csv) {
            write_csv(t, os);
        } else {
            meta[rows_key] = table_json(t);
            os << dump_json(meta) << '\n';
        }
    });
}

Json interval_meta(const char* command, const RunConfig& cfg) {
    Json j;
    j["command"] = command;
    j["alpha"] = cfg.alpha;
    j["b"] = cfg.b;
    j["c"] = cfg.c;
    if (cfg.x) j["x"] = *cfg.x;
    return j;
}

std::shared_ptr<const ExitLaw> make_law(const RunConfig& cfg) {
    return std::make_shared<const ExitLaw>(AlphaParams::make(cfg.alpha),
                                           std::make_shared<const RootTable>(enumerate_roots(cfg.alpha, 200)));
}

/// Rejects the whole grid up front when its first point is below the series floor.
void require_above_floor(double first, double floor) {
    if (first < floor)
        throw ReliabilityError("grid starts at t = " + format_real(first) +
                                   ", below the reliability floor of the residue series",
                               floor);
}

// ---------------------------------------------------------------------------

void run_ml(const RunConfig& cfg, std::ostream& out) {
    const MlValue v = ml_eval({cfg.ml_a, cfg.ml_b}, {cfg.z_re, cfg.z_im}, cfg.rel_tol);
    Table t;
    t.columns = {"z_re", "z_im", "value_re", "value_im", "abs_error_bound", "log_scale", "method"};
    t.rows.push_back({cfg.z_re, cfg.z_im, v.value.real(), v.value.imag(), v.abs_error_bound, v.log_scale,
                      std::string(v.method == MlMethod::taylor ? "taylor" : "asymptotic")});
    Json meta;
    meta["command"] = "ml";
    meta["a"] = cfg.ml_a;
    meta["b"] = cfg.ml_b;
    emit_table(cfg, out, t, meta);
}

void run_roots(const RunConfig& cfg, std::ostream& out) {
    const RootTable table = enumerate_root_pairs(cfg.alpha, cfg.pairs);
    Table t;
    t.columns = {"re", "im", "n", "residual", "derivative_modulus", "near_degenerate"};
    for (const Root& r : table.roots)
        t.rows.push_back({r.value.real(), r.value.imag(), static_cast<long long>(r.index), r.residual,
                          r.derivative_modulus, r.near_degenerate});
    Json meta;
    meta["command"] = "roots";
    meta["alpha"] = table.alpha;
    meta["rho"] = table.rho;
    meta["max_index"] = table.max_index;
    meta["radius"] = table.radius;
    meta["certified_through_index"] = table.certified_through_index;
    meta["real_count"] = table.real_count();
    Json annuli = Json::array();
    for (const AnnulusCount& a : table.annuli)
        annuli.push_back({{"r_inner", a.r_inner}, {"r_outer", a.r_outer}, {"counted", a.counted},
                          {"tabulated", a.tabulated}});
    meta["annuli"] = annuli;
    emit_table(cfg, out, t, meta, "roots");
}

void run_lower(const RunConfig& cfg, std::ostream& out) {
    const IntervalSpec spec{cfg.b, cfg.c, std::nullopt};
    const std::vector<double> ts = GridSpec::parse(cfg.grid).points();
    const auto law = make_law(cfg);
    const double unit = std::pow(spec.width(), cfg.alpha);
    require_above_floor(ts.front(), law->reliability_floor(spec.s(cfg.alpha)) * unit);
    Table t;
    t.columns = {"t", "k", "err_bound"};
    for (double time : ts) {
        const SeriesValue v = law->lower_exit_k(spec, time);
        t.rows.push_back({time, v.value, v.error_bound()});
    }
    emit_table(cfg, out, t, interval_meta("lower", cfg));
}

void run_upper(const RunConfig& cfg, std::ostream& out) {
    const IntervalSpec spec{cfg.b, cfg.c, cfg.x};
    const std::vector<double> ts = GridSpec::parse(cfg.grid).points();
    const auto law = make_law(cfg);
    require_above_floor(ts.front(), law->reliability_floor_l(spec));
    const double mass = upper_kernel_mass(cfg.alpha, spec);
    Table t;
    t.columns = {"t", "l", "l_err_bound", "p", "p_err_bound"};
    for (double time : ts) {
        const SeriesValue l = law->upper_kernel_l(spec, time);
        t.rows.push_back({time, l.value, l.error_bound(), l.value / mass, l.error_bound() / mass});
    }
    Json meta = interval_meta("upper", cfg);
    meta["mass"] = mass;
    emit_table(cfg, out, t, meta);
}

void run_undershoot(const RunConfig& cfg, std::ostream& out) {
    Table t;
    t.columns = {"x", "density", "err_bound"};
    for (double x : GridSpec::parse(cfg.grid).points()) {
        const IntervalSpec spec{cfg.b, cfg.c, x};
        t.rows.push_back({x, undershoot_density(cfg.alpha, spec), undershoot_density_error(cfg.alpha, spec)});
    }
    Json meta = interval_meta("undershoot", cfg);
    meta["p_upper"] = exit_side_probability(cfg.alpha, IntervalSpec{cfg.b, cfg.c, std::nullopt}).second;
    emit_table(cfg, out, t, meta);
}

McConfig mc_config(const RunConfig& cfg) {
    McConfig mc;
    mc.paths = cfg.paths;
    mc.dt = cfg.dt;
    mc.seed = cfg.seed;
    mc.workers = cfg.workers;
    mc.t_max = cfg.t_max;
    if (cfg.bias_levels > 0) mc.refine_levels = cfg.bias_levels;
    return mc;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    body(file);
    if (!file) throw IoError("write to '" + path + "' failed");
}

void run_simulate(const RunConfig& cfg, std::ostream& out) {
    const AlphaParams p = AlphaParams::make(cfg.alpha);
    const IntervalSpec spec{cfg.b, cfg.c, std::nullopt};
    const McConfig mc = mc_config(cfg);
    const McReport report = simulate_exit(p, spec, mc);
    emit(cfg, out, [&](std::ostream& os) { os << report_json(report) << '\n'; });
    if (!cfg.samples.empty()) write_file(cfg.samples, [&](std::ostream& os) { write_samples_csv(report, os); });
    if (cfg.bias_levels > 0) {
        const auto levels = bias_study(p, spec, mc);
        write_file(cfg.bias_out, [&](std::ostream& os) { os << bias_json(levels) << '\n'; });
    }
}

int run_validate(const RunConfig& cfg, std::ostream& out) {
    AcceptanceOptions opts;
    opts.tier = cfg.quick ? Tier::quick : Tier::full;
    opts.alpha = cfg.alpha;
    opts.workers = cfg.workers;
    opts.only = cfg.only;
    bool ok = false;
    emit(cfg, out, [&](std::ostream& os) { ok = acceptance_passed(run_acceptance(opts, os)); });
    return ok ? kExitOk : kExitNumerical;
}

int execute(const RunConfig& cfg, std::ostream& out) {
    switch (cfg.command) {
        case Command::ml: run_ml(cfg, out); break;
        case Command::roots: run_roots(cfg, out); break;
        case Command::lower: run_lower(cfg, out); break;
        case Command::upper: run_upper(cfg, out); break;
        case Command::undershoot: run_undershoot(cfg, out); break;
        case Command::simulate: run_simulate(cfg, out); break;
        case Command::validate: return run_validate(cfg, out);
    }
    return kExitOk;
}

int report_error(std::ostream& err, const char* kind, const std::string& message, int code,
                 std::optional<double> floor = std::nullopt) {
    Json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    if (floor) j["floor"] = *floor;
    err << dump_json(j, 0) << std::endl;
    return code;
}

}  // namespace

GridSpec GridSpec::parse(std::string_view text) {
    GridSpec g;
    std::vector<std::string_view> parts = split(text, ':');
    if (!parts.empty() && parts.front() == "log") {
        g.logarithmic = true;
        parts.erase(parts.begin());
    }
    if (parts.size() == 1 && !g.logarithmic) {
        g.start = g.stop = parse_number(parts[0]);
        g.count = 1;
        return g;
    }
    if (parts.size() != 3) throw DomainError("grid: expected start:stop:count or log:start:stop:count");
    g.start = parse_number(parts[0]);
    g.stop = parse_number(parts[1]);
    const std::string_view n = parts[2];
    int count = 0;
    const auto res = std::from_chars(n.data(), n.data() + n.size(), count);
    if (res.ec != std::errc{} || res.ptr != n.data() + n.size() || count < 1)
        throw DomainError("grid: count must be a positive integer");
    g.count = count;
    if (g.count > 1) require(g.stop > g.start, "grid: stop must exceed start");
    if (g.logarithmic) require(g.start > 0.0, "grid: a logarithmic grid needs start > 0");
    return g;
}

std::vector<double> GridSpec::points() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out[static_cast<std::size_t>(i)] =
            logarithmic ? start * std::pow(stop / start, f) : (i == count - 1 && count > 1 ? stop : start + f * (stop - start));
    }
    return out;
}

void RunConfig::validate() const {
    auto need_alpha = [&] {
        require(std::isfinite(alpha) && alpha > 1.0 && alpha < 2.0, "alpha must lie in (1, 2)");
    };
    auto need_interval = [&] {
        need_alpha();
        IntervalSpec{b, c, x}.validate();
    };
    auto need_grid = [&](bool positive) {
        require(!grid.empty(), "a grid is required");
        const GridSpec g = GridSpec::parse(grid);
        if (positive) require(g.start > 0.0, "times must be positive");
    };
    switch (command) {
        case Command::ml:
            MlParams{ml_a, ml_b}.validate();
            require(std::isfinite(z_re) && std::isfinite(z_im), "z must be finite");
            require(rel_tol > 0.0 && rel_tol < 1.0, "tolerance must lie in (0, 1)");
            break;
        case Command::roots:
            need_alpha();
            require(pairs >= 1 && pairs <= 2000, "pairs must lie in [1, 2000]");
            break;
        case Command::lower:
            need_interval();
            need_grid(true);
            break;
        case Command::upper:
            require(x.has_value(), "upper needs --x");
            need_interval();
            need_grid(true);
            break;
        case Command::undershoot: {
            need_interval();
            need_grid(false);
            const std::vector<double> xs = GridSpec::parse(grid).points();
            require(xs.front() > -b && xs.back() < c, "undershoot positions must lie inside (-b, c)");
            break;
        }
        case Command::simulate:
            need_interval();
            mc_config(*this).validate();
            require(bias_levels == 0 || bias_levels >= 2, "bias levels must be at least 2");
            require(bias_levels == 0 || !bias_out.empty(), "--bias-levels needs --bias-out");
            break;
        case Command::validate:
            need_alpha();
            for (int id : only) require(id >= 1 && id <= 11, "criteria are numbered 1 to 11");
            break;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Two-sided exit of a spectrally positive stable process", "stable-exit"};
    app.require_subcommand(1);
    std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};
    double x_value = 0.0;

    auto common = [&](CLI::App* sub, OutputFormat default_format) {
        cfg.format = default_format;
        sub->add_option("--out,-o", cfg.out, "output file (default: standard output)");
        sub->add_option("--format", cfg.format, "csv or json")->transform(CLI::CheckedTransformer(formats));
    };
    auto interval = [&](CLI::App* sub) {
        sub->add_option("--alpha", cfg.alpha, "stability index in (1, 2)")->required();
        sub->add_option("--b", cfg.b, "distance to the lower boundary");
        sub->add_option("--c", cfg.c, "distance to the upper boundary");
    };

    CLI::App* ml = app.add_subcommand("ml", "evaluate E_{a,b}(z)");
    ml->add_option("--a", cfg.ml_a)->required();
    ml->add_option("--b", cfg.ml_b)->required();
    ml->add_option("--re", cfg.z_re, "real part of z");
    ml->add_option("--im", cfg.z_im, "imaginary part of z");
    ml->add_option("--tol", cfg.rel_tol, "relative tolerance");

    CLI::App* roots = app.add_subcommand("roots", "tabulate the zeros of E_{alpha,alpha}");
    roots->add_option("--alpha", cfg.alpha)->required();
    roots->add_option("--n", cfg.pairs, "conjugate pairs to tabulate; indices of pairs collapsed onto the real axis are skipped");

    CLI::App* lower = app.add_subcommand("lower", "density of the lower exit time");
    interval(lower);
    lower->add_option("--t", cfg.grid, "time grid")->required();

    CLI::App* upper = app.add_subcommand("upper", "upper-exit kernel l and its normalization p");
    interval(upper);
    CLI::Option* x_opt = upper->add_option("--x", x_value, "pre-exit position")->required();
    upper->add_option("--t", cfg.grid, "time grid")->required();

    CLI::App* under = app.add_subcommand("undershoot", "density of the pre-exit position on upper exit");
    interval(under);
    under->add_option("--x", cfg.grid, "position grid")->required();

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo exit statistics");
    interval(sim);
    sim->add_option("--paths", cfg.paths);
    sim->add_option("--dt", cfg.dt);
    sim->add_option("--seed", cfg.seed);
    sim->add_option("--workers", cfg.workers);
    sim->add_option("--t-max", cfg.t_max, "censoring time (default 50 (b+c)^alpha)");
    sim->add_option("--samples", cfg.samples, "CSV of individual exits");
    sim->add_option("--bias-levels", cfg.bias_levels, "step sizes in the study: dt, dt / 2, ...");
    sim->add_option("--bias-out", cfg.bias_out, "JSON file for the step-size study");

    CLI::App* val = app.add_subcommand("validate", "run the acceptance criteria");
    val->add_option("--alpha", cfg.alpha, "alpha for --quick");
    val->add_flag("--quick", cfg.quick, "reduced grids, single alpha");
    val->add_flag("--full", [&](std::int64_t) { cfg.quick = false; }, "every grid point (default)");
    val->add_option("--only", cfg.only, "criterion numbers");
    val->add_option("--workers", cfg.workers);

    for (CLI::App* sub : {ml, roots, lower, upper, under, sim, val})
        common(sub, sub == ml || sub == roots || sub == sim ? OutputFormat::json : OutputFormat::csv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return report_error(err, "usage", e.what(), kExitDomain);
    }

    const std::pair<CLI::App*, Command> commands[] = {{ml, Command::ml},         {roots, Command::roots},
                                                      {lower, Command::lower},   {upper, Command::upper},
                                                      {under, Command::undershoot}, {sim, Command::simulate},
                                                      {val, Command::validate}};
    for (const auto& [sub, command] : commands) {
        if (!sub->parsed()) continue;
        cfg.command = command;
        // simulate and validate write JSON or plain lines regardless
        if (sub->get_option("--format")->count() == 0)
            cfg.format = sub == ml || sub == roots || sub == sim ? OutputFormat::json : OutputFormat::csv;
    }
    if (x_opt->count() > 0) cfg.x = x_value;

    try {
        cfg.validate();
        return execute(cfg, out);
    } catch (const DomainError& e) {
        return report_error(err, "domain", e.what(), kExitDomain);
    } catch (const ReliabilityError& e) {
        return report_error(err, "reliability", e.what(), kExitNumerical, e.floor());
    } catch (const NumericalError& e) {
        return report_error(err, "numerical", e.what(), kExitNumerical);
    } catch (const IoError& e) {
        return report_error(err, "io", e.what(), kExitIo);
    } catch (const std::exception& e) {
        return report_error(err, "numerical", e.what(), kExitNumerical);
    }
}

}  // namespace stable_exit
