#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "terrace.hpp"

namespace terrace::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Raised for bad flag values or missing inputs; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string reaction;
    std::string out;
    std::optional<double> p_u, c;
    std::optional<double> tol_ode, tol_c, tol_snap, tol_profile;
    std::optional<double> dx, dt, t_final, gap, cfl_safety, snapshot_interval;
    std::vector<double> domain, window, levels;
    std::optional<std::string> ic, scheme;
    std::optional<int> samples;
};

/// Everything a command needs after merging defaults, the bundle file and flags.
struct Context {
    Flags flags;
    nlohmann::json bundle;
    ReactionSpec spec;
    Tolerances tol;
    std::shared_ptr<spdlog::logger> log;
    std::ostream* out;

    bool writes() const { return !flags.out.empty(); }
    fs::path path(const std::string& name) const { return fs::path(flags.out) / name; }
};

namespace detail {

inline spdlog::level::level_enum log_level() {
    const char* env = std::getenv("TERRACE_LOG");
    const std::string v = env ? env : "error";
    if (v == "debug") return spdlog::level::debug;
    if (v == "info") return spdlog::level::info;
    if (v == "warn") return spdlog::level::warn;
    return spdlog::level::err;
}

template <class T>
std::optional<T> bundle_value(const nlohmann::json& block, const char* key) {
    if (!block.is_object() || !block.contains(key)) return std::nullopt;
    try {
        return block.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw UsageError(std::string("bundle key '") + key + "' has the wrong type");
    }
}

template <class T>
T pick(const std::optional<T>& flag, const nlohmann::json& block, const char* key, T fallback) {
    if (flag) return *flag;
    if (auto v = bundle_value<T>(block, key)) return *v;
    return fallback;
}

inline Tolerances resolve_tolerances(const Flags& f, const nlohmann::json& bundle) {
    const nlohmann::json block = bundle.value("tolerances", nlohmann::json::object());
    Tolerances t;
    t.ode = pick(f.tol_ode, block, "tol_ode", t.ode);
    t.speed = pick(f.tol_c, block, "tol_c", t.speed);
    t.snap = pick(f.tol_snap, block, "tol_snap", t.snap);
    t.profile = pick(f.tol_profile, block, "tol_profile", t.profile);
    if (!(t.ode > 0) || !(t.speed > 0) || !(t.snap > 0) || !(t.profile > 0)) {
        throw UsageError("all tolerances must be positive");
    }
    return t;
}

inline std::vector<double> pick_list(const std::vector<double>& flag, const nlohmann::json& block, const char* key) {
    if (!flag.empty()) return flag;
    if (auto v = bundle_value<std::vector<double>>(block, key)) return *v;
    return {};
}

inline Json front_json(const Front& f) {
    return Json{{"upper", f.upper}, {"lower", f.lower}, {"speed", f.speed}};
}

inline std::string join(const std::vector<double>& xs) {
    std::string s;
    for (double x : xs) s += (s.empty() ? "" : " ") + io::num(x);
    return s;
}

inline void write_json(const Context& ctx, const std::string& name, const Json& j) {
    io::write_file(ctx.path(name), j.dump(2) + "\n");
    ctx.log->info("wrote {}", ctx.path(name).string());
}

inline std::vector<double> default_levels(const ReactionSpec& spec) {
    const auto stable = spec.classify_states().stable;
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < stable.size(); ++i) out.push_back(0.5 * (stable[i] + stable[i + 1]));
    return out;
}

}  // namespace detail

// ---- commands -------------------------------------------------------------

inline int cmd_validate(Context& ctx) {
    const auto& spec = ctx.spec;
    const auto part = spec.classify_states();
    *ctx.out << "valid: I = " << spec.multiplicity() << ", stable states " << detail::join(part.stable)
             << ", sup|f| = " << io::num(spec.sup_norm()) << ", Lipschitz = " << io::num(spec.lipschitz()) << "\n";
    if (ctx.writes()) io::write_file(ctx.path("reaction.json"), serialize(spec));
    return kOk;
}

inline int cmd_trajectory(Context& ctx) {
    if (!ctx.flags.c) throw UsageError("trajectory needs --c");
    const double p_u = ctx.flags.p_u.value_or(1.0);
    const Trajectory tr = solve_trajectory(ctx.spec, p_u, *ctx.flags.c, ctx.tol.ode);
    *ctx.out << "termination " << to_string(tr.termination) << ", p_l = " << io::num(tr.p_l)
             << ", q(p_l) = " << io::num(tr.q_at_pl) << ", samples " << tr.samples.size() << "\n";
    if (ctx.writes()) {
        io::write_file(ctx.path("trajectory.csv"), trajectory_csv(tr));
        detail::write_json(ctx, "trajectory.json",
                           Json{{"p_u", tr.p_u},
                                {"c", tr.c},
                                {"p_l", tr.p_l},
                                {"q_at_pl", tr.q_at_pl},
                                {"termination", to_string(tr.termination)},
                                {"tol_ode", tr.tol_ode},
                                {"samples_csv", "trajectory.csv"}});
    }
    return kOk;
}

inline int cmd_speed(Context& ctx) {
    const double p_u = ctx.flags.p_u.value_or(1.0);
    const CriticalSpeed cs = find_cstar(ctx.spec, p_u, ctx.tol);
    *ctx.out << "c* = " << io::num(cs.c_star) << ", platform " << io::num(cs.p_star) << "\n";
    if (ctx.writes()) {
        detail::write_json(ctx, "speed.json",
                           Json{{"p_u", p_u},
                                {"c_star", cs.c_star},
                                {"c_lo", cs.c_lo},
                                {"platform", cs.p_star},
                                {"tol_c", cs.tol_c},
                                {"termination", to_string(cs.trajectory.termination)}});
    }
    return kOk;
}

struct BuiltTerrace {
    Terrace terrace;
    TerraceFunction tf;
};

inline BuiltTerrace build_all(Context& ctx) {
    const double gap = detail::pick(ctx.flags.gap, ctx.bundle.value("pde", nlohmann::json::object()), "gap",
                                    kDefaultGap);
    if (!(gap > 0.0)) throw UsageError("--gap must be positive");
    const int n = ctx.flags.samples.value_or(kDefaultProfileSamples);
    if (n < 2) throw UsageError("--samples must be at least 2");
    BuiltTerrace b{build_terrace(ctx.spec, ctx.tol), {}};
    ctx.log->info("terrace with {} fronts", b.terrace.size());
    b.tf = make_terrace_function(ctx.spec, b.terrace, gap, n);
    return b;
}

inline Json fronts_json(const Context& ctx, const BuiltTerrace& b) {
    Json fronts = Json::array();
    for (std::size_t j = 0; j < b.terrace.size(); ++j) {
        const std::string csv_name = "profile_" + std::to_string(j + 1) + ".csv";
        Json f = detail::front_json(b.terrace.fronts[j]);
        f["support_width"] = b.tf.profiles[j].width;
        f["profile_csv"] = csv_name;
        fronts.push_back(f);
        if (ctx.writes()) io::write_file(ctx.path(csv_name), profile_csv(b.tf.profiles[j]));
    }
    return fronts;
}

inline std::vector<double> speeds_of(const Terrace& t) {
    std::vector<double> s;
    for (const auto& f : t.fronts) s.push_back(f.speed);
    return s;
}

inline int cmd_terrace(Context& ctx) {
    const BuiltTerrace b = build_all(ctx);
    *ctx.out << "J = " << b.terrace.size() << ", platforms " << detail::join(b.terrace.platforms) << ", speeds "
             << detail::join(speeds_of(b.terrace)) << "\n";
    const Json fronts = fronts_json(ctx, b);
    if (ctx.writes()) detail::write_json(ctx, "terrace.json", Json{{"platforms", b.terrace.platforms}, {"fronts", fronts}});
    return kOk;
}

/// Domain that keeps every front of tf at least 10% of the width away from
/// the boundaries up to time t_final.
inline std::pair<double, double> auto_domain(const TerraceFunction& tf, double t_final) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t j = 0; j < tf.profiles.size(); ++j) {
        const auto& p = tf.profiles[j];
        lo = std::min(lo, tf.shifts[j] + std::min(0.0, p.speed) * t_final);
        hi = std::max(hi, tf.shifts[j] + p.width + std::max(0.0, p.speed) * t_final);
    }
    const double pad = std::max(1.0, 0.25 * (hi - lo));
    return {lo - pad, hi + pad};
}

inline int cmd_profile(Context& ctx) {
    const BuiltTerrace b = build_all(ctx);
    std::vector<double> widths;
    for (const auto& p : b.tf.profiles) widths.push_back(p.width);
    *ctx.out << "J = " << b.terrace.size() << ", widths " << detail::join(widths) << ", shifts "
             << detail::join(b.tf.shifts) << "\n";
    const Json fronts = fronts_json(ctx, b);
    if (ctx.writes()) {
        const auto [x0, x1] = auto_domain(b.tf, 0.0);
        const double dx = ctx.flags.dx.value_or(1e-2);
        std::vector<double> xs;
        const auto n = static_cast<std::size_t>(std::llround((x1 - x0) / dx));
        for (std::size_t i = 0; i <= n; ++i) xs.push_back(x0 + (x1 - x0) * static_cast<double>(i) / n);
        io::write_file(ctx.path("terrace_function.csv"), io::csv("x,u", b.tf.snapshot(0.0, xs)));
        detail::write_json(ctx, "profile.json",
                           Json{{"platforms", b.terrace.platforms},
                                {"shifts", b.tf.shifts},
                                {"fronts", fronts},
                                {"terrace_function_csv", "terrace_function.csv"}});
    }
    return kOk;
}

/// PDE configuration from defaults, the bundle's `pde` block and flags.
/// `tf` is required for the terrace initial condition.
inline PdeConfig resolve_pde(const Context& ctx, const TerraceFunction* tf, double default_t_final) {
    const Flags& f = ctx.flags;
    const nlohmann::json block = ctx.bundle.value("pde", nlohmann::json::object());
    PdeConfig cfg;
    cfg.dx = detail::pick(f.dx, block, "dx", cfg.dx);
    cfg.dt = detail::pick(f.dt, block, "dt", cfg.dt);
    cfg.t_final = detail::pick(f.t_final, block, "t_final", default_t_final);
    cfg.cfl_safety = detail::pick(f.cfl_safety, block, "cfl_safety", cfg.cfl_safety);
    const std::string scheme = detail::pick(f.scheme, block, "scheme", std::string("split"));
    if (scheme == "split") {
        cfg.scheme = Scheme::SplitImplicit;
    } else if (scheme == "explicit") {
        cfg.scheme = Scheme::ExplicitEuler;
    } else {
        throw UsageError("--scheme must be 'split' or 'explicit'");
    }
    const std::string ic = detail::pick(f.ic, block, "ic", std::string(tf ? "terrace" : "step"));
    if (ic == "step") {
        cfg.ic = StepIC{detail::pick<double>(std::nullopt, block, "step_location", 0.0), 1.0, 0.0};
    } else if (ic == "terrace") {
        if (!tf) throw UsageError("the terrace initial condition needs a computed terrace");
        cfg.ic = TerraceSnapshotIC{*tf};
    } else if (ic.rfind("table:", 0) == 0) {
        const std::string path = ic.substr(6);
        if (!fs::exists(path)) throw UsageError("table file not found: " + path);
        cfg.ic = TableIC{io::parse_csv(io::read_file(path))};
    } else {
        throw UsageError("--ic must be step, terrace or table:PATH");
    }
    std::vector<double> domain = detail::pick_list(f.domain, block, "domain");
    if (domain.empty() && tf && std::holds_alternative<TerraceSnapshotIC>(cfg.ic)) {
        const auto [a, b] = auto_domain(*tf, cfg.t_final);
        domain = {a, b};
    }
    if (!domain.empty()) {
        if (domain.size() != 2) throw UsageError("--domain takes XMIN XMAX");
        cfg.x_min = domain[0];
        cfg.x_max = domain[1];
    }
    cfg.snapshot_interval = detail::pick(f.snapshot_interval, block, "snapshot_interval", cfg.t_final / 100.0);
    return cfg;
}

inline std::pair<double, double> resolve_window(const Context& ctx, double t_final) {
    const nlohmann::json block = ctx.bundle.value("pde", nlohmann::json::object());
    const std::vector<double> w = detail::pick_list(ctx.flags.window, block, "window");
    if (w.empty()) return {0.5 * t_final, t_final};
    if (w.size() != 2 || !(w[0] < w[1])) throw UsageError("--window takes T0 T1 with T0 < T1");
    return {w[0], w[1]};
}

inline Json speed_json(const PdeResult& res, double level, std::pair<double, double> window) {
    try {
        const SpeedFit fit = measure_front_speed(res, level, window.first, window.second);
        return Json{{"speed", fit.speed}, {"r2", fit.r2}, {"points", fit.points}};
    } catch (const Error& e) {
        return Json{{"speed", nullptr}, {"error", e.kind()}};
    }
}

inline void write_run(const Context& ctx, const PdeResult& res, const PdeConfig& cfg, Json& doc) {
    Json snaps = Json::array();
    const std::vector<const Snapshot*> keep{&res.snapshots.front(), &res.snapshots.back()};
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (k == 1 && keep[1] == keep[0]) break;
        const std::string name = k == 0 ? "snapshot_initial.csv" : "snapshot_final.csv";
        io::write_file(ctx.path(name), snapshot_csv(res, *keep[k]));
        snaps.push_back(Json{{"t", keep[k]->t}, {"csv", name}});
    }
    doc["scheme"] = to_string(cfg.scheme);
    doc["domain"] = {cfg.x_min, cfg.x_max};
    doc["dx"] = res.dx;
    doc["dt"] = res.dt;
    doc["t_final"] = cfg.t_final;
    doc["nodes"] = res.x.size();
    doc["snapshots"] = snaps;
}

inline int cmd_simulate(Context& ctx) {
    std::optional<BuiltTerrace> built;
    const nlohmann::json block = ctx.bundle.value("pde", nlohmann::json::object());
    if (detail::pick(ctx.flags.ic, block, "ic", std::string("step")) == "terrace") built = build_all(ctx);
    PdeConfig cfg = resolve_pde(ctx, built ? &built->tf : nullptr, 1.0);
    std::vector<double> levels = detail::pick_list(ctx.flags.levels, block, "levels");
    if (levels.empty()) levels = detail::default_levels(ctx.spec);
    cfg.track_levels = levels;
    ctx.log->info("simulating {} nodes to t = {}", cfg.nodes(), cfg.t_final);
    const PdeResult res = simulate(ctx.spec, cfg);
    const auto window = resolve_window(ctx, cfg.t_final);

    Json tracks = Json::array();
    *ctx.out << "t_final = " << io::num(cfg.t_final) << ", nodes " << res.x.size() << ", snapshots "
             << res.snapshots.size();
    for (std::size_t k = 0; k < res.front_tracks.size(); ++k) {
        const auto& tr = res.front_tracks[k];
        Json t{{"level", tr.level}, {"csv", "track_" + std::to_string(k + 1) + ".csv"}};
        t["fit"] = speed_json(res, tr.level, window);
        if (t["fit"]["speed"].is_number()) {
            *ctx.out << ", speed@" << io::num(tr.level) << " = " << io::num(t["fit"]["speed"].get<double>());
        }
        if (ctx.writes()) io::write_file(ctx.path(t["csv"].get<std::string>()), track_csv(tr));
        tracks.push_back(t);
    }
    *ctx.out << "\n";
    if (ctx.writes()) {
        Json doc;
        write_run(ctx, res, cfg, doc);
        doc["window"] = {window.first, window.second};
        doc["tracks"] = tracks;
        if (built) doc["residual_vs_terrace"] = residual_vs_terrace(res, built->tf);
        detail::write_json(ctx, "simulate.json", doc);
    }
    return kOk;
}

inline int cmd_verify(Context& ctx) {
    const BuiltTerrace b = build_all(ctx);
    Flags& f = ctx.flags;
    if (!f.ic) f.ic = "terrace";
    if (*f.ic != "terrace") throw UsageError("verify always starts from the terrace snapshot");
    PdeConfig cfg = resolve_pde(ctx, &b.tf, 2.0);
    const PdeResult res = simulate(ctx.spec, cfg);
    const double residual = residual_vs_terrace(res, b.tf);
    const auto window = resolve_window(ctx, cfg.t_final);

    Json fronts = fronts_json(ctx, b);
    double worst = 0.0;
    for (std::size_t j = 0; j < b.terrace.size(); ++j) {
        const Front& fr = b.terrace.fronts[j];
        Json fit = speed_json(res, 0.5 * (fr.upper + fr.lower), window);
        if (fit["speed"].is_number()) {
            const double delta = std::abs(fit["speed"].get<double>() - fr.speed);
            fit["delta"] = delta;
            worst = std::max(worst, delta);
        }
        fronts[j]["pde_speed"] = fit;
    }
    *ctx.out << "J = " << b.terrace.size() << ", residual = " << io::num(residual)
             << ", max speed delta = " << io::num(worst) << "\n";
    if (ctx.writes()) {
        Json doc{{"platforms", b.terrace.platforms}, {"shifts", b.tf.shifts}, {"fronts", fronts}};
        write_run(ctx, res, cfg, doc);
        doc["window"] = {window.first, window.second};
        doc["residual_vs_terrace"] = residual;
        doc["max_speed_delta"] = worst;
        detail::write_json(ctx, "verify.json", doc);
    }
    return kOk;
}

// ---- entry point ----------------------------------------------------------

/// Parses argv (including the program name), runs the command and returns
/// the exit code: 0 success, 1 domain error, 2 usage error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Propagating terraces for discontinuous multistable reaction-diffusion equations", "terrace"};
    app.require_subcommand(1);
    Flags f;

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(Context&);
        bool pde;
    };
    const std::vector<Command> commands{
        {"validate", "check the reaction against the structural hypotheses", cmd_validate, false},
        {"trajectory", "phase-plane trajectory from --p-u at speed --c", cmd_trajectory, false},
        {"speed", "critical speed c* from --p-u", cmd_speed, false},
        {"terrace", "build the propagating terrace", cmd_terrace, false},
        {"profile", "compact profiles, shifts and the terrace function at t = 0", cmd_profile, false},
        {"simulate", "finite-difference simulation with front tracking", cmd_simulate, true},
        {"verify", "terrace vs simulation: residual and speed deltas", cmd_verify, true},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        CLI::App* s = app.add_subcommand(c.name, c.help);
        s->add_option("--reaction", f.reaction, "reaction or bundle JSON file")->required();
        s->add_option("--out", f.out, "output directory");
        s->add_option("--tol-ode", f.tol_ode, "trajectory tolerance (1e-10)");
        s->add_option("--tol-c", f.tol_c, "speed bisection width (1e-8)");
        s->add_option("--tol-snap", f.tol_snap, "platform snapping distance (1e-6)");
        s->add_option("--tol-profile", f.tol_profile, "profile residual tolerance (1e-4)");
        s->add_option("--p-u", f.p_u, "upper stable state (1)");
        s->add_option("--c", f.c, "wave speed");
        s->add_option("--gap", f.gap, "gap between front supports (1)");
        s->add_option("--samples", f.samples, "profile samples per front (2001)");
        s->add_option("--dx", f.dx, "grid spacing");
        if (c.pde) {
            s->add_option("--dt", f.dt, "time step (scheme default when omitted)");
            s->add_option("--t-final", f.t_final, "final time");
            s->add_option("--domain", f.domain, "XMIN XMAX")->expected(2);
            s->add_option("--ic", f.ic, "step | terrace | table:PATH");
            s->add_option("--scheme", f.scheme, "split | explicit");
            s->add_option("--cfl-safety", f.cfl_safety, "explicit-scheme safety factor (0.4)");
            s->add_option("--snapshot-every", f.snapshot_interval, "time between recorded snapshots");
            s->add_option("--level", f.levels, "tracked level (repeatable)");
            s->add_option("--window", f.window, "T0 T1 for speed fits")->expected(2);
        }
        subs.push_back(s);
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("terrace", sink);
    log->set_level(detail::log_level());
    log->set_pattern("[%l] %v");

    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const Command& cmd = commands[which];

    try {
        if (!fs::exists(f.reaction)) throw UsageError("reaction file not found: " + f.reaction);
        nlohmann::json bundle;
        try {
            bundle = nlohmann::json::parse(io::read_file(f.reaction));
        } catch (const nlohmann::json::exception& e) {
            terrace::detail::fail("ParseError", e.what());
        }
        Context ctx{f, bundle, validate(parse_reaction(bundle)), detail::resolve_tolerances(f, bundle), log, &out};
        log->info("{}: reaction with I = {}", cmd.name, ctx.spec.multiplicity());
        return cmd.fn(ctx);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const ValidationError& e) {
        err << "error: " << e.kind() << "\n";
        for (const auto& v : e.violations()) err << "  " << v.describe() << "\n";
        return kDomainError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDomainError;
    }
}

}  // namespace terrace::cli
