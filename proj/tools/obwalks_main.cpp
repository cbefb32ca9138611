// obwalks: obstruction statistics for the conic bundles x0^2 + x1^2 = F(s,t) x2^2.
//
// Subcommands print tables to stdout and log the resolved configuration to
// stderr first, so identical argv (and seed) give byte-identical stdout.
// Exit codes: 0 success, 2 invalid input, 3 capacity exceeded, 4 numerical
// failure.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obwalks/errors.hpp"
#include "obwalks/experiments.hpp"
#include "obwalks/limit_laws.hpp"
#include "obwalks/obstruction.hpp"
#include "obwalks/parallel.hpp"
#include "obwalks/paths.hpp"
#include "obwalks/points.hpp"
#include "obwalks/version.hpp"

namespace {

using namespace obwalks;
using arith::u64;

// OBSTRUCTION_WALKS_SEED wins over --seed so batch drivers can rotate seeds
// without touching saved command lines.
u64 resolve_seed(u64 flag_seed) {
    const char* env = std::getenv("OBSTRUCTION_WALKS_SEED");
    if (env == nullptr || *env == '\0') return flag_seed;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0')
        throw validation_error("OBSTRUCTION_WALKS_SEED is not an unsigned integer: " +
                               std::string(env));
    return static_cast<u64>(v);
}

void log_header(const std::string& line) {
    std::cerr << "obwalks " << kVersion << " (CLI11 " << CLI11_VERSION << ")\n"
              << "config: " << line << '\n';
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_sigma(const std::string& family_spec, double pmax) {
    log_header("sigma family=\"" + family_spec + "\" pmax=" + num(pmax));
    if (pmax < 2) throw validation_error("sigma: --pmax must be at least 2");
    if (pmax > static_cast<double>(arith::PrimeTable::kLimitCeiling))
        throw capacity_error("sigma: --pmax exceeds the sieve ceiling, lower pmax");
    auto family = parse_family(family_spec);
    arith::PrimeTable table(static_cast<u64>(pmax));
    auto sigma = build_sigma_table(family, static_cast<u64>(pmax), table);

    std::string out = "p,sigma,S\n";
    for (std::size_t i = 0; i < sigma.count(); ++i) {
        out += std::to_string(sigma.prime(i));
        out += ',';
        out += num(sigma.sigma(i));
        out += ',';
        out += num(sigma.S_at(i));
        out += '\n';
        if (out.size() > 1 << 16) {
            std::cout << out;
            out.clear();
        }
    }
    std::cout << out;
    return 0;
}

int cmd_profile(const std::string& family_spec, const std::string& point_text) {
    log_header("profile family=\"" + family_spec + "\" point=" + point_text);
    auto family = parse_family(family_spec);
    auto x = parse_point(point_text);
    double h = static_cast<double>(x.height());
    u64 limit = required_sieve_limit(family, h);
    if (limit > arith::PrimeTable::kLimitCeiling)
        throw capacity_error("profile: the point's height needs a sieve beyond the "
                             "memory ceiling, use a smaller point");
    arith::PrimeTable table(std::max<u64>(limit, 16));
    std::cout << profile_to_json(profile(family, x, table)) << '\n';
    return 0;
}

int cmd_paths(const std::string& family_spec, const std::string& point_text,
              const std::string& kind, double B, std::size_t grid_m) {
    log_header("paths family=\"" + family_spec + "\" point=" + point_text + " kind=" + kind +
               " B=" + num(B) + " grid_m=" + std::to_string(grid_m));
    if (B < 16) throw validation_error("paths: --B must be at least 16");
    if (grid_m < 2) throw validation_error("paths: --grid-m must be at least 2");
    auto family = parse_family(family_spec);
    auto x = parse_point(point_text);
    u64 limit = std::max(required_sieve_limit(family, B),
                         required_sieve_limit(family, static_cast<double>(x.height())));
    if (limit > arith::PrimeTable::kLimitCeiling)
        throw capacity_error("paths: --B (or the point's height) needs a sieve beyond "
                             "the memory ceiling, lower B");
    arith::PrimeTable table(limit);
    auto sigma = build_sigma_table(family, static_cast<u64>(B), table);
    auto prof = profile(family, x, table);

    PathSample path;
    if (kind == "X") {
        path = path_X(ProfileView(prof), sigma, B, grid_m);
    } else if (kind == "Y") {
        path = path_Y(ProfileView(prof), sigma, B, grid_m);
    } else if (kind == "Z") {
        path = path_Z(ProfileView(prof), sigma, B, grid_m);
    } else {
        throw validation_error("paths: --kind must be X, Y, or Z");
    }
    write_path_csv(std::cout, path);
    return 0;
}

int cmd_laws(const std::string& law, const std::vector<double>& grid) {
    std::string joined;
    for (double g : grid) {
        if (!joined.empty()) joined += ',';
        joined += num(g);
    }
    log_header("laws law=" + law + " grid=" + joined);
    if (grid.empty()) throw validation_error("laws: --grid needs at least one abscissa");

    std::function<double(double)> cdf;
    if (law == "gaussian") {
        cdf = gaussian_cdf;
    } else if (law == "half_normal") {
        cdf = [](double z) { return z <= 0 ? 0.0 : 2 * gaussian_cdf(z) - 1; };
    } else if (law == "tau_inf") {
        cdf = [](double z) { return z <= 0 ? 0.0 : tau_infinity(z); };
    } else if (law == "tau2") {
        cdf = [](double z) { return z <= 0 ? 0.0 : tau2(z); };
    } else if (law == "arcsine") {
        cdf = [](double u) { return u <= 0 ? 0.0 : (u >= 1 ? 1.0 : arcsine_cdf(u)); };
    } else {
        throw validation_error("laws: --law must be one of gaussian, half_normal, "
                               "tau_inf, tau2, arcsine");
    }
    std::cout << "x,value\n";
    for (double g : grid) std::cout << num(g) << ',' << num(cdf(g)) << '\n';
    return 0;
}

void print_report(const ExperimentReport& rep) {
    std::cout << "experiment: " << rep.name << "\n";
    std::cout << "family: " << rep.config.family;
    if (!rep.config.family_b.empty()) std::cout << " vs " << rep.config.family_b;
    std::cout << "  B: " << num(rep.config.B) << "  n: " << rep.config.n_samples
              << "  seed: " << rep.config.seed << "\n";
    std::cout << "beta_hat: " << num(rep.beta_hat)
              << "  dropped: " << rep.dropped_degenerate
              << "  not_applicable: " << rep.not_applicable << "\n\n";
    for (const auto& r : rep.rows) {
        std::cout << (r.pass ? (*r.pass ? "[pass] " : "[FAIL] ") : "[info] ") << r.stat;
        if (r.nt) std::cout << "  nt=" << num(*r.nt);
        if (r.model) std::cout << "  model=" << num(*r.model);
        if (r.law) std::cout << "  law=" << num(*r.law);
        std::cout << "  " << r.method << "=" << num(r.metric);
        if (r.threshold) std::cout << " (threshold " << num(*r.threshold) << ")";
        std::cout << "\n";
    }
    std::cout << "\nresult: " << (rep.all_pass() ? "all gated rows pass" : "gated rows FAILED")
              << "\n";
}

int cmd_experiment(ExperimentConfig cfg, const std::string& out_dir, bool is_compare) {
    cfg.seed = resolve_seed(cfg.seed);
    log_header((is_compare ? std::string("compare") : std::string("experiment")) +
               " kind=" + format_experiment_kind(cfg.kind) + " family=\"" + cfg.family +
               (cfg.family_b.empty() ? "" : "\" family_b=\"" + cfg.family_b) + "\" B=" +
               num(cfg.B) + " n=" + std::to_string(cfg.n_samples) + " seed=" +
               std::to_string(cfg.seed) + " threads=" +
               std::to_string(cfg.threads ? cfg.threads : hardware_threads()));
    ExperimentReport rep = is_compare ? compare_delta_effect(cfg) : run(cfg);
    print_report(rep);
    std::cerr << "runtime: " << num(rep.runtime_seconds) << "s\n";
    if (!out_dir.empty()) {
        write_report_files(rep, out_dir);
        std::cerr << "artifacts: " << out_dir << "/report.json plus " << rep.ecdfs.size()
                  << " ecdf files\n";
    }
    return 0;
}

void add_experiment_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& out_dir,
                          std::string& kind_name) {
    cmd->add_option("--kind", kind_name, "experiment kind");
    cmd->add_option("--family", cfg.family, "family of linear forms, e.g. \"s,t\"");
    cmd->add_option("--B", cfg.B, "height bound of the sampled ensemble");
    cmd->add_option("--n", cfg.n_samples, "ensemble size");
    cmd->add_option("--seed", cfg.seed, "master seed (OBSTRUCTION_WALKS_SEED overrides)");
    cmd->add_option("--threads", cfg.threads, "worker threads, 0 = hardware");
    cmd->add_option("--grid-m", cfg.grid_m, "path grid resolution");
    cmd->add_option("--model-B", cfg.model_B, "model-ensemble height, 0 = reuse B");
    cmd->add_option("--walk-steps", cfg.walk_steps, "steps per reference walk");
    cmd->add_option("--r-max", cfg.r_max, "highest moment order");
    cmd->add_option("--xi", cfg.xi, "least-prime thresholds")->delimiter(',');
    cmd->add_option("--fk-u", cfg.fk_u, "exponential-weight rate");
    cmd->add_option("--fk-kernel", cfg.fk_kernel, "zero | indicator | xsq");
    cmd->add_option("--fk-walks", cfg.fk_walks_n, "transform-side walk count");
    cmd->add_option("--fk-steps", cfg.fk_steps_per_unit, "walk steps per unit time");
    cmd->add_option("--out", out_dir, "directory for report.json and ecdf CSVs");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"obstruction statistics for conic bundles over the projective line"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string family = "s,t";
    std::string point;
    double pmax = 1e6;
    double B = 1e6;
    std::size_t grid_m = 256;
    std::string path_kind = "X";
    std::string law = "arcsine";
    std::vector<double> grid;
    ExperimentConfig cfg;
    std::string kind_name = "clt";
    std::string out_dir;
    std::vector<std::string> families;

    auto* sigma_cmd = app.add_subcommand("sigma", "per-prime rates and their running sum");
    sigma_cmd->add_option("--family", family, "family of linear forms");
    sigma_cmd->add_option("--pmax", pmax, "largest prime to tabulate");

    auto* profile_cmd = app.add_subcommand("profile", "obstruction profile of one point");
    profile_cmd->add_option("--family", family, "family of linear forms");
    profile_cmd->add_option("--point", point, "point s/t, e.g. 1/3")->required();

    auto* paths_cmd = app.add_subcommand("paths", "normalized obstruction path of one point");
    paths_cmd->add_option("--family", family, "family of linear forms");
    paths_cmd->add_option("--point", point, "point s/t")->required();
    paths_cmd->add_option("--kind", path_kind, "X, Y, or Z");
    paths_cmd->add_option("--B", B, "height/threshold bound");
    paths_cmd->add_option("--grid-m", grid_m, "grid resolution");

    auto* laws_cmd = app.add_subcommand("laws", "closed-form limit-law tables");
    laws_cmd->add_option("--law", law, "gaussian | half_normal | tau_inf | tau2 | arcsine");
    laws_cmd->add_option("--grid", grid, "comma-separated abscissae")
        ->required()
        ->delimiter(',');

    auto* exp_cmd = app.add_subcommand("experiment", "sampled ensemble vs model vs law");
    add_experiment_flags(exp_cmd, cfg, out_dir, kind_name);

    auto* compare_cmd =
        app.add_subcommand("compare", "least-prime exceedance across two families");
    std::string compare_kind = "least_prime";
    compare_cmd->add_option("--families", families, "two family strings")
        ->required()
        ->expected(2);
    compare_cmd->add_option("--kind", compare_kind, "comparison kind (least_prime)");
    compare_cmd->add_option("--B", cfg.B, "height bound");
    compare_cmd->add_option("--n", cfg.n_samples, "ensemble size");
    compare_cmd->add_option("--seed", cfg.seed, "master seed");
    compare_cmd->add_option("--threads", cfg.threads, "worker threads, 0 = hardware");
    compare_cmd->add_option("--xi", cfg.xi, "exceedance thresholds")->delimiter(',');
    compare_cmd->add_option("--out", out_dir, "directory for report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sigma_cmd->parsed()) return cmd_sigma(family, pmax);
        if (profile_cmd->parsed()) return cmd_profile(family, point);
        if (paths_cmd->parsed()) return cmd_paths(family, point, path_kind, B, grid_m);
        if (laws_cmd->parsed()) return cmd_laws(law, grid);
        if (exp_cmd->parsed()) {
            cfg.kind = parse_experiment_kind(kind_name);
            return cmd_experiment(cfg, out_dir, false);
        }
        if (compare_cmd->parsed()) {
            if (compare_kind != "least_prime")
                throw validation_error("compare: only --kind least_prime is supported");
            cfg.kind = ExperimentKind::least_prime;
            cfg.family = families[0];
            cfg.family_b = families[1];
            return cmd_experiment(cfg, out_dir, true);
        }
        throw validation_error("no subcommand given");
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    }
}
