// Command-line workbench: limit formulas, exact finite-size expectations,
// matrix Monte Carlo, convergence/variance sweeps, enumeration and demos.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "permfree/permfree.hpp"

namespace {

using namespace permfree;

struct CommonOpts {
    int s = 2;
    std::vector<std::string> monomials;
    std::vector<int> n_list;
    std::vector<int> m_list;
    std::string c_text = "1";
    std::size_t samples = 400;
    std::size_t perm_samples = 100000;
    std::uint64_t seed = 1;
    std::string mode = "auto";
    std::string format = "csv";
    std::string out = "-";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_monomials = true) {
    cmd->add_option("--s", o.s, "number of generator families (default 2)");
    auto* mono = cmd->add_option("--monomial", o.monomials, "monomial source string (repeatable)");
    if (needs_monomials) mono->required();
    cmd->add_option("--n", o.n_list, "matrix sizes N")->delimiter(',');
    cmd->add_option("--m", o.m_list, "matrix sizes M (parallel to --n)")->delimiter(',');
    cmd->add_option("--c", o.c_text, "aspect ratio c > 0, decimal (default 1)");
    cmd->add_option("--samples", o.samples, "matrix Monte Carlo samples");
    cmd->add_option("--perm-samples", o.perm_samples, "permutation tuples in sampled mode");
    cmd->add_option("--seed", o.seed, "64-bit master seed");
    cmd->add_option("--mode", o.mode, "exact|sampled (default: auto by budget)")
        ->check(CLI::IsMember({"auto", "exact", "sampled"}));
    cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out, "output path ('-' for stdout)");
}

ExperimentConfig to_config(const CommonOpts& o) {
    ExperimentConfig cfg;
    cfg.s = o.s;
    cfg.monomials = o.monomials;
    cfg.sizes = o.n_list;
    cfg.m_sizes = o.m_list;
    cfg.c = rational_from_decimal(o.c_text);
    cfg.samples = o.samples;
    cfg.perm_samples = o.perm_samples;
    cfg.seed = o.seed;
    cfg.mode = o.mode == "exact"    ? StudyMode::exact
               : o.mode == "sampled" ? StudyMode::sampled
                                     : StudyMode::automatic;
    return cfg;
}

ReportFormat to_format(const CommonOpts& o) {
    return o.format == "json" ? ReportFormat::json : ReportFormat::csv;
}

int run_limit(const CommonOpts& o) {
    ExperimentConfig cfg = to_config(o);
    if (cfg.c <= 0) throw ValidationError("c must be > 0");
    std::vector<ReportRow> rows;
    for (const std::string& text : cfg.monomials) {
        const Monomial m = parse_monomial(text, cfg.s);
        const LimitValue limit = freeness_prediction(m);
        const Rational at_c = limit.evaluate(cfg.c);
        ReportRow row;
        row.monomial = text;
        row.estimator = "limit";
        row.value = {to_double(at_c), 0.0};
        row.exact_fraction = to_fraction_string(at_c);
        rows.push_back(std::move(row));
        std::cerr << text << "  =  " << limit.to_string() << "\n";
    }
    emit_report(rows, to_format(o), o.out);
    return 0;
}

int run_exact(const CommonOpts& o, const std::string& breakdown_path) {
    ExperimentConfig cfg = to_config(o);
    cfg.validate();
    if (cfg.sizes.empty()) throw ValidationError("--n is required for exact");
    std::vector<ReportRow> rows;
    std::string breakdown =
        "tau_cycles,power_of_N,power_of_M,perm_average_num,perm_average_den,contribution\n";
    for (const std::string& text : cfg.monomials) {
        const Monomial m = parse_monomial(text, cfg.s);
        const LimitValue limit = freeness_prediction(m);
        const Rational limit_at_c = limit.evaluate(cfg.c);
        for (std::size_t idx = 0; idx < cfg.sizes.size(); ++idx) {
            const int N = cfg.sizes[idx];
            const long M = cfg.m_for(idx);
            ExactOptions opts;
            opts.mode = cfg.mode == StudyMode::sampled ? AverageMode::sampled : AverageMode::exact;
            if (cfg.mode == StudyMode::automatic)
                opts.mode = detail::exact_budget_ok(m, N, M) ? AverageMode::exact
                                                             : AverageMode::sampled;
            opts.samples = cfg.perm_samples;
            opts.seed = cfg.seed;
            detail::RowTimer timer;
            const ExactMoment em = exact_moment(m, N, M, opts);
            ReportRow row;
            row.monomial = text;
            row.N = N;
            row.M = static_cast<int>(M);
            row.estimator = em.exact ? "exact" : "exact-sampled";
            row.value = {em.as_double(), 0.0};
            if (!em.exact) row.std_error = em.std_error;
            if (em.exact) row.exact_fraction = to_fraction_string(em.value);
            row.abs_error_vs_limit = std::abs(em.as_double() - to_double(limit_at_c));
            row.runtime_ms = timer.elapsed_ms();
            rows.push_back(std::move(row));
            if (!breakdown_path.empty()) {
                breakdown += "# monomial=" + text + " N=" + std::to_string(N) +
                             " M=" + std::to_string(M) + "\n";
                for (const TermBreakdown& term : em.terms) {
                    breakdown += term.tau_cycles + "," + std::to_string(term.power_of_N) + "," +
                                 std::to_string(term.power_of_M) + "," +
                                 numerator(term.perm_average).str() + "," +
                                 denominator(term.perm_average).str() + "," +
                                 (em.exact ? format17(to_double(term.contribution))
                                           : format17(term.contribution_est)) +
                                 "\n";
                }
            }
        }
    }
    detail::sort_rows(rows);
    emit_report(rows, to_format(o), o.out);
    if (!breakdown_path.empty()) {
        std::ofstream f(breakdown_path, std::ios::binary);
        if (!f) throw IoError("cannot open '" + breakdown_path + "' for writing");
        f << breakdown;
    }
    return 0;
}

int run_mc(const CommonOpts& o) {
    ExperimentConfig cfg = to_config(o);
    cfg.validate();
    if (cfg.sizes.empty()) throw ValidationError("--n is required for mc");
    std::vector<ReportRow> rows;
    for (const std::string& text : cfg.monomials) {
        const Monomial m = parse_monomial(text, cfg.s);
        const LimitValue limit = freeness_prediction(m);
        const Rational limit_at_c = limit.evaluate(cfg.c);
        for (std::size_t idx = 0; idx < cfg.sizes.size(); ++idx) {
            const int N = cfg.sizes[idx];
            const long M = cfg.m_for(idx);
            detail::RowTimer timer;
            const EstimateResult r =
                mc_estimate(m, N, static_cast<int>(M), cfg.samples, cfg.seed, cfg.workers);
            ReportRow row;
            row.monomial = text;
            row.N = N;
            row.M = static_cast<int>(M);
            row.estimator = "mc";
            row.value = r.mean;
            row.std_error = r.std_error;
            row.abs_error_vs_limit =
                std::abs(r.mean - std::complex<double>(to_double(limit_at_c), 0.0));
            row.runtime_ms = timer.elapsed_ms();
            rows.push_back(std::move(row));
        }
    }
    detail::sort_rows(rows);
    emit_report(rows, to_format(o), o.out);
    return 0;
}

int run_enumerate(const std::string& kind, int n, const std::string& out_path) {
    PermStream stream =
        kind == "perms"         ? enumerate_permutations(n)
        : kind == "pairings"    ? enumerate_pairings(n)
        : kind == "noncrossing" ? enumerate_noncrossing(n)
                                : enumerate_nc_pairings(n);
    std::string out;
    std::size_t count = 0;
    while (auto p = stream.next()) {
        out += cycle_decomposition(*p).to_string();
        out += '\n';
        ++count;
    }
    out += "count: " + std::to_string(count) + "\n";
    if (out_path == "-" || out_path.empty()) {
        std::cout << out;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw IoError("cannot open '" + out_path + "' for writing");
        f << out;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-probability limit moments, exact finite-N expectations and Monte Carlo "
                 "cross-checks for words in permutation, Gaussian and Wishart matrices"};
    app.require_subcommand(1);

    CommonOpts limit_o, exact_o, mc_o, conv_o, var_o, probe_o, demo_o;
    std::string breakdown_path;

    add_common(app.add_subcommand("limit", "limit (N -> infinity) moment values"), limit_o);

    auto* exact_cmd =
        app.add_subcommand("exact", "exact finite-size expectations (tuple-sampled when large)");
    add_common(exact_cmd, exact_o);
    exact_cmd->add_option("--breakdown", breakdown_path, "write per-tau term CSV here");

    add_common(app.add_subcommand("mc", "matrix Monte Carlo trace estimates"), mc_o);

    add_common(app.add_subcommand("converge", "limit vs finite-size convergence sweep"), conv_o);
    bool with_mc = false;
    app.get_subcommand("converge")->add_flag("--with-mc", with_mc, "add matrix MC rows");

    add_common(app.add_subcommand("variance", "trace variance sweep (exact or MC)"), var_o);

    auto* enum_cmd = app.add_subcommand("enumerate", "list permutations in cycle notation");
    std::string enum_kind = "noncrossing";
    int enum_n = 4;
    std::string enum_out = "-";
    enum_cmd->add_option("--kind", enum_kind, "perms|pairings|noncrossing|nc-pairings")
        ->check(CLI::IsMember({"perms", "pairings", "noncrossing", "nc-pairings"}));
    enum_cmd->add_option("--n", enum_n, "ground set size")->required();
    enum_cmd->add_option("--out", enum_out, "output path ('-' for stdout)");

    auto* demo_cmd = app.add_subcommand("demo", "named demonstration studies");
    std::string demo_name;
    demo_cmd->add_option("--name", demo_name, "permuted-gue|permuted-wishart|diagonal-obstruction")
        ->required()
        ->check(CLI::IsMember({"permuted-gue", "permuted-wishart", "diagonal-obstruction"}));
    add_common(demo_cmd, demo_o, false);

    auto* probe_cmd = app.add_subcommand("probe", "Fix-statistics boundedness probe");
    std::vector<std::string> probe_words;
    probe_cmd->add_option("--word", probe_words, "word in the g-letter syntax (repeatable)")
        ->required();
    add_common(probe_cmd, probe_o, false);

    try {
        app.parse(argc, argv);

        if (app.got_subcommand("limit")) return run_limit(limit_o);
        if (app.got_subcommand("exact")) return run_exact(exact_o, breakdown_path);
        if (app.got_subcommand("mc")) return run_mc(mc_o);
        if (app.got_subcommand("converge")) {
            ExperimentConfig cfg = to_config(conv_o);
            cfg.with_mc = with_mc;
            emit_report(run_convergence_study(cfg), to_format(conv_o), conv_o.out);
            return 0;
        }
        if (app.got_subcommand("variance")) {
            emit_report(run_variance_study(to_config(var_o)), to_format(var_o), var_o.out);
            return 0;
        }
        if (app.got_subcommand("enumerate")) return run_enumerate(enum_kind, enum_n, enum_out);
        if (app.got_subcommand("demo")) {
            emit_report(run_demo(demo_name, to_config(demo_o)), to_format(demo_o), demo_o.out);
            return 0;
        }
        if (app.got_subcommand("probe")) {
            ExperimentConfig cfg = to_config(probe_o);
            emit_report(run_boundedness_probe(probe_words, cfg), to_format(probe_o), probe_o.out);
            return 0;
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const permfree::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
