// lfiv: batch front end for the Landweber-Fridman IV estimators.
//
//   lfiv fit        --config run.json [--out DIR] [--dump-gram]
//   lfiv simulate   [--config run.json] [--out DIR] [--seed S]
//   lfiv mc-phi     [--config run.json] [--out DIR] [--seed S] [--threads T]
//   lfiv mc-beta    [--config run.json] [--out DIR] [--seed S] [--threads T]
//   lfiv test-beta  --config run.json [--out DIR] [--seed S] [--threads T]
//
// Exit codes: 0 success, 1 unexpected internal error, 2 configuration
// error, 3 data error, 4 numerical failure. Failures print one line "lfiv: error kind=<kind> reason=<text>"
// on stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lfiv/config.hpp"
#include "lfiv/lfiv.hpp"

namespace fs = std::filesystem;
using namespace lfiv;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool dump_gram = false;
};

RunConfig resolve(const Flags& f, bool config_required) {
    if (config_required && f.config.empty()) throw ConfigError("--config is required for this command");
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (f.out) c.output_dir = *f.out;
    if (f.seed) c.seed = *f.seed;
    if (f.threads) c.threads = *f.threads;
    if (f.dump_gram) c.dump_gram = true;
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + c.output_dir + "': " + ec.message());
    return c;
}

std::string out_path(const RunConfig& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

void write_json(const RunConfig& c, const std::string& name, const json& j) {
    std::ofstream out(out_path(c, name));
    if (!out) throw ConfigError("cannot write " + name);
    out << j.dump(2) << '\n';
}

json manifest_base(const RunConfig& c, const std::string& command) {
    return {{"command", command}, {"config", config_to_json(c)}, {"seed", c.seed}};
}

Dataset load_dataset(const RunConfig& c) {
    if (c.data.path.empty()) throw ConfigError("data.path is not set");
    const Table t = read_csv(c.data.path);
    return dataset_from_table(t, c.data.columns ? *c.data.columns : infer_roles(t.header));
}

void write_selection(const RunConfig& c, const std::string& name, const std::optional<MSelection>& sel) {
    if (!sel) return;
    MatrixXd m(static_cast<Index>(sel->curve.size()), 4);
    for (std::size_t i = 0; i < sel->curve.size(); ++i) {
        const auto& p = sel->curve[i];
        m.row(static_cast<Index>(i)) << p.m, p.fit, p.penalty, p.total;
    }
    write_csv(out_path(c, name), {"m", "fit", "penalty", "total"}, m);
}

json selection_json(const std::optional<MSelection>& sel) {
    if (!sel) return nullptr;
    return {{"m_hat", sel->m_hat},
            {"penalty_exponent", sel->penalty_exponent},
            {"max_m", sel->max_m},
            {"evaluated_to", sel->evaluated_to},
            {"hit_cap", sel->hit_cap}};
}

json phi_json(const PhiEstimate& e) {
    return {{"m_used", e.m_used}, {"h", e.h_used}, {"a", e.a_used}, {"selection", selection_json(e.selection)}};
}

int cmd_fit(const Flags& f) {
    const RunConfig c = resolve(f, true);
    const Dataset d = load_dataset(c);
    std::optional<MatrixXd> grid;
    if (c.grid) {
        grid = c.grid->matrix();
    } else if (d.p() == 1) {
        grid = GridSpec{d.z.minCoeff(), d.z.maxCoeff(), 200}.matrix();
    }
    if (grid && d.p() != 1) throw ConfigError("grid evaluation is available for scalar z only");

    json manifest = manifest_base(c, "fit");
    manifest["n"] = d.n();
    manifest["kappa"] = d.kappa();
    PhiEstimate phi;
    if (d.kappa() >= 1) {
        const BetaEstimate beta = fit_beta(d, c.kernel, c.measure, c.lf_beta);
        phi = fit_phi_pl(d, beta, c.kernel, c.measure, c.lf_phi, grid);
        MatrixXd sigma = beta.sigma_hat;
        manifest["beta"] = {{"beta", detail::eigen_to_vector(beta.beta)},
                            {"sigma_hat", json::array()},
                            {"condition", beta.condition},
                            {"m_used", beta.m_used},
                            {"selection", selection_json(beta.selection)}};
        for (Index i = 0; i < sigma.rows(); ++i)
            manifest["beta"]["sigma_hat"].push_back(detail::eigen_to_vector(sigma.row(i).transpose()));
        MatrixXd bm(d.kappa(), 2);
        for (Index k = 0; k < d.kappa(); ++k) bm.row(k) << static_cast<double>(k + 1), beta.beta(k);
        write_csv(out_path(c, "beta.csv"), {"index", "beta"}, bm);
        write_selection(c, "m_selection_beta.csv", beta.selection);
    } else {
        phi = fit_phi_np(d, c.kernel, c.measure, c.lf_phi, grid);
    }
    manifest["phi"] = phi_json(phi);
    write_selection(c, "m_selection_phi.csv", phi.selection);

    std::vector<std::string> header;
    for (Index k = 0; k < d.p(); ++k) header.push_back("z" + std::to_string(k + 1));
    header.push_back("phi");
    MatrixXd at_data(d.n(), d.p() + 1);
    at_data << d.z, phi.at_data;
    write_csv(out_path(c, "phi_at_data.csv"), header, at_data);
    if (phi.at_grid) {
        MatrixXd at_grid(phi.grid->rows(), 2);
        at_grid << *phi.grid, *phi.at_grid;
        write_csv(out_path(c, "phi_at_grid.csv"), {"z", "phi"}, at_grid);
    }
    if (c.dump_gram) {
        const GramMatrices g = build_gram(d, c.kernel, c.measure, c.lf_phi);
        std::vector<std::string> cols;
        for (Index j = 0; j < d.n(); ++j) cols.push_back("c" + std::to_string(j + 1));
        write_csv(out_path(c, "gram_K.csv"), cols, g.K);
        write_csv(out_path(c, "gram_F.csv"), cols, g.F);
    }
    write_json(c, "manifest.json", manifest);
    return 0;
}

int cmd_simulate(const Flags& f) {
    const RunConfig c = resolve(f, false);
    const Dataset d = generate({c.simulate.n, c.simulate.beta0, c.seed});
    const auto [header, values] = dataset_to_columns(d);
    write_csv(out_path(c, "data.csv"), header, values);
    write_json(c, "manifest.json", manifest_base(c, "simulate"));
    return 0;
}

FitConfig fit_config(const RunConfig& c, const LFConfig& lf) { return {c.kernel, c.measure, lf}; }

int cmd_mc_phi(const Flags& f) {
    const RunConfig c = resolve(f, false);
    McPhiConfig mc;
    mc.M = c.mc_phi.replications;
    mc.n = c.mc_phi.n;
    mc.multipliers = c.mc_phi.multipliers;
    mc.grid = c.grid ? *c.grid : GridSpec{};
    mc.master_seed = c.seed;
    mc.fit = fit_config(c, c.lf_phi);
    mc.threads = resolve_threads(c.threads);
    const auto reports = run_mc_phi(mc);

    MatrixXd summary(static_cast<Index>(reports.size()), 9);
    MatrixXd bands(static_cast<Index>(reports.size()) * mc.grid.points, 8);
    json failures = json::array();
    Index row = 0;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        summary.row(static_cast<Index>(k)) << static_cast<double>(r.n), r.m_multiplier, r.imse, r.isb, r.imse_scaled,
            r.isb_scaled, r.mean_m_used, static_cast<double>(r.replications), static_cast<double>(r.failures);
        failures.push_back(r.failures);
        if (r.replications == 0) continue;
        for (Index g = 0; g < mc.grid.points; ++g, ++row) {
            const auto& b = r.pointwise;
            bands.row(row) << r.m_multiplier, b.grid(g), b.truth(g), b.mean(g), b.median(g), b.q05(g), b.q95(g), b.mse(g);
        }
    }
    write_csv(out_path(c, "mc_phi_summary.csv"),
              {"n", "multiplier", "imse", "isb", "imse_scaled", "isb_scaled", "mean_m", "replications", "failures"},
              summary);
    write_csv(out_path(c, "mc_phi_bands.csv"), {"multiplier", "z", "truth", "mean", "median", "q05", "q95", "mse"},
              bands.topRows(row));
    json manifest = manifest_base(c, "mc-phi");
    manifest["failures"] = failures;
    write_json(c, "manifest.json", manifest);
    return 0;
}

int cmd_mc_beta(const Flags& f) {
    const RunConfig c = resolve(f, false);
    McBetaConfig mc;
    mc.M = c.mc_beta.replications;
    mc.n = c.mc_beta.n;
    mc.multipliers = c.mc_beta.multipliers;
    mc.beta_null_grid = c.mc_beta.beta_null_grid;
    mc.levels = c.mc_beta.levels;
    mc.power_level = c.mc_beta.power_level;
    mc.master_seed = c.seed;
    mc.fit = fit_config(c, c.lf_beta);
    mc.threads = resolve_threads(c.threads);
    const McBetaResult res = run_mc_beta(mc);

    std::vector<std::string> header{"n", "multiplier", "beta_mean", "beta_sd", "mean_m", "replications", "failures"};
    for (double l : mc.levels) header.push_back("reject_" + format_number(l));
    MatrixXd summary(static_cast<Index>(res.reports.size()), static_cast<Index>(header.size()));
    std::vector<double> power_rows;
    json failures = json::array();
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
        const auto& r = res.reports[k];
        const auto i = static_cast<Index>(k);
        summary.row(i).head(7) << static_cast<double>(r.n), r.m_multiplier, r.beta_mean, r.beta_sd, r.mean_m_used,
            static_cast<double>(r.replications), static_cast<double>(r.failures);
        for (std::size_t l = 0; l < mc.levels.size(); ++l) {
            const auto it = r.rejections.find(mc.levels[l]);
            summary(i, 7 + static_cast<Index>(l)) = it == r.rejections.end() ? 0.0 : it->second;
        }
        for (const auto& [null, rate] : r.power_curve) power_rows.insert(power_rows.end(), {r.m_multiplier, null, rate});
        failures.push_back(r.failures);
    }
    write_csv(out_path(c, "mc_beta_summary.csv"), header, summary);
    const Index np = static_cast<Index>(power_rows.size() / 3);
    write_csv(out_path(c, "power_curve.csv"), {"multiplier", "beta_null", "rejection_rate"},
              Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(power_rows.data(), np, 3));

    const std::size_t K = mc.multipliers.size();
    MatrixXd per(static_cast<Index>(res.replications.size()), 2 + 4 * static_cast<Index>(K));
    std::vector<std::string> ph{"replication", "ok"};
    for (double m : mc.multipliers) {
        const std::string s = format_number(m);
        ph.insert(ph.end(), {"beta_hat_" + s, "beta_star_" + s, "m_used_" + s, "m_used_star_" + s});
    }
    for (std::size_t r = 0; r < res.replications.size(); ++r) {
        const auto& rep = res.replications[r];
        const auto i = static_cast<Index>(r);
        per.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
        per(i, 0) = static_cast<double>(r);
        per(i, 1) = rep.ok ? 1.0 : 0.0;
        if (!rep.ok) continue;
        for (std::size_t k = 0; k < K; ++k) {
            const Index b = 2 + 4 * static_cast<Index>(k);
            per(i, b) = rep.beta_hat[k];
            per(i, b + 1) = rep.beta_star[k];
            per(i, b + 2) = rep.m_used[k];
            per(i, b + 3) = rep.m_used_star[k];
        }
    }
    write_csv(out_path(c, "mc_beta_replications.csv"), ph, per);
    json manifest = manifest_base(c, "mc-beta");
    manifest["failures"] = failures;
    write_json(c, "manifest.json", manifest);
    return 0;
}

int cmd_test_beta(const Flags& f) {
    const RunConfig c = resolve(f, true);
    const Dataset d = load_dataset(c);
    if (d.kappa() < 1) throw ConfigError("test-beta needs at least one linear regressor");
    if (static_cast<Index>(c.test.beta_null.size()) != d.kappa())
        throw ConfigError("test.beta_null must have one entry per linear regressor");
    const VectorXd null = Eigen::Map<const VectorXd>(c.test.beta_null.data(), d.kappa());
    const WaldResult w = wald_test(d, null, fit_config(c, c.lf_beta), c.test.bootstrap, c.seed,
                                   resolve_threads(c.threads));
    json result = {{"beta_hat", detail::eigen_to_vector(w.beta_hat)},
                   {"beta_null", detail::eigen_to_vector(w.beta_null)},
                   {"statistic", w.statistic},
                   {"p_value", w.p_value},
                   {"B", w.B},
                   {"failed_draws", w.failed_draws}};
    write_json(c, "wald.json", result);
    VectorXd stats = Eigen::Map<const VectorXd>(w.bootstrap_statistics.data(),
                                                static_cast<Index>(w.bootstrap_statistics.size()));
    write_csv(out_path(c, "bootstrap_statistics.csv"), {"statistic"}, stats);
    json manifest = manifest_base(c, "test-beta");
    manifest["failures"] = w.failed_draws;
    write_json(c, "manifest.json", manifest);
    return 0;
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numerical: return 4;
    }
    return 1;
}

void report(ErrorKind kind, std::string reason) {
    for (char& ch : reason)
        if (ch == '\n') ch = ' ';
    std::cerr << "lfiv: error kind=" << to_string(kind) << " reason=" << reason << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Landweber-Fridman instrumental-variables estimation"};
    app.require_subcommand(1);
    Flags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON run configuration");
        sub->add_option("--out", flags.out, "output directory (overrides output_dir)");
        sub->add_option("--seed", flags.seed, "master seed (overrides seed)");
        sub->add_option("--threads", flags.threads, "worker threads; 0 = LFIV_THREADS or all cores");
        sub->add_flag("--dump-gram", flags.dump_gram, "write the K and F matrices as CSV");
    };
    auto* fit = app.add_subcommand("fit", "fit beta-hat and phi-hat on CSV data");
    auto* sim = app.add_subcommand("simulate", "draw one sample from the simulation design");
    auto* mcp = app.add_subcommand("mc-phi", "Monte Carlo study of phi-hat (IMSE, ISB, pointwise bands)");
    auto* mcb = app.add_subcommand("mc-beta", "Monte Carlo study of beta-hat and the warp-speed Wald test");
    auto* tst = app.add_subcommand("test-beta", "pairwise-bootstrap Wald test of beta = beta_null");
    for (auto* s : {fit, sim, mcp, mcb, tst}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report(ErrorKind::config, e.what());
        return 2;
    }

    try {
        if (*fit) return cmd_fit(flags);
        if (*sim) return cmd_simulate(flags);
        if (*mcp) return cmd_mc_phi(flags);
        if (*mcb) return cmd_mc_beta(flags);
        if (*tst) return cmd_test_beta(flags);
    } catch (const Error& e) {
        report(e.kind(), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "lfiv: error kind=internal reason=" << e.what() << '\n';
        return 1;
    }
    return 2;
}
