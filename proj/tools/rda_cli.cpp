// Command-line driver for the benchmark runs; talks to the library through the C API only.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rda/rda.h"

namespace {

constexpr int usage_exit = 64;

struct Options {
    std::string config;
    std::string out;
    int threads = 1;
    long seed = -1;
    std::vector<std::string> set;
    int degree = 1;
    double h = 0.1;
};

int report(const std::string &status, int code, const std::string &message)
{
    nlohmann::json line{{"status", status}, {"code", code}, {"message", message}};
    std::cerr << "error " << line.dump() << std::endl;
    return code;
}

int report(rda_status s) { return report(rda_status_name(s), static_cast<int>(s), rda_last_error()); }

struct ConfigHandle {
    rda_config *ptr = nullptr;
    ~ConfigHandle() { rda_config_free(ptr); }
};

rda_status configure(const Options &o, ConfigHandle &cfg)
{
    rda_status s = o.config.empty() ? rda_config_new(&cfg.ptr) : rda_config_load(o.config.c_str(), &cfg.ptr);
    if (s != RDA_OK)
        return s;
    for (const auto &kv : o.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            s = rda_config_set(cfg.ptr, kv.c_str(), "");
        else
            s = rda_config_set(cfg.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (s != RDA_OK)
            return s;
    }
    if (o.seed >= 0 && (s = rda_config_set(cfg.ptr, "run.seed", std::to_string(o.seed).c_str())) != RDA_OK)
        return s;
    if (!o.out.empty() && (s = rda_config_set(cfg.ptr, "run.output", o.out.c_str())) != RDA_OK)
        return s;
    return RDA_OK;
}

int make_output_dir(const std::string &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        return report(rda_status_name(RDA_ERR_IO), RDA_ERR_IO, "cannot create '" + dir + "': " + ec.message());
    return 0;
}

using Runner = rda_status (*)(const rda_config *, const char *, int);

int run_table(const std::string &name, Runner runner, const Options &o)
{
    ConfigHandle cfg;
    if (rda_status s = configure(o, cfg); s != RDA_OK)
        return report(s);
    const std::string dir = rda_config_output(cfg.ptr);
    if (int rc = make_output_dir(dir))
        return rc;
    const std::string path = (std::filesystem::path(dir) / (name + ".csv")).string();
    if (rda_status s = runner(cfg.ptr, path.c_str(), 1); s != RDA_OK)
        return report(s);
    std::cerr << "wrote " << path << '\n';
    return 0;
}

int run_solve(const Options &o)
{
    ConfigHandle cfg;
    if (rda_status s = configure(o, cfg); s != RDA_OK)
        return report(s);
    const std::string dir = rda_config_output(cfg.ptr);
    if (int rc = make_output_dir(dir))
        return rc;
    rda_result *r = nullptr;
    if (rda_status s = rda_solve(cfg.ptr, o.degree, o.h, dir.c_str(), &r); s != RDA_OK)
        return report(s);
    std::printf("degree=%d\nh=%.17g\ndofs=%ld\niterations=%d\nconverged=%d\nrelative_residual=%.6e\n"
                "energy_error=%.6e\nl2_error=%.6e\nseconds=%.3f\n",
                o.degree, o.h, rda_result_dofs(r), rda_result_iterations(r), rda_result_converged(r),
                rda_result_residual(r), rda_result_energy_error(r), rda_result_l2_error(r), rda_result_seconds(r));
    rda_result_free(r);
    return 0;
}

void common_flags(CLI::App *cmd, Options &o)
{
    cmd->add_option("--config", o.config, "INI run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory (overrides run.output)");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "random seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--set", o.set, "override one entry, section.key=value");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Reconstructed discontinuous approximation benchmarks for elliptic interface problems"};
    app.set_version_flag("--version", std::string(rda_version()));
    app.require_subcommand(1);

    Options o;
    struct Table {
        const char *name;
        const char *help;
        Runner runner;
    };
    const std::vector<Table> tables{
        {"convergence", "energy and L2 errors with observed orders", &rda_run_convergence},
        {"conditioning", "condition numbers and iteration counts", &rda_run_conditioning},
        {"alpha-sweep", "errors and iterations across alpha0", &rda_run_alpha_sweep},
        {"lambda-sweep", "stability constants across patch thresholds", &rda_run_lambda_sweep},
    };
    std::vector<CLI::App *> table_cmds;
    for (const auto &t : tables)
        common_flags(table_cmds.emplace_back(app.add_subcommand(t.name, t.help)), o);
    CLI::App *solve = app.add_subcommand("solve", "single solve with matrix and vector exports");
    common_flags(solve, o);
    solve->add_option("--degree", o.degree, "polynomial degree")->check(CLI::NonNegativeNumber);
    solve->add_option("--mesh-size", o.h, "mesh size h")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        return report("usage", usage_exit, e.what());
    }

    try {
        for (std::size_t i = 0; i < tables.size(); ++i)
            if (*table_cmds[i])
                return run_table(tables[i].name, tables[i].runner, o);
        return run_solve(o);
    } catch (const std::exception &e) {
        return report(rda_status_name(RDA_ERR_INTERNAL), RDA_ERR_INTERNAL, e.what());
    }
}
