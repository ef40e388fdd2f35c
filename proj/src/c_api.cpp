#include "rda/rda.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <new>
#include <sstream>

#include <boost/iostreams/stream.hpp>
#include <boost/iostreams/tee.hpp>

#include "rda/bench.hpp"

struct rda_config {
    rda::RunConfig config;
};

struct rda_result {
    rda::SingleRun run;
};

namespace {

thread_local std::string last_error;

constexpr rda_status status_of(rda::ErrorKind kind) { return static_cast<rda_status>(static_cast<int>(kind) + 1); }

static_assert(status_of(rda::ErrorKind::InvalidArgument) == RDA_ERR_INVALID_ARGUMENT);
static_assert(status_of(rda::ErrorKind::SigmaExhausted) == RDA_ERR_SIGMA_EXHAUSTED);
static_assert(status_of(rda::ErrorKind::MissingExact) == RDA_ERR_MISSING_EXACT);
static_assert(status_of(rda::ErrorKind::Io) == RDA_ERR_IO);

template <class F>
rda_status guarded(F &&body)
{
    try {
        body();
        last_error.clear();
        return RDA_OK;
    } catch (const rda::Error &e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc &) {
        last_error = "out of memory";
    } catch (const std::exception &e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return RDA_ERR_INTERNAL;
}

void require(const void *p, const char *what)
{
    if (!p)
        rda::fail(rda::ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

using TeeDevice = boost::iostreams::tee_device<std::ostream, std::ostream>;

rda_status run_table(const rda_config *config, const char *csv_path, int echo,
                     rda::Table (*runner)(const rda::RunConfig &, std::ostream *))
{
    return guarded([&] {
        require(config, "config");
        require(csv_path, "csv_path");
        std::ofstream file(csv_path);
        if (!file)
            rda::fail(rda::ErrorKind::Io, std::string("cannot write '") + csv_path + "'");
        if (echo) {
            TeeDevice tee(file, std::cout);
            boost::iostreams::stream<TeeDevice> both(tee);
            runner(config->config, &both);
        } else {
            runner(config->config, &file);
        }
        file.flush();
        if (!file)
            rda::fail(rda::ErrorKind::Io, std::string("write to '") + csv_path + "' failed");
    });
}

} // namespace

extern "C" {

const char *rda_version(void) { return "1.0.0"; }

const char *rda_status_name(rda_status status)
{
    if (status == RDA_OK)
        return "ok";
    if (status == RDA_ERR_INTERNAL)
        return "internal";
    const int k = static_cast<int>(status) - 1;
    if (k < 0 || k > static_cast<int>(rda::ErrorKind::Io))
        return "unknown";
    return rda::to_string(static_cast<rda::ErrorKind>(k)).data();
}

const char *rda_last_error(void) { return last_error.c_str(); }

rda_status rda_config_new(rda_config **out)
{
    return guarded([&] {
        require(out, "out");
        *out = new rda_config{};
    });
}

rda_status rda_config_load(const char *path, rda_config **out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto c = std::make_unique<rda_config>();
        c->config = rda::load_config(path);
        *out = c.release();
    });
}

rda_status rda_config_parse(const char *text, rda_config **out)
{
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = nullptr;
        std::istringstream in(text);
        auto c = std::make_unique<rda_config>();
        c->config = rda::parse_config(in);
        *out = c.release();
    });
}

rda_status rda_config_set(rda_config *config, const char *key, const char *value)
{
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        rda::RunConfig next = config->config;
        rda::set_config_value(next, key, value);
        next.validate();
        config->config = std::move(next);
    });
}

const char *rda_config_output(const rda_config *config) { return config ? config->config.output.c_str() : ""; }

void rda_config_free(rda_config *config) { delete config; }

rda_status rda_run_convergence(const rda_config *config, const char *csv_path, int echo)
{
    return run_table(config, csv_path, echo, &rda::run_convergence);
}

rda_status rda_run_conditioning(const rda_config *config, const char *csv_path, int echo)
{
    return run_table(config, csv_path, echo, &rda::run_conditioning);
}

rda_status rda_run_alpha_sweep(const rda_config *config, const char *csv_path, int echo)
{
    return run_table(config, csv_path, echo, &rda::run_alpha_sweep);
}

rda_status rda_run_lambda_sweep(const rda_config *config, const char *csv_path, int echo)
{
    return run_table(config, csv_path, echo, &rda::run_lambda_sweep);
}

rda_status rda_solve(const rda_config *config, int degree, double h, const char *directory, rda_result **out)
{
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        if (degree < 0)
            rda::fail(rda::ErrorKind::InvalidArgument, "negative degree");
        rda::cells_for(h);
        auto r = std::make_unique<rda_result>();
        r->run = rda::run_solve(config->config, degree, h, directory ? directory : "");
        *out = r.release();
    });
}

long rda_result_dofs(const rda_result *r) { return r ? static_cast<long>(r->run.dofs) : -1; }

int rda_result_iterations(const rda_result *r) { return r ? r->run.report.iterations : -1; }

int rda_result_converged(const rda_result *r) { return r && r->run.report.converged ? 1 : 0; }

double rda_result_residual(const rda_result *r) { return r ? r->run.report.relative_residual : std::nan(""); }

double rda_result_energy_error(const rda_result *r) { return r ? r->run.errors.energy : std::nan(""); }

double rda_result_l2_error(const rda_result *r) { return r ? r->run.errors.l2 : std::nan(""); }

double rda_result_seconds(const rda_result *r) { return r ? r->run.report.seconds : std::nan(""); }

void rda_result_free(rda_result *result) { delete result; }

} // extern "C"
