#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rda/bench.hpp"

namespace rda {

namespace {

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &text)
{
    const std::string s = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(v))
        fail(ErrorKind::Config, key + ": expected a number, got '" + text + "'");
    return v;
}

int to_int(const std::string &key, const std::string &text)
{
    const std::string s = trim(text);
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (s.empty() || used != s.size() || v < -1000000000L || v > 1000000000L)
        fail(ErrorKind::Config, key + ": expected an integer, got '" + text + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string &key, const std::string &text)
{
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    fail(ErrorKind::Config, key + ": expected a boolean, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string &text)
{
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!trim(item).empty())
            items.push_back(trim(item));
    return items;
}

std::vector<double> to_doubles(const std::string &key, const std::string &text)
{
    std::vector<double> v;
    for (const auto &s : split_list(text))
        v.push_back(to_double(key, s));
    if (v.empty())
        fail(ErrorKind::Config, key + ": empty list");
    return v;
}

std::vector<int> to_ints(const std::string &key, const std::string &text)
{
    std::vector<int> v;
    for (const auto &s : split_list(text))
        v.push_back(to_int(key, s));
    if (v.empty())
        fail(ErrorKind::Config, key + ": empty list");
    return v;
}

} // namespace

void set_config_value(RunConfig &c, const std::string &key, const std::string &raw)
{
    const std::string value = trim(raw);
    if (key == "problem.case")
        c.case_name = value;
    else if (key == "problem.levelset")
        c.levelset = value;
    else if (key == "problem.levelset_params")
        c.levelset_params = to_doubles(key, value);
    else if (key == "problem.alpha0")
        c.alpha0 = to_double(key, value);
    else if (key == "problem.alpha1")
        c.alpha1 = to_double(key, value);
    else if (key == "problem.penalty")
        c.penalty = to_double(key, value);
    else if (key == "mesh.h")
        c.h = to_doubles(key, value);
    else if (key == "mesh.degrees")
        c.degrees = to_ints(key, value);
    else if (key == "mesh.coarse_cells")
        c.coarse_cells = to_int(key, value);
    else if (key == "geometry.volume_order")
        c.volume_order = to_int(key, value);
    else if (key == "geometry.line_points")
        c.line_points = to_int(key, value);
    else if (key == "geometry.depth")
        c.depth = to_int(key, value);
    else if (key == "geometry.curved")
        c.curved = to_bool(key, value);
    else if (key == "reconstruction.threshold")
        c.threshold = to_int(key, value);
    else if (key == "reconstruction.auto_threshold")
        c.auto_threshold = to_bool(key, value);
    else if (key == "reconstruction.sigma_layers")
        c.sigma_layers = to_int(key, value);
    else if (key == "solver.tol")
        c.solver.tol = to_double(key, value);
    else if (key == "solver.max_iter")
        c.solver.max_iter = to_int(key, value);
    else if (key == "solver.pre_sweeps")
        c.solver.pre_sweeps = to_int(key, value);
    else if (key == "solver.post_sweeps")
        c.solver.post_sweeps = to_int(key, value);
    else if (key == "solver.preconditioner")
        c.preconditioner = parse_preconditioner(value);
    else if (key == "solver.mass") {
        if (value == "physical")
            c.mass = MassKind::Physical;
        else if (value == "active")
            c.mass = MassKind::Active;
        else if (value == "euclidean")
            c.mass = MassKind::Euclidean;
        else
            fail(ErrorKind::Config, key + ": expected physical, active or euclidean");
    } else if (key == "conditioning.mode") {
        if (value == "auto")
            c.condition_mode = ConditionMode::Auto;
        else if (value == "dense")
            c.condition_mode = ConditionMode::Dense;
        else if (value == "lanczos")
            c.condition_mode = ConditionMode::Lanczos;
        else
            fail(ErrorKind::Config, key + ": expected auto, dense or lanczos");
    } else if (key == "conditioning.iterations")
        c.condition_iterations = to_bool(key, value);
    else if (key == "alpha-sweep.alpha0")
        c.sweep_alpha0 = to_doubles(key, value);
    else if (key == "alpha-sweep.degree")
        c.sweep_degree = to_int(key, value);
    else if (key == "alpha-sweep.h")
        c.sweep_h = to_double(key, value);
    else if (key == "lambda-sweep.thresholds")
        c.lambda_thresholds = to_ints(key, value);
    else if (key == "lambda-sweep.degrees")
        c.lambda_degrees = to_ints(key, value);
    else if (key == "lambda-sweep.h")
        c.lambda_h = to_double(key, value);
    else if (key == "run.seed")
        c.seed = c.solver.seed = static_cast<unsigned>(to_int(key, value));
    else if (key == "run.output")
        c.output = value;
    else
        fail(ErrorKind::Config, "unknown key '" + key + "'");
}

RunConfig parse_config(std::istream &in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        fail(ErrorKind::Config, std::string("malformed config: ") + e.what());
    }
    RunConfig c;
    for (const auto &[section, body] : tree) {
        if (body.empty())
            fail(ErrorKind::Config, "key '" + section + "' outside a section");
        for (const auto &[key, node] : body) {
            if (!node.empty())
                fail(ErrorKind::Config, "nested key '" + section + "." + key + "'");
            set_config_value(c, section + "." + key, node.data());
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::Io, "cannot open config '" + path + "'");
    return parse_config(in);
}

void RunConfig::validate() const
{
    if (case_name != "example1" && case_name != "example2" && case_name != "custom")
        fail(ErrorKind::Config, "problem.case must be example1, example2 or custom");
    if (!(alpha0 > 0.0) || !(alpha1 > 0.0))
        fail(ErrorKind::Config, "coefficients must be positive");
    if (penalty < 0.0)
        fail(ErrorKind::Config, "problem.penalty must be positive (0 selects the default)");
    if (degrees.empty() || h.empty())
        fail(ErrorKind::Config, "mesh.degrees and mesh.h must be non-empty");
    for (int m : degrees)
        if (m < 0 || m > 6)
            fail(ErrorKind::Config, "degrees must lie in [0, 6]");
    for (double s : h)
        cells_for(s);
    cells_for(sweep_h);
    cells_for(lambda_h);
    if (coarse_cells < 1)
        fail(ErrorKind::Config, "mesh.coarse_cells must be at least 1");
    if (volume_order < 0 || line_points < 0 || depth < 0 || sigma_layers < 1 || threshold < 0)
        fail(ErrorKind::Config, "geometry and reconstruction parameters must be non-negative");
    if (sweep_degree < 0 || sweep_alpha0.empty())
        fail(ErrorKind::Config, "alpha-sweep needs a degree and coefficient list");
    for (double a : sweep_alpha0)
        if (!(a > 0.0))
            fail(ErrorKind::Config, "alpha-sweep coefficients must be positive");
    for (int n : lambda_thresholds)
        if (n < 1)
            fail(ErrorKind::Config, "lambda-sweep thresholds must be positive");
    solver.validate();
    if (case_name == "custom") {
        if (levelset_params.size() != 3)
            fail(ErrorKind::Config, "problem.levelset_params needs three values");
        if (levelset != "circle" && levelset != "flower" && levelset != "affine")
            fail(ErrorKind::Config, "problem.levelset must be circle, flower or affine");
    }
}

BenchmarkCase RunConfig::make_benchmark() const
{
    if (case_name != "custom")
        return make_case(case_name, alpha0, alpha1);
    BenchmarkCase c;
    c.name = "custom";
    c.alpha0 = alpha0;
    c.alpha1 = alpha1;
    c.exact = trigonometric_solution();
    const auto &p = levelset_params;
    if (levelset == "circle")
        c.levelset = LevelSet::circle({p[0], p[1]}, p[2]);
    else if (levelset == "flower")
        c.levelset = LevelSet::flower(p[0], p[1], static_cast<int>(p[2]));
    else
        c.levelset = LevelSet::affine({p[0], p[1]}, p[2]);
    return c;
}

GeometryOptions RunConfig::geometry_options(int degree) const
{
    GeometryOptions g = GeometryOptions::for_degree(degree);
    if (volume_order > 0)
        g.volume_order = volume_order;
    if (line_points > 0)
        g.line_points = line_points;
    if (depth > 0)
        g.depth = depth;
    g.curved = curved;
    return g;
}

double RunConfig::penalty_for(int degree) const { return penalty > 0.0 ? penalty : default_penalty(degree); }

} // namespace rda
