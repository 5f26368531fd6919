#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmflow/distortion.hpp"
#include "mmflow/functionals.hpp"
#include "mmflow/geometry.hpp"
#include "mmflow/growthflow.hpp"
#include "mmflow/io.hpp"
#include "mmflow/sampling.hpp"
#include "mmflow/space.hpp"
#include "mmflow/version.hpp"

namespace {

using mmflow::json;

json tool_json() {
    json t;
    t["name"] = mmflow::kToolName;
    t["version"] = mmflow::kToolVersion;
    return t;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        mmflow::write_text_file(out_path, text.empty() || text.back() == '\n' ? text : text + "\n");
    }
}

double parse_p(const std::string& s) {
    if (s == "1") return 1.0;
    if (s == "2") return 2.0;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw mmflow::InputError("--p must be 1, 2 or inf");
}

mmflow::SolverChoice parse_solver(const std::string& s) {
    if (s == "auto") return mmflow::SolverChoice::automatic;
    if (s == "exhaustive") return mmflow::SolverChoice::exhaustive;
    if (s == "fw") return mmflow::SolverChoice::frank_wolfe;
    throw mmflow::InputError("--solver must be auto, exhaustive or fw");
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            grid.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw mmflow::InputError("bad grid value: " + tok);
        }
    }
    if (grid.empty()) throw mmflow::InputError("--grid must list at least one t");
    return grid;
}

// circle:n | sphere:dim,K[,cap] | file:path | self
mmflow::GrowthProfile parse_model(const std::string& spec, const mmflow::FiniteSpace& X) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "self") return mmflow::profile_from_space(X);
    if (kind == "file") {
        if (rest.empty()) throw mmflow::InputError("--model file: needs a path");
        return mmflow::profile_from_space(mmflow::read_space_file(rest));
    }
    if (kind == "circle") {
        int n = 0;
        try {
            n = std::stoi(rest);
        } catch (const std::exception&) {
            throw mmflow::InputError("--model circle:n needs an integer n");
        }
        return mmflow::profile_from_space(mmflow::make_discrete_circle(n));
    }
    if (kind == "sphere") {
        std::vector<double> vals;
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw mmflow::InputError("--model sphere:dim,K[,cap] has a bad number: " + tok);
            }
        }
        if (vals.size() < 2 || vals.size() > 3) throw mmflow::InputError("--model sphere:dim,K[,cap]");
        std::optional<double> cap;
        if (vals.size() == 3) cap = vals[2];
        return mmflow::model_profile_constant_curvature(static_cast<int>(vals[0]), vals[1], cap);
    }
    throw mmflow::InputError("--model must be circle:n, sphere:dim,K[,cap], file:path or self");
}

mmflow::WeightFunction parse_rho(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw mmflow::InputError("--rho must be exp:lambda or unif:R");
    const std::string kind = spec.substr(0, colon);
    double v = 0.0;
    try {
        v = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw mmflow::InputError("--rho parameter must be a number");
    }
    if (kind == "exp") return mmflow::make_exponential_weight(v);
    if (kind == "unif") return mmflow::make_truncated_uniform_weight(v);
    throw mmflow::InputError("--rho must be exp:lambda or unif:R");
}

json space_to_embedded_json(const mmflow::FiniteSpace& X) {
    json j;
    j["n"] = X.n;
    j["weights"] = X.weights;
    j["gauge"] = mmflow::matrix_to_json(X.n, X.gauge);
    if (!X.name.empty()) j["name"] = X.name;
    return j;
}

json dist_result_json(const mmflow::DistResult& r, bool with_coupling) {
    json j;
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    j["certified"] = r.certified;
    json trace = json::array();
    for (const auto& [k, v] : r.solver_trace) {
        json e;
        e["solver"] = k;
        e["value"] = mmflow::number_to_json(v);
        trace.push_back(std::move(e));
    }
    j["solver_trace"] = std::move(trace);
    if (with_coupling) j["coupling"] = mmflow::coupling_to_json(r.best_coupling);
    return j;
}

struct DistArgs {
    std::vector<std::string> files;
    std::string p = "2";
    std::string solver = "auto";
    int restarts = 16;
    std::uint64_t seed = 0;
    std::string out;
};

mmflow::SolverConfig solver_config(int restarts, std::uint64_t seed) {
    mmflow::SolverConfig cfg;
    cfg.fw_restarts = restarts;
    cfg.seed = seed;
    return cfg;
}

int run_dist(const DistArgs& a) {
    const auto X0 = mmflow::read_space_file(a.files[0]);
    const auto X1 = mmflow::read_space_file(a.files[1]);
    const auto cfg = solver_config(a.restarts, a.seed);
    const auto r = mmflow::dist(X0, X1, parse_p(a.p), cfg, parse_solver(a.solver));
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "dist"},   {"inputs", a.files}, {"p", a.p},
                     {"solver", a.solver},     {"restarts", a.restarts}, {"seed", a.seed}};
    out.update(dist_result_json(r, true));
    emit(out.dump(2), a.out);
    return 0;
}

struct GeodesicArgs {
    std::vector<std::string> files;
    double t = 0.5;
    std::string solver = "auto";
    int restarts = 16;
    std::uint64_t seed = 0;
    std::string out;
};

int run_geodesic(const GeodesicArgs& a) {
    const auto X0 = mmflow::read_space_file(a.files[0]);
    const auto X1 = mmflow::read_space_file(a.files[1]);
    const auto cfg = solver_config(a.restarts, a.seed);
    const auto r = mmflow::dist(X0, X1, 2.0, cfg, parse_solver(a.solver));
    const auto gp = mmflow::geodesic_point(X0, X1, r.best_coupling, a.t);
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "geodesic"}, {"inputs", a.files},     {"t", a.t},
                     {"solver", a.solver},       {"restarts", a.restarts}, {"seed", a.seed}};
    out["dist"] = dist_result_json(r, false);
    out["t"] = a.t;
    out["space"] = space_to_embedded_json(gp.space);
    json pairs = json::array();
    for (const auto& [i, k] : gp.pairs) pairs.push_back(json::array({i, k}));
    out["pairs"] = std::move(pairs);
    emit(out.dump(2), a.out);
    return 0;
}

struct FunctionalArgs {
    std::string file;
    std::string functional;
    double K = 0.0;
    bool k_given = false;
    std::string model;
    std::string rho;
    long long mc = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_functional(const FunctionalArgs& a) {
    const auto X = mmflow::read_space_file(a.file);
    std::optional<mmflow::MonteCarlo> mc;
    if (a.mc > 0) mc = mmflow::MonteCarlo{a.mc, a.seed};
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "functional"}, {"input", a.file}, {"functional", a.functional},
                     {"K", a.K},                   {"model", a.model}, {"rho", a.rho},
                     {"mc", a.mc},                 {"seed", a.seed}};

    if (a.functional == "size2") {
        out["value"] = mmflow::size_p(X, 2.0);
    } else if (a.functional == "triangle_defect") {
        out["value"] = mmflow::triangle_defect(X);
    } else if (a.functional == "G0" || a.functional == "GK") {
        if (a.functional == "GK" && !a.k_given) throw mmflow::InputError("functional GK needs --K");
        const double K = a.functional == "G0" ? 0.0 : a.K;
        const auto v = mmflow::eval_G(X, K, mc);
        out["value"] = mmflow::number_to_json(v.value);
        if (v.stderr_est) out["stderr"] = *v.stderr_est;
    } else if (a.functional == "H0" || a.functional == "HK") {
        if (a.functional == "HK" && !a.k_given) throw mmflow::InputError("functional HK needs --K");
        const double K = a.functional == "H0" ? 0.0 : a.K;
        const auto v = mmflow::eval_H(X, K, mc);
        out["value"] = mmflow::number_to_json(v.value);
        if (v.stderr_est) out["stderr"] = *v.stderr_est;
        if (v.flagged_quadruple)
            out["flagged_quadruple"] = json::array({(*v.flagged_quadruple)[0], (*v.flagged_quadruple)[1],
                                                    (*v.flagged_quadruple)[2], (*v.flagged_quadruple)[3]});
    } else if (a.functional == "F") {
        if (a.model.empty() || a.rho.empty()) throw mmflow::InputError("functional F needs --model and --rho");
        const auto model = parse_model(a.model, X);
        const auto rho = parse_rho(a.rho);
        out["value"] = mmflow::eval_F(X, model, rho);
    } else {
        throw mmflow::InputError("unknown functional: " + a.functional);
    }
    emit(out.dump(2), a.out);
    return 0;
}

struct FlowArgs {
    std::string file;
    std::string model;
    std::string rho;
    double dt = 1e-3;
    long long steps = 0;
    std::string integrator = "rk4";
    long long stride = 1;
    std::string functional = "F";
    double K = 0.0;
    std::string out;
    std::string csv;
};

int run_flow(const FlowArgs& a) {
    const auto X0 = mmflow::read_space_file(a.file);
    const auto model = parse_model(a.model, X0);
    const auto rho = parse_rho(a.rho);
    mmflow::FlowOptions opt;
    opt.dt = a.dt;
    opt.steps = a.steps;
    opt.save_stride = a.stride;
    if (a.integrator == "euler") opt.integrator = mmflow::Integrator::euler;
    else if (a.integrator == "rk4") opt.integrator = mmflow::Integrator::rk4;
    else throw mmflow::InputError("--integrator must be euler or rk4");
    if (a.functional == "F_plus_GK") {
        opt.with_G = true;
        opt.K = a.K;
    } else if (a.functional != "F") {
        throw mmflow::InputError("flow --functional must be F or F_plus_GK");
    }

    const auto traj = mmflow::flow(X0, model, rho, opt);

    json header;
    header["tool"] = tool_json();
    header["config"] = {{"subcommand", "flow"},  {"input", a.file},   {"model", a.model},
                        {"rho", a.rho},          {"dt", a.dt},        {"steps", a.steps},
                        {"integrator", a.integrator}, {"stride", a.stride}, {"functional", a.functional},
                        {"K", a.K}};
    std::ostringstream lines;
    lines << header.dump() << '\n';
    for (const auto& s : traj.steps) {
        json rec;
        rec["t"] = s.t;
        rec["gauge"] = mmflow::matrix_to_json(traj.n, s.gauge);
        rec["F"] = s.F;
        if (s.G) rec["G"] = mmflow::number_to_json(*s.G);
        rec["triangle_defect"] = s.triangle_defect;
        rec["clamp_events"] = s.clamp_events;
        lines << rec.dump() << '\n';
    }
    emit(lines.str(), a.out);
    if (!a.csv.empty()) {
        std::ostringstream csv;
        csv << "t,F\n";
        for (const auto& s : traj.steps) csv << mmflow::format_double(s.t) << ',' << mmflow::format_double(s.F) << '\n';
        mmflow::write_text_file(a.csv, csv.str());
    }
    return 0;
}

int verdict_exit(mmflow::Verdict v) { return v == mmflow::Verdict::FAIL ? 1 : 0; }

struct CheckTriangleArgs {
    std::vector<std::string> files;
    std::string p = "2";
    int restarts = 16;
    std::uint64_t seed = 0;
    std::string out;
};

int run_check_triangle(const CheckTriangleArgs& a) {
    const auto A = mmflow::read_space_file(a.files[0]);
    const auto B = mmflow::read_space_file(a.files[1]);
    const auto C = mmflow::read_space_file(a.files[2]);
    const auto cfg = solver_config(a.restarts, a.seed);
    const double p = parse_p(a.p);
    const auto dab = mmflow::dist(A, B, p, cfg);
    const auto dbc = mmflow::dist(B, C, p, cfg);
    const auto dac = mmflow::dist(A, C, p, cfg);
    const double tol = 1e-8;
    mmflow::Verdict verdict;
    if (dac.upper <= dab.lower + dbc.lower + tol) verdict = mmflow::Verdict::PASS;
    else if (dac.lower > dab.upper + dbc.upper + tol) verdict = mmflow::Verdict::FAIL;
    else verdict = mmflow::Verdict::INCONCLUSIVE;
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "check triangle"}, {"inputs", a.files},  {"p", a.p},
                     {"restarts", a.restarts},         {"seed", a.seed}};
    out["d01"] = dist_result_json(dab, false);
    out["d12"] = dist_result_json(dbc, false);
    out["d02"] = dist_result_json(dac, false);
    out["slack"] = dab.upper + dbc.upper - dac.lower;
    out["verdict"] = mmflow::to_string(verdict);
    emit(out.dump(2), a.out);
    std::cerr << mmflow::to_string(verdict) << '\n';
    return verdict_exit(verdict);
}

struct CheckBalancedArgs {
    std::string file;
    double tol = 1e-9;
    std::string out;
};

int run_check_balanced(const CheckBalancedArgs& a) {
    const auto X = mmflow::read_space_file(a.file);
    const auto rep = mmflow::is_balanced(X, a.tol);
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "check balanced"}, {"input", a.file}, {"tol", a.tol}};
    out["balanced"] = rep.balanced;
    if (rep.profile) {
        out["profile"] = {{"radii", rep.profile->radii}, {"values", rep.profile->values}};
    }
    const auto verdict = rep.balanced ? mmflow::Verdict::PASS : mmflow::Verdict::FAIL;
    out["verdict"] = mmflow::to_string(verdict);
    emit(out.dump(2), a.out);
    std::cerr << mmflow::to_string(verdict) << '\n';
    return verdict_exit(verdict);
}

struct CheckQuadrupleArgs {
    std::vector<std::string> files;
    int restarts = 16;
    std::uint64_t seed = 0;
    std::string out;
};

int run_check_quadruple(const CheckQuadrupleArgs& a) {
    std::vector<mmflow::FiniteSpace> X;
    X.reserve(4);
    for (const auto& f : a.files) X.push_back(mmflow::read_space_file(f));
    const auto cfg = solver_config(a.restarts, a.seed);
    const auto rep = mmflow::check_quadruple(X[0], X[1], X[2], X[3], cfg);
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "check quadruple"}, {"inputs", a.files}, {"restarts", a.restarts},
                     {"seed", a.seed}};
    json dists = json::array();
    for (const auto& [name, v] : rep.distances) dists.push_back(json{{"pair", name}, {"value", v}});
    out["distances"] = std::move(dists);
    out["slack"] = rep.slack;
    out["conclusive"] = rep.conclusive;
    out["verdict"] = mmflow::to_string(rep.verdict);
    emit(out.dump(2), a.out);
    std::cerr << mmflow::to_string(rep.verdict) << '\n';
    return verdict_exit(rep.verdict);
}

struct CheckComparisonArgs {
    std::vector<std::string> files;
    std::string grid = "0.25,0.5,0.75";
    int restarts = 16;
    std::uint64_t seed = 0;
    std::string out;
};

int run_check_comparison(const CheckComparisonArgs& a) {
    const auto X0 = mmflow::read_space_file(a.files[0]);
    const auto X1 = mmflow::read_space_file(a.files[1]);
    const auto P = mmflow::read_space_file(a.files[2]);
    const auto cfg = solver_config(a.restarts, a.seed);
    const auto grid = parse_grid(a.grid);
    const auto base = mmflow::dist(X0, X1, 2.0, cfg);
    const auto rep = mmflow::check_triangle_comparison(X0, X1, base.best_coupling, P, grid, cfg);
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "check triangle-comparison"}, {"inputs", a.files}, {"grid", a.grid},
                     {"restarts", a.restarts},                    {"seed", a.seed}};
    out["grid"] = rep.grid;
    out["slack"] = rep.slack;
    out["conclusive"] = rep.conclusive;
    out["verdict"] = mmflow::to_string(rep.verdict);
    emit(out.dump(2), a.out);
    std::cerr << mmflow::to_string(rep.verdict) << '\n';
    return verdict_exit(rep.verdict);
}

struct SampleArgs {
    std::vector<std::string> files;
    int order = 2;
    long long count = 1000;
    std::uint64_t seed = 0;
    std::string out;
};

int run_sample(const SampleArgs& a) {
    if (a.files.size() == 1) {
        const auto X = mmflow::read_space_file(a.files[0]);
        const auto samples = mmflow::sample_matrix_distribution(X, a.order, a.count, a.seed);
        json header;
        header["tool"] = tool_json();
        header["config"] = {{"subcommand", "sample"}, {"inputs", a.files}, {"n", a.order},
                            {"count", a.count},       {"seed", a.seed}};
        std::ostringstream lines;
        lines << header.dump() << '\n';
        for (const auto& s : samples) lines << json(s.entries).dump() << '\n';
        emit(lines.str(), a.out);
        return 0;
    }
    const auto X0 = mmflow::read_space_file(a.files[0]);
    const auto X1 = mmflow::read_space_file(a.files[1]);
    const auto rep = mmflow::empirical_homomorphism_test(X0, X1, a.order, a.count, a.seed);
    json out;
    out["tool"] = tool_json();
    out["config"] = {{"subcommand", "sample"}, {"inputs", a.files}, {"n", a.order},
                     {"count", a.count},       {"seed", a.seed}};
    out["method"] = rep.method;
    out["exact"] = rep.exact;
    out["statistic"] = rep.statistic;
    if (rep.p_value) out["p_value"] = *rep.p_value;
    out["verdict"] = rep.reject ? "REJECT" : "NO-EVIDENCE";
    emit(out.dump(2), a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distortion distance, geodesics, curvature functionals and volume-growth flows on finite gauged measure spaces"};
    app.require_subcommand(1);

    DistArgs da;
    auto* dist_cmd = app.add_subcommand("dist", "certified distortion distance between two spaces");
    dist_cmd->add_option("files", da.files, "two space files")->required()->expected(2);
    dist_cmd->add_option("--p", da.p, "exponent: 1, 2 or inf")->capture_default_str();
    dist_cmd->add_option("--solver", da.solver, "auto | exhaustive | fw")->capture_default_str();
    dist_cmd->add_option("--restarts", da.restarts, "Frank-Wolfe restarts")->capture_default_str();
    dist_cmd->add_option("--seed", da.seed, "restart shuffle seed")->capture_default_str();
    dist_cmd->add_option("--out", da.out, "write JSON here instead of stdout");

    GeodesicArgs ga;
    auto* geo_cmd = app.add_subcommand("geodesic", "point on the geodesic induced by the best coupling");
    geo_cmd->add_option("files", ga.files, "two space files")->required()->expected(2);
    geo_cmd->add_option("--t", ga.t, "interpolation parameter in [0,1]")->required();
    geo_cmd->add_option("--solver", ga.solver, "auto | exhaustive | fw")->capture_default_str();
    geo_cmd->add_option("--restarts", ga.restarts, "Frank-Wolfe restarts")->capture_default_str();
    geo_cmd->add_option("--seed", ga.seed, "restart shuffle seed")->capture_default_str();
    geo_cmd->add_option("--out", ga.out, "write JSON here instead of stdout");

    FunctionalArgs fa;
    auto* fun_cmd = app.add_subcommand("functional", "evaluate a named functional on a space");
    fun_cmd->add_option("file", fa.file, "space file")->required();
    auto* fsel = fun_cmd->add_option("--functional", fa.functional, "size2 | triangle_defect | G0 | GK | H0 | HK | F")
                     ->required();
    auto* kopt = fun_cmd->add_option("--K", fa.K, "curvature parameter for GK / HK");
    fun_cmd->add_option("--model", fa.model, "growth model for F: circle:n | sphere:dim,K[,cap] | file:path | self");
    fun_cmd->add_option("--rho", fa.rho, "weight for F: exp:lambda | unif:R");
    auto* mcopt = fun_cmd->add_option("--mc", fa.mc, "Monte Carlo sample count (0 = exact)");
    auto* seedopt = fun_cmd->add_option("--seed", fa.seed, "Monte Carlo seed");
    mcopt->needs(seedopt);
    (void)fsel;

    FlowArgs fla;
    auto* flow_cmd = app.add_subcommand("flow", "downward gradient flow of F (or F + G_K) on a uniform space");
    flow_cmd->add_option("file", fla.file, "initial space file")->required();
    flow_cmd->add_option("--model", fla.model, "circle:n | sphere:dim,K[,cap] | file:path | self")->required();
    flow_cmd->add_option("--rho", fla.rho, "exp:lambda | unif:R")->required();
    flow_cmd->add_option("--dt", fla.dt, "step size")->capture_default_str();
    flow_cmd->add_option("--steps", fla.steps, "number of steps")->required();
    flow_cmd->add_option("--integrator", fla.integrator, "euler | rk4")->capture_default_str();
    flow_cmd->add_option("--stride", fla.stride, "record every k-th step")->capture_default_str();
    flow_cmd->add_option("--functional", fla.functional, "F | F_plus_GK")->capture_default_str();
    flow_cmd->add_option("--K", fla.K, "curvature for F_plus_GK")->capture_default_str();
    flow_cmd->add_option("--out", fla.out, "trajectory JSONL path (default stdout)");
    flow_cmd->add_option("--csv", fla.csv, "also write a t,F table here");

    auto* check_cmd = app.add_subcommand("check", "verdict-style diagnostics");
    check_cmd->require_subcommand(1);

    CheckTriangleArgs cta;
    auto* ct = check_cmd->add_subcommand("triangle", "triangle inequality for the distortion distance");
    ct->add_option("files", cta.files, "three space files")->required()->expected(3);
    ct->add_option("--p", cta.p, "exponent")->capture_default_str();
    ct->add_option("--restarts", cta.restarts, "")->capture_default_str();
    ct->add_option("--seed", cta.seed, "")->capture_default_str();
    ct->add_option("--out", cta.out, "");

    CheckBalancedArgs cba;
    auto* cb = check_cmd->add_subcommand("balanced", "shared volume-growth profile across points");
    cb->add_option("file", cba.file, "space file")->required();
    cb->add_option("--tol", cba.tol, "comparison tolerance")->capture_default_str();
    cb->add_option("--out", cba.out, "");

    CheckQuadrupleArgs cqa;
    auto* cq = check_cmd->add_subcommand("quadruple", "quadruple comparison inequality");
    cq->add_option("files", cqa.files, "four space files")->required()->expected(4);
    cq->add_option("--restarts", cqa.restarts, "")->capture_default_str();
    cq->add_option("--seed", cqa.seed, "")->capture_default_str();
    cq->add_option("--out", cqa.out, "");

    CheckComparisonArgs cca;
    auto* cc = check_cmd->add_subcommand("triangle-comparison", "comparison along a geodesic against a third space");
    cc->add_option("files", cca.files, "X0 X1 P space files")->required()->expected(3);
    cc->add_option("--grid", cca.grid, "comma-separated t values")->capture_default_str();
    cc->add_option("--restarts", cca.restarts, "")->capture_default_str();
    cc->add_option("--seed", cca.seed, "")->capture_default_str();
    cc->add_option("--out", cca.out, "");

    SampleArgs sa;
    auto* sample_cmd = app.add_subcommand("sample", "matrix-distribution samples, or a two-space comparison");
    sample_cmd->add_option("files", sa.files, "one space file (sample) or two (compare)")->required()->expected(1, 2);
    sample_cmd->add_option("--n", sa.order, "matrix order")->capture_default_str();
    sample_cmd->add_option("--count", sa.count, "samples per space")->capture_default_str();
    sample_cmd->add_option("--seed", sa.seed, "sampling seed")->required();
    sample_cmd->add_option("--out", sa.out, "write here instead of stdout");

    fun_cmd->add_option("--out", fa.out, "write JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    fa.k_given = kopt->count() > 0;

    try {
        if (*dist_cmd) return run_dist(da);
        if (*geo_cmd) return run_geodesic(ga);
        if (*fun_cmd) return run_functional(fa);
        if (*flow_cmd) return run_flow(fla);
        if (*check_cmd) {
            if (*ct) return run_check_triangle(cta);
            if (*cb) return run_check_balanced(cba);
            if (*cq) return run_check_quadruple(cqa);
            if (*cc) return run_check_comparison(cca);
        }
        if (*sample_cmd) return run_sample(sa);
    } catch (const mmflow::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const mmflow::PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
