#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mmflow/io.hpp"
#include "mmflow/space.hpp"
#include "test_util.hpp"

using namespace mmflow;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

// Runs the CLI through the shell, capturing stdout (stderr discarded unless
// merged by the caller inside `args`).
RunResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + testutil::cli_path() + "' " +
                            args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string& name) { return testutil::data_dir() + "/" + name; }

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("format_double: shortest exact round trip") {
    for (double v : {0.0, 1.0, 0.5, 1.0 / 3.0, 0.1, 3.14159265358979312, 1e-300, -2.75,
                     123456789.123456789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(-0.25) == "-0.25");
}

TEST_CASE("space json round trip preserves bits and rationals") {
    auto X = testutil::random_gauge_space(5, 321, false);
    const std::string path = temp_path("mmflow_rt.json");
    write_space_file(X, path);
    auto Y = read_space_file(path);
    REQUIRE(Y.n == X.n);
    for (std::size_t i = 0; i < X.gauge.size(); ++i) CHECK(Y.gauge[i] == X.gauge[i]);
    for (int i = 0; i < X.n; ++i) CHECK(Y.w(i) == X.w(i));
    std::filesystem::remove(path);

    // Rational weights survive a parse: "1/3" is the correctly rounded third.
    auto j = json::parse(R"({"weights": ["1/3", "1/3", "1/3"],
                             "gauge": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]})");
    auto K = space_from_json(j);
    CHECK(K.w(0) == 1.0 / 3.0);
    CHECK(K.w(2) == 1.0 / 3.0);
}

TEST_CASE("space json rejects malformed input") {
    CHECK_THROWS_AS(read_space_file("/nonexistent/nowhere.json"), InputError);
    CHECK_THROWS_AS(space_from_json(json::parse(R"({"weights": [1.0]})")), InputError);
    CHECK_THROWS_AS(space_from_json(json::parse(R"({"gauge": [[0]]})")), InputError);
    CHECK_THROWS_AS(space_from_json(json::parse(
                        R"({"weights": [0.5, 0.5], "gauge": [[0, 1]]})")),
                    InputError);  // ragged
    CHECK_THROWS_AS(space_from_json(json::parse(
                        R"({"weights": ["1/0"], "gauge": [[0]]})")),
                    InputError);
    CHECK_THROWS_AS(space_from_json(json::parse("[1,2,3]")), InputError);
}

TEST_CASE("number_to_json handles infinities") {
    CHECK(number_to_json(1.5).is_number());
    CHECK(number_to_json(std::numeric_limits<double>::infinity()) == json("inf"));
    CHECK(number_to_json(-std::numeric_limits<double>::infinity()) == json("-inf"));
    CHECK(number_to_json(std::nan("")) == json("nan"));
}

TEST_CASE("cli dist: pinned values on the shipped data files") {
    // delta against K4: both bounds equal size_2(K4) = sqrt(3)/2.
    auto r = run_cli("dist " + data("delta.json") + " " + data("k4.json"));
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.out);
    CHECK(j["certified"].get<bool>());
    CHECK(j["lower"].get<double>() == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    CHECK(j["upper"].get<double>() == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));

    // Self distance: certified zero.
    auto self = run_cli("dist " + data("k4.json") + " " + data("k4.json"));
    REQUIRE(self.exit_code == 0);
    auto js = json::parse(self.out);
    CHECK(js["certified"].get<bool>());
    CHECK(js["upper"].get<double>() <= 1e-12);

    // Two-point spaces with edges 1 and 3: |1-3| * size of the unit pair.
    auto e = run_cli("dist " + data("edge1.json") + " " + data("edge3.json"));
    REQUIRE(e.exit_code == 0);
    auto je = json::parse(e.out);
    CHECK(je["certified"].get<bool>());
    CHECK(je["upper"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(je["lower"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // Config echo: every run embeds its inputs and the tool version.
    CHECK(j["config"]["p"] == json("2"));
    CHECK(j["tool"]["name"] == json("mmflow"));
    CHECK(j["tool"]["version"].is_string());
}

TEST_CASE("cli functional: pinned values") {
    auto r = run_cli("functional --functional G0 " + data("square.json"));
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.out);
    CHECK(j["value"].get<double>() <= 1e-18);

    auto t = run_cli("functional --functional G0 " + data("tripod.json"));
    auto jt = json::parse(t.out);
    CHECK(jt["value"].get<double>() == doctest::Approx(30.0 / 256.0).epsilon(1e-14));

    auto h = run_cli("functional --functional H0 " + data("path3.json"));
    auto jh = json::parse(h.out);
    CHECK(jh["value"].get<double>() <= 1e-18);

    auto s = run_cli("functional --functional size2 " + data("k4.json"));
    auto jsz = json::parse(s.out);
    CHECK(jsz["value"].get<double>() == doctest::Approx(std::sqrt(0.75)).epsilon(1e-14));

    auto f = run_cli("functional --functional F --model circle:4 --rho exp:1 " + data("k4.json"));
    REQUIRE(f.exit_code == 0);
    auto jf = json::parse(f.out);
    CHECK(jf["value"].get<double>() > 0.0);

    // GK needs --K.
    auto bad = run_cli("functional --functional GK " + data("k4.json"));
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli: byte-identical reruns and thread-count independence") {
    const std::string args =
        "dist " + data("k3.json") + " " + data("k4.json") + " --seed 7 --restarts 3";
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    auto t1 = run_cli(args, "MMFLOW_THREADS=1");
    auto t2 = run_cli(args, "MMFLOW_THREADS=2");
    CHECK(t1.out == a.out);
    CHECK(t2.out == a.out);

    const std::string sample_args = "sample " + data("k4.json") + " --n 3 --count 64 --seed 99";
    auto s1 = run_cli(sample_args, "MMFLOW_THREADS=1");
    auto s2 = run_cli(sample_args, "MMFLOW_THREADS=4");
    REQUIRE(s1.exit_code == 0);
    CHECK(s1.out == s2.out);

    const std::string flow_args = "flow " + data("k4.json") +
                                  " --model circle:4 --rho exp:1 --steps 20 --stride 5";
    auto f1 = run_cli(flow_args, "MMFLOW_THREADS=1");
    auto f2 = run_cli(flow_args, "MMFLOW_THREADS=3");
    REQUIRE(f1.exit_code == 0);
    CHECK(f1.out == f2.out);
}

TEST_CASE("cli geodesic and checks") {
    auto g = run_cli("geodesic " + data("edge1.json") + " " + data("edge3.json") + " --t 0.5");
    REQUIRE(g.exit_code == 0);
    auto jg = json::parse(g.out);
    CHECK(jg["space"]["n"].get<int>() >= 2);
    CHECK(jg["t"].get<double>() == 0.5);
    // Midpoint of the certified pair: distance to either end is sqrt(2)/2.
    CHECK(jg["dist"]["upper"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    auto c = run_cli("check triangle " + data("edge1.json") + " " + data("edge3.json") + " " +
                     data("k4.json"));
    CHECK(c.exit_code == 0);
    auto jc = json::parse(c.out);
    CHECK(jc["verdict"] == json("PASS"));

    auto q = run_cli("check quadruple " + data("delta.json") + " " + data("edge1.json") + " " +
                     data("edge3.json") + " " + data("k4.json"));
    CHECK(q.exit_code == 0);

    auto b = run_cli("check balanced " + data("circle4.json"));
    CHECK(b.exit_code == 0);
    auto jb = json::parse(b.out);
    CHECK(jb["verdict"] == json("PASS"));

    // The tripod is not balanced: verdict FAIL, exit 1.
    auto f = run_cli("check balanced " + data("tripod.json"));
    CHECK(f.exit_code == 1);

    auto tc = run_cli("check triangle-comparison " + data("edge1.json") + " " + data("edge3.json") +
                      " " + data("delta.json"));
    CHECK(tc.exit_code == 0);
}

TEST_CASE("cli flow output is structured jsonl with descending F") {
    auto r = run_cli("flow " + data("k4.json") +
                     " --model circle:4 --rho exp:1 --steps 50 --stride 10 --integrator euler");
    REQUIRE(r.exit_code == 0);
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : r.out) {
        if (ch == '\n') {
            if (!cur.empty()) lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    REQUIRE(lines.size() >= 3);
    auto header = json::parse(lines[0]);
    CHECK(header.contains("tool"));
    CHECK(header.contains("config"));
    double prevF = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto rec = json::parse(lines[i]);
        const double F = rec["F"].get<double>();
        CHECK(F <= prevF + 1e-14);
        prevF = F;
    }
}

TEST_CASE("cli sample: exact verdicts and jsonl shape") {
    auto r = run_cli("sample " + data("edge1.json") + " " + data("k3.json") +
                     " --n 2 --count 100 --seed 5");
    REQUIRE(r.exit_code == 0);
    auto j = json::parse(r.out);
    CHECK(j["exact"].get<bool>());
    CHECK(j["verdict"] == json("REJECT"));
    CHECK(j["statistic"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    auto one = run_cli("sample " + data("k3.json") + " --n 2 --count 16 --seed 5");
    REQUIRE(one.exit_code == 0);
    std::size_t newlines = 0;
    for (char ch : one.out)
        if (ch == '\n') ++newlines;
    CHECK(newlines == 17);  // header + one line per sample
}

TEST_CASE("cli error paths and exit codes") {
    CHECK(run_cli("dist /nonexistent.json " + data("k4.json")).exit_code == 2);
    CHECK(run_cli("dist --bogus-flag x y").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);  // subcommand required
    // Exhaustive matching needs equal point counts.
    CHECK(run_cli("dist " + data("k3.json") + " " + data("k4.json") + " --solver exhaustive")
              .exit_code == 3);
    // p=1 has no upper-bound solver for unequal sizes beyond the one-point case.
    CHECK(run_cli("dist " + data("k3.json") + " " + data("k4.json") + " --p 1").exit_code == 3);
    CHECK(run_cli("sample " + data("k4.json") + " --n 2 --count 10").exit_code == 2);  // seed required
}

TEST_CASE("cli --out writes the same bytes as stdout") {
    const std::string path = temp_path("mmflow_out.json");
    auto direct = run_cli("functional --functional triangle_defect " + data("k3.json"));
    auto filed = run_cli("functional --functional triangle_defect " + data("k3.json") + " --out " +
                         path);
    REQUIRE(filed.exit_code == 0);
    CHECK(filed.out.empty());
    CHECK(read_text_file(path) == direct.out);
    std::filesystem::remove(path);
}
