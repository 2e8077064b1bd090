#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "exitflow/config.hpp"
#include "exitflow/errors.hpp"
#include "exitflow/results_csv.hpp"

using namespace exitflow;

namespace {

std::string error_of(const std::string& text, std::optional<Command> command = std::nullopt)
{
    try {
        parse_config_text(text, command);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& haystack, const std::string& needle)
{
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("config")
{
    TEST_CASE("a complete run configuration")
    {
        const DriverConfig c = parse_config_text(R"(# comment line
command = run
problem = example2
dimension = 3
domain = gouda      # trailing comment
integrator = gm, bb
h = 0.01
n = 1e5
vr = on
seed = 42
rw_lambda = 2
)");
        CHECK(c.command == Command::run);
        CHECK(c.problem == "example2");
        CHECK(c.dimension == 3);
        CHECK(c.domain == DomainKind::gouda);
        CHECK(c.integrators == std::vector<Method>{Method::gm, Method::bb});
        CHECK(c.h == 0.01);
        CHECK(c.n == 100'000);
        CHECK(c.vr);
        CHECK(c.seed == 42);
        CHECK(c.rw_lambda == 2.0);
        CHECK(c.cancellation_filter);
        const ProblemInstance p = build_problem(c);
        CHECK(p.domain.kind() == DomainKind::gouda);
        CHECK(p.dimension() == 3);
    }

    TEST_CASE("the command line supplies the command")
    {
        const DriverConfig c = parse_config_text("problem = example3\ndimension = 4\nintegrator = em\n", Command::sweep);
        CHECK(c.command == Command::sweep);
        CHECK_FALSE(c.h);
        CHECK(contains(error_of("command = run\nproblem = example3\ndimension = 4\nintegrator = em\nh = 0.1\n",
                                Command::sweep),
                       "contradicts"));
    }

    TEST_CASE("every problem is reported at once with its line number")
    {
        const std::string msg = error_of(R"(command = run
problem = example2
dimension = 3
integrator = em, rk4
vr = maybe
colour = blue
x0 = 0.1, 0.2
h = 0.01
h = 0.02
)");
        CHECK(contains(msg, "line 4"));
        CHECK(contains(msg, "rk4"));
        CHECK(contains(msg, "line 5"));
        CHECK(contains(msg, "line 6: colour"));
        CHECK(contains(msg, "unknown key"));
        CHECK(contains(msg, "line 7: x0 has 2 components, expected 3"));
        CHECK(contains(msg, "line 9: duplicate key 'h'"));
    }

    TEST_CASE("missing and inconsistent keys")
    {
        CHECK(contains(error_of("problem = example3\ndimension = 3\nintegrator = em\n"), "missing key 'command'"));
        CHECK(contains(error_of("command = run\nproblem = example3\ndimension = 3\nintegrator = em\n"), "'h'"));
        CHECK(contains(error_of("command = ttt\nproblem = example3\ndimension = 3\nintegrator = em\n"), "tolerance_a"));
        CHECK(contains(error_of("command = sweep\nproblem = example3\nintegrator = em\n"), "dimension"));
        CHECK(contains(error_of("command = sweep\nproblem = example1\ndimension = 4\nintegrator = em\n"),
                       "three-dimensional"));
        CHECK(contains(error_of("command = sweep\nproblem = example3\ndimension = 3\ndomain = gouda\nintegrator = em\n"),
                       "unit ball"));
        CHECK(contains(error_of("command = sweep\nproblem = example2\ndimension = 3\nradius = 2\nintegrator = em\n"),
                       "radius"));
        CHECK(contains(error_of("command = sweep\nproblem = example2\ndimension = 3\nlevels = 2\nintegrator = em\n"),
                       "at least 3 levels"));
        CHECK(contains(error_of("command = sweep\nproblem = example9\nintegrator = em\n"), "example9"));
        CHECK(contains(error_of("command = run\nthis line has no equals sign\n"), "line 2: expected 'key = value'"));
        CHECK_THROWS_AS(parse_config("/nonexistent/exitflow.cfg"), ConfigError);
    }

    TEST_CASE("fit may read its points from a CSV instead of a problem")
    {
        const DriverConfig c = parse_config_text("command = fit\ninput = sweep.csv\ncancellation = off\n");
        CHECK(c.input == "sweep.csv");
        CHECK_FALSE(c.cancellation_filter);
        const DriverConfig o = parse_config_text("command = fit\ninput = sweep.csv\ncancellation = 4\n");
        CHECK(o.cancellation == std::size_t(4));
    }

    TEST_CASE("domain and evaluation point overrides")
    {
        const DriverConfig c = parse_config_text(
            "command = run\nproblem = example3\ndimension = 2\nx0 = 0.1, 0.2\nradius = 2\ncenter = 0.5, 0\n"
            "integrator = em\nh = 0.01\n");
        const ProblemInstance p = build_problem(c);
        CHECK(p.domain.size() == 2.0);
        CHECK(p.domain.center()(0) == 0.5);
        CHECK(p.x0(1) == 0.2);
        const DriverConfig bad = parse_config_text(
            "command = run\nproblem = example3\ndimension = 2\nx0 = 5, 0\nintegrator = em\nh = 0.01\n");
        CHECK_THROWS_AS(build_problem(bad), ConfigError);
    }

    TEST_CASE("csv: header, full precision and round trip")
    {
        CHECK(std::string(kCsvHeader) ==
              "problem,domain,dimension,integrator,vr,seed,h,n,estimate,stat_error_2sigma,signed_error,rel_error,"
              "delta,delta_stderr,n_steps_mean,wall_time_s");
        ResultRow r;
        r.problem = "example2";
        r.domain = "gouda";
        r.dimension = 24;
        r.integrator = "woe";
        r.vr = true;
        r.seed = 18446744073709551615ull;
        r.h = 0.2 / 1024;
        r.n = 123456789;
        r.estimate = 1.0 / 3.0;
        r.stat_error_2sigma = 1e-300;
        r.signed_error = -std::nextafter(0.1, 1.0);
        r.rel_error = 5e-324;
        r.n_steps_mean = 1234.5;
        r.wall_time_s = 0.25;
        ResultRow fit;
        fit.problem = "example3";
        fit.domain = "ball";
        fit.dimension = 16;
        fit.integrator = "bp";
        fit.n = 9;
        fit.delta = 1.0123456789012345;
        fit.delta_stderr = std::numeric_limits<double>::quiet_NaN();

        const std::string text = std::string(kCsvHeader) + "\n" + format_row(r) + "\n" + format_row(fit) +
                                 "\n# INCOMPLETE\n";
        const auto rows = parse_results_csv(text);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].problem == r.problem);
        CHECK(rows[0].seed == r.seed);
        CHECK(rows[0].vr);
        CHECK(*rows[0].h == *r.h);
        CHECK(*rows[0].n == *r.n);
        CHECK(*rows[0].estimate == *r.estimate);
        CHECK(*rows[0].stat_error_2sigma == *r.stat_error_2sigma);
        CHECK(*rows[0].signed_error == *r.signed_error);
        CHECK(*rows[0].rel_error == *r.rel_error);
        CHECK_FALSE(rows[0].delta);
        CHECK(*rows[1].delta == *fit.delta);
        CHECK(std::isnan(*rows[1].delta_stderr));
        CHECK_FALSE(rows[1].h);
        CHECK(format_row(rows[0]) == format_row(r));
        CHECK(format_real(0.1) == "1.0000000000000001e-01");
    }
}
