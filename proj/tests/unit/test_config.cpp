#include <doctest.h>

#include <string>

#include "relaychain/config.hpp"
#include "relaychain/errors.hpp"

using namespace relaychain;

namespace {

// Line number of the ConfigError raised by parsing `text`, or -1.
int error_line(const std::string& text, std::string* message = nullptr) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        if (message) *message = e.what();
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("minimal file selects the default grid") {
    const auto c = parse_config("experiment = mean_vs_N\n");
    CHECK(c == default_config(Experiment::mean_vs_N));
    CHECK(c.lambda == std::vector<double>{0.25, 0.75, 1.0, 2.0});
    CHECK(c.N.size() == 20);
    CHECK(c.N.front() == 1);
    CHECK(c.N.back() == 20);
    CHECK(c.span == 1.0);
    CHECK(c.theta == std::vector<double>{0.1});
    CHECK(c.alpha == std::vector<double>{3.0});
    CHECK(c.p == std::vector<double>{1.0});
    CHECK(c.modes.size() == 2);
    CHECK(c.hop_lengths(4) == std::vector<double>{0.25});
}

TEST_CASE("experiment defaults") {
    const auto hop = default_config(Experiment::var_vs_N_fixed_hop);
    CHECK(hop.lambda == std::vector<double>{2.0});
    CHECK(hop.L == std::vector<double>{0.1, 0.25, 0.5, 0.75, 1.0});
    CHECK_FALSE(hop.span);
    const auto speed = default_config(Experiment::speed_vs_L);
    CHECK(speed.p == std::vector<double>{0.25, 0.5, 0.75});
    CHECK(speed.theta == std::vector<double>{0.2});
    CHECK(speed.lambda == std::vector<double>{0.25});
    CHECK(speed.L.front() == 1.0);
    CHECK(speed.L.back() == 5.0);
    const auto cov = default_config(Experiment::cov_vs_distance);
    CHECK(cov.lambda == std::vector<double>{0.5, 1.0, 1.5, 2.0});
    CHECK(cov.distances.size() == 10);
    for (Experiment e : {Experiment::mean_vs_N, Experiment::var_vs_N_fixed_span, Experiment::var_vs_N_fixed_hop,
                         Experiment::cov_vs_distance, Experiment::speed_vs_L, Experiment::pmf, Experiment::validate})
        CHECK_NOTHROW(default_config(e).validate());
}

TEST_CASE("grammar") {
    const auto c = parse_config(
        "# comment line\n"
        "experiment = var_vs_N_fixed_hop   # trailing comment\n"
        "\n"
        "lambda = [0.5, 1e-1]\n"
        "N = [1..3, 7, 9..10]\n"
        "L = 0.5\n"
        "mode = independent\n"
        "path_loss = singular\n"
        "seed = 18446744073709551615\n");
    CHECK(c.lambda == std::vector<double>{0.5, 0.1});
    CHECK(c.N == std::vector<int>{1, 2, 3, 7, 9, 10});
    CHECK(c.L == std::vector<double>{0.5});
    CHECK(c.modes == std::vector<InterferenceMode>{InterferenceMode::independent});
    CHECK(c.path_loss == PathLossModel::Kind::singular);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(parse_config("experiment = pmf\nmode = both\n").modes.size() == 2);
    CHECK(parse_config("experiment = pmf\ndistances = 2..4\n").distances == std::vector<double>{2, 3, 4});
}

TEST_CASE("range errors name the key and line") {
    std::string msg;
    CHECK(error_line("experiment = mean_vs_N\nlambda = -1\n", &msg) == 2);
    CHECK(msg.find("lambda") != std::string::npos);
    CHECK(error_line("experiment = mean_vs_N\n\np = [0.5, 1.5]\n", &msg) == 3);
    CHECK(msg.find("'p'") != std::string::npos);
    CHECK(error_line("experiment = mean_vs_N\nalpha = 2\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nN = [0..3]\n") == 2);
    CHECK(error_line("experiment = pmf\nN = [5]\nt_max = 4\n") == 3);
}

TEST_CASE("syntax errors") {
    std::string msg;
    CHECK(error_line("experiment = mean_vs_N\ncolour = blue\n", &msg) == 2);
    CHECK(msg.find("unknown key 'colour'") != std::string::npos);
    CHECK(error_line("experiment = mean_vs_N\nlambda = [1, 2\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nlambda = []\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nlambda = abc\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nN = 1.5\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nN = 5..2\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nlambda 3\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nlambda = 1\nlambda = 2\n") == 3);
    CHECK(error_line("experiment = fig7\n") == 1);
    CHECK(error_line("experiment = mean_vs_N\nL = 1\nspan = 2\n") > 0);
    CHECK(error_line("experiment = mean_vs_N\nt_max = [3, 4]\n") == 2);
    CHECK(error_line("experiment = mean_vs_N\nmode = sometimes\n") == 2);
    CHECK(error_line("lambda = 1\n") == 0);
}

TEST_CASE("fallback experiment") {
    CHECK(parse_config("lambda = 1\n", Experiment::pmf).experiment == Experiment::pmf);
    CHECK(parse_config("experiment = validate\n", Experiment::pmf).experiment == Experiment::validate);
}

TEST_CASE("setting L replaces a default span and vice versa") {
    const auto a = parse_config("experiment = mean_vs_N\nL = [0.2, 0.4]\n");
    CHECK_FALSE(a.span);
    CHECK(a.hop_lengths(3) == std::vector<double>{0.2, 0.4});
    const auto b = parse_config("experiment = var_vs_N_fixed_hop\nspan = 2\n");
    CHECK(b.L.empty());
    CHECK(b.hop_lengths(4) == std::vector<double>{0.5});
}

TEST_CASE("echo round-trips") {
    for (Experiment e : {Experiment::mean_vs_N, Experiment::var_vs_N_fixed_span, Experiment::var_vs_N_fixed_hop,
                         Experiment::cov_vs_distance, Experiment::speed_vs_L, Experiment::pmf, Experiment::validate}) {
        CAPTURE(to_string(e));
        const auto c = default_config(e);
        CHECK(parse_config(echo_config(c)) == c);
    }
    auto odd = default_config(Experiment::validate);
    odd.lambda = {0.1 + 0.2, 1.0 / 3.0};
    odd.N = {1, 2, 4, 5, 6, 9};
    odd.rel_tol = 3.3e-9;
    odd.seed = 987654321987654321ULL;
    odd.modes = {InterferenceMode::independent};
    odd.path_loss = PathLossModel::Kind::singular;
    const std::string echo = echo_config(odd);
    CHECK(echo.find("N = [1, 2, 4..6, 9]") != std::string::npos);
    CHECK(parse_config(echo) == odd);

    std::string header = "# relaychain 9.9\n";
    for (std::size_t pos = 0; pos < echo.size();) {
        const auto nl = echo.find('\n', pos);
        header += "# " + echo.substr(pos, nl - pos) + "\n";
        pos = nl + 1;
    }
    CHECK(config_from_csv_header(header + "N,L\n1,2\n") == odd);
}

TEST_CASE("experiment names") {
    CHECK(parse_experiment("speed_vs_L") == Experiment::speed_vs_L);
    CHECK(to_string(Experiment::cov_vs_distance) == "cov_vs_distance");
    CHECK_THROWS_AS(parse_experiment("Speed"), ConfigError);
    CHECK_FALSE(version().empty());
}

TEST_CASE("missing files") {
    CHECK_THROWS_AS(load_config("/nonexistent/relaychain.cfg"), ConfigError);
}
