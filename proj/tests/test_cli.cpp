#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helmlab/runner.hpp"

using namespace helmlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_tmp(const std::string& name, const std::string& text) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "helmlab_cli_test";
    fs::create_directories(dir);
    const auto path = (dir / name).string();
    std::ofstream out(path);
    out << text;
    return path;
}

const char* kSolveCfg = R"(
dimension = 3
mode_l = 0
[grid]
n = 500
rmax = 16
[potential]
kind = smooth_inverse_power
role = V_repulsive
params.c = 0.2
params.alpha_pow = 2
[problem]
tau = 1.0
epsilon = 0.2
sign = plus
boundary = dirichlet
[rhs]
kind = gaussian
center = 4
width = 0.8
[output]
path = out
format = csv
)";

}  // namespace

TEST_CASE("config parsing: strict schema") {
    auto cfg = Config::parse_text("a = 1\n[s]\nk = 2.5\n");
    CHECK(cfg.get_int(0, "a") == 1);
    const int s = cfg.unique_section("s");
    CHECK(cfg.get_double(s, "k") == 2.5);
    cfg.require_all_consumed();

    auto cfg2 = Config::parse_text("a = 1\nb = 2\n");
    cfg2.get_int(0, "a");
    CHECK_THROWS_WITH_AS(cfg2.require_all_consumed(), doctest::Contains("unknown config key b"),
                         ConfigError);

    CHECK_THROWS_AS(Config::parse_text("novalue\n"), ConfigError);
    auto lst = Config::parse_text("l = logspace:0.1:10:3\n");
    auto v = lst.get_list(0, "l");
    REQUIRE(v.size() == 3);
    CHECK(v[1] == doctest::Approx(1.0));

    // hash covers every key and changes with overrides
    auto c3 = Config::parse_text("a = 1\n");
    auto c4 = Config::parse_text("a = 2\n");
    CHECK(c3.hash() != c4.hash());
    c4.override_key("", "a", "1");
    CHECK(c3.hash() == c4.hash());
}

TEST_CASE("solve subcommand writes a deterministic report") {
    const auto cfgp = write_tmp("solve.cfg", kSolveCfg);
    RunnerOptions opt;
    opt.config_path = cfgp;
    opt.out_dir = (std::filesystem::temp_directory_path() / "helmlab_cli_test" / "o1").string();
    CHECK(run_subcommand("solve", opt) == 0);
    auto first = slurp(opt.out_dir + "/solution.csv");
    CHECK(first.find("# residual") != std::string::npos);
    opt.out_dir = (std::filesystem::temp_directory_path() / "helmlab_cli_test" / "o2").string();
    CHECK(run_subcommand("solve", opt) == 0);
    CHECK(first == slurp(opt.out_dir + "/solution.csv"));
}

TEST_CASE("unknown keys and missing sections are rejected") {
    std::string bad = std::string(kSolveCfg) + "\n[problem2]\nx = 1\n";
    const auto cfgp = write_tmp("bad.cfg", bad);
    RunnerOptions opt;
    opt.config_path = cfgp;
    opt.out_dir = (std::filesystem::temp_directory_path() / "helmlab_cli_test" / "o3").string();
    CHECK_THROWS_AS(run_subcommand("solve", opt), ConfigError);

    const auto cfgp2 = write_tmp("nosec.cfg", "dimension = 3\nmode_l = 0\n");
    opt.config_path = cfgp2;
    CHECK_THROWS_AS(run_subcommand("solve", opt), ConfigError);

    CHECK_THROWS_AS(run_subcommand("nope", opt), ConfigError);
}

TEST_CASE("check-potential verdicts drive the exit code") {
    const char* pass_cfg = R"(
dimension = 3
mode_l = 0
[grid]
n = 500
rmax = 32
[potential]
kind = inverse_power
role = V_repulsive
params.c = 0.1
params.gamma_pow = 2
[checks]
gamma = 2
)";
    // gamma = gamma_pow: the envelope vanishes identically and d = 3 passes
    auto cfgp = write_tmp("checks.cfg", pass_cfg);
    RunnerOptions opt;
    opt.config_path = cfgp;
    opt.out_dir = (std::filesystem::temp_directory_path() / "helmlab_cli_test" / "o4").string();
    CHECK(run_subcommand("check-potential", opt) == 0);

    // gamma far above the homogeneity: positive envelope with a divergent moment
    std::string fail_cfg(pass_cfg);
    fail_cfg.replace(fail_cfg.find("gamma = 2"), 9, "gamma = 9");
    cfgp = write_tmp("checks_fail.cfg", fail_cfg);
    opt.config_path = cfgp;
    CHECK(run_subcommand("check-potential", opt) == 2);

    // the zero potential passes every applicable condition
    const char* zero_cfg = R"(
dimension = 5
mode_l = 0
[grid]
n = 300
rmax = 16
[potential]
kind = zero
role = V_repulsive
[checks]
gamma = 1
)";
    cfgp = write_tmp("checks_zero.cfg", zero_cfg);
    opt.config_path = cfgp;
    CHECK(run_subcommand("check-potential", opt) == 0);
}

TEST_CASE("sweep subcommand round trip with seed override") {
    const char* sweep_cfg = R"(
dimension = 3
mode_l = 0
[grid]
n = 400
rmax = 40
[potential]
kind = inverse_power
role = V_repulsive
params.c = 0.1
params.gamma_pow = 2
[sweep]
estimate = basic
tau_list = 1
epsilon_list = 0.1, 1
sponge.width = 0.3
sponge.strength = 2.0
[data]
family = gaussian
seed = 3
count = 2
[output]
path = out
format = json
)";
    const auto cfgp = write_tmp("sweep.cfg", sweep_cfg);
    RunnerOptions opt;
    opt.config_path = cfgp;
    opt.out_dir = (std::filesystem::temp_directory_path() / "helmlab_cli_test" / "o5").string();
    CHECK(run_subcommand("sweep", opt) == 0);
    auto body = slurp(opt.out_dir + "/sweep.json");
    CHECK(body.find("\"seed\": 3") != std::string::npos);

    opt.seed_override = 99;
    opt.out_dir = (std::filesystem::temp_directory_path() / "helmlab_cli_test" / "o6").string();
    CHECK(run_subcommand("sweep", opt) == 0);
    auto body2 = slurp(opt.out_dir + "/sweep.json");
    CHECK(body2.find("\"seed\": 99") != std::string::npos);
    CHECK(body != body2);
}
