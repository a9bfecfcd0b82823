#include <doctest.h>

#include <json.hpp>
#include <sstream>
#include <vector>

#include "cfmob/cli.hpp"
#include "cfmob/error.hpp"

using namespace cfmob;
using namespace cfmob::cli;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "cfmob");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("config text parsing") {
    const auto s = parse_config_text("# comment\nlambda = 25, 400\n  K=5 # trailing\n\nmethod = hybrid\n");
    CHECK(s.at("lambda") == "25, 400");
    CHECK(s.at("K") == "5");
    CHECK(s.at("method") == "hybrid");
    CHECK_THROWS_AS(parse_config_text("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("no equals sign\n"), ConfigError);
}

TEST_CASE("spec grid expansion") {
    Settings s{{"method", "comp_jt,pue,hybrid"}, {"N", "35"}, {"pairs", "3:25,5:20"}, {"lambda", "25,400"}};
    const auto spec = spec_from_settings("analytic", s);
    const auto g = spec.grid();
    // Per lambda: one comp_jt, one pue, two hybrid rows.
    CHECK(g.size() == 8);
    int comp = 0;
    for (const auto& p : g)
        if (p.method == Method::comp_jt) {
            ++comp;
            CHECK(p.K == 0);
            CHECK(p.Q == 35.0);
        }
    CHECK(comp == 2);

    CHECK_THROWS_AS(spec_from_settings("simulate", {{"runs", "0"}}), ConfigError);
    CHECK_THROWS_AS(spec_from_settings("analytic", {{"lambda", "abc"}}), ConfigError);
    CHECK_THROWS_AS(spec_from_settings("analytic", {{"format", "xml"}}), ConfigError);
}

TEST_CASE("analytic subcommand output") {
    const auto r = run({"analytic", "--lambda", "100", "--K", "5", "--Q", "20", "--v", "0,10"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 5);  // header + closed/exact at two speeds
    CHECK(l[0] == "method,K,Q,L_m,lambda_per_km2,v_mps,kind,h_c,h_ap,h_ctrl,ci95,n_runs,seed");
    CHECK(l[1].find("hybrid,5,20,") == 0);
    CHECK(l[1].find(",0,0,0,0,0,0") != std::string::npos);  // v = 0 row
    CHECK(l[3].find("closed_form") != std::string::npos);
    CHECK(l[3].find("0.157967") != std::string::npos);

    // Deterministic and reproducible.
    CHECK(run({"analytic", "--lambda", "100", "--K", "5", "--Q", "20", "--v", "0,10"}).out == r.out);
}

TEST_CASE("json output") {
    const auto r = run({"analytic", "--method", "comp_jt,pue", "--N", "35", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.is_array());
    CHECK(j.size() == 2);
    CHECK(j[0]["method"] == "comp_jt");
    CHECK(j[1]["h_c"] == 0.0);
}

TEST_CASE("simulate and validate run end to end") {
    const auto s = run({"simulate", "--runs", "3", "--window", "2", "--v", "10"});
    REQUIRE(s.code == 0);
    CHECK(lines(s.out).size() == 2);
    CHECK(lines(s.out)[1].find(",empirical,") != std::string::npos);

    const auto v = run({"validate", "--runs", "3", "--window", "2", "--v", "10"});
    REQUIRE(v.code == 0);
    CHECK(lines(v.out)[0].ends_with(",rel_err"));
    CHECK(lines(v.out).size() == 4);  // closed, exact, empirical
}

TEST_CASE("se subcommand row count and label") {
    const auto r = run({"se", "--method", "comp_jt,pue,hybrid", "--N", "35", "--pairs", "5:20", "--v", "0,10",
                        "--d1", "0.1", "--d2", "0.02", "--runs", "2", "--window", "3"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    // 3 methods x 2 speeds x 1 delay pair x 2 statistics.
    CHECK(l.size() == 1 + 12);
    CHECK(l[1].ends_with(",PROXY"));
}

TEST_CASE("sparse high-K grid points widen the window instead of failing") {
    const auto r = run({"analytic", "--lambda", "25,400", "--method", "comp_jt,pue,hybrid", "--N", "35", "--pairs",
                        "3:25,5:20,7:17", "--v", "10"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out).size() == 1 + 2 * (1 + 1 + 3 * 2));
}

TEST_CASE("validate at the reference point stays within 5%") {
    const auto r = run({"validate", "--lambda", "100", "--K", "5", "--Q", "20", "--v", "5,15,25"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 1 + 3 * 3);
    for (std::size_t i = 1; i < l.size(); ++i) {
        const double err = std::stod(l[i].substr(l[i].rfind(',') + 1));
        CHECK(std::abs(err) <= 0.05);
    }
}

TEST_CASE("se with high delay emits median and 95%-likely rows per method") {
    const auto r = run({"se", "--method", "comp_jt,pue,hybrid", "--N", "35", "--pairs", "5:20", "--v", "20",
                        "--lambda", "400", "--d1", "0.7", "--d2", "0.02", "--runs", "1", "--window", "1.5"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 1 + 3 * 2);
    // PUE at 20 m/s with d1 = 0.7 s is blocked.
    for (const auto& row : l)
        if (row.starts_with("pue,")) CHECK(row.find(",0,PROXY") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(run({"analytic", "--bogus", "1"}).code == kExitConfig);
    CHECK(run({}).code == kExitConfig);
    CHECK(run({"analytic", "--lambda", "-5"}).code == kExitConfig);
    CHECK(run({"analytic", "--config", "/nonexistent.cfg"}).code == kExitConfig);
    CHECK(run({"--help"}).code == kExitOk);
    const auto st = run({"selftest"});
    CHECK(st.code == 0);
    CHECK(st.out.find("FAIL") == std::string::npos);
}
