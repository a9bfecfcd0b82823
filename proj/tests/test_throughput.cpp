#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfmob/analytics.hpp"
#include "cfmob/error.hpp"
#include "cfmob/throughput.hpp"

using namespace cfmob;

namespace {

RateResult rates(double h_c, double h_ap) {
    RateResult r;
    r.h_c = h_c;
    r.h_ap = h_ap;
    return r;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("mobility-aware SE formula") {
    CHECK(mobility_aware_se(2.0, Method::hybrid, rates(0.158, 3.159), {0.1, 0.02}) ==
          doctest::Approx(1.84204).epsilon(1e-12));
    CHECK(mobility_aware_se(2.0, Method::pue, rates(0.0, 0.5), {0.1, 0.02}) == doctest::Approx(1.9));
    CHECK(mobility_aware_se(2.0, Method::comp_jt, rates(0.04, 0.8), {0.0, 0.0}) == 2.0);
}

TEST_CASE("blocking returns exactly zero") {
    CHECK(mobility_aware_se(3.0, Method::pue, rates(0.0, 10.0), {0.1, 0.0}) == 0.0);  // factor exactly 0
    CHECK(mobility_aware_se(3.0, Method::hybrid, rates(1.0, 20.0), {0.5, 0.5}) == 0.0);

    // High-delay, high-mobility PUE collapse.
    const double h = h_ap_pue(20.0, 400.0, 35);
    CHECK(1.0 - h * 0.7 < 0.0);
    CHECK(mobility_aware_se(5.0, Method::pue, rates(0.0, h), {0.7, 0.0}) == 0.0);
}

TEST_CASE("mobility never increases SE") {
    for (double d1 : {0.0, 0.01, 0.1, 0.5})
        for (double d2 : {0.0, 0.005, 0.05})
            for (Method m : {Method::comp_jt, Method::pue, Method::hybrid}) {
                const double se = mobility_aware_se(4.0, m, rates(0.2, 2.0), {d1, d2});
                CHECK(se <= 4.0);
                CHECK(se >= 0.0);
            }
    CHECK_THROWS_AS(mobility_aware_se(-1.0, Method::pue, rates(0, 0), {}), ParameterError);
    CHECK_THROWS_AS(mobility_aware_se(1.0, Method::pue, rates(0, 0), {-0.1, 0.0}), ParameterError);
}

TEST_CASE("percentiles") {
    const std::vector<double> s{3.0, 1.0, 2.0};
    const std::vector<double> lv{0.0, 50.0, 100.0, 25.0};
    const auto q = percentile_stats(s, lv);
    CHECK(q[0] == 1.0);
    CHECK(q[1] == 2.0);
    CHECK(q[2] == 3.0);
    CHECK(q[3] == doctest::Approx(1.5));

    const std::vector<double> c(10, 7.0);
    const std::vector<double> five{5.0};
    CHECK(percentile_stats(c, five)[0] == 7.0);

    std::vector<double> r;
    for (int i = 0; i <= 100; ++i) r.push_back(i);
    CHECK(percentile_stats(r, five)[0] == doctest::Approx(5.0));

    CHECK_THROWS_AS(percentile_stats(std::vector<double>{}, five), ParameterError);
    CHECK_THROWS_AS(percentile_stats(s, std::vector<double>{101.0}), ParameterError);
}

TEST_CASE("path loss is continuous and decreasing") {
    const PathlossParams p;
    CHECK(p.gain(1.0) == doctest::Approx(1.0));
    CHECK(p.gain(0.1) == p.gain(1.0));
    CHECK(p.gain(10.0) == doctest::Approx(1e-2));
    CHECK(p.gain(50.0) == doctest::Approx(1e-2 * std::pow(5.0, -3.0)));
    double prev = 2.0;
    for (double d = 1.0; d < 2000.0; d *= 1.1) {
        CHECK(p.gain(d) < prev);
        prev = p.gain(d);
    }
}

TEST_CASE("proxy SE grows with the serving set") {
    const Rect w{0, 0, 2, 2};
    const Deployment d(sample_ppp(100.0, w, 3), {0, 0}, 0.4, w);
    const Point ue{1.0, 1.0};
    double prev = -1.0;
    for (int K : {1, 2, 5, 10, 20}) {
        ServingSet s{Method::pue, {}, k_closest(ue, d, K)};
        const double se = proxy_static_se(d, ue, s);
        CHECK(se > prev);
        prev = se;
    }
    CHECK(proxy_static_se(d, ue, ServingSet{}) == 0.0);
}

TEST_CASE("proxy provider is deterministic") {
    ProxySeProvider::Options o;
    o.window = {0, 0, 2, 2};
    o.n_runs = 3;
    ProxySeProvider a(o), b(o);
    const auto sa = a.samples(Method::hybrid, 100.0, 5, 20.0);
    const auto sb = b.samples(Method::hybrid, 100.0, 5, 20.0);
    REQUIRE(!sa.empty());
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i].se_static == sb[i].se_static);
    CHECK(a.is_proxy());
}

TEST_CASE("CSV SE provider") {
    const auto ok = write_temp("cfmob_se_ok.csv",
                               "\xEF\xBB\xBFue_id,method,K,Q,se_static\n"
                               "0,hybrid,5,20,3.5\n1,hybrid,5,20,2.5\n2,pue,35,0,4.0\n\n3,comp_jt,0,35,1.0\n");
    CsvSeProvider p(ok);
    CHECK(p.rows().size() == 4);
    CHECK(p.samples(Method::hybrid, 100.0, 5, 20.0).size() == 2);
    CHECK(p.samples(Method::pue, 25.0, 35, 0.0).size() == 1);
    CHECK(p.samples(Method::hybrid, 100.0, 3, 20.0).empty());
    CHECK_FALSE(p.is_proxy());

    CHECK_THROWS_AS(CsvSeProvider(write_temp("cfmob_se_hdr.csv", "id,method,K,Q,se\n")), ConfigError);
    CHECK_THROWS_AS(CsvSeProvider(write_temp("cfmob_se_cols.csv", "ue_id,method,K,Q,se_static\n0,pue,1\n")),
                    ConfigError);
    CHECK_THROWS_AS(CsvSeProvider(write_temp("cfmob_se_meth.csv", "ue_id,method,K,Q,se_static\n0,xx,1,1,1\n")),
                    ConfigError);
    CHECK_THROWS_AS(CsvSeProvider(write_temp("cfmob_se_neg.csv", "ue_id,method,K,Q,se_static\n0,pue,1,0,-1\n")),
                    ConfigError);
    CHECK_THROWS_AS(CsvSeProvider(std::filesystem::path("/nonexistent/se.csv")), ConfigError);
}

TEST_CASE("method_params fills the not-applicable coordinate") {
    const Rect w{0, 0, 4, 4};
    const auto c = method_params(Method::comp_jt, 100.0, 0, 35.0, w, 0.8);
    CHECK(c.K == 1);
    CHECK(c.Q == doctest::Approx(35.0));
    const auto u = method_params(Method::pue, 100.0, 35, 0.0, w, 0.8);
    CHECK(u.K == 35);
    CHECK(u.Q == doctest::Approx(35.0));
}
