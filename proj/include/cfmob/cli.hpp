#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfmob/analytics.hpp"
#include "cfmob/geometry.hpp"

namespace cfmob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

using Settings = std::map<std::string, std::string>;

// Line-based `key = value` file; `#` starts a comment. Throws ConfigError.
Settings read_config_file(const std::filesystem::path& path);
Settings parse_config_text(const std::string& text);

// One (K, Q) combination for a method. 0 marks "not applicable":
// comp_jt rows carry K = 0, pue rows carry Q = 0.
struct GridPoint {
    Method method = Method::hybrid;
    double lambda = 0.0;
    int K = 0;
    double Q = 0.0;
};

struct ExperimentSpec {
    std::string subcommand;
    std::vector<double> lambdas{100.0};
    std::vector<int> Ks{5};
    std::vector<double> Qs{20.0};
    std::vector<std::pair<int, double>> pairs;  // explicit hybrid (K, Q) combos
    std::optional<int> N;                       // comparable serving-set size
    std::vector<double> vs{10.0};
    std::vector<double> d1s{0.1};
    std::vector<double> d2s{0.02};
    std::vector<Method> methods{Method::hybrid};
    int n_runs = 200;
    int n_segments = 8;
    std::uint64_t seed = 1;
    double window_km = 4.0;
    double step_m = 0.0;  // 0: default
    double rayleigh_scale = 0.5;
    std::string out;  // empty: stdout
    std::string format = "csv";
    std::string se_csv;              // empty: proxy model
    std::string rates_source = "closed";  // closed | empirical

    // Grid expansion: with N set, comp_jt uses Q = N, pue K = N, hybrid the
    // explicit pairs (or Ks x Qs). Without N, every method uses pairs or
    // Ks x Qs with the irrelevant coordinate zeroed and duplicates removed.
    std::vector<GridPoint> grid() const;
    void validate() const;  // throws ConfigError
};

// Builds a spec from merged settings (file values overridden by flags).
ExperimentSpec spec_from_settings(const std::string& subcommand, const Settings& settings);

// Full parameter tuple for a grid row (window, guard, L from K/Q).
NetworkParams grid_params(const GridPoint& g, const ExperimentSpec& spec);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cfmob::cli
