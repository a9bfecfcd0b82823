#include "cfmob/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <variant>

#include "cfmob/error.hpp"
#include "cfmob/simulation.hpp"
#include "cfmob/throughput.hpp"

namespace cfmob::cli {

namespace {

const std::set<std::string> kKnownKeys{
    "lambda", "K",      "Q",    "pairs", "N",      "v",          "d1",  "d2",     "method", "runs",
    "segments", "seed", "window", "step", "rayleigh_scale", "out", "format", "se_csv", "rates"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || !std::isfinite(v)) throw ConfigError("'" + key + "': not a number: '" + s + "'");
    return v;
}

long long to_integer(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size()) throw ConfigError("'" + key + "': not an integer: '" + s + "'");
    return v;
}

std::vector<double> double_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "' is empty");
    return out;
}

std::vector<int> int_list(const std::string& key, const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) out.push_back(static_cast<int>(to_integer(key, item)));
    if (out.empty()) throw ConfigError("'" + key + "' is empty");
    return out;
}

// ---------------------------------------------------------------------------
// Row emission

using Cell = std::variant<std::string, double, long long>;
using Row = std::vector<std::pair<std::string, Cell>>;

std::string format_cell(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", std::get<double>(c));
    return buf;
}

void write_rows(const std::vector<Row>& rows, const std::vector<std::string>& header, const std::string& format,
                std::ostream& os) {
    if (format == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json obj;
            for (const auto& [k, v] : row) std::visit([&](const auto& x) { obj[k] = x; }, v);
            arr.push_back(std::move(obj));
        }
        os << arr.dump(2) << '\n';
        return;
    }
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i].second);
        os << '\n';
    }
}

std::vector<std::string> keys_of(const Row& r) {
    std::vector<std::string> k;
    for (const auto& [name, _] : r) k.push_back(name);
    return k;
}

const std::vector<std::string> kRatesHeader{"method", "K", "Q", "L_m", "lambda_per_km2", "v_mps", "kind",
                                            "h_c", "h_ap", "h_ctrl", "ci95", "n_runs", "seed"};

Row rates_row(const GridPoint& g, const NetworkParams& p, double v, const RateResult& r, long long n_runs,
              long long seed) {
    return {{"method", std::string(to_string(g.method))},
            {"K", static_cast<long long>(g.K)},
            {"Q", g.Q},
            {"L_m", g.method == Method::pue ? 0.0 : p.L * 1000.0},
            {"lambda_per_km2", g.lambda},
            {"v_mps", v},
            {"kind", std::string(to_string(r.kind))},
            {"h_c", r.h_c},
            {"h_ap", r.h_ap},
            {"h_ctrl", r.h_ctrl},
            {"ci95", r.ci95_halfwidth},
            {"n_runs", n_runs},
            {"seed", seed}};
}

// Relative error of an analytic row against the empirical one, on the
// control-plane rate (h_c for comp_jt / hybrid, h_ap for pue).
double relative_error(const RateResult& analytic, const RateResult& empirical) {
    if (empirical.h_ctrl == 0.0) return analytic.h_ctrl == 0.0 ? 0.0 : INFINITY;
    return (analytic.h_ctrl - empirical.h_ctrl) / empirical.h_ctrl;
}

void warn_regime(const GridPoint& g, const RateResult& r, std::ostream& err) {
    if (r.regime_warning)
        err << "warning: hybrid closed form clamped to 0 at K=" << g.K << " Q=" << g.Q
            << " (Q/K far below 2, approximation invalid)\n";
}

CampaignConfig campaign_for(const GridPoint& g, const ExperimentSpec& spec, double v) {
    CampaignConfig c;
    c.params = grid_params(g, spec);
    c.method = g.method;
    c.v = v;
    c.n_runs = spec.n_runs;
    c.n_segments = spec.n_segments;
    c.step_m = spec.step_m;
    c.seed = spec.seed;
    c.rayleigh_scale = spec.rayleigh_scale;
    return c;
}

// Exact-numeric hybrid rates only depend on v linearly; cache the v = 1 value.
class ExactCache {
public:
    RateResult get(const GridPoint& g, const NetworkParams& p, double v) {
        const auto key = std::make_tuple(g.lambda, g.K, g.Q);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, analytic_rates(g.method, p, 1.0, RateKind::exact_numeric)).first;
        RateResult r = it->second;
        r.h_c *= v;
        r.h_ap *= v;
        r.h_ctrl *= v;
        return r;
    }

private:
    std::map<std::tuple<double, int, double>, RateResult> cache_;
};

std::vector<Row> cmd_analytic(const ExperimentSpec& spec, std::ostream& err) {
    std::vector<Row> rows;
    ExactCache exact;
    for (const auto& g : spec.grid()) {
        const auto p = grid_params(g, spec);
        for (double v : spec.vs) {
            const auto closed = analytic_rates(g.method, p, v, RateKind::closed_form);
            warn_regime(g, closed, err);
            rows.push_back(rates_row(g, p, v, closed, 0, 0));
            if (g.method == Method::hybrid) rows.push_back(rates_row(g, p, v, exact.get(g, p, v), 0, 0));
        }
    }
    return rows;
}

std::vector<Row> cmd_simulate(const ExperimentSpec& spec) {
    std::vector<Row> rows;
    for (const auto& g : spec.grid()) {
        for (double v : spec.vs) {
            const auto cfg = campaign_for(g, spec, v);
            const auto res = run_campaign(cfg);
            rows.push_back(rates_row(g, cfg.params, v, res.rates, spec.n_runs, static_cast<long long>(spec.seed)));
        }
    }
    return rows;
}

std::vector<Row> cmd_validate(const ExperimentSpec& spec, std::ostream& err) {
    std::vector<Row> rows;
    ExactCache exact;
    for (const auto& g : spec.grid()) {
        const auto p = grid_params(g, spec);
        for (double v : spec.vs) {
            const auto emp = run_campaign(campaign_for(g, spec, v)).rates;
            const auto closed = analytic_rates(g.method, p, v, RateKind::closed_form);
            warn_regime(g, closed, err);

            auto push = [&](const RateResult& r, long long n_runs, long long seed, double rel) {
                auto row = rates_row(g, p, v, r, n_runs, seed);
                row.emplace_back("rel_err", rel);
                rows.push_back(std::move(row));
            };
            push(closed, 0, 0, relative_error(closed, emp));
            if (g.method == Method::hybrid) {
                const auto ex = exact.get(g, p, v);
                push(ex, 0, 0, relative_error(ex, emp));
            }
            push(emp, spec.n_runs, static_cast<long long>(spec.seed), 0.0);
        }
    }
    return rows;
}

std::vector<Row> cmd_se(const ExperimentSpec& spec) {
    std::unique_ptr<StaticSeProvider> provider;
    if (!spec.se_csv.empty()) {
        provider = std::make_unique<CsvSeProvider>(spec.se_csv);
    } else {
        ProxySeProvider::Options opt;
        opt.window = {0.0, 0.0, spec.window_km, spec.window_km};
        opt.n_runs = spec.n_runs;
        opt.seed = spec.seed;
        provider = std::make_unique<ProxySeProvider>(opt);
    }
    const std::string source = provider->is_proxy() ? "PROXY" : "csv";
    const std::array<double, 2> levels{50.0, 5.0};
    const std::array<const char*, 2> names{"median", "95_likely"};

    std::vector<Row> rows;
    for (const auto& g : spec.grid()) {
        const auto p = grid_params(g, spec);
        const auto samples = provider->samples(g.method, g.lambda, g.K, g.Q);
        if (samples.empty())
            throw ConfigError("no static SE samples for method " + std::string(to_string(g.method)) + " K=" +
                              std::to_string(g.K) + " Q=" + format_cell(g.Q));
        std::vector<double> se_static;
        se_static.reserve(samples.size());
        for (const auto& s : samples) se_static.push_back(s.se_static);
        const auto static_stats = percentile_stats(se_static, levels);

        for (double v : spec.vs) {
            const RateResult rates = spec.rates_source == "empirical"
                                         ? run_campaign(campaign_for(g, spec, v)).rates
                                         : analytic_rates(g.method, p, v, RateKind::closed_form);
            for (double d1 : spec.d1s) {
                for (double d2 : spec.d2s) {
                    const DelayParams delays{d1, d2};
                    std::vector<double> mobile;
                    mobile.reserve(se_static.size());
                    for (double se : se_static) mobile.push_back(mobility_aware_se(se, g.method, rates, delays));
                    const auto mobile_stats = percentile_stats(mobile, levels);
                    for (std::size_t i = 0; i < levels.size(); ++i) {
                        rows.push_back({{"method", std::string(to_string(g.method))},
                                        {"K", static_cast<long long>(g.K)},
                                        {"Q", g.Q},
                                        {"lambda_per_km2", g.lambda},
                                        {"v_mps", v},
                                        {"d1_s", d1},
                                        {"d2_s", d2},
                                        {"stat", std::string(names[i])},
                                        {"se_static", static_stats[i]},
                                        {"se_mobile", mobile_stats[i]},
                                        {"se_source", source}});
                    }
                }
            }
        }
    }
    return rows;
}

// Invariant checks that need no Monte Carlo.
int cmd_selftest(std::ostream& out) {
    struct Check {
        const char* name;
        std::function<bool()> fn;
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    const std::vector<Check> checks{
        {"hybrid h_ap = h_c * lambda L^2",
         [&] {
             const double L = std::sqrt(20.0 / 100.0);
             return rel(h_ap_hybrid_closed(5, L, 100.0, 10.0), h_c_hybrid_closed(5, L, 100.0, 10.0) * 20.0) < 1e-9;
         }},
        {"comp_jt h_ap = h_c * lambda L^2",
         [&] { return rel(h_ap_comp(10.0, 100.0, 0.3), h_c_comp(10.0, 0.3) * 100.0 * 0.09) < 1e-9; }},
        {"rates linear in v",
         [&] {
             const double L = std::sqrt(0.2);
             return h_c_hybrid_closed(5, L, 100.0, 20.0) == 2.0 * h_c_hybrid_closed(5, L, 100.0, 10.0) &&
                    h_ap_pue(20.0, 100.0, 7) == 2.0 * h_ap_pue(10.0, 100.0, 7);
         }},
        {"pue K=1 reduces to 4 v sqrt(lambda) / pi",
         [&] { return rel(h_ap_pue(10.0, 100.0, 1), 4.0 * 0.01 * 10.0 / std::numbers::pi) < 1e-12; }},
        {"grid crossing P(L, L) = 3/pi",
         [&] { return std::abs(buffon_square_grid_crossing_prob(1.0, 1.0) - 3.0 / std::numbers::pi) < 1e-12; }},
        {"grid crossing P(L, sqrt2 L) = 1",
         [&] { return buffon_square_grid_crossing_prob(1.0, std::numbers::sqrt2) == 1.0; }},
        {"exact vs closed form within 0.5% at Q/K = 10",
         [&] {
             const double L = std::sqrt(50.0 / 100.0);
             return rel(length_intensity_closed(100.0, L, 5), length_intensity_exact(100.0, L, 5)) < 5e-3;
         }},
        {"blocked link gives zero SE",
         [&] {
             RateResult r;
             r.h_ap = 10.0;
             return mobility_aware_se(2.0, Method::pue, r, {0.7, 0.02}) == 0.0;
         }},
    };
    int failed = 0;
    for (const auto& c : checks) {
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception&) {
            ok = false;
        }
        out << (ok ? "PASS " : "FAIL ") << c.name << '\n';
        failed += ok ? 0 : 1;
    }
    return failed == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

// ---------------------------------------------------------------------------

Settings parse_config_text(const std::string& text) {
    Settings s;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (!kKnownKeys.contains(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        s[key] = trim(line.substr(eq + 1));
    }
    return s;
}

Settings read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ExperimentSpec spec_from_settings(const std::string& subcommand, const Settings& settings) {
    ExperimentSpec spec;
    spec.subcommand = subcommand;
    for (const auto& [key, value] : settings) {
        if (key == "lambda") spec.lambdas = double_list(key, value);
        else if (key == "K") spec.Ks = int_list(key, value);
        else if (key == "Q") spec.Qs = double_list(key, value);
        else if (key == "v") spec.vs = double_list(key, value);
        else if (key == "d1") spec.d1s = double_list(key, value);
        else if (key == "d2") spec.d2s = double_list(key, value);
        else if (key == "N") spec.N = static_cast<int>(to_integer(key, value));
        else if (key == "runs") spec.n_runs = static_cast<int>(to_integer(key, value));
        else if (key == "segments") spec.n_segments = static_cast<int>(to_integer(key, value));
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_integer(key, value));
        else if (key == "window") spec.window_km = to_double(key, value);
        else if (key == "step") spec.step_m = to_double(key, value);
        else if (key == "rayleigh_scale") spec.rayleigh_scale = to_double(key, value);
        else if (key == "out") spec.out = value;
        else if (key == "format") spec.format = value;
        else if (key == "se_csv") spec.se_csv = value;
        else if (key == "rates") spec.rates_source = value;
        else if (key == "method") {
            spec.methods.clear();
            for (const auto& m : split_list(value)) {
                try {
                    spec.methods.push_back(parse_method(m));
                } catch (const ParameterError& e) {
                    throw ConfigError(e.what());
                }
            }
        } else if (key == "pairs") {
            for (const auto& item : split_list(value)) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw ConfigError("'pairs' entries must be K:Q, got '" + item + "'");
                spec.pairs.emplace_back(static_cast<int>(to_integer(key, item.substr(0, colon))),
                                        to_double(key, item.substr(colon + 1)));
            }
        } else {
            throw ConfigError("unknown setting '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

void ExperimentSpec::validate() const {
    if (lambdas.empty() || vs.empty() || methods.empty() || d1s.empty() || d2s.empty())
        throw ConfigError("parameter grid is empty");
    for (double l : lambdas)
        if (!(l > 0.0)) throw ConfigError("lambda must be positive");
    for (double v : vs)
        if (!(v >= 0.0)) throw ConfigError("v must be non-negative");
    for (double d : d1s)
        if (!(d >= 0.0)) throw ConfigError("d1 must be non-negative");
    for (double d : d2s)
        if (!(d >= 0.0)) throw ConfigError("d2 must be non-negative");
    if (n_runs < 1) throw ConfigError("runs must be at least 1");
    if (n_segments < 1) throw ConfigError("segments must be at least 1");
    if (!(window_km > 0.0)) throw ConfigError("window must be positive");
    if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
    if (rates_source != "closed" && rates_source != "empirical") throw ConfigError("rates must be closed or empirical");
    if (N && *N < 1) throw ConfigError("N must be at least 1");
    for (const auto& g : grid()) {
        if (g.method != Method::comp_jt && g.K < 1) throw ConfigError("K must be at least 1");
        if (g.method != Method::pue && !(g.Q > 0.0)) throw ConfigError("Q must be positive");
    }
}

std::vector<GridPoint> ExperimentSpec::grid() const {
    std::vector<std::pair<int, double>> combos = pairs;
    if (combos.empty())
        for (int k : Ks)
            for (double q : Qs) combos.emplace_back(k, q);

    std::vector<GridPoint> out;
    for (Method m : methods) {
        for (double lambda : lambdas) {
            std::vector<std::pair<int, double>> mc;
            if (N && m == Method::comp_jt) mc = {{0, static_cast<double>(*N)}};
            else if (N && m == Method::pue) mc = {{*N, 0.0}};
            else
                for (auto [k, q] : combos) {
                    if (m == Method::comp_jt) k = 0;
                    if (m == Method::pue) q = 0.0;
                    if (std::find(mc.begin(), mc.end(), std::make_pair(k, q)) == mc.end()) mc.emplace_back(k, q);
                }
            for (const auto& [k, q] : mc) out.push_back({m, lambda, k, q});
        }
    }
    return out;
}

NetworkParams grid_params(const GridPoint& g, const ExperimentSpec& spec) {
    const int k_eff = g.method == Method::comp_jt ? 1 : g.K;
    const double side = std::max(spec.window_km, min_window_side(g.lambda, k_eff, spec.rayleigh_scale));
    const Rect window{0.0, 0.0, side, side};
    try {
        return method_params(g.method, g.lambda, g.K, g.Q, window, default_guard(g.lambda, k_eff, spec.rayleigh_scale));
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("grid point: ") + e.what());
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Handover rates and mobility-aware SE for distributed MIMO AP selection", "cfmob"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::map<std::string, std::string> flags;
    app.add_option("--config", config_path, "key = value settings file (flags override)");
    const std::vector<std::pair<std::string, std::string>> flag_specs{
        {"seed", "base RNG seed"},
        {"runs", "Monte Carlo runs per grid point"},
        {"out", "output file (default stdout)"},
        {"format", "csv | json"},
        {"lambda", "AP densities per km^2, comma separated"},
        {"K", "closest-AP counts"},
        {"Q", "mean APs per CPU cluster"},
        {"pairs", "hybrid K:Q combinations, e.g. 3:25,5:20"},
        {"N", "comparable serving-set size (comp_jt Q=N, pue K=N)"},
        {"v", "UE speeds in m/s"},
        {"d1", "control-plane delays in s"},
        {"d2", "intra-cluster delays in s"},
        {"method", "comp_jt, pue, hybrid"},
        {"segments", "random-waypoint periods per run"},
        {"window", "simulation window side in km"},
        {"step", "trajectory sampling step in m"},
        {"rayleigh_scale", "Rayleigh scale of period lengths in km"},
        {"se_csv", "static SE samples (ue_id,method,K,Q,se_static); default PROXY model"},
        {"rates", "rates fed to the SE model: closed | empirical"},
    };
    for (const auto& [name, help] : flag_specs) app.add_option("--" + name, flags[name], help);

    std::string subcommand;
    for (const auto& [name, help] :
         std::vector<std::pair<std::string, std::string>>{
             {"analytic", "closed-form and exact-numeric rates over the grid"},
             {"simulate", "Monte Carlo rates over the grid"},
             {"validate", "analytic and Monte Carlo rates with relative errors"},
             {"se", "mobility-aware SE sweep (median and 95%-likely)"},
             {"selftest", "formula invariant checks"}}) {
        app.add_subcommand(name, help)->callback([&subcommand, n = name] { subcommand = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (subcommand == "selftest") return cmd_selftest(out);

        Settings settings;
        if (!config_path.empty()) settings = read_config_file(config_path);
        for (const auto& [name, _] : flag_specs)
            if (app.count("--" + name) > 0) settings[name] = flags[name];
        const auto spec = spec_from_settings(subcommand, settings);

        std::vector<Row> rows;
        std::vector<std::string> header;
        if (subcommand == "analytic") {
            rows = cmd_analytic(spec, err);
            header = kRatesHeader;
        } else if (subcommand == "simulate") {
            rows = cmd_simulate(spec);
            header = kRatesHeader;
        } else if (subcommand == "validate") {
            rows = cmd_validate(spec, err);
            header = kRatesHeader;
            header.push_back("rel_err");
        } else {
            rows = cmd_se(spec);
            header = {"method", "K", "Q", "lambda_per_km2", "v_mps", "d1_s", "d2_s",
                      "stat", "se_static", "se_mobile", "se_source"};
        }
        if (!rows.empty() && keys_of(rows.front()) != header) throw std::logic_error("row/header mismatch");

        if (spec.out.empty()) {
            write_rows(rows, header, spec.format, out);
        } else {
            std::ofstream file(spec.out);
            if (!file) throw ConfigError("cannot write " + spec.out);
            write_rows(rows, header, spec.format, file);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace cfmob::cli
