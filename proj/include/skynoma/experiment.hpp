#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "skynoma/config.hpp"
#include "skynoma/errors.hpp"
#include "skynoma/montecarlo.hpp"
#include "skynoma/outage.hpp"
#include "skynoma/rate.hpp"

namespace skynoma {

enum class Engine { analytical, montecarlo };

inline std::string to_string(Engine e) { return e == Engine::analytical ? "analytical" : "mc"; }

struct Sweep {
    std::string path;
    std::vector<std::string> values;
};

struct ExperimentPlan {
    SystemConfig base;
    std::vector<Sweep> sweeps;  // sorted by path
    std::vector<Engine> engines{Engine::analytical};
    std::vector<Metric> metrics{Metric::op_d1};
    std::string output_dir = "results";
    std::size_t trials = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// `a:step:b` expands to a, a+step, ..., b (inclusive within half a step).
inline std::optional<std::vector<std::string>> expand_range(const std::string& text) {
    const auto first = text.find(':');
    if (first == std::string::npos) return std::nullopt;
    const auto second = text.find(':', first + 1);
    if (second == std::string::npos) return std::nullopt;
    auto a = parse_real(text.substr(0, first));
    auto step = parse_real(text.substr(first + 1, second - first - 1));
    auto b = parse_real(text.substr(second + 1));
    if (!a || !step || !b || !(*step > 0.0) || *b < *a) return std::nullopt;
    std::vector<std::string> out;
    const auto n = static_cast<long>(std::floor((*b - *a) / *step + 0.5));
    for (long i = 0; i <= n; ++i) {
        // Round to 12 significant digits so 0.1-style steps print cleanly.
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", *a + i * *step);
        out.push_back(buf);
    }
    return out;
}

inline Metric parse_metric(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "op_d1") return Metric::op_d1;
    if (t == "op_d2") return Metric::op_d2;
    if (t == "aar_d1") return Metric::aar_d1;
    if (t == "aar_d2") return Metric::aar_d2;
    throw InvalidConfig("plan.metrics: unknown metric '" + text + "'");
}

inline std::vector<Engine> parse_engines(const std::string& text) {
    std::vector<Engine> out;
    for (const auto& item : split_list(text)) {
        const std::string t = lower(item);
        if (t == "analytical") out.push_back(Engine::analytical);
        else if (t == "mc" || t == "montecarlo") out.push_back(Engine::montecarlo);
        else if (t == "both") {
            out.push_back(Engine::analytical);
            out.push_back(Engine::montecarlo);
        } else throw InvalidConfig("plan.engines: unknown engine '" + item + "'");
    }
    if (out.empty()) throw InvalidConfig("plan.engines: at least one engine required");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::uint64_t parse_count(const std::string& path, const std::string& text) {
    auto v = parse_real(text);
    if (!v || *v < 0.0 || *v != std::floor(*v) || std::isinf(*v))
        throw InvalidConfig(path + ": expected a nonnegative integer, got '" + text + "'");
    return static_cast<std::uint64_t>(*v);
}

}  // namespace detail

/// Plan files reuse the config format. Keys under `plan.` set run options,
/// `sweep.<path> = v1, v2, ...` (or `a:step:b`) sweeps a config field, and
/// every other key sets the base config.
inline ExperimentPlan parse_plan(std::istream& in) {
    ExperimentPlan plan;
    std::vector<KeyValue> base_entries;
    std::vector<std::string> errors;
    std::map<std::string, std::vector<std::string>> sweeps;
    for (const auto& kv : parse_key_values(in)) {
        try {
            if (kv.key.rfind("plan.", 0) == 0) {
                const std::string opt = kv.key.substr(5);
                if (opt == "metrics") {
                    plan.metrics.clear();
                    for (const auto& m : detail::split_list(kv.value)) plan.metrics.push_back(detail::parse_metric(m));
                    if (plan.metrics.empty()) throw InvalidConfig("plan.metrics: at least one metric required");
                    std::sort(plan.metrics.begin(), plan.metrics.end());
                    plan.metrics.erase(std::unique(plan.metrics.begin(), plan.metrics.end()), plan.metrics.end());
                } else if (opt == "engines") {
                    plan.engines = detail::parse_engines(kv.value);
                } else if (opt == "trials") {
                    plan.trials = detail::parse_count(kv.key, kv.value);
                } else if (opt == "seed") {
                    plan.seed = detail::parse_count(kv.key, kv.value);
                } else if (opt == "workers") {
                    plan.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, detail::parse_count(kv.key, kv.value)));
                } else if (opt == "output") {
                    plan.output_dir = kv.value;
                } else {
                    throw InvalidConfig(kv.key + ": unknown plan option");
                }
            } else if (kv.key.rfind("sweep.", 0) == 0) {
                const std::string path = kv.key.substr(6);
                if (!find_field(path)) throw InvalidConfig(kv.key + ": unknown parameter path '" + path + "'");
                auto values = detail::expand_range(kv.value).value_or(detail::split_list(kv.value));
                if (values.empty()) throw InvalidConfig(kv.key + ": empty value list");
                sweeps[path] = std::move(values);
            } else {
                base_entries.push_back(kv);
            }
        } catch (const InvalidConfig& e) {
            for (const auto& v : e.violations()) errors.push_back(v);
        }
    }
    try {
        apply_entries(plan.base, base_entries);
        validate(plan.base);
    } catch (const InvalidConfig& e) {
        for (const auto& v : e.violations()) errors.push_back(v);
    }
    if (!errors.empty()) throw InvalidConfig(std::move(errors));
    for (auto& [path, values] : sweeps) plan.sweeps.push_back({path, std::move(values)});
    return plan;
}

inline ExperimentPlan load_plan(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open plan file '" + file + "'");
    return parse_plan(in);
}

/// One grid point: the swept values, in plan.sweeps order.
using SweepPoint = std::vector<std::string>;

/// Cartesian product of the sweeps, last path varying fastest.
inline std::vector<SweepPoint> sweep_points(const ExperimentPlan& plan) {
    std::vector<SweepPoint> points{{}};
    for (const auto& s : plan.sweeps) {
        std::vector<SweepPoint> next;
        for (const auto& p : points) {
            for (const auto& v : s.values) {
                SweepPoint q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

inline SystemConfig config_at(const ExperimentPlan& plan, const SweepPoint& point) {
    SystemConfig cfg = plan.base;
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < plan.sweeps.size(); ++i) {
        try {
            set_field(cfg, plan.sweeps[i].path, point[i]);
        } catch (const InvalidConfig& e) {
            errors.push_back("sweep." + e.violations().front());
        }
    }
    if (!errors.empty()) throw InvalidConfig(std::move(errors));
    validate(cfg);
    return cfg;
}

struct ResultRow {
    SweepPoint point;
    Metric metric = Metric::op_d1;
    Engine engine = Engine::analytical;
    double value = 0.0;
    std::optional<double> half_width;
    std::string config_hash;
};

inline User metric_user(Metric m) { return (m == Metric::op_d1 || m == Metric::aar_d1) ? User::d1 : User::d2; }
inline bool is_outage_metric(Metric m) { return m == Metric::op_d1 || m == Metric::op_d2; }

inline double analytical_metric(const Analysis& an, Metric m) {
    const auto& c = an.config();
    if (is_outage_metric(m)) return an.outage(c.scheme, c.access, metric_user(m)).value;
    return aar(an, c.scheme, c.access, metric_user(m)).value;
}

/// Evaluates every (point, metric, engine) of the plan in sweep order.
inline std::vector<ResultRow> run_experiment_rows(const ExperimentPlan& plan) {
    std::vector<ResultRow> rows;
    for (const auto& point : sweep_points(plan)) {
        const SystemConfig cfg = config_at(plan, point);
        const std::string hash = config_hash(cfg);
        std::optional<Analysis> an;
        std::vector<LinkRatios> ratios;
        for (Metric m : plan.metrics) {
            for (Engine e : plan.engines) {
                ResultRow row{point, m, e, 0.0, std::nullopt, hash};
                if (e == Engine::analytical) {
                    if (!an) an.emplace(cfg);
                    row.value = analytical_metric(*an, m);
                } else {
                    if (ratios.empty()) ratios = sample_link_ratios(cfg, plan.trials, plan.seed, plan.workers);
                    const McEstimate est = estimate_from_ratios(ratios, Protocol::of(cfg), m, plan.seed);
                    row.value = est.mean;
                    row.half_width = est.half_width_95;
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

inline std::string format_sig10(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Numeric cells get 10 significant digits; enum values pass through.
inline std::string format_cell(const std::string& text) {
    if (auto v = detail::parse_real(text)) return format_sig10(*v);
    return text;
}

inline std::string results_csv(const ExperimentPlan& plan, const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    for (const auto& s : plan.sweeps) out << s.path << ',';
    out << "metric,engine,value,half_width,config_hash\n";
    for (const auto& r : rows) {
        for (const auto& v : r.point) out << format_cell(v) << ',';
        out << to_string(r.metric) << ',' << to_string(r.engine) << ',' << format_sig10(r.value) << ','
            << (r.half_width ? format_sig10(*r.half_width) : std::string()) << ',' << r.config_hash << '\n';
    }
    return out.str();
}

inline std::string plot_script(const ExperimentPlan& plan) {
    std::ostringstream py;
    py << "import csv\nimport os\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
       << "here = os.path.dirname(os.path.abspath(__file__))\n"
       << "with open(os.path.join(here, 'results.csv')) as fh:\n"
       << "    rows = list(csv.DictReader(fh))\n";
    if (plan.sweeps.empty()) {
        py << "for r in rows:\n    print(r['metric'], r['engine'], r['value'])\n";
        return py.str();
    }
    const std::string x = plan.sweeps.front().path;
    py << "x_key = '" << x << "'\nothers = [";
    for (std::size_t i = 1; i < plan.sweeps.size(); ++i) py << "'" << plan.sweeps[i].path << "', ";
    py << "]\n"
       << "groups = {}\n"
       << "for r in rows:\n"
       << "    key = (r['metric'],) + tuple(r[k] for k in others)\n"
       << "    groups.setdefault(key, {}).setdefault(r['engine'], []).append((float(r[x_key]), float(r['value'])))\n"
       << "for key, engines in groups.items():\n"
       << "    fig, ax = plt.subplots()\n"
       << "    for engine, pts in engines.items():\n"
       << "        pts.sort()\n"
       << "        style = '-' if engine == 'analytical' else 'o'\n"
       << "        ax.plot([p[0] for p in pts], [p[1] for p in pts], style, label=engine)\n"
       << "    ax.set_xlabel(x_key)\n"
       << "    ax.set_ylabel(key[0])\n"
       << "    ax.set_title(' '.join(f'{k}={v}' for k, v in zip(others, key[1:])))\n"
       << "    ax.legend()\n"
       << "    name = '_'.join(str(k) for k in key).replace('/', '_')\n"
       << "    fig.savefig(os.path.join(here, name + '.png'), dpi=120)\n"
       << "    plt.close(fig)\n";
    return py.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + p.string() + "'");
}

/// Runs the plan and writes results.csv and plot.py into its output directory.
inline std::filesystem::path run_experiment(const ExperimentPlan& plan) {
    const auto rows = run_experiment_rows(plan);
    std::filesystem::path dir(plan.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_file(dir / "results.csv", results_csv(plan, rows));
    write_file(dir / "plot.py", plot_script(plan));
    return dir / "results.csv";
}

// ---------------------------------------------------------------------------
// Best platform/scheme summary

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::ptrdiff_t column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    }
};

inline CsvTable read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open '" + p.string() + "'");
    CsvTable t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream s(l);
        while (std::getline(s, cell, ',')) cells.push_back(cell);
        if (!l.empty() && l.back() == ',') cells.emplace_back();
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) t.header = split(line);
        else t.rows.push_back(split(line));
    }
    return t;
}

struct SummaryOptions {
    bool minimize_outage = true;  // false: maximize AAR
    User user = User::d1;
    double tie_tolerance = 1e-3;  // absolute
};

/// For every cell of the non-platform/scheme sweep columns, the best
/// platform+scheme label. Candidates within the tie tolerance of the best
/// value are resolved by preferring DT < RT < HT, then NTFP < RSU.
inline std::string summarize_best(const CsvTable& table, const SummaryOptions& opt) {
    const auto c_platform = table.column("deployment.platform");
    const auto c_scheme = table.column("scheme.type");
    const auto c_metric = table.column("metric");
    const auto c_engine = table.column("engine");
    const auto c_value = table.column("value");
    std::vector<std::string> missing;
    if (c_platform < 0) missing.push_back("sweep.deployment.platform: required dimension absent");
    if (c_scheme < 0) missing.push_back("sweep.scheme.type: required dimension absent");
    if (c_metric < 0 || c_engine < 0 || c_value < 0) missing.push_back("results: not a results table");
    if (!missing.empty()) throw InvalidConfig(std::move(missing));

    const Metric wanted = opt.minimize_outage ? (opt.user == User::d1 ? Metric::op_d1 : Metric::op_d2)
                                              : (opt.user == User::d1 ? Metric::aar_d1 : Metric::aar_d2);
    std::vector<std::size_t> cell_cols;
    for (std::size_t i = 0; i < static_cast<std::size_t>(c_metric); ++i)
        if (static_cast<std::ptrdiff_t>(i) != c_platform && static_cast<std::ptrdiff_t>(i) != c_scheme)
            cell_cols.push_back(i);

    // Analytical values win over Monte-Carlo when both are present.
    bool have_analytical = false;
    for (const auto& r : table.rows)
        if (r[c_metric] == to_string(wanted) && r[c_engine] == "analytical") have_analytical = true;
    const std::string engine = have_analytical ? "analytical" : "mc";

    struct Candidate {
        int scheme_rank;
        int platform_rank;
        std::string label;
        double value;
    };
    std::map<std::vector<std::string>, std::vector<Candidate>> cells;
    std::vector<std::vector<std::string>> order;
    for (const auto& r : table.rows) {
        if (r[c_metric] != to_string(wanted) || r[c_engine] != engine) continue;
        std::vector<std::string> key;
        for (auto c : cell_cols) key.push_back(r[c]);
        const std::string scheme = r[c_scheme];
        const std::string platform = r[c_platform];
        const int sr = scheme == "DT" ? 0 : scheme == "RT" ? 1 : 2;
        const int pr = platform == "NTFP" ? 0 : 1;
        auto [it, inserted] = cells.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back({sr, pr, platform + "+" + scheme, std::stod(r[c_value])});
    }
    if (cells.empty()) throw InvalidConfig("results: no rows for metric " + to_string(wanted));

    std::ostringstream out;
    out << "# objective=" << (opt.minimize_outage ? "min " : "max ") << to_string(wanted)
        << "; engine=" << engine << "; ties within " << format_sig10(opt.tie_tolerance)
        << " broken by DT<RT<HT then NTFP<RSU\n";
    for (auto c : cell_cols) out << table.header[c] << ',';
    out << "best,value\n";
    for (const auto& key : order) {
        auto& cands = cells[key];
        double best = cands.front().value;
        for (const auto& c : cands) best = opt.minimize_outage ? std::min(best, c.value) : std::max(best, c.value);
        const Candidate* pick = nullptr;
        for (const auto& c : cands) {
            if (std::abs(c.value - best) > opt.tie_tolerance) continue;
            if (!pick || std::tie(c.scheme_rank, c.platform_rank) < std::tie(pick->scheme_rank, pick->platform_rank))
                pick = &c;
        }
        for (const auto& v : key) out << v << ',';
        out << pick->label << ',' << format_sig10(pick->value) << '\n';
    }
    return out.str();
}

}  // namespace skynoma
