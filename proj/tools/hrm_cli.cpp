// Command-line front end: ingestion, fitting, pricing, simulation and backtests.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrm/io.hpp"
#include "hrm/pipeline.hpp"
#include "hrm/service.hpp"
#include "hrm/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
}

void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

/// "A..B" or a single date.
std::pair<hrm::Date, hrm::Date> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const auto d = hrm::parse_date(text);
        return {d, d};
    }
    return {hrm::parse_date(text.substr(0, dots)), hrm::parse_date(text.substr(dots + 2))};
}

std::optional<std::chrono::weekday> parse_weekday(const std::string& text) {
    if (text.empty()) {
        return std::nullopt;
    }
    static const char* const names[] = {"sun", "mon", "tue", "wed", "thu", "fri", "sat"};
    std::string t = text.substr(0, 3);
    for (auto& c : t) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    for (unsigned i = 0; i < 7; ++i) {
        if (t == names[i]) {
            return std::chrono::weekday{i};
        }
    }
    throw std::invalid_argument("unknown weekday: " + text);
}

/// Options shared by the commands that fit curves from stored dates.
struct FitArgs {
    std::string store;
    std::vector<std::string> dates;
    std::string range;
    double g_low = 0.4;
    double g_high = 0.7;
    bool transform = false;
    int first_day = 0;
    int last_day = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--store", store, "Scenario store directory")->required();
        cmd->add_option("--dates", dates, "Check-in dates to fit on")->delimiter(',');
        cmd->add_option("--range", range, "Fit on every stored date in A..B");
        cmd->add_option("--g-low", g_low, "Smoothing at the cheapest rate");
        cmd->add_option("--g-high", g_high, "Smoothing at the dearest rate");
        cmd->add_flag("--transform", transform, "Fit on square-rooted counts");
        cmd->add_option("--first-day", first_day, "First horizon day of the fit window");
        cmd->add_option("--last-day", last_day, "Last horizon day of the fit window");
    }

    json request(const hrm::ScenarioStore& s) const {
        json r = {{"g_low", g_low}, {"g_high", g_high}, {"transform", transform}, {"dates", json::array()}};
        for (const auto& d : dates) {
            r["dates"].push_back(d);
        }
        if (!range.empty()) {
            const auto [a, b] = parse_range(range);
            for (auto d : s.dates()) {
                if (d >= a && d <= b) {
                    r["dates"].push_back(hrm::format_date(d));
                }
            }
        }
        if (first_day > 0) {
            r["first_day"] = first_day;
        }
        if (last_day > 0) {
            r["last_day"] = last_day;
        }
        return r;
    }
};

json checked(const hrm::service::Response& r) {
    if (r.status != 200) {
        throw std::runtime_error(r.body.value("error", "request failed") +
                                 (r.body.contains("field") ? " [" + r.body["field"].get<std::string>() + "]" : ""));
    }
    return r.body;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hotel demand curve fitting and dynamic pricing"};
    app.require_subcommand(1);

    // ingest
    std::string reservations, rates, property_path, store_dir, kpi_out, weekday_text, window_text;
    std::string grouping = "month";
    auto* ingest = app.add_subcommand("ingest", "Clean PMS exports and store raw demand scenarios");
    ingest->add_option("--reservations", reservations, "Reservations CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--rates", rates, "Per-night rates CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--property", property_path, "Property config JSON")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", store_dir, "Scenario store directory")->required();
    ingest->add_option("--dates", window_text, "Check-in dates A..B (default: every stay date)");
    ingest->add_option("--weekday", weekday_text, "Keep one weekday only (Mon..Sun)");
    ingest->add_option("--kpis", kpi_out, "Write ADR/RevPAR/occupancy JSON here");
    ingest->add_option("--grouping", grouping, "KPI grouping")
        ->check(CLI::IsMember({"month", "day_of_week", "year"}));

    // fit, optimize, whatif, lp-dump
    FitArgs fit_args;
    std::string out_path;
    int capacity = 0;
    int subdivisions = 8;
    std::vector<std::string> overrides;
    auto* fit = app.add_subcommand("fit", "Fit demand curves on stored dates");
    fit_args.add_to(fit);
    fit->add_option("--out", out_path, "Output JSON (default stdout)");

    auto* optimize = app.add_subcommand("optimize", "Fit, then solve the pricing recursion");
    fit_args.add_to(optimize);
    optimize->add_option("--capacity", capacity, "Rooms to sell")->required();
    optimize->add_option("--subdivisions", subdivisions, "Intervals per day");
    optimize->add_option("--out", out_path, "Output JSON (default stdout)");

    auto* whatif = app.add_subcommand("whatif", "Expected revenue with some days' rates fixed");
    fit_args.add_to(whatif);
    whatif->add_option("--capacity", capacity, "Rooms to sell")->required();
    whatif->add_option("--subdivisions", subdivisions, "Intervals per day");
    whatif->add_option("--override", overrides, "DAY=RATE, e.g. 80=170 (repeatable)");
    whatif->add_option("--out", out_path, "Output JSON (default stdout)");

    auto* lp_dump = app.add_subcommand("lp-dump", "Write the fitting program in LP text format");
    fit_args.add_to(lp_dump);
    lp_dump->add_option("--out", out_path, "Output .lp file (default stdout)");

    // scenario lookup
    std::string date_text;
    auto* scenario = app.add_subcommand("scenario", "Print one stored scenario");
    scenario->add_option("--store", store_dir, "Scenario store directory")->required();
    scenario->add_option("--date", date_text, "Check-in date")->required();

    // simulate
    std::string config_path;
    std::uint64_t seed = 0;
    bool with_sensitivity = false;
    std::size_t workers = 0;
    auto* simulate = app.add_subcommand("simulate", "Run the controlled simulation study");
    simulate->add_option("--config", config_path, "Simulation config JSON")->check(CLI::ExistingFile);
    auto* seed_opt = simulate->add_option("--seed", seed, "Random seed (overrides the config)");
    simulate->add_option("--out", out_path, "Report JSON")->required();
    simulate->add_flag("--sensitivity", with_sensitivity, "Also sweep the scenario count");
    simulate->add_option("--workers", workers, "Threads for the sweep (0 = all cores)");

    // synthetic store
    int synth_days = 140;
    std::string synth_first = "2019-01-01";
    std::uint64_t synth_seed = 7;
    auto* synth = app.add_subcommand("synth", "Write a synthetic scenario store");
    synth->add_option("--out", store_dir, "Scenario store directory")->required();
    synth->add_option("--days", synth_days, "Number of check-in dates");
    synth->add_option("--first", synth_first, "First check-in date");
    synth->add_option("--seed", synth_seed, "Random seed");

    // backtest
    std::string targets_text;
    auto* backtest = app.add_subcommand("backtest", "Backtest the pricing pipeline on stored dates");
    backtest->add_option("--store", store_dir, "Scenario store directory")->required();
    backtest->add_option("--targets", targets_text, "Target check-in dates A..B")->required();
    backtest->add_option("--config", config_path, "Backtest config JSON")->check(CLI::ExistingFile);
    backtest->add_option("--out", out_path, "report.json, or a .csv path for the tables")->required();
    backtest->add_option("--workers", workers, "Threads (0 = all cores)");

    // serve
    std::string bind_text;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API (bind address from HRM_BIND by default)");
    serve->add_option("--store", store_dir, "Scenario store directory")->required();
    serve->add_option("--bind", bind_text, "host:port");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            const auto property = hrm::io::property_from_json(read_json_file(property_path));
            std::ifstream res_in(reservations);
            std::ifstream rate_in(rates);
            const auto clean = hrm::ingestion::parse_and_clean(res_in, rate_in);
            for (const auto& e : clean.errors) {
                std::cerr << e.file << " row " << e.row << ": " << e.message << '\n';
            }
            const auto nights = hrm::ingestion::explode_stay_nights(clean.reservations);
            hrm::ingestion::ScenarioFilter filter;
            if (!window_text.empty()) {
                std::tie(filter.first, filter.last) = parse_range(window_text);
            } else if (!nights.empty()) {
                const auto [lo, hi] = std::minmax_element(nights.begin(), nights.end(), [](const auto& a, const auto& b) {
                    return a.stay_date < b.stay_date;
                });
                filter.first = lo->stay_date;
                filter.last = hi->stay_date;
            }
            filter.weekday = parse_weekday(weekday_text);
            auto store = hrm::ScenarioStore::create(store_dir, property);
            std::size_t written = 0;
            std::size_t scenarios = 0;
            if (!nights.empty() || !window_text.empty()) {
                const auto build = hrm::ingestion::build_demand_scenarios(nights, property, filter);
                scenarios = build.scenarios.size();
                for (const auto& s : build.scenarios) {
                    written += store.put(s) ? 1 : 0;
                }
                std::cerr << "clamped rates: " << build.clamped_rates << ", early bookings: " << build.early_bookings
                          << ", booked after stay: " << build.booked_after_stay << '\n';
            }
            if (!kpi_out.empty()) {
                const auto g = grouping == "month"         ? hrm::ingestion::Grouping::month
                               : grouping == "day_of_week" ? hrm::ingestion::Grouping::day_of_week
                                                           : hrm::ingestion::Grouping::year;
                json k = json::array();
                if (!nights.empty()) {
                    k = hrm::io::to_json(
                        hrm::ingestion::compute_kpis(nights, property.capacity, g, filter.first, filter.last));
                }
                write_json(kpi_out, k);
            }
            std::cout << "reservations: " << clean.reservations.size()
                      << ", zero-rate dropped: " << clean.dropped_zero_rate.size()
                      << ", row errors: " << clean.errors.size() << ", stay nights: " << nights.size()
                      << ", scenarios: " << scenarios << " (" << written << " new)\n";
            return clean.errors.empty() ? 0 : 2;
        }

        if (*fit || *optimize || *whatif) {
            const auto store = hrm::ScenarioStore::open(fit_args.store);
            hrm::service::Engine engine(store);
            const json fitted = checked(engine.fit(fit_args.request(store)));
            if (*fit) {
                write_json(out_path, fitted);
                return 0;
            }
            json req = {{"fit_id", fitted["fit_id"]}, {"capacity", capacity}, {"subdivisions", subdivisions}};
            if (*optimize) {
                write_json(out_path, checked(engine.optimize(req)));
                return 0;
            }
            req["overrides"] = json::array();
            for (const auto& o : overrides) {
                const auto eq = o.find('=');
                if (eq == std::string::npos) {
                    throw std::invalid_argument("override must read DAY=RATE: " + o);
                }
                req["overrides"].push_back({{"day", std::stoi(o.substr(0, eq))},
                                            {"rate_minor", hrm::io::to_minor(std::stod(o.substr(eq + 1)))}});
            }
            write_json(out_path, checked(engine.whatif(req)));
            return 0;
        }

        if (*lp_dump) {
            const auto store = hrm::ScenarioStore::open(fit_args.store);
            const json req = fit_args.request(store);
            std::vector<hrm::DemandScenario> raw;
            for (const auto& d : req["dates"]) {
                raw.push_back(store.load(hrm::parse_date(d.get<std::string>())));
            }
            if (raw.empty()) {
                throw std::invalid_argument("no dates to fit");
            }
            hrm::spline::FitOptions opt;
            opt.smoothing = hrm::pipeline::interpolate_smoothing(store.ladder(), fit_args.g_low, fit_args.g_high);
            opt.anscombe = fit_args.transform;
            opt.first_day = fit_args.first_day > 0 ? fit_args.first_day : std::max(1, store.horizon() - 27);
            opt.last_day = fit_args.last_day > 0 ? fit_args.last_day : store.horizon();
            for (auto n : hrm::pipeline::evidence_days(raw, opt.first_day, opt.last_day)) {
                opt.exclude.push_back(n < 3);
            }
            std::vector<hrm::DemandScenario> inputs;
            for (const auto& s : raw) {
                inputs.push_back(hrm::cumulate_choice_sets(s));
            }
            const auto program = hrm::spline::build_fit_program(inputs, store.ladder(), opt);
            write_text(out_path, hrm::lp::to_lp_format(program.problem));
            return 0;
        }

        if (*scenario) {
            const auto store = hrm::ScenarioStore::open(store_dir);
            hrm::service::Engine engine(store);
            write_json("-", checked(engine.scenario(date_text)));
            return 0;
        }

        if (*simulate) {
            auto config = config_path.empty() ? hrm::sim::SimConfig{}
                                              : hrm::io::sim_config_from_json(read_json_file(config_path));
            if (seed_opt->count() > 0) {
                config.seed = seed;
            }
            json report = hrm::io::to_json(hrm::sim::run_simulation_study(config));
            report["config"] = hrm::io::to_json(config);
            const hrm::sim::TrueCurves truth(config.curves);
            report["true_curves"] = json::array();
            for (std::size_t c = 0; c < truth.class_count(); ++c) {
                std::vector<double> ind, cum;
                for (int t = 1; t <= config.curves.horizon; ++t) {
                    ind.push_back(truth.individual(c, t));
                    cum.push_back(truth.cumulated(c, t));
                }
                report["true_curves"].push_back({{"individual", ind}, {"cumulated", cum}});
            }
            report["clamped_evaluations"] = truth.clamped_evaluations();
            if (with_sensitivity) {
                hrm::sim::SensitivityConfig sc;
                sc.base = config;
                sc.workers = workers;
                report["sensitivity"] = hrm::io::to_json(hrm::sim::run_sensitivity(sc));
            }
            write_json(out_path, report);
            std::cout << "true-curve revenue: " << report["true_revenue_minor"].get<std::int64_t>() / 100.0 << '\n';
            for (const auto& s : report["studies"]) {
                std::cout << "smoothing " << s["smoothing"].dump() << ": expected revenue "
                          << s["expected_revenue_minor"].get<std::int64_t>() / 100.0 << '\n';
            }
            return 0;
        }

        if (*synth) {
            hrm::pipeline::SyntheticSpec spec;
            spec.first_checkin = hrm::parse_date(synth_first);
            spec.days = synth_days;
            spec.seed = synth_seed;
            const auto source = hrm::pipeline::generate_synthetic_history(spec);
            hrm::ingestion::PropertyConfig property{"synthetic", 100, source.ladder(), source.horizon()};
            auto store = hrm::ScenarioStore::create(store_dir, property);
            for (auto d : source.dates()) {
                store.put(source.load(d));
            }
            std::cout << "stored " << source.dates().size() << " synthetic scenarios in " << store_dir << '\n';
            return 0;
        }

        if (*backtest) {
            const auto store = hrm::ScenarioStore::open(store_dir);
            auto config = config_path.empty() ? hrm::pipeline::BacktestConfig{}
                                              : hrm::io::backtest_config_from_json(read_json_file(config_path));
            config.workers = workers;
            const auto [a, b] = parse_range(targets_text);
            std::vector<hrm::Date> targets;
            for (auto d : store.dates()) {
                if (d >= a && d <= b) {
                    targets.push_back(d);
                }
            }
            const auto report = hrm::pipeline::run_backtest(store, targets, config);
            if (fs::path(out_path).extension() == ".csv") {
                const fs::path p(out_path);
                const fs::path rates_path = p.parent_path() / (p.stem().string() + "-rates.csv");
                write_text(out_path, hrm::pipeline::weekday_table_csv(report));
                write_text(rates_path.string(), hrm::pipeline::rate_wape_csv(report));
            } else {
                write_json(out_path, hrm::io::to_json(report));
            }
            std::cout << hrm::pipeline::weekday_table_csv(report);
            return 0;
        }

        if (*serve) {
            const auto store = hrm::ScenarioStore::open(store_dir);
            hrm::service::Engine engine(store);
            const auto address = bind_text.empty() ? hrm::service::bind_address_from_env()
                                                   : hrm::service::parse_bind_address(bind_text);
            std::cout << "listening on " << address.host << ':' << address.port << std::endl;
            if (!hrm::service::serve(engine, address)) {
                std::cerr << "cannot bind " << address.host << ':' << address.port << '\n';
                return 1;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
