#include "doctest.h"

#include <filesystem>
#include <random>
#include <thread>

#include <httplib.h>

#include "hrm/io.hpp"
#include "hrm/service.hpp"

using namespace hrm;
using namespace hrm::service;
namespace fs = std::filesystem;

namespace {

struct TempStore {
    fs::path root;
    std::optional<ScenarioStore> store;

    TempStore() {
        std::random_device rd;
        root = fs::temp_directory_path() / ("hrm-service-" + std::to_string(rd()));
        pipeline::SyntheticSpec spec;
        spec.first_checkin = parse_date("2019-01-07");
        spec.days = 35;
        const auto src = pipeline::generate_synthetic_history(spec);
        store.emplace(ScenarioStore::create(root, {"synthetic", 100, src.ladder(), src.horizon()}));
        for (Date d : src.dates()) {
            store->put(src.load(d));
        }
    }
    ~TempStore() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
};

json fit_request() {
    return {{"dates", {"2019-01-07", "2019-01-14", "2019-01-21", "2019-01-28"}},
            {"g_low", 0.4},
            {"g_high", 0.7},
            {"transform", false}};
}

} // namespace

TEST_CASE("store round trip and immutability") {
    TempStore t;
    auto& store = *t.store;
    CHECK(store.dates().size() == 35);
    const Date d = parse_date("2019-01-10");
    const auto s = store.load(d);
    CHECK(io::to_json(s) == store.document(d));
    CHECK_FALSE(store.put(s));
    auto changed = s;
    changed.at(0, 80) += 1;
    CHECK_THROWS_AS(store.put(changed), StoreError);

    const auto reopened = ScenarioStore::open(t.root);
    CHECK(reopened.dates() == store.dates());
    CHECK(io::to_json(reopened.property()) == io::to_json(store.property()));

    fs::remove(t.root / "scenarios" / "2019-01-10.json");
    CHECK_THROWS_AS(ScenarioStore::open(t.root), StoreError);
}

TEST_CASE("read endpoints") {
    TempStore t;
    Engine engine(*t.store);
    const auto props = engine.handle("GET", "/properties", "");
    CHECK(props.status == 200);
    CHECK(props.body[0]["scenario_count"] == 35);
    CHECK(props.body[0]["ladder"]["step_minor"] == 10000);

    const auto sc = engine.handle("GET", "/scenarios/2019-01-10", "");
    CHECK(sc.status == 200);
    CHECK(sc.body == t.store->document(parse_date("2019-01-10")));
    CHECK(engine.handle("GET", "/scenarios/2018-06-07", "").status == 404);
    CHECK(engine.handle("GET", "/scenarios/yesterday", "").status == 400);
    CHECK(engine.handle("GET", "/nothing", "").status == 404);
}

TEST_CASE("fit validation names the field") {
    TempStore t;
    Engine engine(*t.store);
    auto req = fit_request();
    req["g_high"] = 1.5;
    auto r = engine.handle("POST", "/fit", req.dump());
    CHECK(r.status == 400);
    CHECK(r.body["field"] == "g_high");

    req = fit_request();
    req["g_low"] = -0.2;
    r = engine.handle("POST", "/fit", req.dump());
    CHECK(r.body["field"] == "g_low");

    req = fit_request();
    req["dates"] = json::array();
    CHECK(engine.handle("POST", "/fit", req.dump()).body["field"] == "dates");

    req = fit_request();
    req["dates"].push_back("2030-01-01");
    CHECK(engine.handle("POST", "/fit", req.dump()).status == 404);

    CHECK(engine.handle("POST", "/fit", "{not json").body["field"] == "body");
}

TEST_CASE("fit, optimize and what-if") {
    TempStore t;
    Engine engine(*t.store);
    const auto fit = engine.handle("POST", "/fit", fit_request().dump());
    REQUIRE(fit.status == 200);
    const std::string id = fit.body["fit_id"];
    CHECK(fit.body["excluded"] == json({false, false, false, true}));
    CHECK(fit.body["curves"]["knots"].size() == 28);
    CHECK(engine.handle("POST", "/fit", fit_request().dump()).body["fit_id"] == id);

    const json opt_req = {{"fit_id", id}, {"capacity", 40}};
    const auto opt = engine.handle("POST", "/optimize", opt_req.dump());
    REQUIRE(opt.status == 200);
    const auto optimal = opt.body["expected_revenue_minor"].get<std::int64_t>();
    CHECK(optimal > 0);
    CHECK(opt.body["posted_minor"].size() == opt.body["intervals"].get<std::size_t>());

    SUBCASE("no overrides is the optimum") {
        const auto w = engine.handle("POST", "/whatif", opt_req.dump());
        CHECK(w.body["expected_revenue_minor"] == optimal);
        CHECK(w.body["gap_percent"].get<double>() == doctest::Approx(0.0));
    }
    SUBCASE("overriding with the optimal table reproduces the optimum") {
        json req = opt_req;
        req["overrides"] = json::array();
        const auto& posted = opt.body["posted_minor"];
        for (std::size_t i = 0; i < posted.size(); ++i) {
            for (std::size_t x = 1; x < posted[i].size(); ++x) {
                req["overrides"].push_back({{"interval", i}, {"remaining", x}, {"rate_minor", posted[i][x]}});
            }
        }
        const auto w = engine.handle("POST", "/whatif", req.dump());
        REQUIRE(w.status == 200);
        CHECK(w.body["expected_revenue_minor"] == optimal);
    }
    SUBCASE("any day override cannot beat the optimum") {
        for (std::int64_t rate : {10000, 20000, 30000, 40000}) {
            json req = opt_req;
            req["overrides"] = json::array();
            for (int day = 73; day <= 100; day += 3) {
                req["overrides"].push_back({{"day", day}, {"rate_minor", rate}});
            }
            const auto w = engine.handle("POST", "/whatif", req.dump());
            REQUIRE(w.status == 200);
            CHECK(w.body["expected_revenue_minor"].get<std::int64_t>() <= optimal);
        }
    }
    SUBCASE("bad overrides") {
        json req = opt_req;
        req["overrides"] = {{{"day", 80}, {"rate_minor", 12345}}};
        CHECK(engine.handle("POST", "/whatif", req.dump()).body["field"] == "overrides");
        req["overrides"] = {{{"day", 5}, {"rate_minor", 10000}}};
        CHECK(engine.handle("POST", "/whatif", req.dump()).body["field"] == "overrides");
    }
    CHECK(engine.handle("POST", "/optimize", json({{"fit_id", "nope"}, {"capacity", 1}}).dump()).status == 404);
    CHECK(engine.handle("POST", "/optimize", json({{"fit_id", id}}).dump()).body["field"] == "capacity");
}

TEST_CASE("backtest endpoint") {
    TempStore t;
    Engine engine(*t.store);
    const json req = {{"first", "2019-02-04"}, {"last", "2019-02-10"}, {"config", {{"k", 3}}}};
    const auto r = engine.handle("POST", "/backtest", req.dump());
    REQUIRE(r.status == 200);
    CHECK(r.body["targets"].size() == 7);
    CHECK(r.body["by_weekday"].size() == 8);
    CHECK(r.body["tables"]["weekday_csv"].get<std::string>().rfind("day,n,", 0) == 0);
    const json bad = {{"first", "2019-02-04"}, {"last", "2019-02-10"}, {"config", {{"g_high", 2}}}};
    CHECK(engine.handle("POST", "/backtest", bad.dump()).body["field"] == "g_high");
}

TEST_CASE("bind address") {
    CHECK(parse_bind_address("").port == 8080);
    const auto a = parse_bind_address("0.0.0.0:9000");
    CHECK(a.host == "0.0.0.0");
    CHECK(a.port == 9000);
    CHECK_THROWS(parse_bind_address("host:port"));
}

TEST_CASE("served over HTTP") {
    TempStore t;
    Engine engine(*t.store);
    httplib::Server server;
    mount(server, engine);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const auto props = client.Get("/properties");
    REQUIRE(props);
    CHECK(props->status == 200);
    CHECK(json::parse(props->body)[0]["name"] == "synthetic");
    const auto missing = client.Get("/scenarios/2010-01-01");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto bad = fit_request();
    bad["g_low"] = 3;
    const auto fit = client.Post("/fit", bad.dump(), "application/json");
    REQUIRE(fit);
    CHECK(fit->status == 400);
    CHECK(json::parse(fit->body)["field"] == "g_low");

    server.stop();
    runner.join();
}
