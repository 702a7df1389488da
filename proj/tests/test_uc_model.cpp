#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "duc/uc_model.hpp"

using namespace duc;

namespace {

UcInstance small_instance() {
    UcInstance inst;
    inst.horizon = 6;
    for (int i = 0; i < 5; ++i) {
        GeneratorParams g;
        g.p_min = 10.0 + i;
        g.p_max = 100.0 + 10.0 * i;
        g.ramp_up = g.ramp_down = 50.0;
        g.startup_ramp = g.shutdown_ramp = 60.0;
        g.min_up = g.min_down = 1;
        g.cost_fixed = 5.0 + i;
        g.cost_linear = 20.0 + 2.0 * i;
        g.cost_quad = 0.02;
        g.cost_startup = 100.0;
        g.cost_shutdown = 30.0;
        inst.generators.push_back(g);
    }
    inst.initial.committed.assign(5, 1);
    inst.initial.power.assign(5, 20.0);
    auto& sc = inst.scenarios;
    sc.n_scenarios = 1;
    sc.probability = {1.0};
    sc.net_load.assign(6, 250.0);
    sc.reserve_up.assign(6, 10.0);
    sc.reserve_down.assign(6, 5.0);
    sc.response_window = 1.0;
    return inst;
}

}  // namespace

TEST_CASE("well-formed instance round-trips through the schema") {
    UcInstance inst = small_instance();
    UcInstance back = parse_instance(serialize_instance(inst));
    CHECK(back.n_units() == 5);
    CHECK(back.horizon == 6);
    CHECK(back.n_scenarios() == 1);
    for (int i = 0; i < 5; ++i) {
        CHECK(back.generators[i].p_min == doctest::Approx(inst.generators[i].p_min).epsilon(1e-12));
        CHECK(back.generators[i].cost_quad ==
              doctest::Approx(inst.generators[i].cost_quad).epsilon(1e-12));
        CHECK(back.initial.power[i] == doctest::Approx(inst.initial.power[i]).epsilon(1e-12));
    }
    for (std::size_t k = 0; k < inst.scenarios.net_load.size(); ++k)
        CHECK(back.scenarios.net_load[k] ==
              doctest::Approx(inst.scenarios.net_load[k]).epsilon(1e-12));
}

TEST_CASE("probability sum violation is reported with the offending sum") {
    UcInstance inst = small_instance();
    inst.scenarios.n_scenarios = 2;
    inst.scenarios.probability = {0.5, 0.6};
    inst.scenarios.net_load.assign(12, 200.0);
    inst.scenarios.reserve_up.assign(12, 5.0);
    inst.scenarios.reserve_down.assign(12, 5.0);
    std::string text = serialize_instance(inst);
    CHECK_THROWS_WITH_AS(parse_instance(text), doctest::Contains("probabilities sum"),
                         ValidationError);
}

TEST_CASE("p_min above p_max names the offending unit") {
    UcInstance inst = small_instance();
    inst.generators[2].p_min = inst.generators[2].p_max + 1.0;
    try {
        parse_instance(serialize_instance(inst));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        bool found = false;
        for (const auto& v : e.violations())
            if (v.find("unit 2") != std::string::npos && v.find("p_min") != std::string::npos)
                found = true;
        CHECK(found);
    }
}

TEST_CASE("validation collects every violation, not just the first") {
    UcInstance inst = small_instance();
    inst.generators[0].p_min = inst.generators[0].p_max + 1.0;
    inst.generators[1].cost_quad = -0.5;
    inst.generators[3].min_up = 0;
    auto bad = validate_instance(inst);
    CHECK(bad.size() >= 3);
}

TEST_CASE("generated instances are valid and deterministic") {
    UcInstance a = generate_synthetic(5, 6, 1, 42);
    CHECK(validate_instance(a).empty());
    CHECK(a.n_units() == 5);
    CHECK(a.horizon == 6);

    UcInstance b = generate_synthetic(5, 6, 1, 42);
    CHECK(serialize_instance(a) == serialize_instance(b));  // byte-identical

    UcInstance c = generate_synthetic(5, 6, 4, 42);
    CHECK(c.n_scenarios() == 4);
    double pi_sum = 0.0;
    for (double p : c.scenarios.probability) pi_sum += p;
    CHECK(pi_sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generated peak net load sits between 40% and 90% of capacity") {
    for (std::uint64_t seed : {1ull, 7ull, 99ull, 1234ull, 31337ull}) {
        UcInstance inst = generate_synthetic(6, 12, 2, seed);
        CHECK(validate_instance(inst).empty());
        double cap = 0.0;
        for (const auto& g : inst.generators) cap += g.p_max;
        double peak = 0.0;
        for (double v : inst.scenarios.net_load) peak = std::max(peak, v);
        CHECK(peak >= 0.40 * cap);
        CHECK(peak <= 0.90 * cap);
    }
}

TEST_CASE("generator rejects nonsensical shapes") {
    CHECK_THROWS_AS(generate_synthetic(0, 6, 1, 1), ValidationError);
    CHECK_THROWS_AS(generate_synthetic(3, 0, 1, 1), ValidationError);
    CHECK_THROWS_AS(generate_synthetic(3, 6, 0, 1), ValidationError);
}

TEST_CASE("deterministic view is the identity for one scenario") {
    UcInstance inst = small_instance();
    UcInstance view = deterministic_view(inst);
    CHECK(serialize_instance(view) == serialize_instance(inst));
}

TEST_CASE("deterministic view averages net load by probability") {
    UcInstance inst = small_instance();
    inst.scenarios.n_scenarios = 2;
    inst.scenarios.probability = {0.5, 0.5};
    inst.scenarios.net_load.assign(12, 0.0);
    for (int t = 0; t < 6; ++t) {
        inst.scenarios.net_load[t * 2] = 100.0;
        inst.scenarios.net_load[t * 2 + 1] = 200.0;
    }
    inst.scenarios.reserve_up.assign(12, 4.0);
    inst.scenarios.reserve_down.assign(12, 2.0);
    UcInstance view = deterministic_view(inst);
    CHECK(view.n_scenarios() == 1);
    for (int t = 0; t < 6; ++t) CHECK(view.scenarios.load(t, 0) == doctest::Approx(150.0));

    inst.scenarios.probability = {1.0, 0.0};
    UcInstance degenerate = deterministic_view(inst);
    for (int t = 0; t < 6; ++t) CHECK(degenerate.scenarios.load(t, 0) == doctest::Approx(100.0));
}

TEST_CASE("file save/load round-trip") {
    UcInstance inst = generate_synthetic(4, 8, 3, 5);
    std::string path = "test_roundtrip_instance.json";
    save_instance(inst, path);
    UcInstance back = load_instance(path);
    CHECK(serialize_instance(back) == serialize_instance(inst));
    std::remove(path.c_str());
}

TEST_CASE("missing file and malformed text raise the right errors") {
    CHECK_THROWS_AS(load_instance("no_such_file_9321.json"), IoError);
    CHECK_THROWS_AS(parse_instance("this is not json"), ParseError);
    CHECK_THROWS_AS(parse_instance("{\"horizon\": 3}"), ParseError);
}
