#include <doctest.h>

#include "ctcmbqc/fixtures.hpp"
#include "ctcmbqc/report.hpp"

using namespace ctcmbqc;

TEST_SUITE("report") {

TEST_CASE("floats keep 12 significant digits and negative zero disappears") {
    CHECK(format12(0.1 + 0.2) == "0.3");
    CHECK(format12(-0.0) == "0");
    CHECK(format12(-1e-300 * 1e-300) == "0");
    CHECK(round12(1.0 / 3.0) == 0.333333333333);
    CHECK(dump_json(Json(round12(2.0 / 3.0))) == "0.666666666667\n");
}

TEST_CASE("BSS result leads with the success probability") {
    BssResult r = bss_simulate(fixtures::j_loop_spec(), StateVector::basis(1, 0));
    Json j = to_json(r);
    CHECK(j.begin().key() == "success_probability");
    CHECK(j["success_probability"].get<double>() == 0.25);
    CHECK(j["grandfather_paradox"] == false);
    CHECK(j["output_bloch"] == Json::array({1.0, 0.0, 0.0}));
    Json paradox = to_json(bss_simulate(fixtures::j_loop_spec(), StateVector::minus_theta(fixtures::kTheta)));
    CHECK(paradox["output_state"].is_null());
}

TEST_CASE("Deutsch family directions serialize as Bloch triples") {
    CtcSpec spec = fixtures::j_loop_spec();
    DeutschSolution s = deutsch_fixed_points(spec, DensityMatrix::pure(StateVector::plus_theta(fixtures::kTheta)));
    Json j = to_json(s);
    REQUIRE(j["family_basis"].size() == 1u);
    const Json &dir = j["family_basis"][0];
    REQUIRE(dir.size() == 3u);
    CHECK(dir[0].get<double>() == 0.0);
    CHECK(dir[1].get<double>() == 0.0);
    CHECK(std::abs(dir[2].get<double>()) > 0.0);
    CHECK(j["extremals"].size() == 2u);
}

TEST_CASE("conflict report has one row per input with the documented keys") {
    std::vector<DensityMatrix> grid;
    for (const BlochVector &b : bloch_grid62()) grid.push_back(to_density(b));
    Json j = to_json(compare_models(fixtures::j_loop_spec(), grid));
    REQUIRE(j["rows"].size() == 62u);
    std::vector<std::string> keys;
    for (auto it = j["rows"][0].begin(); it != j["rows"][0].end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> leading{"input_bloch", "bss_p", "grandfather", "trace_distance", "bss_purity", "deutsch_purity",
                                           "agree"};
    REQUIRE(keys.size() >= leading.size());
    CHECK(std::vector<std::string>(keys.begin(), keys.begin() + leading.size()) == leading);
}

TEST_CASE("rewrite log entries are op/vertex objects") {
    std::vector<RewriteStep> log{{RewriteStep::Op::LC, 5, 1.0}, {RewriteStep::Op::ZDEL, 1, 0.5}};
    CHECK(to_json(log).dump() == R"([{"op":"LC","vertex":5},{"op":"ZDEL","vertex":1}])");
}

TEST_CASE("text tables align columns") {
    TextTable t({"a", "long header"});
    t.add_row({"wide cell", "x"});
    std::string s = t.render();
    CHECK(s.find("a          long header") != std::string::npos);
    CHECK(s.find("wide cell  x") != std::string::npos);
}

}  // TEST_SUITE
