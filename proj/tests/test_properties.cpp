#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "property_suites.hpp"

namespace {

void check_report(const props::SuiteReport& rep) {
    INFO("suite ", rep.name, " ran ", rep.cases, " cases");
    for (const std::string& msg : rep.failures) { INFO(msg); }
    CHECK(rep.failures.empty());
}

} // namespace

TEST_CASE("bounds hold for random models") { check_report(props::bounds_suite()); }

TEST_CASE("tension-consuming feedback never raises v above v_b") {
    check_report(props::inhibiting_bound_suite());
}

TEST_CASE("tension-feeding feedback never drops v below v_b") {
    check_report(props::enhancing_bound_suite());
}

TEST_CASE("even data stays even") { check_report(props::symmetry_suite()); }

TEST_CASE("dt refinement shows first-order convergence") {
    check_report(props::refinement_suite());
}

TEST_CASE("printed expressions reparse to the same program") {
    check_report(props::roundtrip_suite());
}
