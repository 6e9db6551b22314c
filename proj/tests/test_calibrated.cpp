#include "doctest.h"

#include "mwlab/json_io.hpp"
#include "verification.hpp"

using namespace mwlab;

// Frozen regression bands: the paper's implied constants are not explicit, so
// these invariants are enforced against ratios recorded by the calibration
// tool (tests/fixtures/calibration.json, regenerated by mwlab-calibrate).

namespace {
const json& fixtures() {
    static json j = load_json_file(std::string(MWLAB_FIXTURE_DIR) + "/calibration.json");
    return j;
}
} // namespace

TEST_CASE("slicing and averaged-field characteristics stay in band") {
    const verify::RestrictionStats st = verify::restriction_stats(6, 0x51cull);
    CHECK(st.slice_max <= fixtures()["slice_gamma"].get<double>());
    CHECK(st.averaged_max <= fixtures()["averaged_gamma"].get<double>());
}

TEST_CASE("averaging lemma stays in band") {
    CHECK(verify::averaging_lemma_max(200, 0xa11ull) <=
          fixtures()["averaging_lemma_gamma"].get<double>());
}

TEST_CASE("paraproduct norm ratios stay in band; pi11 test functions recover the norm") {
    const verify::ParaStats st = verify::paraproduct_stats(12, 0xbead00ull);
    for (const auto& [kind, v] : st.upper) {
        INFO("kind " << kind);
        CHECK(v <= fixtures()["paraproduct_upper"][kind].get<double>());
    }
    CHECK(st.pi11_lower_min >= fixtures()["pi11_lower"].get<double>());
}
