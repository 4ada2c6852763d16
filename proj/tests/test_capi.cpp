#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "multibarrier.h"

namespace {

// Scope guards so failing checks cannot leak handles across tests.
struct SpecGuard {
    mb_spec* p = nullptr;
    ~SpecGuard() { mb_spec_free(p); }
};
struct TableGuard {
    mb_table* p = nullptr;
    ~TableGuard() { mb_table_free(p); }
};
struct PacketGuard {
    mb_packet* p = nullptr;
    ~PacketGuard() { mb_packet_free(p); }
};

double cell(const mb_table* t, size_t row, size_t col) {
    double out = 0.0;
    REQUIRE(mb_table_value(t, row, col, &out) == MB_OK);
    return out;
}

int column_index(const mb_table* t, const char* name) {
    for (size_t c = 0; c < mb_table_n_cols(t); ++c) {
        if (std::strcmp(mb_table_col_name(t, c), name) == 0) return static_cast<int>(c);
    }
    return -1;
}

std::string meta_lookup(const mb_table* t, const char* key) {
    for (size_t i = 0; i < mb_table_n_meta(t); ++i) {
        if (std::strcmp(mb_table_meta_key(t, i), key) == 0) return mb_table_meta_value(t, i);
    }
    return {};
}

}  // namespace

TEST_CASE("version string and null-argument handling") {
    REQUIRE(mb_version() != nullptr);
    CHECK(std::strlen(mb_version()) >= 5);

    CHECK(mb_spec_create(2, 1.0, 1.0, 5.0, nullptr) == MB_ERR_INVALID);
    CHECK(mb_transmission(nullptr, 3.0, MB_METHOD_EXACT, nullptr) == MB_ERR_INVALID);
    double out = 0.0;
    CHECK(mb_transmission(nullptr, 3.0, MB_METHOD_EXACT, &out) == MB_ERR_INVALID);
    CHECK(std::strlen(mb_last_error()) > 0);
}

TEST_CASE("spec lifecycle, describe, and freeing null") {
    SpecGuard s;
    REQUIRE(mb_spec_create(4, 8.0, 4.0, 200.0, &s.p) == MB_OK);
    int64_t n = 0;
    double a = 0.0, b = 0.0, v = 0.0;
    REQUIRE(mb_spec_describe(s.p, &n, &a, &b, &v) == MB_OK);
    CHECK(n == 4);
    CHECK(a == doctest::Approx(8.0));
    CHECK(b == doctest::Approx(4.0));
    CHECK(v == doctest::Approx(200.0));

    SpecGuard r;
    REQUIRE(mb_spec_from_length_ratio(30.0, 10.0, 30, 100.0, &r.p) == MB_OK);
    REQUIRE(mb_spec_describe(r.p, &n, &a, &b, &v) == MB_OK);
    CHECK(a == doctest::Approx(30.0 / 11.0).epsilon(1e-13));
    CHECK(b == doctest::Approx(300.0 / 11.0).epsilon(1e-13));

    mb_spec_free(nullptr);  // must be a harmless no-op
    mb_table_free(nullptr);
    mb_packet_free(nullptr);
}

TEST_CASE("domain violations map to MB_ERR_DOMAIN with a message") {
    SpecGuard s;
    CHECK(mb_spec_create(0, 1.0, 1.0, 5.0, &s.p) == MB_ERR_DOMAIN);
    CHECK(std::string(mb_last_error()).find("barrier count") != std::string::npos);

    SpecGuard ok;
    REQUIRE(mb_spec_create(2, 1.0, 1.0, 5.0, &ok.p) == MB_OK);
    double out = 0.0;
    CHECK(mb_transmission(ok.p, 5.0, MB_METHOD_EXACT, &out) == MB_ERR_DOMAIN);
    CHECK(std::string(mb_last_error()).find("singular") != std::string::npos);

    // The limit method is a closed form in the geometry alone, so it accepts
    // finite specs too and simply ignores the count.
    double finite_limit = 0.0, infinite_limit = 0.0;
    CHECK(mb_transmission(ok.p, 7.0, MB_METHOD_LIMIT, &finite_limit) == MB_OK);
    SpecGuard twin;
    REQUIRE(mb_spec_create(MB_INFINITE_BARRIERS, 1.0, 1.0, 5.0, &twin.p) == MB_OK);
    REQUIRE(mb_transmission(twin.p, 7.0, MB_METHOD_LIMIT, &infinite_limit) == MB_OK);
    CHECK(finite_limit == infinite_limit);
}

TEST_CASE("numeric failures map to MB_ERR_NUMERIC") {
    SpecGuard s;
    REQUIRE(mb_spec_create(2, 400.0, 1.0, 10.0, &s.p) == MB_OK);
    double out = 0.0;
    CHECK(mb_transmission(s.p, 1.0, MB_METHOD_PRODUCT, &out) == MB_ERR_NUMERIC);
    CHECK(std::strlen(mb_last_error()) > 0);
}

TEST_CASE("transmission values agree with frozen references through the C surface") {
    SpecGuard s;
    REQUIRE(mb_spec_from_length_ratio(30.0, 10.0, 30, 100.0, &s.p) == MB_OK);
    double exact = 0.0, product = 0.0;
    REQUIRE(mb_transmission(s.p, 200.0, MB_METHOD_EXACT, &exact) == MB_OK);
    REQUIRE(mb_transmission(s.p, 200.0, MB_METHOD_PRODUCT, &product) == MB_OK);
    CHECK(exact == doctest::Approx(0.99995252871193580154).epsilon(1e-11));
    CHECK(product == doctest::Approx(0.99995252871193580154).epsilon(1e-12));

    SpecGuard inf;
    REQUIRE(mb_spec_create(MB_INFINITE_BARRIERS, 40.0, 30.0, 70.0, &inf.p) == MB_OK);
    double limit = 0.0;
    REQUIRE(mb_transmission(inf.p, 100.0, MB_METHOD_LIMIT, &limit) == MB_OK);
    CHECK(limit == doctest::Approx(0.94241141965612354699).epsilon(1e-13));
}

TEST_CASE("energy sweep flags singular rows and still returns MB_OK") {
    SpecGuard s;
    REQUIRE(mb_spec_create(2, 2.0, 1.0, 5.0, &s.p) == MB_OK);
    TableGuard t;
    // 11 points over [1, 9] hit e = v = 5 exactly at the midpoint.
    REQUIRE(mb_transmission_sweep(s.p, "energy", 1.0, 9.0, 11, 0.0, MB_METHOD_PRODUCT, &t.p) ==
            MB_OK);
    REQUIRE(t.p != nullptr);
    CHECK(mb_table_n_rows(t.p) == 11);
    const int ax = column_index(t.p, "energy");
    const int tv = column_index(t.p, "transmission");
    const int okc = column_index(t.p, "ok");
    REQUIRE(ax >= 0);
    REQUIRE(tv >= 0);
    REQUIRE(okc >= 0);
    REQUIRE(mb_table_text_name(t.p) != nullptr);
    CHECK(std::string(mb_table_text_name(t.p)) == "message");

    int flagged = 0;
    for (size_t r = 0; r < mb_table_n_rows(t.p); ++r) {
        const double okv = cell(t.p, r, static_cast<size_t>(okc));
        const double val = cell(t.p, r, static_cast<size_t>(tv));
        if (okv == 0.0) {
            ++flagged;
            CHECK(std::isnan(val));
            CHECK(std::strlen(mb_table_text(t.p, r)) > 0);
            CHECK(cell(t.p, r, static_cast<size_t>(ax)) == doctest::Approx(5.0));
        } else {
            CHECK(val > 0.0);
            CHECK(val <= 1.0 + 1e-12);
        }
    }
    CHECK(flagged == 1);
}

TEST_CASE("ratio and width sweeps probe rebuilt geometries") {
    SpecGuard s;
    REQUIRE(mb_spec_from_length_ratio(30.0, 1.0, 30, 100.0, &s.p) == MB_OK);
    TableGuard t;
    REQUIRE(mb_transmission_sweep(s.p, "c", 1.0, 35.0, 35, 200.0, MB_METHOD_PRODUCT, &t.p) ==
            MB_OK);
    CHECK(mb_table_n_rows(t.p) == 35);
    const int cx = column_index(t.p, "c");
    REQUIRE(cx >= 0);
    CHECK(cell(t.p, 0, static_cast<size_t>(cx)) == doctest::Approx(1.0));
    CHECK(cell(t.p, 34, static_cast<size_t>(cx)) == doctest::Approx(35.0));

    TableGuard bad;
    CHECK(mb_transmission_sweep(s.p, "frequency", 1.0, 2.0, 4, 1.0, MB_METHOD_PRODUCT, &bad.p) ==
          MB_ERR_INVALID);
    CHECK(bad.p == nullptr);
    TableGuard two;
    CHECK(mb_transmission_sweep(s.p, "energy", 1.0, 2.0, 1, 0.0, MB_METHOD_PRODUCT, &two.p) ==
          MB_ERR_INVALID);
}

TEST_CASE("limit grid covers the requested rectangle") {
    TableGuard t;
    REQUIRE(mb_transmission_grid(70.0, 60.0, 61.0, 120.0, 5, 0.01, 5.0, 4, &t.p) == MB_OK);
    CHECK(mb_table_n_rows(t.p) == 20);
    CHECK(mb_table_n_cols(t.p) == 3);
    const int ec = column_index(t.p, "energy");
    const int cc = column_index(t.p, "c");
    const int tc = column_index(t.p, "transmission");
    REQUIRE(ec >= 0);
    REQUIRE(cc >= 0);
    REQUIRE(tc >= 0);
    for (size_t r = 0; r < 20; ++r) {
        const double tv = cell(t.p, r, static_cast<size_t>(tc));
        CHECK(tv > 0.0);
        CHECK(tv <= 1.0 + 1e-12);
    }
    CHECK(cell(t.p, 0, static_cast<size_t>(ec)) == doctest::Approx(61.0));
    CHECK(cell(t.p, 19, static_cast<size_t>(ec)) == doctest::Approx(120.0));
    CHECK(cell(t.p, 19, static_cast<size_t>(cc)) == doctest::Approx(5.0));
}

TEST_CASE("cross-section table and peak list round-trip") {
    SpecGuard inf;
    REQUIRE(mb_spec_create(MB_INFINITE_BARRIERS, 40.0, 30.0, 70.0, &inf.p) == MB_OK);
    TableGuard t;
    REQUIRE(mb_cross_section_table(inf.p, 71.0, 120.0, 50, &t.p) == MB_OK);
    CHECK(mb_table_n_rows(t.p) == 50);
    const int sp = column_index(t.p, "sigma_plus");
    const int sm = column_index(t.p, "sigma_minus");
    const int st = column_index(t.p, "sigma_total");
    REQUIRE(sp >= 0);
    REQUIRE(sm >= 0);
    REQUIRE(st >= 0);
    for (size_t r = 0; r < 50; ++r) {
        CHECK(cell(t.p, r, static_cast<size_t>(st)) ==
              doctest::Approx(cell(t.p, r, static_cast<size_t>(sp)) +
                              cell(t.p, r, static_cast<size_t>(sm)))
                  .epsilon(1e-10));
    }

    TableGuard peaks;
    REQUIRE(mb_sigma_peaks(inf.p, 71.0, 400.0, 1, 0.5, &peaks.p) == MB_OK);
    CHECK(meta_lookup(peaks.p, "peak_count") == std::to_string(mb_table_n_rows(peaks.p)));
    CHECK(mb_table_n_rows(peaks.p) >= 15);

    // A finite spec cannot form the scattering matrix; every row comes back
    // flagged instead of failing the whole call.
    SpecGuard fin;
    REQUIRE(mb_spec_create(3, 2.0, 1.0, 5.0, &fin.p) == MB_OK);
    TableGuard reject;
    REQUIRE(mb_cross_section_table(fin.p, 6.0, 9.0, 10, &reject.p) == MB_OK);
    const int okc = column_index(reject.p, "ok");
    REQUIRE(okc >= 0);
    for (size_t r = 0; r < mb_table_n_rows(reject.p); ++r) {
        CHECK(cell(reject.p, r, static_cast<size_t>(okc)) == 0.0);
        CHECK(std::string(mb_table_text(reject.p, r)).find("infinite") != std::string::npos);
    }
}

TEST_CASE("saturation scan through the C surface") {
    std::vector<double> energies;
    for (int i = 0; i < 300; ++i) energies.push_back(71.0 + (1000.0 - 71.0) * i / 299.0);
    double b_star = 0.0;
    int saturated = 0;
    TableGuard curve;
    REQUIRE(mb_saturation_gap(10.0, 70.0, energies.data(), energies.size(), 0.2, 60.0, 1,
                              &b_star, &saturated, &curve.p) == MB_OK);
    CHECK(saturated == 1);
    CHECK(b_star == doctest::Approx(34.0).epsilon(1e-12));
    REQUIRE(curve.p != nullptr);
    CHECK(mb_table_n_rows(curve.p) == 600);
    CHECK(column_index(curve.p, "b") >= 0);
    CHECK(column_index(curve.p, "saturation_metric") >= 0);

    // The curve table is optional.
    REQUIRE(mb_saturation_gap(10.0, 70.0, energies.data(), energies.size(), 0.2, 60.0, 1,
                              &b_star, &saturated, nullptr) == MB_OK);
    CHECK(mb_saturation_gap(10.0, 70.0, nullptr, 5, 0.2, 60.0, 1, &b_star, &saturated,
                            nullptr) == MB_ERR_INVALID);
}

TEST_CASE("spectrum computation fills levels and histogram tables") {
    SpecGuard inf;
    REQUIRE(mb_spec_create(MB_INFINITE_BARRIERS, 1.0, 19.0, 120.0, &inf.p) == MB_OK);
    TableGuard levels;
    TableGuard hist;
    REQUIRE(mb_spectrum_compute(inf.p, 30.0, 1.0, 80.0, MB_REGIME_BOTH, 8, &levels.p,
                                &hist.p) == MB_OK);
    REQUIRE(levels.p != nullptr);
    REQUIRE(hist.p != nullptr);
    CHECK(mb_table_n_rows(levels.p) == 156);
    CHECK(meta_lookup(levels.p, "level_count") == "156");
    const int en = column_index(levels.p, "energy");
    REQUIRE(en >= 0);
    for (size_t r = 1; r < mb_table_n_rows(levels.p); ++r) {
        CHECK(cell(levels.p, r, static_cast<size_t>(en)) >
              cell(levels.p, r - 1, static_cast<size_t>(en)));
    }
    CHECK(!meta_lookup(hist.p, "ks_wigner").empty());
    CHECK(!meta_lookup(hist.p, "ks_poisson").empty());

    // Either output may be omitted, but not both.
    REQUIRE(mb_spectrum_compute(inf.p, 30.0, 1.0, 80.0, MB_REGIME_BOTH, 8, nullptr, nullptr) ==
            MB_ERR_INVALID);
}

TEST_CASE("pole search and exclusion through the C surface") {
    TableGuard t;
    REQUIRE(mb_find_poles(70.0, 1.0, 70.0, 73.5, 120.0, -5.0, 5.0, 120, 21, MB_POLE_OVER,
                          &t.p) == MB_OK);
    CHECK(mb_table_n_rows(t.p) == 134);
    CHECK(column_index(t.p, "e1") >= 0);
    CHECK(column_index(t.p, "e2") >= 0);
    CHECK(column_index(t.p, "residual") >= 0);
    CHECK(meta_lookup(t.p, "seeds") == std::to_string(120 * 21 * 4));
    CHECK(meta_lookup(t.p, "accepted") == "134");

    int confirmed = 0;
    REQUIRE(mb_pole_exclusion(70.0, 1.0, 70.0, MB_POLE_OVER, 1e6, &confirmed) == MB_OK);
    CHECK(confirmed == 1);
}

TEST_CASE("packet lifecycle with barriers, metrics, and snapshots") {
    PacketGuard pk;
    REQUIRE(mb_packet_create(-10.0, 3.0, 0.5, -60.0, 60.0, 841, &pk.p) == MB_OK);
    double t0 = -1.0;
    REQUIRE(mb_packet_time(pk.p, &t0) == MB_OK);
    CHECK(t0 == 0.0);

    SpecGuard spec;
    REQUIRE(mb_spec_from_length_ratio(20.0, 2.333, 4, 2.0, &spec.p) == MB_OK);
    REQUIRE(mb_packet_set_barriers(pk.p, spec.p, -10.0, 10.0) == MB_OK);
    REQUIRE(mb_packet_evolve(pk.p, 0.01, 100, MB_SCHEME_SPLIT_STEP, MB_BOUNDARY_REFLECTING,
                             0.1) == MB_OK);
    REQUIRE(mb_packet_time(pk.p, &t0) == MB_OK);
    CHECK(t0 == doctest::Approx(1.0).epsilon(1e-12));

    double metrics[6] = {0, 0, 0, 0, 0, 0};
    REQUIRE(mb_packet_metrics(pk.p, -10.0, 10.0, metrics) == MB_OK);
    CHECK(metrics[0] == doctest::Approx(1.0).epsilon(1e-9));  // norm
    CHECK(metrics[1] + metrics[2] + metrics[3] == doctest::Approx(metrics[0]).epsilon(1e-10));
    CHECK(metrics[5] > 0.0);

    TableGuard snap;
    REQUIRE(mb_packet_snapshot(pk.p, &snap.p) == MB_OK);
    CHECK(mb_table_n_rows(snap.p) == 841);
    const int xc = column_index(snap.p, "x");
    const int a2 = column_index(snap.p, "abs2");
    REQUIRE(xc >= 0);
    REQUIRE(a2 >= 0);
    double total = 0.0;
    for (size_t r = 0; r < 841; ++r) total += cell(snap.p, r, static_cast<size_t>(a2));
    CHECK(total * (120.0 / 840.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(!meta_lookup(snap.p, "time").empty());

    // Restoring free evolution drops the barriers.
    REQUIRE(mb_packet_set_barriers(pk.p, nullptr, 0.0, 0.0) == MB_OK);
    REQUIRE(mb_packet_evolve(pk.p, 0.01, 10, MB_SCHEME_SPLIT_STEP, MB_BOUNDARY_REFLECTING,
                             0.1) == MB_OK);

    // Stability violations surface as numeric errors.
    const double dx = 120.0 / 840.0;
    CHECK(mb_packet_evolve(pk.p, dx * dx, 5, MB_SCHEME_SPLIT_STEP, MB_BOUNDARY_REFLECTING,
                           0.1) == MB_ERR_NUMERIC);
}

TEST_CASE("table accessors guard their bounds") {
    SpecGuard s;
    REQUIRE(mb_spec_create(2, 2.0, 1.0, 5.0, &s.p) == MB_OK);
    TableGuard t;
    REQUIRE(mb_transmission_sweep(s.p, "energy", 1.0, 4.0, 4, 0.0, MB_METHOD_PRODUCT, &t.p) ==
            MB_OK);
    double out = 0.0;
    CHECK(mb_table_value(t.p, 99, 0, &out) == MB_ERR_INVALID);
    CHECK(mb_table_value(t.p, 0, 99, &out) == MB_ERR_INVALID);
    CHECK(mb_table_value(nullptr, 0, 0, &out) == MB_ERR_INVALID);
    CHECK(mb_table_col_name(t.p, 99) == nullptr);
    CHECK(mb_table_text(t.p, 99) == nullptr);
    CHECK(mb_table_meta_key(t.p, 99) == nullptr);
    CHECK(mb_table_n_rows(nullptr) == 0);
}
