// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/error.hpp"
#include "toposearch/geo.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace toposearch;

namespace {

constexpr double kPi = std::numbers::pi;

// Great-circle distance through unit vectors: atan2(|a x b|, a . b).
double vector_oracle_m(const GeoPoint& p, const GeoPoint& q) {
    auto unit = [](const GeoPoint& g) {
        const double la = g.lat_deg * kPi / 180.0, lo = g.lon_deg * kPi / 180.0;
        return std::array<double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
    };
    const auto a = unit(p), b = unit(q);
    const double cx = a[1] * b[2] - a[2] * b[1];
    const double cy = a[2] * b[0] - a[0] * b[2];
    const double cz = a[0] * b[1] - a[1] * b[0];
    const double d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    return 6371000.0 * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), d);
}

GeoPoint random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> z(-1.0, 1.0);
    std::uniform_real_distribution<double> lon(-180.0, 180.0);
    return {std::asin(z(rng)) * 180.0 / kPi, lon(rng)};
}

std::vector<SpatialEntry> random_entries(std::mt19937_64& rng, std::size_t n) {
    std::vector<SpatialEntry> out;
    std::uniform_real_distribution<double> lat(50.0, 60.0), lon(40.0, 60.0), jitter(-0.05, 0.05);
    for (std::size_t i = 0; i < n; ++i) {
        GeoPoint p{lat(rng), lon(rng)};
        // Every tenth point duplicates an earlier one to exercise distance ties.
        if (i % 10 == 9) p = out[i / 2].point;
        else if (i % 7 == 3 && i > 0) p = {out[i - 1].point.lat_deg + jitter(rng), out[i - 1].point.lon_deg + jitter(rng)};
        out.push_back({"d" + std::to_string(i), p});
    }
    return out;
}

std::vector<SpatialHit> brute_force(const std::vector<SpatialEntry>& entries, const GeoPoint& c, double r) {
    std::vector<SpatialHit> out;
    for (const auto& e : entries) {
        const double d = haversine_m(c, e.point);
        if (d <= r) out.push_back({e.doc_id, d});
    }
    std::sort(out.begin(), out.end(), [](const SpatialHit& a, const SpatialHit& b) {
        return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.doc_id < b.doc_id;
    });
    return out;
}

} // namespace

TEST(Haversine, IdentityIsZero) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_point(rng);
        EXPECT_EQ(haversine_m(p, p), 0.0);
    }
}

TEST(Haversine, AntipodalEquator) {
    EXPECT_NEAR(haversine_m({0.0, 0.0}, {0.0, 180.0}), 20015086.8, 1.0);
    EXPECT_NEAR(haversine_m({0.0, -90.0}, {0.0, 90.0}), kPi * 6371000.0, 1e-6);
}

TEST(Haversine, SymmetricOnRandomPairs) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_point(rng), b = random_point(rng);
        EXPECT_NEAR(haversine_m(a, b), haversine_m(b, a), 1e-6);
    }
}

TEST(Haversine, AgreesWithVectorOracle) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_point(rng), b = random_point(rng);
        EXPECT_NEAR(haversine_m(a, b), vector_oracle_m(a, b), 0.5);
    }
    // Short baselines, where the two formulas are most sensitive.
    std::uniform_real_distribution<double> tiny(-1e-4, 1e-4);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_point(rng);
        const GeoPoint b{std::clamp(a.lat_deg + tiny(rng), -90.0, 90.0), a.lon_deg + tiny(rng)};
        EXPECT_NEAR(haversine_m(a, b), vector_oracle_m(a, b), 0.5);
    }
}

TEST(Haversine, OneDegreeOfLatitude) {
    EXPECT_NEAR(haversine_m({55.0, 49.0}, {56.0, 49.0}), 6371000.0 * kPi / 180.0, 1e-6);
}

TEST(BoundingBox, DeltasForOneDegreeRadius) {
    const auto eq = bounding_box({0.0, 10.0}, 111320.0);
    EXPECT_NEAR(eq.lat_max - 0.0, 1.0, 1e-12);
    EXPECT_NEAR(0.0 - eq.lat_min, 1.0, 1e-12);
    EXPECT_NEAR(eq.lon_max - 10.0, 1.0, 1e-12);
    EXPECT_NEAR(10.0 - eq.lon_min, 1.0, 1e-12);

    const auto sixty = bounding_box({60.0, 10.0}, 111320.0);
    EXPECT_NEAR(sixty.lat_max - 60.0, 1.0, 1e-12);
    EXPECT_NEAR(sixty.lon_max - 10.0, 2.0, 1e-9);
    EXPECT_NEAR(10.0 - sixty.lon_min, 2.0, 1e-9);
}

TEST(BoundingBox, RejectsNonPositiveRadius) {
    EXPECT_THROW(bounding_box({0.0, 0.0}, 0.0), InvalidArgument);
    EXPECT_THROW(bounding_box({0.0, 0.0}, -5.0), InvalidArgument);
    EXPECT_THROW(covering_box({0.0, 0.0}, 0.0), InvalidArgument);
}

TEST(BoundingBox, ClampsAtAntimeridian) {
    const auto box = bounding_box({0.0, 179.9}, 50000.0);
    EXPECT_EQ(box.lon_max, 180.0);
    EXPECT_TRUE(box.lon_clamped);
}

// The metres-per-degree box is drawn for a slightly larger sphere than the
// haversine radius, so it misses points near the edge of the true circle.
TEST(BoundingBox, MetresPerDegreeBoxMissesCircleEdge) {
    const GeoPoint c{55.0, 49.0};
    const double r = 50000.0;
    const double dlat = 0.9995 * r / 6371000.0 * 180.0 / kPi;
    const GeoPoint north{c.lat_deg + dlat, c.lon_deg};
    ASSERT_LE(haversine_m(c, north), r);
    EXPECT_FALSE(bounding_box(c, r).contains(north));
    EXPECT_TRUE(covering_box(c, r).contains(north));

    SpatialIndex index({{"north", north}});
    const auto res = index.radius_query(c, r);
    ASSERT_EQ(res.hits.size(), 1u);
    EXPECT_EQ(res.hits[0].doc_id, "north");
}

TEST(BoundingBox, CoveringBoxContainsEveryPointInCircle) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const auto c = random_point(rng);
        const double r = 1000.0 + u(rng) * 400000.0;
        const auto box = covering_box(c, r);
        for (int j = 0; j < 50; ++j) {
            // Destination point at a random bearing and distance <= r.
            const double d = r * std::sqrt(u(rng)) / 6371000.0, brg = 2 * kPi * u(rng);
            const double la = c.lat_deg * kPi / 180.0, lo = c.lon_deg * kPi / 180.0;
            const double la2 = std::asin(std::sin(la) * std::cos(d) + std::cos(la) * std::sin(d) * std::cos(brg));
            double lo2 = lo + std::atan2(std::sin(brg) * std::sin(d) * std::cos(la), std::cos(d) - std::sin(la) * std::sin(la2));
            lo2 = std::remainder(lo2, 2 * kPi);
            const GeoPoint p{la2 * 180.0 / kPi, lo2 * 180.0 / kPi};
            if (haversine_m(c, p) > r) continue;
            if (box.lon_clamped && (p.lon_deg < box.lon_min || p.lon_deg > box.lon_max)) continue; // wrapped side
            EXPECT_TRUE(box.contains(p)) << c.lat_deg << "," << c.lon_deg << " r=" << r;
        }
    }
}

TEST(BoundingBox, PoleInsideCircleOpensLongitude) {
    const auto box = covering_box({89.9, 10.0}, 50000.0);
    EXPECT_EQ(box.lat_max, 90.0);
    EXPECT_EQ(box.lon_min, -180.0);
    EXPECT_EQ(box.lon_max, 180.0);
}

TEST(SpatialIndex, RadiusQueryMatchesBruteForce) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> size(1, 5000);
    std::uniform_real_distribution<double> radius(500.0, 150000.0);
    for (int corpus = 0; corpus < 20; ++corpus) {
        const auto entries = random_entries(rng, size(rng));
        const SpatialIndex index(entries);
        std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
        for (int q = 0; q < 20; ++q) {
            GeoPoint c = entries[pick(rng)].point;
            if (q % 2 == 1) c = {c.lat_deg + 0.3, c.lon_deg - 0.2};
            const double r = radius(rng);
            const auto got = index.radius_query(c, r).hits;
            const auto want = brute_force(entries, c, r);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                EXPECT_EQ(got[i].doc_id, want[i].doc_id);
                EXPECT_EQ(got[i].distance_m, want[i].distance_m);
            }
        }
    }
}

TEST(SpatialIndex, RangeMatchesLinearScan) {
    std::mt19937_64 rng(6);
    const auto entries = random_entries(rng, 3000);
    const SpatialIndex index(entries);
    std::uniform_real_distribution<double> lat(49.0, 61.0), lon(39.0, 61.0), span(0.01, 4.0);
    for (int q = 0; q < 100; ++q) {
        GeoBox box;
        box.lat_min = lat(rng);
        box.lat_max = box.lat_min + span(rng);
        box.lon_min = lon(rng);
        box.lon_max = box.lon_min + span(rng);
        auto got = index.range(box);
        std::sort(got.begin(), got.end());
        std::vector<std::size_t> want;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (box.contains(entries[i].point)) want.push_back(i);
        }
        EXPECT_EQ(got, want);
    }
}

TEST(SpatialIndex, EmptyIndexAndBadRadius) {
    const SpatialIndex empty({});
    EXPECT_TRUE(empty.radius_query({55.0, 49.0}, 1000.0).hits.empty());
    const SpatialIndex one({{"a", {55.0, 49.0}}});
    EXPECT_THROW(one.radius_query({55.0, 49.0}, 0.0), InvalidArgument);
}

TEST(SpatialIndex, ContainmentAndSortedDistances) {
    std::mt19937_64 rng(7);
    const auto entries = random_entries(rng, 2000);
    const SpatialIndex index(entries);
    const auto res = index.radius_query({55.0, 50.0}, 80000.0);
    ASSERT_FALSE(res.hits.empty());
    for (std::size_t i = 0; i < res.hits.size(); ++i) {
        EXPECT_LE(res.hits[i].distance_m, 80000.0);
        if (i > 0) EXPECT_LE(res.hits[i - 1].distance_m, res.hits[i].distance_m);
    }
}

TEST(SpatialIndex, AntimeridianDiagnostic) {
    const SpatialIndex index({{"east", {0.0, 179.95}}, {"west", {0.0, -179.95}}});
    const auto res = index.radius_query({0.0, 179.99}, 50000.0);
    EXPECT_FALSE(res.diagnostics.empty());
    ASSERT_EQ(res.hits.size(), 1u);
    EXPECT_EQ(res.hits[0].doc_id, "east");
}
