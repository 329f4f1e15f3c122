// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace toposearch {

/// Latitude/longitude in decimal degrees.
struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    bool valid() const noexcept;
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline constexpr double kEarthRadiusM = 6'371'000.0;
/// Meters per degree used by the rectangular pre-filter.
inline constexpr double kMetersPerDegree = 111'320.0;

/// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept;

struct GeoBox {
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lon_min = 0.0;
    double lon_max = 0.0;
    /// Set when the longitude range was clamped at +-180 (no wraparound handling).
    bool lon_clamped = false;

    bool contains(const GeoPoint& p) const noexcept {
        return p.lat_deg >= lat_min && p.lat_deg <= lat_max && p.lon_deg >= lon_min && p.lon_deg <= lon_max;
    }
};

/// Pre-filter rectangle: dlat = R / 111320, dlon = R / (111320 cos(lat)).
/// Latitude is clamped to [-90, 90]; cos(lat) is clamped below at 1e-6.
/// Throws InvalidArgument when radius_m <= 0.
GeoBox bounding_box(const GeoPoint& center, double radius_m);

/// The smallest latitude/longitude rectangle containing every point within
/// radius_m of center on the kEarthRadiusM sphere. Always encloses
/// bounding_box(center, radius_m); this is the box radius_query prunes with.
GeoBox covering_box(const GeoPoint& center, double radius_m);

struct SpatialEntry {
    std::string doc_id;
    GeoPoint point;
};

struct SpatialHit {
    std::string doc_id;
    double distance_m = 0.0;
};

struct RadiusResult {
    std::vector<SpatialHit> hits;
    std::vector<std::string> diagnostics;
};

/// Immutable 2-d KD-tree over (lat, lon). Splits alternate latitude and
/// longitude at the median; leaves hold up to kLeafSize points.
class SpatialIndex {
public:
    static constexpr std::size_t kLeafSize = 16;

    explicit SpatialIndex(std::vector<SpatialEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }

    /// Indices (into entries()) of every point inside the box.
    std::vector<std::size_t> range(const GeoBox& box) const;

    /// Rectangular range query on the covering box followed by the exact
    /// haversine filter (distance <= radius_m). Sorted by ascending distance,
    /// ties by doc_id. Throws InvalidArgument when radius_m <= 0.
    RadiusResult radius_query(const GeoPoint& center, double radius_m) const;

    const std::vector<SpatialEntry>& entries() const noexcept { return entries_; }

private:
    struct Node {
        // Leaf: [begin, end) into order_. Inner: split axis/value and children.
        std::size_t begin = 0;
        std::size_t end = 0;
        int axis = -1;
        double split = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        GeoBox bounds;
    };

    std::size_t build(std::size_t begin, std::size_t end, int depth);
    void collect(std::size_t node, const GeoBox& box, std::vector<std::size_t>& out) const;

    std::vector<SpatialEntry> entries_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

} // namespace toposearch
