// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/geo.hpp"

#include "toposearch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace toposearch {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double coord(const GeoPoint& p, int axis) noexcept { return axis == 0 ? p.lat_deg : p.lon_deg; }

bool intersects(const GeoBox& a, const GeoBox& b) noexcept {
    return a.lat_min <= b.lat_max && b.lat_min <= a.lat_max && a.lon_min <= b.lon_max && b.lon_min <= a.lon_max;
}

bool encloses(const GeoBox& outer, const GeoBox& inner) noexcept {
    return outer.lat_min <= inner.lat_min && inner.lat_max <= outer.lat_max && outer.lon_min <= inner.lon_min &&
           inner.lon_max <= outer.lon_max;
}

void clamp_box(GeoBox& box) {
    box.lat_min = std::max(box.lat_min, -90.0);
    box.lat_max = std::min(box.lat_max, 90.0);
    if (box.lon_min < -180.0 || box.lon_max > 180.0) {
        box.lon_clamped = true;
        box.lon_min = std::max(box.lon_min, -180.0);
        box.lon_max = std::min(box.lon_max, 180.0);
    }
}

void require_query(const GeoPoint& center, double radius_m) {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) throw InvalidArgument("radius_m must be a positive finite number");
    if (!center.valid()) throw InvalidArgument("query point outside latitude/longitude range");
}

} // namespace

bool GeoPoint::valid() const noexcept {
    return std::isfinite(lat_deg) && std::isfinite(lon_deg) && lat_deg >= -90.0 && lat_deg <= 90.0 &&
           lon_deg >= -180.0 && lon_deg <= 180.0;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double phi1 = a.lat_deg * kDegToRad;
    const double phi2 = b.lat_deg * kDegToRad;
    const double dphi = (b.lat_deg - a.lat_deg) * kDegToRad;
    const double dlambda = (b.lon_deg - a.lon_deg) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

GeoBox bounding_box(const GeoPoint& center, double radius_m) {
    require_query(center, radius_m);
    const double dlat = radius_m / kMetersPerDegree;
    const double cos_phi = std::max(std::cos(center.lat_deg * kDegToRad), 1e-6);
    const double dlon = radius_m / (kMetersPerDegree * cos_phi);
    GeoBox box{center.lat_deg - dlat, center.lat_deg + dlat, center.lon_deg - dlon, center.lon_deg + dlon, false};
    clamp_box(box);
    return box;
}

GeoBox covering_box(const GeoPoint& center, double radius_m) {
    const GeoBox approx = bounding_box(center, radius_m);
    // Pad absorbs floating-point rounding in the trigonometry below.
    constexpr double kPadDeg = 1e-9;
    const double angular = radius_m / kEarthRadiusM;
    GeoBox box;
    if (angular >= std::numbers::pi) {
        box = GeoBox{-90.0, 90.0, -180.0, 180.0, false};
    } else {
        const double dlat = angular * kRadToDeg + kPadDeg;
        box.lat_min = center.lat_deg - dlat;
        box.lat_max = center.lat_deg + dlat;
        if (box.lat_min <= -90.0 || box.lat_max >= 90.0) {
            // A pole lies inside the circle: every meridian is reached.
            box.lon_min = -180.0;
            box.lon_max = 180.0;
        } else {
            const double ratio = std::sin(angular) / std::cos(center.lat_deg * kDegToRad);
            const double dlon = std::asin(std::min(ratio, 1.0)) * kRadToDeg + kPadDeg;
            box.lon_min = center.lon_deg - dlon;
            box.lon_max = center.lon_deg + dlon;
        }
    }
    box.lat_min = std::min(box.lat_min, approx.lat_min);
    box.lat_max = std::max(box.lat_max, approx.lat_max);
    box.lon_min = std::min(box.lon_min, approx.lon_min);
    box.lon_max = std::max(box.lon_max, approx.lon_max);
    clamp_box(box);
    box.lon_clamped = box.lon_clamped || approx.lon_clamped;
    return box;
}

SpatialIndex::SpatialIndex(std::vector<SpatialEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (!e.point.valid()) throw InvalidArgument("document '" + e.doc_id + "' has an invalid point");
    }
    order_.resize(entries_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!entries_.empty()) {
        nodes_.reserve(2 * (entries_.size() / kLeafSize + 1));
        build(0, entries_.size(), 0);
    }
}

std::size_t SpatialIndex::build(std::size_t begin, std::size_t end, int depth) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{});
    GeoBox bounds{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), false};
    for (std::size_t i = begin; i < end; ++i) {
        const auto& p = entries_[order_[i]].point;
        bounds.lat_min = std::min(bounds.lat_min, p.lat_deg);
        bounds.lat_max = std::max(bounds.lat_max, p.lat_deg);
        bounds.lon_min = std::min(bounds.lon_min, p.lon_deg);
        bounds.lon_max = std::max(bounds.lon_max, p.lon_deg);
    }
    nodes_[id].bounds = bounds;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    const int axis = depth % 2;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         return coord(entries_[a].point, axis) < coord(entries_[b].point, axis);
                     });
    const double split = coord(entries_[order_[mid]].point, axis);
    const std::size_t left = build(begin, mid, depth + 1);
    const std::size_t right = build(mid, end, depth + 1);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void SpatialIndex::collect(std::size_t node_id, const GeoBox& box, std::vector<std::size_t>& out) const {
    const Node& node = nodes_[node_id];
    if (!intersects(node.bounds, box)) return;
    if (node.axis < 0 || encloses(box, node.bounds)) {
        const bool all = encloses(box, node.bounds);
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const std::size_t idx = order_[i];
            if (all || box.contains(entries_[idx].point)) out.push_back(idx);
        }
        return;
    }
    collect(node.left, box, out);
    collect(node.right, box, out);
}

std::vector<std::size_t> SpatialIndex::range(const GeoBox& box) const {
    std::vector<std::size_t> out;
    if (!nodes_.empty()) collect(0, box, out);
    return out;
}

RadiusResult SpatialIndex::radius_query(const GeoPoint& center, double radius_m) const {
    require_query(center, radius_m);
    const GeoBox box = covering_box(center, radius_m);
    RadiusResult result;
    if (box.lon_clamped) {
        result.diagnostics.emplace_back(
            "search box crosses the antimeridian; longitudes beyond +-180 were clamped and may be missed");
    }
    for (std::size_t idx : range(box)) {
        const double d = haversine_m(center, entries_[idx].point);
        if (d <= radius_m) result.hits.push_back(SpatialHit{entries_[idx].doc_id, d});
    }
    std::sort(result.hits.begin(), result.hits.end(), [](const SpatialHit& a, const SpatialHit& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        return a.doc_id < b.doc_id;
    });
    return result;
}

} // namespace toposearch
