#pragma once

#include <cmath>

#include "gsamp/errors.hpp"

namespace gsamp {

/// Geographic coordinate in degrees. Latitude in [-90, 90], longitude in
/// [-180, 180].
struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

inline bool geo_point_valid(const GeoPoint& p) {
    return std::isfinite(p.lat_deg) && std::isfinite(p.lon_deg) &&
           p.lat_deg >= -90.0 && p.lat_deg <= 90.0 &&
           p.lon_deg >= -180.0 && p.lon_deg <= 180.0;
}

/// Great-circle distance in kilometres (haversine formula, spherical Earth of
/// radius 6371 km). Symmetric in its arguments bit-for-bit.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double kDegToRad = M_PI / 180.0;
    const double lat_a = a.lat_deg * kDegToRad;
    const double lat_b = b.lat_deg * kDegToRad;
    const double half_dlat = 0.5 * (b.lat_deg - a.lat_deg) * kDegToRad;
    const double half_dlon = 0.5 * (b.lon_deg - a.lon_deg) * kDegToRad;
    const double s_lat = std::sin(half_dlat);
    const double s_lon = std::sin(half_dlon);
    const double h = s_lat * s_lat + std::cos(lat_a) * std::cos(lat_b) * s_lon * s_lon;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

} // namespace gsamp
