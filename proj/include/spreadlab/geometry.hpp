#pragma once

#include <span>
#include <string>
#include <vector>

namespace spreadlab {

/// Mean Earth radius (IUGG), kilometres.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Euclidean length of the shortest wrap-around displacement between two
/// points of the torus with the given side lengths (one per axis).
double torus_distance(std::span<const double> a, std::span<const double> b,
                      std::span<const double> side);
/// Same, with a common side length on every axis.
double torus_distance(std::span<const double> a, std::span<const double> b, double side);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Great-circle distance in km. Throws ValidationError for coordinates
/// outside lat in [-90, 90], lon in [-180, 180].
double haversine_km(LatLon a, LatLon b, double radius_km = kEarthRadiusKm);

enum class MetricKind { TorusL2, Euclidean, Haversine };

/// Distance function attached to a graph. Haversine positions are stored as
/// (x, y) = (lon, lat) in degrees.
struct Metric {
  MetricKind kind = MetricKind::Euclidean;
  std::vector<double> side;            // TorusL2: side per axis
  double radius_km = kEarthRadiusKm;   // Haversine

  static Metric torus(std::size_t dim, double side_length);
  static Metric euclidean() { return Metric{}; }
  static Metric haversine(double radius = kEarthRadiusKm);

  double distance(std::span<const double> a, std::span<const double> b) const;
  /// Checks the metric against a dimension (torus side count, haversine d=2).
  void validate(std::size_t dim) const;
};

std::string metric_name(MetricKind kind);
MetricKind parse_metric_name(const std::string& name);

}  // namespace spreadlab
