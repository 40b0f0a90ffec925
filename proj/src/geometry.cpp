#include "spreadlab/geometry.hpp"

#include <cmath>
#include <numbers>

#include "spreadlab/error.hpp"

namespace spreadlab {

namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

double wrapped_gap(double a, double b, double side) {
  double delta = std::fabs(a - b);
  if (delta > side) delta = std::fmod(delta, side);
  return std::min(delta, side - delta);
}

}  // namespace

double torus_distance(std::span<const double> a, std::span<const double> b,
                      std::span<const double> side) {
  require_same_dim(a, b);
  if (side.size() != a.size()) {
    throw ValidationError("torus side count does not match dimension");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double gap = wrapped_gap(a[k], b[k], side[k]);
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

double torus_distance(std::span<const double> a, std::span<const double> b, double side) {
  require_same_dim(a, b);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double gap = wrapped_gap(a[k], b[k], side);
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double delta = a[k] - b[k];
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

double haversine_km(LatLon a, LatLon b, double radius_km) {
  auto check = [](LatLon p) {
    if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
      throw ValidationError("coordinate out of range: lat=" + std::to_string(p.lat) +
                            " lon=" + std::to_string(p.lon));
    }
  };
  check(a);
  check(b);
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kRad;
  const double dlon = (b.lon - a.lon) * kRad;
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  double h = s_lat * s_lat + std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * s_lon * s_lon;
  h = std::min(1.0, h);
  return 2.0 * radius_km * std::asin(std::sqrt(h));
}

Metric Metric::torus(std::size_t dim, double side_length) {
  Metric m;
  m.kind = MetricKind::TorusL2;
  m.side.assign(dim, side_length);
  return m;
}

Metric Metric::haversine(double radius) {
  Metric m;
  m.kind = MetricKind::Haversine;
  m.radius_km = radius;
  return m;
}

double Metric::distance(std::span<const double> a, std::span<const double> b) const {
  switch (kind) {
    case MetricKind::TorusL2:
      return torus_distance(a, b, side);
    case MetricKind::Euclidean:
      return euclidean_distance(a, b);
    case MetricKind::Haversine:
      require_same_dim(a, b);
      return haversine_km({a[1], a[0]}, {b[1], b[0]}, radius_km);
  }
  return 0.0;
}

void Metric::validate(std::size_t dim) const {
  if (dim == 0) throw ValidationError("dimension must be at least 1");
  switch (kind) {
    case MetricKind::TorusL2:
      if (side.size() != dim) throw ValidationError("torus side count does not match dimension");
      for (double s : side) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("torus side must be positive");
      }
      break;
    case MetricKind::Haversine:
      if (dim != 2) throw ValidationError("haversine metric needs 2-dimensional (lon, lat) positions");
      if (!(radius_km > 0.0)) throw ValidationError("earth radius must be positive");
      break;
    case MetricKind::Euclidean:
      break;
  }
}

std::string metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::TorusL2:
      return "torus";
    case MetricKind::Euclidean:
      return "euclidean";
    case MetricKind::Haversine:
      return "haversine";
  }
  return "unknown";
}

MetricKind parse_metric_name(const std::string& name) {
  if (name == "torus") return MetricKind::TorusL2;
  if (name == "euclidean") return MetricKind::Euclidean;
  if (name == "haversine") return MetricKind::Haversine;
  throw ValidationError("unknown metric '" + name + "'");
}

}  // namespace spreadlab
