#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "spreadlab/geometry.hpp"
#include "spreadlab/graph.hpp"

namespace spreadlab::gowalla {

using UserId = std::uint64_t;

struct Checkins {
  std::map<UserId, std::vector<LatLon>> logins;
  std::uint64_t rows = 0;       // non-blank lines
  std::uint64_t malformed = 0;  // skipped
};

/// SNAP check-in file: user, timestamp, latitude, longitude, location id,
/// separated by tabs or spaces. Malformed rows (wrong field count, bad
/// numbers, coordinates off the globe) are skipped and counted. Throws
/// IoError if the file cannot be read or more than 1% of rows are malformed.
Checkins parse_checkins(const std::filesystem::path& path);

/// Home location: logins are bucketed by (round(4 lat), round(4 lon)), the
/// most frequent bucket wins, then the most frequent exact coordinate
/// within it. Ties at either stage are broken uniformly at random by an Rng
/// seeded with tie_seed. Throws ValidationError on an empty list.
LatLon modal_home_location(std::span<const LatLon> logins, std::uint64_t tie_seed);

struct FriendshipEdges {
  std::vector<std::pair<UserId, UserId>> pairs;  // as read, both orientations possible
  std::uint64_t rows = 0;
  std::uint64_t malformed = 0;
};

/// SNAP edge list, one "u v" pair per line. Same error policy as
/// parse_checkins.
FriendshipEdges parse_edges(const std::filesystem::path& path);

struct GowallaGraph {
  SpatialGraph graph;             // haversine metric, positions (lon, lat)
  std::vector<UserId> user_of;    // node id -> user id, increasing
  std::uint64_t users_with_checkins = 0;
  std::uint64_t dropped_edges = 0;  // friendships with an unlocated endpoint
  std::uint64_t malformed_rows = 0;
};

/// Located users become nodes in increasing user id; each is placed at its
/// modal home location with tie seed mix_seed(tie_seed, user). Friendships
/// are deduplicated, self-pairs dropped, and kept only when both ends are
/// located.
GowallaGraph build_gowalla_graph(const std::filesystem::path& edges_path,
                                 const std::filesystem::path& checkins_path, std::uint64_t tie_seed);

/// Node nearest to (lat, lon) in great-circle distance; ties go to the
/// smaller id. Throws ValidationError on an empty graph.
NodeId find_seed_node(const SpatialGraph& g, double lat, double lon);

/// "node \t user" lines with a header row.
void write_idmap(const std::filesystem::path& path, std::span<const UserId> user_of);

}  // namespace spreadlab::gowalla
