#include "spreadlab/gowalla.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "spreadlab/error.hpp"
#include "spreadlab/rng.hpp"

namespace spreadlab::gowalla {

namespace {

// Splits on runs of tabs and spaces; returns false if there are not exactly
// `want` fields.
bool split_fields(std::string_view line, std::size_t want, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != '\t' && line[j] != ' ' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out.size() == want;
}

template <typename T>
bool parse_number(std::string_view s, T& v) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void check_malformed(const std::filesystem::path& path, std::uint64_t bad, std::uint64_t rows) {
  if (bad * 100 > rows) {
    throw IoError(path.string() + ": " + std::to_string(bad) + " of " + std::to_string(rows) +
                  " rows malformed (limit 1%)");
  }
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

template <typename Key, typename Hash>
std::vector<Key> modes(const std::vector<Key>& keys, Hash hash) {
  std::unordered_map<Key, std::size_t, Hash> count(keys.size(), hash);
  std::size_t best = 0;
  for (const auto& k : keys) best = std::max(best, ++count[k]);
  std::vector<Key> out;
  for (const auto& [k, c] : count)
    if (c == best) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

struct PairHash {
  std::size_t operator()(const std::pair<long long, long long>& p) const {
    return std::hash<long long>()(p.first) * 1000003u ^ std::hash<long long>()(p.second);
  }
};

struct CoordHash {
  std::size_t operator()(const std::pair<double, double>& p) const {
    return std::hash<double>()(p.first) * 1000003u ^ std::hash<double>()(p.second);
  }
};

}  // namespace

Checkins parse_checkins(const std::filesystem::path& path) {
  auto in = open_input(path);
  Checkins out;
  std::string line;
  std::vector<std::string_view> f;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++out.rows;
    UserId user = 0;
    double lat = 0.0, lon = 0.0;
    if (!split_fields(line, 5, f) || !parse_number(f[0], user) || !parse_number(f[2], lat) ||
        !parse_number(f[3], lon) || !(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
      ++out.malformed;
      continue;
    }
    out.logins[user].push_back({lat, lon});
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  check_malformed(path, out.malformed, out.rows);
  return out;
}

LatLon modal_home_location(std::span<const LatLon> logins, std::uint64_t tie_seed) {
  if (logins.empty()) throw ValidationError("modal_home_location: no logins");
  Rng rng(tie_seed);
  using Box = std::pair<long long, long long>;
  auto box_of = [](const LatLon& p) {
    return Box{std::llround(p.lat * 4.0), std::llround(p.lon * 4.0)};
  };
  std::vector<Box> boxes;
  boxes.reserve(logins.size());
  for (const auto& p : logins) boxes.push_back(box_of(p));
  const auto top_boxes = modes(boxes, PairHash{});
  const Box box = top_boxes.size() == 1 ? top_boxes[0] : top_boxes[rng.below(top_boxes.size())];

  std::vector<std::pair<double, double>> coords;
  for (const auto& p : logins)
    if (box_of(p) == box) coords.emplace_back(p.lat, p.lon);
  const auto top = modes(coords, CoordHash{});
  const auto& c = top.size() == 1 ? top[0] : top[rng.below(top.size())];
  return {c.first, c.second};
}

FriendshipEdges parse_edges(const std::filesystem::path& path) {
  auto in = open_input(path);
  FriendshipEdges out;
  std::string line;
  std::vector<std::string_view> f;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++out.rows;
    UserId a = 0, b = 0;
    if (!split_fields(line, 2, f) || !parse_number(f[0], a) || !parse_number(f[1], b)) {
      ++out.malformed;
      continue;
    }
    out.pairs.emplace_back(a, b);
  }
  if (in.bad()) throw IoError("read error on " + path.string());
  check_malformed(path, out.malformed, out.rows);
  return out;
}

GowallaGraph build_gowalla_graph(const std::filesystem::path& edges_path,
                                 const std::filesystem::path& checkins_path, std::uint64_t tie_seed) {
  const auto checkins = parse_checkins(checkins_path);
  const auto friendships = parse_edges(edges_path);

  GowallaGraph out;
  out.malformed_rows = checkins.malformed + friendships.malformed;
  out.users_with_checkins = checkins.logins.size();
  std::unordered_map<UserId, NodeId> node_of;
  node_of.reserve(checkins.logins.size());
  std::vector<double> coords;
  coords.reserve(2 * checkins.logins.size());
  for (const auto& [user, logins] : checkins.logins) {
    const auto home = modal_home_location(logins, mix_seed(tie_seed, user));
    node_of.emplace(user, static_cast<NodeId>(out.user_of.size()));
    out.user_of.push_back(user);
    coords.push_back(home.lon);
    coords.push_back(home.lat);
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(friendships.pairs.size() / 2);
  for (const auto& [a, b] : friendships.pairs) {
    if (a == b) continue;
    const auto ia = node_of.find(a), ib = node_of.find(b);
    if (ia == node_of.end() || ib == node_of.end()) {
      ++out.dropped_edges;
      continue;
    }
    edges.emplace_back(std::min(ia->second, ib->second), std::max(ia->second, ib->second));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.graph = SpatialGraph(Metric::haversine(), 2, std::move(coords), {}, std::move(edges));
  return out;
}

NodeId find_seed_node(const SpatialGraph& g, double lat, double lon) {
  if (g.num_nodes() == 0) throw ValidationError("find_seed_node: empty graph");
  const double radius = g.metric().kind == MetricKind::Haversine ? g.metric().radius_km : kEarthRadiusKm;
  NodeId best = 0;
  double best_d = INFINITY;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto p = g.position(v);
    const double d = haversine_km({lat, lon}, {p[1], p[0]}, radius);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

void write_idmap(const std::filesystem::path& path, std::span<const UserId> user_of) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "node\tuser\n";
  for (std::size_t v = 0; v < user_of.size(); ++v) out << v << '\t' << user_of[v] << '\n';
  if (!out) throw IoError("write error on " + path.string());
}

}  // namespace spreadlab::gowalla
